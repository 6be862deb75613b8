#include "mmso/automata.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <limits>
#include <sstream>

namespace mmso::automata {

// ---- characters ---------------------------------------------------------------

Character make_leaf_char(const Character& base, const std::map<int, int>& bits) {
    if (base.find('|') != std::string::npos)
        throw ValueError("character must not contain '|': " + base);
    if (bits.empty()) return base;
    std::ostringstream os;
    os << base << "|";
    bool first = true;
    for (auto [j, b] : bits) {
        if (j <= 0) throw ValueError("variable index must be positive");
        os << (first ? "" : ",") << j << "=" << (b ? 1 : 0);
        first = false;
    }
    return os.str();
}

LeafChar split_leaf_char(const Character& c) {
    LeafChar out;
    size_t bar = c.find('|');
    if (bar == std::string::npos) {
        out.base = c;
        return out;
    }
    out.base = c.substr(0, bar);
    std::string rest = c.substr(bar + 1);
    std::istringstream is(rest);
    std::string item;
    while (std::getline(is, item, ',')) {
        size_t eq = item.find('=');
        if (eq == std::string::npos) throw ValueError("bad leaf character: " + c);
        out.bits[std::stoi(item.substr(0, eq))] = std::stoi(item.substr(eq + 1));
    }
    return out;
}

// ---- SigmaTree ------------------------------------------------------------------

int SigmaTree::leaf_count() const {
    int c = 0;
    for (size_t v = 0; v < nodes.size(); ++v)
        if (is_leaf(static_cast<int>(v))) ++c;
    return c;
}

std::vector<int> SigmaTree::leaves() const {
    std::vector<int> out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (is_leaf(v)) {
            out.push_back(v);
            continue;
        }
        stack.push_back(nodes[v].right);
        stack.push_back(nodes[v].left);
    }
    return out;
}

void SigmaTree::validate() const {
    if (root < 0 || root >= static_cast<int>(nodes.size())) throw ValueError("sigma tree: bad root");
    std::vector<int> seen(nodes.size(), 0);
    std::vector<int> stack{root};
    int count = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v < 0 || v >= static_cast<int>(nodes.size()) || seen[v])
            throw ValueError("sigma tree: malformed links");
        seen[v] = 1;
        ++count;
        const Node& node = nodes[v];
        if ((node.left < 0) != (node.right < 0)) throw ValueError("sigma tree: half-linked vertex");
        if (node.left >= 0) {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    if (count != static_cast<int>(nodes.size())) throw ValueError("sigma tree: orphan vertices");
}

SigmaTree SigmaTree::leaf(Character label) {
    SigmaTree t;
    t.nodes.push_back({std::move(label), -1, -1});
    t.root = 0;
    return t;
}

SigmaTree SigmaTree::join(Character root_label, const SigmaTree& left, const SigmaTree& right) {
    SigmaTree t = left;
    int offset = static_cast<int>(t.nodes.size());
    for (const Node& node : right.nodes) {
        Node shifted = node;
        if (shifted.left >= 0) {
            shifted.left += offset;
            shifted.right += offset;
        }
        t.nodes.push_back(shifted);
    }
    int right_root = right.root + offset;
    t.nodes.push_back({std::move(root_label), left.root, right_root});
    t.root = static_cast<int>(t.nodes.size()) - 1;
    return t;
}

// ---- TreeAutomaton ---------------------------------------------------------------

std::size_t TreeAutomaton::transition_count() const {
    std::size_t total = 0;
    for (const auto& [c, table] : delta2) total += table.size();
    return total;
}

bool TreeAutomaton::deterministic() const {
    for (const auto& [c, img] : delta0)
        if (img.size() != 1) return false;
    for (const auto& [c, table] : delta2)
        for (const auto& [key, img] : table)
            if (img.size() != 1) return false;
    return true;
}

void TreeAutomaton::validate() const {
    auto check_state = [this](State q) {
        if (q < 0 || q >= num_states) throw ValueError("automaton: state out of range");
    };
    for (State q : accepting) check_state(q);
    if (default_state) {
        check_state(*default_state);
        if (default_image != std::set<State>{*default_state})
            throw ValueError("automaton: default image out of sync");
    }
    for (const auto& [c, img] : delta0) {
        LeafChar lc = split_leaf_char(c);
        if (!base_alphabet.count(lc.base)) throw ValueError("automaton: leaf character outside alphabet");
        for (auto [j, b] : lc.bits) {
            if (!index_set.count(j)) throw ValueError("automaton: leaf bit outside index set");
            if (b != 0 && b != 1) throw ValueError("automaton: leaf bit must be 0 or 1");
        }
        if (lc.bits.size() != index_set.size()) throw ValueError("automaton: leaf bits incomplete");
        for (State q : img) check_state(q);
    }
    for (const auto& [c, table] : delta2) {
        if (!base_alphabet.count(c)) throw ValueError("automaton: transition character outside alphabet");
        for (const auto& [key, img] : table) {
            check_state(key.first);
            check_state(key.second);
            for (State q : img) check_state(q);
        }
    }
}

std::vector<Character> TreeAutomaton::leaf_alphabet() const {
    std::vector<Character> out;
    std::vector<int> idx(index_set.begin(), index_set.end());
    int k = static_cast<int>(idx.size());
    for (const Character& base : base_alphabet) {
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            std::map<int, int> bits;
            for (int i = 0; i < k; ++i) bits[idx[i]] = (mask >> i) & 1;
            out.push_back(make_leaf_char(base, bits));
        }
    }
    return out;
}

std::size_t default_state_cap() {
    static const std::size_t cap = [] {
        if (const char* env = std::getenv("MMSO_STATE_CAP")) {
            long long v = std::atoll(env);
            if (v > 0) return static_cast<std::size_t>(v);
        }
        return std::size_t{1} << 20;
    }();
    return cap;
}

namespace {

std::size_t transition_budget(std::size_t state_cap) {
    return std::max<std::size_t>(4 * state_cap, std::size_t{1} << 22);
}

}  // namespace

// ---- run ---------------------------------------------------------------------------

std::vector<std::set<State>> run(const TreeAutomaton& a, const SigmaTree& t) {
    t.validate();
    std::vector<std::set<State>> states(t.nodes.size());
    std::vector<int> order;
    std::vector<int> stack{t.root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        if (!t.is_leaf(v)) {
            stack.push_back(t.nodes[v].left);
            stack.push_back(t.nodes[v].right);
        }
    }
    std::reverse(order.begin(), order.end());
    for (int v : order) {
        const auto& node = t.nodes[v];
        if (t.is_leaf(v)) {
            auto it = a.delta0.find(node.label);
            if (it != a.delta0.end()) states[v] = it->second;
            continue;
        }
        const auto& ls = states[node.left];
        const auto& rs = states[node.right];
        for (State ql : ls)
            for (State qr : rs) {
                const std::set<State>* img = a.image(node.label, ql, qr);
                if (img) states[v].insert(img->begin(), img->end());
            }
    }
    return states;
}

bool accepts(const TreeAutomaton& a, const SigmaTree& t) {
    std::vector<std::set<State>> states = run(a, t);
    for (State q : states[t.root])
        if (a.accepting.count(q)) return true;
    return false;
}

// ---- determinize -------------------------------------------------------------------

namespace {

using StateSet = std::vector<State>;  // sorted

StateSet to_sorted(const std::set<State>& s) { return StateSet(s.begin(), s.end()); }

}  // namespace

TreeAutomaton determinize(const TreeAutomaton& a, std::size_t state_cap) {
    TreeAutomaton out;
    out.base_alphabet = a.base_alphabet;
    out.index_set = a.index_set;

    const std::size_t budget = transition_budget(state_cap);
    std::size_t transitions = 0;
    std::map<StateSet, State> id_of;
    std::vector<StateSet> sets;
    auto intern = [&](const StateSet& s) {
        auto it = id_of.find(s);
        if (it != id_of.end()) return it->second;
        if (sets.size() >= state_cap) throw ResourceError("determinize: state cap exceeded");
        State id = static_cast<State>(sets.size());
        id_of.emplace(s, id);
        sets.push_back(s);
        return id;
    };

    for (const auto& [c, img] : a.delta0) {
        if (img.empty()) continue;
        State id = intern(to_sorted(img));
        out.delta0[c] = {id};
    }

    // Close under pair transitions: each ordered pair is combined exactly
    // once per character, pairing every fresh set against all known sets.
    size_t done = 0;
    while (done < sets.size()) {
        size_t fresh = done++;
        for (size_t other = 0; other <= fresh; ++other) {
            for (int side = 0; side < 2; ++side) {
                if (side == 1 && other == fresh) continue;
                size_t i = side == 0 ? fresh : other;
                size_t j = side == 0 ? other : fresh;
                for (const Character& sigma : a.base_alphabet) {
                    std::set<State> unions;
                    for (State x : sets[i])
                        for (State y : sets[j]) {
                            const std::set<State>* img = a.image(sigma, x, y);
                            if (img) unions.insert(img->begin(), img->end());
                        }
                    if (unions.empty()) continue;
                    if (++transitions > budget)
                        throw ResourceError("determinize: transition budget exceeded");
                    State id = intern(to_sorted(unions));
                    out.delta2[sigma][{static_cast<State>(i), static_cast<State>(j)}] = {id};
                }
            }
        }
    }

    out.num_states = static_cast<int>(sets.size());
    for (size_t i = 0; i < sets.size(); ++i)
        for (State q : sets[i])
            if (a.accepting.count(q)) {
                out.accepting.insert(static_cast<State>(i));
                break;
            }
    if (std::getenv("MMSO_DEBUG"))
        std::fprintf(stderr, "[determinize] in=%d out=%zu d2=%zu chars=%zu\n", a.num_states, sets.size(),
                     out.transition_count(), a.base_alphabet.size());
    return out;
}

TreeAutomaton totalize(const TreeAutomaton& a) {
    TreeAutomaton out = a;
    State sink;
    if (a.default_state) {
        sink = *a.default_state;
    } else {
        sink = out.num_states++;
    }
    for (const Character& c : out.leaf_alphabet()) {
        auto it = out.delta0.find(c);
        if (it == out.delta0.end() || it->second.empty()) out.delta0[c] = {sink};
    }
    for (const Character& sigma : out.base_alphabet) {
        auto& table = out.delta2[sigma];
        for (State x = 0; x < out.num_states; ++x)
            for (State y = 0; y < out.num_states; ++y) {
                auto it = table.find({x, y});
                if (it == table.end() || it->second.empty()) table[{x, y}] = {sink};
            }
    }
    out.default_state.reset();
    out.default_image.clear();
    return out;
}

TreeAutomaton with_default_sink(const TreeAutomaton& a) {
    TreeAutomaton out = a;
    if (out.default_state) return out;
    State sink = out.num_states++;
    out.set_default(sink);
    for (const Character& c : out.leaf_alphabet()) {
        auto it = out.delta0.find(c);
        if (it == out.delta0.end() || it->second.empty()) out.delta0[c] = {sink};
    }
    return out;
}

TreeAutomaton complement(const TreeAutomaton& a) {
    if (!a.deterministic()) throw ValueError("complement: input must be deterministic");
    TreeAutomaton out = with_default_sink(a);
    std::set<State> flipped;
    for (State q = 0; q < out.num_states; ++q)
        if (!out.accepting.count(q)) flipped.insert(q);
    out.accepting = std::move(flipped);
    return out;
}

TreeAutomaton bool_product(BoolOp op, const TreeAutomaton& a_in, const TreeAutomaton& b_in,
                           std::size_t state_cap) {
    if (!a_in.deterministic() || !b_in.deterministic())
        throw ValueError("bool_product: inputs must be deterministic");
    TreeAutomaton a = with_default_sink(a_in);
    TreeAutomaton b = with_default_sink(b_in);
    TreeAutomaton out = product(a, b, state_cap);
    auto pair_id = [&](State x, State y) { return x * b.num_states + y; };
    out.accepting.clear();
    for (State x = 0; x < a.num_states; ++x)
        for (State y = 0; y < b.num_states; ++y) {
            bool fa = a.accepting.count(x) != 0;
            bool fb = b.accepting.count(y) != 0;
            bool acc = op == BoolOp::Or ? (fa || fb) : (fa == fb);
            if (acc) out.accepting.insert(pair_id(x, y));
        }
    return out;
}

TreeAutomaton product(const TreeAutomaton& a, const TreeAutomaton& b, std::size_t state_cap) {
    if (a.base_alphabet != b.base_alphabet) throw ValueError("product: base alphabets differ");
    TreeAutomaton out;
    out.base_alphabet = a.base_alphabet;
    out.index_set = a.index_set;
    out.index_set.insert(b.index_set.begin(), b.index_set.end());

    auto pair_id = [&](State x, State y) { return x * b.num_states + y; };
    std::set<State> reachable;
    std::vector<State> order;
    auto discover = [&](State id) {
        if (reachable.insert(id).second) {
            if (reachable.size() > state_cap) throw ResourceError("product: state cap exceeded");
            order.push_back(id);
        }
    };

    if (a.default_state && b.default_state) {
        out.num_states = a.num_states * b.num_states;
        out.set_default(pair_id(*a.default_state, *b.default_state));
        discover(*out.default_state);
    } else {
        out.num_states = a.num_states * b.num_states;
    }

    for (const Character& c : out.leaf_alphabet()) {
        LeafChar lc = split_leaf_char(c);
        std::map<int, int> bits_a, bits_b;
        for (auto [j, bit] : lc.bits) {
            if (a.index_set.count(j)) bits_a[j] = bit;
            if (b.index_set.count(j)) bits_b[j] = bit;
        }
        auto ia = a.delta0.find(make_leaf_char(lc.base, bits_a));
        auto ib = b.delta0.find(make_leaf_char(lc.base, bits_b));
        if (ia == a.delta0.end() || ib == b.delta0.end()) continue;
        std::set<State> img;
        for (State x : ia->second)
            for (State y : ib->second) {
                State id = pair_id(x, y);
                img.insert(id);
                discover(id);
            }
        if (!img.empty()) out.delta0[c] = std::move(img);
    }

    const std::size_t budget = transition_budget(state_cap);
    std::size_t transitions = 0;
    size_t done = 0;
    while (done < order.size()) {
        size_t fresh = done++;
        for (size_t other = 0; other <= fresh; ++other) {
            for (int side = 0; side < 2; ++side) {
                if (side == 1 && other == fresh) continue;
                State pl = side == 0 ? order[fresh] : order[other];
                State pr = side == 0 ? order[other] : order[fresh];
                State xa = pl / b.num_states, ya = pl % b.num_states;
                State xb = pr / b.num_states, yb = pr % b.num_states;
                for (const Character& sigma : out.base_alphabet) {
                    const std::set<State>* ia = a.image(sigma, xa, xb);
                    const std::set<State>* ib = b.image(sigma, ya, yb);
                    if (!ia || !ib) continue;
                    std::set<State> img;
                    for (State x : *ia)
                        for (State y : *ib) {
                            State id = pair_id(x, y);
                            img.insert(id);
                            discover(id);
                        }
                    if (img.empty()) continue;
                    if (out.default_state && img == out.default_image) continue;  // implied
                    if (++transitions > budget)
                        throw ResourceError("product: transition budget exceeded");
                    out.delta2[sigma][{pl, pr}] = std::move(img);
                }
            }
        }
    }

    for (State x : a.accepting)
        for (State y : b.accepting) out.accepting.insert(pair_id(x, y));
    if (std::getenv("MMSO_DEBUG"))
        std::fprintf(stderr, "[product] %dx%d reach=%zu d2=%zu\n", a.num_states, b.num_states,
                     reachable.size(), out.transition_count());
    return prune(out);
}

TreeAutomaton project(const TreeAutomaton& a, int j) {
    if (!a.index_set.count(j)) throw ValueError("project: index not in the automaton's index set");
    TreeAutomaton out = a;
    out.index_set.erase(j);
    out.delta0.clear();
    for (const auto& [c, img] : a.delta0) {
        LeafChar lc = split_leaf_char(c);
        lc.bits.erase(j);
        Character stripped = make_leaf_char(lc.base, lc.bits);
        out.delta0[stripped].insert(img.begin(), img.end());
    }
    return out;
}

TreeAutomaton prune(const TreeAutomaton& a) {
    // The implicit default makes every pair defined; pruning cannot remove it
    // or anything it absorbs, so leave such automata unchanged.
    if (a.default_state) return a;

    std::set<State> reach;
    for (const auto& [c, img] : a.delta0) reach.insert(img.begin(), img.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [c, table] : a.delta2)
            for (const auto& [key, img] : table) {
                if (!reach.count(key.first) || !reach.count(key.second)) continue;
                for (State q : img)
                    if (reach.insert(q).second) changed = true;
            }
    }
    std::set<State> useful;
    for (State q : a.accepting)
        if (reach.count(q)) useful.insert(q);
    changed = true;
    while (changed) {
        changed = false;
        for (const auto& [c, table] : a.delta2)
            for (const auto& [key, img] : table) {
                if (!reach.count(key.first) || !reach.count(key.second)) continue;
                bool hits = false;
                for (State q : img)
                    if (useful.count(q)) {
                        hits = true;
                        break;
                    }
                if (!hits) continue;
                if (useful.insert(key.first).second) changed = true;
                if (useful.insert(key.second).second) changed = true;
            }
    }

    std::map<State, State> remap;
    for (State q : useful) {
        State id = static_cast<State>(remap.size());
        remap.emplace(q, id);
    }
    TreeAutomaton out;
    out.base_alphabet = a.base_alphabet;
    out.index_set = a.index_set;
    out.num_states = static_cast<int>(remap.size());
    for (State q : a.accepting)
        if (remap.count(q)) out.accepting.insert(remap.at(q));
    for (const auto& [c, img] : a.delta0) {
        std::set<State> kept;
        for (State q : img)
            if (remap.count(q)) kept.insert(remap.at(q));
        if (!kept.empty()) out.delta0[c] = std::move(kept);
    }
    for (const auto& [c, table] : a.delta2) {
        for (const auto& [key, img] : table) {
            if (!remap.count(key.first) || !remap.count(key.second)) continue;
            std::set<State> kept;
            for (State q : img)
                if (remap.count(q)) kept.insert(remap.at(q));
            if (!kept.empty()) out.delta2[c][{remap.at(key.first), remap.at(key.second)}] = std::move(kept);
        }
    }
    return out;
}

// ---- encode -----------------------------------------------------------------------

SigmaTree encode(const SigmaTree& t, const std::vector<int>& element_of_node,
                 const std::map<int, Subset>& family) {
    if (family.empty()) return t;
    SigmaTree out = t;
    for (size_t v = 0; v < out.nodes.size(); ++v) {
        if (!out.is_leaf(static_cast<int>(v))) continue;
        int elem = element_of_node[v];
        if (elem < 0) throw ValueError("encode: leaf without an element");
        std::map<int, int> bits;
        for (const auto& [j, set] : family) bits[j] = contains(set, elem) ? 1 : 0;
        out.nodes[v].label = make_leaf_char(out.nodes[v].label, bits);
    }
    return out;
}

// ---- emptiness / witnesses -----------------------------------------------------------

std::optional<SigmaTree> reachable_avoiding(const TreeAutomaton& a, const std::set<State>& z, State q) {
    if (z.count(q)) throw ValueError("reachable_avoiding: target state is excluded");
    auto hits_z = [&z](const std::set<State>& s) {
        for (State x : s)
            if (z.count(x)) return true;
        return false;
    };
    // Least fixpoint over full run sets (= determinized states) that avoid Z,
    // in breadth order so the first witness has least depth.
    struct Rule {
        Character label;
        int left = -1, right = -1;
    };
    std::map<StateSet, int> discovered;
    std::vector<StateSet> sets;
    std::vector<Rule> rules;

    auto add = [&](const std::set<State>& s, Character label, int li, int ri) -> int {
        if (s.empty() || hits_z(s)) return -1;
        StateSet key = to_sorted(s);
        if (discovered.count(key)) return -2;
        int idx = static_cast<int>(sets.size());
        discovered.emplace(key, idx);
        sets.push_back(std::move(key));
        rules.push_back({std::move(label), li, ri});
        return idx;
    };
    std::function<SigmaTree(int)> rebuild = [&](int idx) {
        const Rule& rule = rules[idx];
        if (rule.left < 0) return SigmaTree::leaf(rule.label);
        return SigmaTree::join(rule.label, rebuild(rule.left), rebuild(rule.right));
    };
    auto found = [&](int idx) {
        return idx >= 0 && std::binary_search(sets[idx].begin(), sets[idx].end(), q);
    };

    for (const auto& [c, img] : a.delta0) {
        int idx = add(img, c, -1, -1);
        if (found(idx)) return rebuild(idx);
    }
    size_t frontier_start = 0;
    while (frontier_start < sets.size()) {
        size_t frontier_end = sets.size();
        for (size_t i = 0; i < frontier_end; ++i)
            for (size_t jdx = 0; jdx < frontier_end; ++jdx) {
                if (i < frontier_start && jdx < frontier_start) continue;
                for (const Character& sigma : a.base_alphabet) {
                    std::set<State> unions;
                    for (State x : sets[i])
                        for (State y : sets[jdx]) {
                            const std::set<State>* img = a.image(sigma, x, y);
                            if (img) unions.insert(img->begin(), img->end());
                        }
                    int idx = add(unions, sigma, static_cast<int>(i), static_cast<int>(jdx));
                    if (found(idx)) return rebuild(idx);
                }
            }
        if (frontier_end == sets.size()) break;
        frontier_start = frontier_end;
    }
    return std::nullopt;
}

std::optional<SigmaTree> emptiness_witness(const TreeAutomaton& a) {
    // Single-state reachability in breadth rounds; the first witness per
    // state has minimal height.
    struct How {
        Character label;
        State left = -1, right = -1;
        bool leaf = true;
        int round = 0;
    };
    std::map<State, How> how;
    std::vector<State> order;
    for (const auto& [c, img] : a.delta0)
        for (State q : img)
            if (!how.count(q)) {
                how[q] = {c, -1, -1, true, 1};
                order.push_back(q);
            }
    int round = 1;
    size_t done_rounds_end = order.size();
    size_t processed = 0;
    (void)processed;
    // frontier rounds: combine states known so far
    size_t prev_end = 0;
    while (prev_end < order.size()) {
        size_t cur_end = order.size();
        ++round;
        std::map<State, How> fresh;
        for (size_t i = 0; i < cur_end; ++i)
            for (size_t j = 0; j < cur_end; ++j) {
                if (i < prev_end && j < prev_end) continue;
                for (const Character& sigma : a.base_alphabet) {
                    const std::set<State>* img = a.image(sigma, order[i], order[j]);
                    if (!img) continue;
                    for (State q : *img)
                        if (!how.count(q) && !fresh.count(q))
                            fresh[q] = {sigma, order[i], order[j], false, round};
                }
            }
        prev_end = cur_end;
        for (auto& [q, h] : fresh) {
            how.emplace(q, h);
            order.push_back(q);
        }
    }
    (void)done_rounds_end;

    State target = -1;
    for (State q : a.accepting) {
        if (!how.count(q)) continue;
        if (target < 0 || how.at(q).round < how.at(target).round) target = q;
    }
    if (target < 0) return std::nullopt;
    std::function<SigmaTree(State)> rebuild = [&](State q) {
        const How& h = how.at(q);
        if (h.leaf) return SigmaTree::leaf(h.label);
        return SigmaTree::join(h.label, rebuild(h.left), rebuild(h.right));
    };
    return rebuild(target);
}

// ---- pipeline -----------------------------------------------------------------------

// Virtual states are 64-bit mixed-radix encodings over the conjoined factors.
using PState = long long;

struct Pipeline::Node {
    enum Type { Wrap, Conjoin, Project } type = Wrap;
    TreeAutomaton automaton;                 // Wrap
    std::shared_ptr<Node> left, right;       // Conjoin; Project uses left
    int drop_index = 0;                      // Project
    std::set<Character> alphabet;
    std::set<int> indices;
    PState states = 0;
    std::vector<bool> wrap_useful;  // Wrap: states that can reach acceptance

    // per-character transition table pointers for Wrap nodes
    std::map<Character, const TreeAutomaton::PairMap*> tables;
    mutable std::map<std::tuple<const Character*, PState, PState>, std::vector<PState>> memo;

    bool accepting(PState q) const {
        switch (type) {
            case Wrap:
                return automaton.accepting.count(static_cast<State>(q)) != 0;
            case Conjoin:
                return left->accepting(q / right->states) && right->accepting(q % right->states);
            case Project:
                return left->accepting(q);
        }
        return false;
    }

    // Component-wise co-accessibility; dropping states that fail it from run
    // sets cannot change acceptance.
    bool useful(PState q) const {
        switch (type) {
            case Wrap:
                return wrap_useful.empty() || wrap_useful[static_cast<size_t>(q)];
            case Conjoin:
                return left->useful(q / right->states) && right->useful(q % right->states);
            case Project:
                return left->useful(q);
        }
        return true;
    }

    // Append the image of (c, l, r) to out.
    void image(const Character& c, PState l, PState r, std::vector<PState>& out) const {
        if (type == Wrap) {
            auto it = tables.find(c);
            if (it != tables.end()) {
                auto jt = it->second->find({static_cast<State>(l), static_cast<State>(r)});
                if (jt != it->second->end()) {
                    for (State q : jt->second) out.push_back(q);
                    return;
                }
            }
            if (automaton.default_state) out.push_back(*automaton.default_state);
            return;
        }
        if (type == Project) {
            left->image(c, l, r, out);
            return;
        }
        // memo keyed by the interned character from this node's alphabet
        const Character* interned = &*alphabet.find(c);
        auto mk = std::make_tuple(interned, l, r);
        auto hit = memo.find(mk);
        if (hit != memo.end()) {
            out.insert(out.end(), hit->second.begin(), hit->second.end());
            return;
        }
        PState nb = right->states;
        std::vector<PState> la, lb;
        left->image(c, l / nb, r / nb, la);
        std::vector<PState> result;
        if (!la.empty()) {
            right->image(c, l % nb, r % nb, lb);
            for (PState x : la)
                for (PState y : lb) result.push_back(x * nb + y);
            std::sort(result.begin(), result.end());
            result.erase(std::unique(result.begin(), result.end()), result.end());
        }
        out.insert(out.end(), result.begin(), result.end());
        memo.emplace(mk, std::move(result));
    }

    // Full leaf map over the node's index set.
    std::map<Character, std::vector<PState>> delta0() const {
        std::map<Character, std::vector<PState>> out;
        switch (type) {
            case Wrap: {
                for (const auto& [c, img] : automaton.delta0) {
                    std::vector<PState> v(img.begin(), img.end());
                    out[c] = std::move(v);
                }
                return out;
            }
            case Project: {
                for (auto& [c, img] : left->delta0()) {
                    LeafChar lc = split_leaf_char(c);
                    lc.bits.erase(drop_index);
                    Character stripped = make_leaf_char(lc.base, lc.bits);
                    auto& slot = out[stripped];
                    slot.insert(slot.end(), img.begin(), img.end());
                }
                for (auto& [c, img] : out) {
                    std::sort(img.begin(), img.end());
                    img.erase(std::unique(img.begin(), img.end()), img.end());
                }
                return out;
            }
            case Conjoin: {
                auto da = left->delta0();
                auto db = right->delta0();
                PState nb = right->states;
                std::vector<int> idx(indices.begin(), indices.end());
                int k = static_cast<int>(idx.size());
                for (const Character& base : alphabet) {
                    for (unsigned mask = 0; mask < (1u << k); ++mask) {
                        std::map<int, int> bits, bits_a, bits_b;
                        for (int i = 0; i < k; ++i) bits[idx[i]] = (mask >> i) & 1;
                        for (auto [j, bit] : bits) {
                            if (left->indices.count(j)) bits_a[j] = bit;
                            if (right->indices.count(j)) bits_b[j] = bit;
                        }
                        auto ia = da.find(make_leaf_char(base, bits_a));
                        auto ib = db.find(make_leaf_char(base, bits_b));
                        if (ia == da.end() || ib == db.end()) continue;
                        std::vector<PState> v;
                        for (PState x : ia->second)
                            for (PState y : ib->second) v.push_back(x * nb + y);
                        std::sort(v.begin(), v.end());
                        v.erase(std::unique(v.begin(), v.end()), v.end());
                        if (!v.empty()) out[make_leaf_char(base, bits)] = std::move(v);
                    }
                }
                return out;
            }
        }
        return out;
    }
};

Pipeline Pipeline::wrap(TreeAutomaton a) {
    Pipeline p;
    p.node_ = std::make_shared<Node>();
    p.node_->type = Node::Wrap;
    p.node_->alphabet = a.base_alphabet;
    p.node_->indices = a.index_set;
    p.node_->states = a.num_states;
    p.node_->automaton = std::move(a);
    const TreeAutomaton& aut = p.node_->automaton;
    for (const auto& [c, table] : aut.delta2) p.node_->tables[c] = &table;

    // Reachability, including implicit default transitions (a default fires
    // only for pairs of reachable states with no explicit entry).
    int n = aut.num_states;
    std::vector<bool> reach(n, false);
    for (const auto& [c, img] : aut.delta0)
        for (State q : img) reach[q] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Character& sigma : aut.base_alphabet) {
            auto it = aut.delta2.find(sigma);
            const TreeAutomaton::PairMap* table = it == aut.delta2.end() ? nullptr : &it->second;
            for (State l = 0; l < n; ++l) {
                if (!reach[l]) continue;
                for (State r = 0; r < n; ++r) {
                    if (!reach[r]) continue;
                    const std::set<State>* img = nullptr;
                    if (table) {
                        auto jt = table->find({l, r});
                        if (jt != table->end()) img = &jt->second;
                    }
                    if (img) {
                        for (State q : *img)
                            if (!reach[q]) {
                                reach[q] = true;
                                changed = true;
                            }
                    } else if (aut.default_state && !reach[*aut.default_state]) {
                        reach[*aut.default_state] = true;
                        changed = true;
                    }
                }
            }
        }
    }

    // Co-accessibility over reachable siblings; dropping the rest from run
    // sets cannot change acceptance.
    std::vector<bool> useful(n, false);
    for (State q : aut.accepting)
        if (reach[q]) useful[q] = true;
    changed = true;
    while (changed) {
        changed = false;
        for (const Character& sigma : aut.base_alphabet) {
            auto it = aut.delta2.find(sigma);
            const TreeAutomaton::PairMap* table = it == aut.delta2.end() ? nullptr : &it->second;
            for (State l = 0; l < n; ++l) {
                if (!reach[l]) continue;
                for (State r = 0; r < n; ++r) {
                    if (!reach[r]) continue;
                    const std::set<State>* img = nullptr;
                    if (table) {
                        auto jt = table->find({l, r});
                        if (jt != table->end()) img = &jt->second;
                    }
                    bool hits = false;
                    if (img) {
                        for (State q : *img)
                            if (useful[q]) {
                                hits = true;
                                break;
                            }
                    } else if (aut.default_state) {
                        hits = useful[*aut.default_state];
                    }
                    if (!hits) continue;
                    if (!useful[l]) {
                        useful[l] = true;
                        changed = true;
                    }
                    if (!useful[r]) {
                        useful[r] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    p.node_->wrap_useful = std::move(useful);
    return p;
}

Pipeline Pipeline::conjoin(Pipeline a, Pipeline b) {
    if (a.node_->alphabet != b.node_->alphabet) throw ValueError("pipeline: base alphabets differ");
    Pipeline p;
    p.node_ = std::make_shared<Node>();
    p.node_->type = Node::Conjoin;
    p.node_->alphabet = a.node_->alphabet;
    p.node_->indices = a.node_->indices;
    p.node_->indices.insert(b.node_->indices.begin(), b.node_->indices.end());
    if (a.node_->states > 0 && b.node_->states > (std::numeric_limits<PState>::max() / a.node_->states))
        throw ResourceError("pipeline: virtual state space overflow");
    p.node_->states = a.node_->states * b.node_->states;
    p.node_->left = a.node_;
    p.node_->right = b.node_;
    return p;
}

Pipeline Pipeline::project(Pipeline a, int j) {
    if (!a.node_->indices.count(j)) throw ValueError("pipeline: index not present");
    Pipeline p;
    p.node_ = std::make_shared<Node>();
    p.node_->type = Node::Project;
    p.node_->alphabet = a.node_->alphabet;
    p.node_->indices = a.node_->indices;
    p.node_->indices.erase(j);
    p.node_->states = a.node_->states;
    p.node_->drop_index = j;
    p.node_->left = a.node_;
    return p;
}

const std::set<int>& Pipeline::index_set() const { return node_->indices; }
const std::set<Character>& Pipeline::base_alphabet() const { return node_->alphabet; }

const TreeAutomaton* Pipeline::wrapped() const {
    return node_->type == Node::Wrap ? &node_->automaton : nullptr;
}

TreeAutomaton Pipeline::determinize(std::size_t state_cap) const {
    TreeAutomaton out;
    out.base_alphabet = node_->alphabet;
    out.index_set = node_->indices;

    const std::size_t budget = transition_budget(state_cap);
    std::size_t transitions = 0;
    std::map<std::vector<PState>, State> id_of;
    std::vector<std::vector<PState>> sets;
    auto intern = [&](std::vector<PState> s) {
        auto it = id_of.find(s);
        if (it != id_of.end()) return it->second;
        if (sets.size() >= state_cap) throw ResourceError("determinize: state cap exceeded");
        State id = static_cast<State>(sets.size());
        id_of.emplace(s, id);
        sets.push_back(std::move(s));
        return id;
    };

    auto filter_useful = [&](std::vector<PState>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        v.erase(std::remove_if(v.begin(), v.end(), [&](PState q) { return !node_->useful(q); }),
                v.end());
    };

    for (auto& [c, img] : node_->delta0()) {
        filter_useful(img);
        if (img.empty()) continue;
        State id = intern(img);
        out.delta0[c] = {id};
    }

    size_t done = 0;
    const bool debug = std::getenv("MMSO_DEBUG") != nullptr;
    while (done < sets.size()) {
        size_t fresh = done++;
        if (debug && fresh % 512 == 0)
            std::fprintf(stderr, "[pipeline determinize] ... done=%zu total=%zu trans=%zu\n", fresh,
                         sets.size(), transitions);
        for (size_t other = 0; other <= fresh; ++other) {
            for (int side = 0; side < 2; ++side) {
                if (side == 1 && other == fresh) continue;
                size_t i = side == 0 ? fresh : other;
                size_t j = side == 0 ? other : fresh;
                for (const Character& sigma : node_->alphabet) {
                    std::vector<PState> unions;
                    for (PState x : sets[i])
                        for (PState y : sets[j]) node_->image(sigma, x, y, unions);
                    filter_useful(unions);
                    if (unions.empty()) continue;
                    if (++transitions > budget)
                        throw ResourceError("determinize: transition budget exceeded");
                    State id = intern(std::move(unions));
                    out.delta2[sigma][{static_cast<State>(i), static_cast<State>(j)}] = {id};
                }
            }
        }
    }

    out.num_states = static_cast<int>(sets.size());
    for (size_t i = 0; i < sets.size(); ++i)
        for (PState q : sets[i])
            if (node_->accepting(q)) {
                out.accepting.insert(static_cast<State>(i));
                break;
            }
    if (std::getenv("MMSO_DEBUG"))
        std::fprintf(stderr, "[pipeline determinize] virtual=%lld out=%zu d2=%zu\n",
                     node_->states, sets.size(), out.transition_count());
    return out;
}

TreeAutomaton Pipeline::materialize(std::size_t state_cap) const {
    switch (node_->type) {
        case Node::Wrap:
            return node_->automaton;
        case Node::Conjoin: {
            Pipeline l, r;
            l.node_ = node_->left;
            r.node_ = node_->right;
            return product(l.materialize(state_cap), r.materialize(state_cap), state_cap);
        }
        case Node::Project: {
            Pipeline l;
            l.node_ = node_->left;
            return prune(automata::project(l.materialize(state_cap), node_->drop_index));
        }
    }
    throw ValueError("pipeline: bad node");
}

// ---- serialization ---------------------------------------------------------------------

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

struct Cursor {
    const std::string& s;
    size_t pos = 0;
    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    std::string read_quoted() {
        skip_ws();
        if (pos >= s.size() || s[pos] != '"') throw ValueError("expected quoted character");
        ++pos;
        std::string out;
        while (pos < s.size() && s[pos] != '"') {
            if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
            out += s[pos++];
        }
        if (pos >= s.size()) throw ValueError("unterminated quoted character");
        ++pos;
        return out;
    }
    int read_int() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '-')) ++pos;
        if (start == pos) throw ValueError("expected integer");
        return std::stoi(s.substr(start, pos - start));
    }
    bool literal(const std::string& lit) {
        skip_ws();
        if (s.compare(pos, lit.size(), lit) == 0) {
            pos += lit.size();
            return true;
        }
        return false;
    }
};

std::string states_braced(const std::set<State>& s) {
    std::string out = "{";
    bool first = true;
    for (State q : s) {
        out += (first ? "" : ",") + std::to_string(q);
        first = false;
    }
    return out + "}";
}

std::set<State> parse_braced(Cursor& cur) {
    std::set<State> out;
    if (!cur.literal("{")) throw ValueError("expected '{'");
    cur.skip_ws();
    if (cur.literal("}")) return out;
    while (true) {
        out.insert(cur.read_int());
        cur.skip_ws();
        if (cur.literal(",")) continue;
        if (cur.literal("}")) break;
        throw ValueError("expected ',' or '}'");
    }
    return out;
}

}  // namespace

std::string to_text(const TreeAutomaton& a) {
    std::ostringstream os;
    os << "automaton v1\n";
    os << "states: " << a.num_states << "\n";
    os << "accepting:";
    for (State q : a.accepting) os << " " << q;
    os << "\n";
    if (a.default_state) os << "default: " << *a.default_state << "\n";
    for (const auto& [c, img] : a.delta0)
        os << "d0: " << quote(c) << " -> " << states_braced(img) << "\n";
    for (const auto& [c, table] : a.delta2)
        for (const auto& [key, img] : table)
            os << "d2: " << quote(c) << " " << key.first << " " << key.second << " -> "
               << states_braced(img) << "\n";
    return os.str();
}

TreeAutomaton automaton_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    bool header = false;
    TreeAutomaton a;
    bool states_seen = false;
    while (std::getline(is, line)) {
        std::string t = line;
        while (!t.empty() && (t.back() == '\r' || t.back() == '\n')) t.pop_back();
        size_t first = t.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        t = t.substr(first);
        if (t[0] == '#') continue;
        if (!header) {
            if (t != "automaton v1") throw ValueError("automaton file: expected 'automaton v1' header");
            header = true;
            continue;
        }
        if (t.rfind("states:", 0) == 0) {
            a.num_states = std::stoi(t.substr(7));
            states_seen = true;
        } else if (t.rfind("accepting:", 0) == 0) {
            std::istringstream vals(t.substr(10));
            int q;
            while (vals >> q) a.accepting.insert(q);
        } else if (t.rfind("default:", 0) == 0) {
            a.set_default(std::stoi(t.substr(8)));
        } else if (t.rfind("d0:", 0) == 0) {
            std::string rest = t.substr(3);
            Cursor cur{rest};
            std::string c = cur.read_quoted();
            if (!cur.literal("->")) throw ValueError("automaton file: expected '->'");
            a.delta0[c] = parse_braced(cur);
        } else if (t.rfind("d2:", 0) == 0) {
            std::string rest = t.substr(3);
            Cursor cur{rest};
            std::string c = cur.read_quoted();
            int l = cur.read_int();
            int r = cur.read_int();
            if (!cur.literal("->")) throw ValueError("automaton file: expected '->'");
            a.delta2[c][{l, r}] = parse_braced(cur);
        } else {
            throw ValueError("automaton file: unknown line: " + t);
        }
    }
    if (!header || !states_seen) throw ValueError("automaton file: missing header or states line");
    for (const auto& [c, table] : a.delta2) a.base_alphabet.insert(c);
    for (const auto& [c, img] : a.delta0) {
        LeafChar lc = split_leaf_char(c);
        a.base_alphabet.insert(lc.base);
        for (auto [j, b] : lc.bits) a.index_set.insert(j);
    }
    a.validate();
    return a;
}

std::string tree_to_text(const SigmaTree& t) {
    std::function<std::string(int)> rec = [&](int v) -> std::string {
        const SigmaTree::Node& node = t.nodes[v];
        if (t.is_leaf(v)) return quote(node.label);
        return "(" + rec(node.left) + "," + rec(node.right) + "):" + quote(node.label);
    };
    return "tree v1 " + rec(t.root) + "\n";
}

SigmaTree tree_from_text(const std::string& text) {
    std::string body = text;
    size_t mark = body.find("tree v1");
    if (mark == std::string::npos) throw ValueError("tree file: expected 'tree v1' header");
    body = body.substr(mark + 7);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r' || body.back() == ' '))
        body.pop_back();
    Cursor cur{body};
    SigmaTree t;
    std::function<int()> rec = [&]() -> int {
        cur.skip_ws();
        if (cur.literal("(")) {
            int left = rec();
            if (!cur.literal(",")) throw ValueError("tree file: expected ','");
            int right = rec();
            if (!cur.literal(")")) throw ValueError("tree file: expected ')'");
            if (!cur.literal(":")) throw ValueError("tree file: expected ':'");
            std::string label = cur.read_quoted();
            t.nodes.push_back({label, left, right});
            return static_cast<int>(t.nodes.size()) - 1;
        }
        std::string label = cur.read_quoted();
        t.nodes.push_back({label, -1, -1});
        return static_cast<int>(t.nodes.size()) - 1;
    };
    t.root = rec();
    cur.skip_ws();
    if (cur.pos != cur.s.size()) throw ValueError("tree file: trailing input");
    t.validate();
    return t;
}

}  // namespace mmso::automata
