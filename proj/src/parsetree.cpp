#include "mmso/parsetree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mmso::parsetree {

using automata::Character;
using automata::SigmaTree;
using automata::State;
using automata::TreeAutomaton;

// State layout of parse automata: 0 = dep, 1 = indep, k+1 = q_k. The spine
// states of disconnected assemblies come after the q block.
namespace {

constexpr State kDep = 0;
constexpr State kIndep = 1;

std::string state_name(State q) {
    if (q == kDep) return "dep";
    if (q == kIndep) return "indep";
    return "q" + std::to_string(q - 1);
}

State rep_state(int rep_index) { return rep_index + 2; }

Character leaf_char(State f0, State f1) {
    return "leaf(" + state_name(f0) + "," + state_name(f1) + ")";
}

Character node_char(const std::map<std::pair<State, State>, State>& table) {
    std::ostringstream os;
    os << "node(";
    bool first = true;
    for (const auto& [key, out] : table) {
        os << (first ? "" : ";") << state_name(key.first) << "," << state_name(key.second) << ":"
           << state_name(out);
        first = false;
    }
    os << ")";
    return os.str();
}

// Accumulates the fixed machine that reads vertex functions.
struct AutomatonBuilder {
    TreeAutomaton a;
    int max_state = kIndep;

    AutomatonBuilder() { a.index_set = {1}; }

    void see(State q) { max_state = std::max(max_state, q); }

    void add_leaf(const Character& c, State f0, State f1) {
        a.base_alphabet.insert(c);
        see(f0);
        see(f1);
        a.delta0[automata::make_leaf_char(c, {{1, 0}})] = {f0};
        a.delta0[automata::make_leaf_char(c, {{1, 1}})] = {f1};
    }

    void add_node(const Character& c, const std::map<std::pair<State, State>, State>& table) {
        a.base_alphabet.insert(c);
        for (const auto& [key, out] : table) {
            see(key.first);
            see(key.second);
            see(out);
            a.delta2[c][{key.first, key.second}] = {out};
        }
    }

    TreeAutomaton finish() {
        a.num_states = max_state + 1;
        a.accepting = {kIndep};
        return a;
    }
};

// Per-edge representative table; equal oracle labels share a state.
struct RepTable {
    std::vector<Subset> reps;
    std::map<std::string, int> by_label;

    State lookup_or_add(const std::string& label, Subset x, int cap) {
        auto it = by_label.find(label);
        if (it != by_label.end()) return rep_state(it->second);
        if (static_cast<int>(reps.size()) >= cap)
            throw ResourceError("parse tree build: oracle label count exceeds the representative cap");
        int idx = static_cast<int>(reps.size());
        reps.push_back(x);
        by_label.emplace(label, idx);
        return rep_state(idx);
    }
};

}  // namespace

// ---- oracles ------------------------------------------------------------------

EquivOracle make_brute_oracle(const SetSystem& sys) {
    auto cache = std::make_shared<std::map<Subset, equiv::ClassTable>>();
    SetSystem bound = sys;
    EquivOracle oracle;
    oracle.kind = "brute";
    oracle.label = [bound, cache](Subset u, Subset x) {
        auto it = cache->find(u);
        if (it == cache->end()) it = cache->emplace(u, equiv::classes(bound, u, SetSystem::kTableCap)).first;
        return std::to_string(it->second.class_of.at(x));
    };
    return oracle;
}

EquivOracle make_gfq_oracle(const Matroid& m) {
    if (!m.linear_rep()) throw ValueError("gfq oracle: matroid carries no linear representation");
    auto cache = std::make_shared<std::map<Subset, equiv::GfqLabeling>>();
    auto rep = m.linear_rep();
    int n = m.size();
    EquivOracle oracle;
    oracle.kind = "gfq";
    oracle.label = [rep, cache, n](Subset u, Subset x) {
        auto it = cache->find(u);
        if (it == cache->end()) it = cache->emplace(u, equiv::gfq_refinement(*rep, n, u)).first;
        return it->second.label_of.at(x);
    };
    return oracle;
}

OracleFactory brute_oracle_factory() {
    return [](const Matroid& m) { return make_brute_oracle(m.set_system()); };
}

OracleFactory gfq_oracle_factory() {
    return [](const Matroid& m) {
        if (!m.linear_rep())
            throw ValueError("gfq oracle: piece not in supported oracle scope (no linear representation)");
        return make_gfq_oracle(m);
    };
}

// ---- shared helpers ---------------------------------------------------------------

namespace {

struct TreeAccum {
    std::vector<SigmaTree::Node> nodes;
    std::vector<int> element_of_node;

    int add_leaf(Character label, int element) {
        nodes.push_back({std::move(label), -1, -1});
        element_of_node.push_back(element);
        return static_cast<int>(nodes.size()) - 1;
    }

    int add_node(Character label, int left, int right) {
        nodes.push_back({std::move(label), left, right});
        element_of_node.push_back(-1);
        return static_cast<int>(nodes.size()) - 1;
    }

    ParseTree finish(int root, std::vector<std::string> names) {
        ParseTree out;
        out.tree.nodes = std::move(nodes);
        out.tree.root = root;
        out.element_of_node = std::move(element_of_node);
        out.element_names = std::move(names);
        out.tree.validate();
        return out;
    }
};

void self_check(const BuildResult& br, const SetSystem& sys, const BuildOptions& options) {
    if (!options.self_check || sys.size() > options.self_check_cap) return;
    int n = sys.size();
    for (Subset y = 0; y < (Subset{1} << n); ++y) {
        SigmaTree enc = br.ptree.encode({{1, y}});
        if (automata::accepts(br.automaton, enc) != sys.independent(y))
            throw ValueError(
                "parse tree build: oracle-equivalence self-check failed (oracle violates refinement?)");
    }
}

BuildResult single_element_result(const SetSystem& sys) {
    AutomatonBuilder ab;
    TreeAccum acc;
    State f0 = sys.independent(0) ? kIndep : kDep;
    State f1 = sys.independent(1) ? kIndep : kDep;
    Character c = leaf_char(f0, f1);
    ab.add_leaf(c, f0, f1);
    int root = acc.add_leaf(c, 0);
    BuildResult out{acc.finish(root, sys.names()), ab.finish()};
    return out;
}

}  // namespace

// ---- build from a decomposition ------------------------------------------------------

namespace {

struct DecompositionBuilder {
    const SetSystem& sys;
    const branchdec::Decomposition& dec;
    const EquivOracle& oracle;
    const BuildOptions& options;
    bool downward;
    AutomatonBuilder ab;
    TreeAccum acc;

    struct EdgeInfo {
        std::vector<Subset> reps;
        int node = -1;
        int min_element = 0;
        Subset displayed = 0;
    };

    State classify(RepTable& table, Subset u_e, Subset x) {
        if (downward && !sys.independent(x)) return kDep;
        return table.lookup_or_add(oracle.label(u_e, x), x, options.label_cap);
    }

    EdgeInfo build_vertex(int u, int from) {
        if (dec.element_of[u] >= 0) {
            int elem = dec.element_of[u];
            Subset u_e = Subset{1} << elem;
            RepTable table;
            State f0 = classify(table, u_e, 0);
            State f1 = classify(table, u_e, u_e);
            Character c = leaf_char(f0, f1);
            ab.add_leaf(c, f0, f1);
            EdgeInfo info;
            info.reps = table.reps;
            info.node = acc.add_leaf(c, elem);
            info.min_element = elem;
            info.displayed = u_e;
            return info;
        }
        std::vector<int> kids;
        for (int w : dec.adj[u])
            if (w != from) kids.push_back(w);
        EdgeInfo a = build_vertex(kids[0], u);
        EdgeInfo b = build_vertex(kids[1], u);
        if (b.min_element < a.min_element) std::swap(a, b);
        EdgeInfo info;
        info.displayed = a.displayed | b.displayed;
        info.min_element = a.min_element;
        RepTable table;
        std::map<std::pair<State, State>, State> fn;
        if (downward) {
            for (State l : dep_and_reps(a))
                for (State r : dep_and_reps(b)) {
                    if (l == kDep || r == kDep) {
                        fn[{l, r}] = kDep;
                        continue;
                    }
                    Subset x = a.reps[l - 2] | b.reps[r - 2];
                    fn[{l, r}] = classify(table, info.displayed, x);
                }
        } else {
            for (size_t j = 0; j < a.reps.size(); ++j)
                for (size_t k = 0; k < b.reps.size(); ++k) {
                    Subset x = a.reps[j] | b.reps[k];
                    fn[{rep_state(static_cast<int>(j)), rep_state(static_cast<int>(k))}] =
                        classify(table, info.displayed, x);
                }
        }
        Character c = node_char(fn);
        ab.add_node(c, fn);
        info.reps = table.reps;
        info.node = acc.add_node(c, a.node, b.node);
        return info;
    }

    static std::vector<State> dep_and_reps(const EdgeInfo& info) {
        std::vector<State> out{kDep};
        for (size_t i = 0; i < info.reps.size(); ++i) out.push_back(rep_state(static_cast<int>(i)));
        return out;
    }

    int build_root(const EdgeInfo& a_in, const EdgeInfo& b_in) {
        EdgeInfo a = a_in, b = b_in;
        if (b.min_element < a.min_element) std::swap(a, b);
        std::map<std::pair<State, State>, State> fn;
        if (downward) {
            for (State l : dep_and_reps(a))
                for (State r : dep_and_reps(b)) {
                    if (l == kDep || r == kDep) {
                        fn[{l, r}] = kDep;
                        continue;
                    }
                    Subset x = a.reps[l - 2] | b.reps[r - 2];
                    fn[{l, r}] = sys.independent(x) ? kIndep : kDep;
                }
        } else {
            for (size_t j = 0; j < a.reps.size(); ++j)
                for (size_t k = 0; k < b.reps.size(); ++k) {
                    Subset x = a.reps[j] | b.reps[k];
                    fn[{rep_state(static_cast<int>(j)), rep_state(static_cast<int>(k))}] =
                        sys.independent(x) ? kIndep : kDep;
                }
        }
        Character c = node_char(fn);
        ab.add_node(c, fn);
        return acc.add_node(c, a.node, b.node);
    }
};

}  // namespace

BuildResult build(const SetSystem& sys, const branchdec::Decomposition& dec, const EquivOracle& oracle,
                  const BuildOptions& options) {
    int n = sys.size();
    if (n == 0) throw ValueError("parse tree build: empty ground set");
    if (n == 1) {
        BuildResult out = single_element_result(sys);
        self_check(out, sys, options);
        return out;
    }
    dec.validate();
    if (dec.element_count() != n) throw ValueError("parse tree build: decomposition does not match");

    DecompositionBuilder builder{sys, dec, oracle, options, sys.downward_closed(), {}, {}};
    auto edges = dec.edges();
    auto [u, v] = edges.front();  // least edge hosts the root
    auto a = builder.build_vertex(u, v);
    auto b = builder.build_vertex(v, u);
    int root = builder.build_root(a, b);
    BuildResult out{builder.acc.finish(root, sys.names()), builder.ab.finish()};
    self_check(out, sys, options);
    return out;
}

// ---- 2-sum assembly ---------------------------------------------------------------------

namespace {

struct PieceNode {
    Matroid matroid;
    std::map<std::string, int> child_by_basepoint;  // basepoint name -> piece index
};

struct TwoSumBuilder {
    const OracleFactory& oracles;
    const BuildOptions& options;
    std::vector<PieceNode> pieces;
    std::vector<EquivOracle> piece_oracles;
    AutomatonBuilder ab;
    TreeAccum acc;
    const std::vector<std::string>* global_names = nullptr;

    struct EdgeInfo {
        int piece = -1;
        std::vector<Subset> reps;  // subsets of the piece's ground set
        int node = -1;
        int min_element = 0;  // least global element below
    };

    int global_id(const std::string& name) const {
        auto it = std::lower_bound(global_names->begin(), global_names->end(), name);
        return static_cast<int>(it - global_names->begin());
    }

    State classify(const Matroid& m, const EquivOracle& oracle, RepTable& table, Subset u_e, Subset x) {
        if (!m.independent(x)) return kDep;
        return table.lookup_or_add(oracle.label(u_e, x), x, options.label_cap);
    }

    // Rooted walk inside piece x's decomposition; (u, from) is an edge of
    // the piece tree with the parent side at `from`.
    EdgeInfo build_in_piece(int x, const branchdec::Decomposition& dx, int u, int from) {
        const Matroid& m = pieces[x].matroid;
        const EquivOracle& oracle = piece_oracles[x];
        if (dx.element_of[u] >= 0) {
            const std::string& name = m.names()[dx.element_of[u]];
            auto child_it = pieces[x].child_by_basepoint.find(name);
            if (child_it != pieces[x].child_by_basepoint.end())
                return mount_child(x, name, child_it->second);
            // ordinary element leaf
            int elem_local = dx.element_of[u];
            Subset u_e = Subset{1} << elem_local;
            RepTable table;
            State f0 = classify(m, oracle, table, u_e, 0);
            State f1 = classify(m, oracle, table, u_e, u_e);
            Character c = leaf_char(f0, f1);
            ab.add_leaf(c, f0, f1);
            EdgeInfo info;
            info.piece = x;
            info.reps = table.reps;
            info.node = acc.add_leaf(c, global_id(name));
            info.min_element = global_id(name);
            return info;
        }
        std::vector<int> kids;
        for (int w : dx.adj[u])
            if (w != from) kids.push_back(w);
        EdgeInfo a = build_in_piece(x, dx, kids[0], u);
        EdgeInfo b = build_in_piece(x, dx, kids[1], u);
        if (b.min_element < a.min_element) std::swap(a, b);
        Subset u_e = dx.displayed(u, from);
        return combine(x, a, b, u_e, /*basepoint=*/std::nullopt);
    }

    // Internal-vertex function; when `basepoint` is set the outputs collapse
    // to {dep, q1, q2} relative to the basepoint in the parent piece.
    EdgeInfo combine(int x, const EdgeInfo& a, const EdgeInfo& b, Subset u_e,
                     std::optional<std::string> basepoint) {
        const Matroid& m = pieces[x].matroid;
        const EquivOracle& oracle = piece_oracles[x];
        RepTable table;
        std::map<std::pair<State, State>, State> fn;
        std::optional<int> bp_local;
        if (basepoint) bp_local = m.id_of(*basepoint);
        auto left_states = dep_and_reps(a);
        auto right_states = dep_and_reps(b);
        for (State l : left_states)
            for (State r : right_states) {
                if (l == kDep || r == kDep) {
                    fn[{l, r}] = kDep;
                    continue;
                }
                Subset xj = a.reps[l - 2] | b.reps[r - 2];
                if (!m.independent(xj)) {
                    fn[{l, r}] = kDep;
                    continue;
                }
                if (!basepoint) {
                    fn[{l, r}] = classify(m, oracle, table, u_e, xj);
                    continue;
                }
                // basepoint edge: q1 when the union leaves the basepoint
                // unspanned, q2 when it spans it
                Subset with_bp = xj | (Subset{1} << *bp_local);
                fn[{l, r}] = m.independent(with_bp) ? rep_state(0) : rep_state(1);
            }
        Character c = node_char(fn);
        ab.add_node(c, fn);
        EdgeInfo info;
        info.piece = a.piece;
        info.node = acc.add_node(c, a.node, b.node);
        info.min_element = a.min_element;
        info.reps = table.reps;
        return info;
    }

    // The child piece y hangs below the basepoint bp; returns the edge info
    // of the basepoint edge, expressed in the parent piece's ground set.
    EdgeInfo mount_child(int parent, const std::string& bp, int y) {
        const Matroid& my = pieces[y].matroid;
        branchdec::Decomposition dy = branchdec::some_decomposition(my);
        int bp_leaf = dy.leaf_of[my.id_of(bp)];
        EdgeInfo top;
        if (my.size() == 2) {
            // the glue vertex is a leaf of the assembled tree
            int other_vertex = dy.adj[bp_leaf][0];
            const std::string& name = my.names()[dy.element_of[other_vertex]];
            if (pieces[y].child_by_basepoint.count(name))
                throw ValueError("parse tree build: two-element piece between basepoints");
            Subset other = Subset{1} << my.id_of(name);
            Subset bp_set = Subset{1} << my.id_of(bp);
            State f0 = pick_bp_state(my, 0, bp_set);
            State f1 = my.independent(other) ? pick_bp_state(my, other, bp_set) : kDep;
            Character c = leaf_char(f0, f1);
            ab.add_leaf(c, f0, f1);
            top.node = acc.add_leaf(c, global_id(name));
            top.min_element = global_id(name);
        } else {
            int glue = dy.adj[bp_leaf][0];
            std::vector<int> kids;
            for (int w : dy.adj[glue])
                if (w != bp_leaf) kids.push_back(w);
            EdgeInfo a = build_in_piece(y, dy, kids[0], glue);
            EdgeInfo b = build_in_piece(y, dy, kids[1], glue);
            if (b.min_element < a.min_element) std::swap(a, b);
            top = combine(y, a, b, dy.displayed(glue, bp_leaf), bp);
        }
        // reps of the basepoint edge, in the parent piece's ground set
        const Matroid& mx = pieces[parent].matroid;
        EdgeInfo info;
        info.piece = parent;
        info.node = top.node;
        info.min_element = top.min_element;
        info.reps = {0, Subset{1} << mx.id_of(bp)};
        return info;
    }

    State pick_bp_state(const Matroid& my, Subset w, Subset bp_set) {
        // independent W: q1 when W u {bp} stays independent, q2 otherwise
        return my.independent(w | bp_set) ? rep_state(0) : rep_state(1);
    }

    static std::vector<State> dep_and_reps(const EdgeInfo& info) {
        std::vector<State> out{kDep};
        for (size_t i = 0; i < info.reps.size(); ++i) out.push_back(rep_state(static_cast<int>(i)));
        return out;
    }

    int build_root(int root_piece, const EdgeInfo& a_in, const EdgeInfo& b_in) {
        const Matroid& mt = pieces[root_piece].matroid;
        EdgeInfo a = a_in, b = b_in;
        if (b.min_element < a.min_element) std::swap(a, b);
        std::map<std::pair<State, State>, State> fn;
        for (State l : dep_and_reps(a))
            for (State r : dep_and_reps(b)) {
                if (l == kDep || r == kDep) {
                    fn[{l, r}] = kDep;
                    continue;
                }
                Subset x = a.reps[l - 2] | b.reps[r - 2];
                fn[{l, r}] = mt.independent(x) ? kIndep : kDep;
            }
        Character c = node_char(fn);
        ab.add_node(c, fn);
        return acc.add_node(c, a.node, b.node);
    }
};

std::string fresh_basepoint(int counter) { return "~bp" + std::to_string(counter); }

}  // namespace

TwoSumDetail build_via_2sum_detailed(const Matroid& m, const OracleFactory& oracles,
                                     const BuildOptions& options) {
    int n = m.size();
    if (n == 0) throw ValueError("build_via_2sum: empty ground set");
    if (!is_connected(m)) throw ValueError("build_via_2sum: matroid is disconnected");
    if (n == 1) {
        TwoSumDetail detail;
        detail.result = single_element_result(m.set_system());
        detail.pieces.push_back({m, {}});
        return detail;
    }

    // Phase 1: split along 2-separations into 3-connected pieces.
    struct RawPiece {
        Matroid matroid;
    };
    std::vector<RawPiece> raw{{m}};
    std::vector<std::tuple<int, int, std::string>> edges;
    int bp_counter = 1;

    bool progressed = true;
    while (progressed) {
        progressed = false;
        for (size_t i = 0; i < raw.size(); ++i) {
            const Matroid& p = raw[i].matroid;
            std::optional<Subset> sep = find_2separation(p);
            if (!sep) continue;
            Subset u1 = *sep;
            Subset u2 = full_set(p.size()) & ~u1;
            std::string bp = fresh_basepoint(bp_counter++);

            auto extract = [&p](Subset keep_side, Subset other_side, const std::string& bp_name) {
                Subset basis = 0;
                for (int id : subset_ids(keep_side))
                    if (p.independent(basis | (Subset{1} << id))) basis |= Subset{1} << id;
                for (int id : subset_ids(other_side))
                    if (p.independent(basis | (Subset{1} << id))) basis |= Subset{1} << id;
                Subset b_other = basis & other_side;
                Subset outside = other_side & ~p.closure(b_other);
                if (outside == 0)
                    throw ValueError("build_via_2sum: separation side is spanned (matroid disconnected?)");
                int x = std::countr_zero(outside);
                Subset del = other_side & ~(basis | (Subset{1} << x));
                Matroid piece = minor(p, b_other, del);
                return rename_element(piece, p.names()[x], bp_name);
            };
            Matroid m1 = extract(u1, u2, bp);
            Matroid m2 = extract(u2, u1, bp);
            if (!two_sum(m1, m2, bp).oracle_equal(p))
                throw ValueError("build_via_2sum: extracted pieces do not reassemble");

            int j = static_cast<int>(raw.size());
            // redistribute earlier basepoint edges between the two halves
            std::vector<std::string> u2_names = p.set_system().names_of(u2);
            raw[i].matroid = m1;
            raw.push_back({m2});
            for (auto& [a, b, name] : edges) {
                bool mine = a == static_cast<int>(i) || b == static_cast<int>(i);
                if (!mine) continue;
                bool in_m2 =
                    std::find(u2_names.begin(), u2_names.end(), name) != u2_names.end();
                if (!in_m2) continue;
                if (a == static_cast<int>(i)) a = j;
                if (b == static_cast<int>(i)) b = j;
            }
            edges.emplace_back(static_cast<int>(i), j, bp);
            progressed = true;
            break;
        }
    }

    // Phase 2: guarantee a basepoint edge to split the root on.
    if (edges.empty()) {
        std::string bp = fresh_basepoint(bp_counter++);
        const std::string& z = raw[0].matroid.names().front();
        Matroid m1 = rename_element(raw[0].matroid, z, bp);
        Matroid u12 = uniform_matroid(1, std::vector<std::string>{bp, z});
        if (m.linear_rep()) {
            int q = m.linear_rep()->field_order();
            u12.attach_linear_rep(LinearRep(q, {{1, 1}}));
        }
        raw[0].matroid = m1;
        raw.push_back({u12});
        edges.emplace_back(0, 1, bp);
    }

    // Phase 3: root split on the first basepoint edge.
    auto [xl, xr, bp_m] = edges.front();
    std::string bp_l = bp_m + "L", bp_r = bp_m + "R";
    raw[xl].matroid = rename_element(raw[xl].matroid, bp_m, bp_l);
    raw[xr].matroid = rename_element(raw[xr].matroid, bp_m, bp_r);
    Matroid root_piece = uniform_matroid(1, std::vector<std::string>{bp_l, bp_r});
    if (m.linear_rep())
        root_piece.attach_linear_rep(LinearRep(m.linear_rep()->field_order(), {{1, 1}}));
    int t = static_cast<int>(raw.size());
    raw.push_back({root_piece});
    edges.erase(edges.begin());
    edges.emplace_back(t, xl, bp_l);
    edges.emplace_back(t, xr, bp_r);

    // Orient the piece tree away from the root.
    TwoSumBuilder builder{oracles, options, {}, {}, {}, {}, nullptr};
    builder.pieces.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) builder.pieces[i].matroid = raw[i].matroid;
    {
        std::vector<int> parent(raw.size(), -1);
        std::vector<int> order{t};
        parent[t] = t;
        for (size_t head = 0; head < order.size(); ++head) {
            int x = order[head];
            for (auto& [a, b, name] : edges) {
                int other = a == x ? b : (b == x ? a : -1);
                if (other < 0 || parent[other] != -1) continue;
                parent[other] = x;
                builder.pieces[x].child_by_basepoint[name] = other;
                order.push_back(other);
            }
        }
    }
    for (const auto& piece : builder.pieces) builder.piece_oracles.push_back(oracles(piece.matroid));
    std::vector<std::string> names = m.names();
    builder.global_names = &names;

    // Assemble: the root piece contributes only the root vertex.
    const auto& root_children = builder.pieces[t].child_by_basepoint;
    TwoSumBuilder::EdgeInfo left = builder.mount_child(t, bp_l, root_children.at(bp_l));
    TwoSumBuilder::EdgeInfo right = builder.mount_child(t, bp_r, root_children.at(bp_r));
    int root = builder.build_root(t, left, right);

    TwoSumDetail detail;
    detail.result = BuildResult{builder.acc.finish(root, names), builder.ab.finish()};
    for (const auto& piece : builder.pieces) {
        TwoSumPiece p;
        p.matroid = piece.matroid;
        for (const auto& [name, child] : piece.child_by_basepoint) p.basepoints.push_back(name);
        detail.pieces.push_back(std::move(p));
    }
    detail.tree = edges;
    self_check(detail.result, m.set_system(), options);
    return detail;
}

BuildResult build_via_2sum(const Matroid& m, const OracleFactory& oracles, const BuildOptions& options) {
    return build_via_2sum_detailed(m, oracles, options).result;
}

// ---- disconnected assembly ------------------------------------------------------------

BuildResult build_disconnected(const Matroid& m, const OracleFactory& oracles,
                               const BuildOptions& options) {
    std::vector<Subset> comps = connected_components(m);
    if (comps.size() <= 1) {
        BuildOptions inner = options;
        return build_via_2sum(m, oracles, inner);
    }
    BuildOptions inner = options;
    inner.self_check = false;  // checked on the whole assembly below

    std::vector<BuildResult> parts;
    for (Subset comp : comps) parts.push_back(build_via_2sum(restriction(m, comp), oracles, inner));

    // Merge the component automata (characters describe their own
    // transitions, so equal characters agree) and add the spine states.
    TreeAutomaton merged;
    merged.index_set = {1};
    int max_states = 0;
    for (const BuildResult& part : parts) {
        max_states = std::max(max_states, part.automaton.num_states);
        merged.base_alphabet.insert(part.automaton.base_alphabet.begin(),
                                    part.automaton.base_alphabet.end());
        for (const auto& [c, img] : part.automaton.delta0) merged.delta0[c] = img;
        for (const auto& [c2, table] : part.automaton.delta2)
            for (const auto& [key, img] : table) merged.delta2[c2][key] = img;
    }
    State dep_spine = max_states;
    State indep_spine = max_states + 1;
    merged.num_states = max_states + 2;
    merged.accepting = {kIndep, indep_spine};
    Character kappa = "kappa";
    merged.base_alphabet.insert(kappa);
    for (State a = 0; a < merged.num_states; ++a)
        for (State b = 0; b < merged.num_states; ++b) {
            bool ok_a = a == kIndep || a == indep_spine;
            bool ok_b = b == kIndep || b == indep_spine;
            merged.delta2[kappa][{a, b}] = {ok_a && ok_b ? indep_spine : dep_spine};
        }

    // Join the component trees under a kappa spine, remapping element ids
    // and node indices into the combined tree.
    TreeAccum acc;
    std::vector<int> part_roots;
    for (size_t k = 0; k < parts.size(); ++k) {
        const ParseTree& pt = parts[k].ptree;
        std::vector<int> remap(pt.tree.nodes.size(), -1);
        for (size_t v = 0; v < pt.tree.nodes.size(); ++v) {
            const auto& node = pt.tree.nodes[v];
            if (node.left < 0) {
                const std::string& nm = pt.element_names[pt.element_of_node[v]];
                remap[v] = acc.add_leaf(node.label, m.id_of(nm));
            } else {
                remap[v] = acc.add_node(node.label, remap[node.left], remap[node.right]);
            }
        }
        part_roots.push_back(remap[pt.tree.root]);
    }
    int root = part_roots[0];
    for (size_t k = 1; k < part_roots.size(); ++k) root = acc.add_node(kappa, root, part_roots[k]);

    BuildResult out{acc.finish(root, m.names()), std::move(merged)};
    self_check(out, m.set_system(), options);
    return out;
}

// ---- model check -------------------------------------------------------------------------

bool model_check(const Matroid& m, const logic::FormulaPtr& sentence, const ModelCheckOptions& options) {
    if (!logic::is_sentence(sentence)) throw ValueError("model_check: the formula has free variables");
    BuildResult br;
    switch (options.builder) {
        case Builder::Decomposition: {
            EquivOracle oracle = options.oracles(m);
            br = build(m.set_system(), branchdec::some_decomposition(m), oracle, options.build);
            break;
        }
        case Builder::TwoSum:
            br = build_via_2sum(m, options.oracles, options.build);
            break;
        case Builder::Auto:
            br = is_connected(m) ? build_via_2sum(m, options.oracles, options.build)
                                 : build_disconnected(m, options.oracles, options.build);
            break;
    }
    TreeAutomaton compiled = logic::compile(sentence, br.automaton, options.state_cap);
    return automata::accepts(compiled, br.ptree.tree);
}

// ---- serialization --------------------------------------------------------------------------

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

}  // namespace

std::string ptree_to_text(const ParseTree& t) {
    std::ostringstream os;
    os << "ptree v1\n";
    os << "elements:";
    for (const auto& nm : t.element_names) os << " " << nm;
    os << "\n";
    std::function<void(int)> rec = [&](int v) {
        const auto& node = t.tree.nodes[v];
        if (node.left < 0) {
            os << t.element_names[t.element_of_node[v]] << ":" << quote(node.label);
            return;
        }
        os << "(";
        rec(node.left);
        os << ",";
        rec(node.right);
        os << "):" << quote(node.label);
    };
    os << "tree: ";
    rec(t.tree.root);
    os << "\n";
    return os.str();
}

ParseTree ptree_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    bool header = false;
    std::vector<std::string> names;
    std::string tree_line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        std::string t = line.substr(first);
        if (t[0] == '#') continue;
        if (!header) {
            if (t != "ptree v1") throw ValueError("ptree file: expected 'ptree v1' header");
            header = true;
            continue;
        }
        if (t.rfind("elements:", 0) == 0) {
            std::istringstream vals(t.substr(9));
            std::string nm;
            while (vals >> nm) names.push_back(nm);
        } else if (t.rfind("tree:", 0) == 0) {
            tree_line = t.substr(5);
        } else {
            throw ValueError("ptree file: unknown line: " + t);
        }
    }
    if (!header || names.empty() || tree_line.empty())
        throw ValueError("ptree file: missing elements or tree");
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != names) throw ValueError("ptree file: elements must be listed in canonical order");

    ParseTree out;
    out.element_names = names;
    size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < tree_line.size() && (tree_line[pos] == ' ' || tree_line[pos] == '\t')) ++pos;
    };
    auto read_quoted = [&]() {
        skip_ws();
        if (pos >= tree_line.size() || tree_line[pos] != '"')
            throw ValueError("ptree file: expected quoted character");
        ++pos;
        std::string s;
        while (pos < tree_line.size() && tree_line[pos] != '"') {
            if (tree_line[pos] == '\\' && pos + 1 < tree_line.size()) ++pos;
            s += tree_line[pos++];
        }
        if (pos >= tree_line.size()) throw ValueError("ptree file: unterminated character");
        ++pos;
        return s;
    };
    std::function<int()> rec = [&]() -> int {
        skip_ws();
        if (pos < tree_line.size() && tree_line[pos] == '(') {
            ++pos;
            int left = rec();
            skip_ws();
            if (pos >= tree_line.size() || tree_line[pos] != ',') throw ValueError("ptree file: expected ','");
            ++pos;
            int right = rec();
            skip_ws();
            if (pos >= tree_line.size() || tree_line[pos] != ')') throw ValueError("ptree file: expected ')'");
            ++pos;
            skip_ws();
            if (pos >= tree_line.size() || tree_line[pos] != ':') throw ValueError("ptree file: expected ':'");
            ++pos;
            std::string label = read_quoted();
            out.tree.nodes.push_back({label, left, right});
            out.element_of_node.push_back(-1);
            return static_cast<int>(out.tree.nodes.size()) - 1;
        }
        // leaf: name ':' quoted-label
        size_t start = pos;
        while (pos < tree_line.size() && tree_line[pos] != ':') ++pos;
        if (pos >= tree_line.size()) throw ValueError("ptree file: expected leaf name");
        std::string nm = tree_line.substr(start, pos - start);
        while (!nm.empty() && (nm.back() == ' ' || nm.back() == '\t')) nm.pop_back();
        ++pos;
        std::string label = read_quoted();
        auto it = std::lower_bound(out.element_names.begin(), out.element_names.end(), nm);
        if (it == out.element_names.end() || *it != nm)
            throw ValueError("ptree file: unknown element " + nm);
        out.tree.nodes.push_back({label, -1, -1});
        out.element_of_node.push_back(static_cast<int>(it - out.element_names.begin()));
        return static_cast<int>(out.tree.nodes.size()) - 1;
    };
    out.tree.root = rec();
    skip_ws();
    if (pos != tree_line.size()) throw ValueError("ptree file: trailing input");
    out.tree.validate();
    return out;
}

}  // namespace mmso::parsetree
