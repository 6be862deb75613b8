#include "mmso/branchdec.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <sstream>

namespace mmso::branchdec {

// ---- Decomposition ----------------------------------------------------------

void Decomposition::validate() const {
    int n = element_count();
    if (n == 0) throw ValueError("decomposition: empty ground set");
    if (static_cast<int>(element_of.size()) != vertex_count())
        throw ValueError("decomposition: vertex/element tables disagree");
    if (n == 1) {
        if (vertex_count() != 1 || element_of[0] != 0)
            throw ValueError("decomposition: one element needs a single-vertex tree");
        return;
    }
    int leaves = 0;
    for (int v = 0; v < vertex_count(); ++v) {
        size_t deg = adj[v].size();
        if (deg != 1 && deg != 3) throw ValueError("decomposition: vertex degree must be 1 or 3");
        if (deg == 1) {
            ++leaves;
            if (element_of[v] < 0) throw ValueError("decomposition: unlabeled leaf");
        } else if (element_of[v] >= 0) {
            throw ValueError("decomposition: labeled internal vertex");
        }
    }
    if (leaves != n) throw ValueError("decomposition: leaf count differs from ground set");
    for (int e = 0; e < n; ++e)
        if (leaf_of[e] < 0 || leaf_of[e] >= vertex_count() || element_of[leaf_of[e]] != e)
            throw ValueError("decomposition: leaf bijection broken");
    // Connectivity: reachable vertex count equals vertex count.
    std::vector<bool> seen(vertex_count(), false);
    std::deque<int> work{0};
    seen[0] = true;
    int count = 0;
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        ++count;
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                work.push_back(w);
            }
    }
    if (count != vertex_count()) throw ValueError("decomposition: tree is disconnected");
}

Subset Decomposition::displayed(int u, int v) const {
    Subset out = 0;
    std::vector<bool> seen(vertex_count(), false);
    seen[v] = true;  // block the far side
    std::deque<int> work{u};
    seen[u] = true;
    while (!work.empty()) {
        int w = work.front();
        work.pop_front();
        if (element_of[w] >= 0) out |= Subset{1} << element_of[w];
        for (int x : adj[w])
            if (!seen[x]) {
                seen[x] = true;
                work.push_back(x);
            }
    }
    return out;
}

std::vector<std::pair<int, int>> Decomposition::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < vertex_count(); ++v)
        for (int w : adj[v])
            if (v < w) out.emplace_back(v, w);
    return out;
}

std::vector<Subset> Decomposition::displayed_sets() const {
    std::vector<Subset> out;
    for (auto [u, v] : edges()) {
        out.push_back(displayed(u, v));
        out.push_back(displayed(v, u));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---- newick -------------------------------------------------------------------

namespace {

int min_leaf(const Decomposition& d, int u, int v) {
    // least element id on u's side of edge (u,v)
    Subset s = d.displayed(u, v);
    return std::countr_zero(s);
}

void write_subtree(const Decomposition& d, int u, int from, const std::vector<std::string>& names,
                   std::ostream& os) {
    if (d.element_of[u] >= 0) {
        os << names[d.element_of[u]];
        return;
    }
    std::vector<int> kids;
    for (int w : d.adj[u])
        if (w != from) kids.push_back(w);
    std::sort(kids.begin(), kids.end(),
              [&](int a, int b) { return min_leaf(d, a, u) < min_leaf(d, b, u); });
    os << "(";
    for (size_t i = 0; i < kids.size(); ++i) {
        if (i) os << ",";
        write_subtree(d, kids[i], u, names, os);
    }
    os << ")";
}

}  // namespace

namespace {

struct NewickNode {
    std::string name;  // leaf name, empty for internal
    std::vector<int> kids;
};

struct NewickParser {
    const std::string& s;
    size_t pos = 0;
    std::vector<NewickNode> nodes;

    explicit NewickParser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r'))
            ++pos;
    }

    int parse_node() {
        skip_ws();
        if (pos < s.size() && s[pos] == '(') {
            ++pos;
            NewickNode node;
            int id = static_cast<int>(nodes.size());
            nodes.push_back(node);
            std::vector<int> kids;
            while (true) {
                kids.push_back(parse_node());
                skip_ws();
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                    continue;
                }
                break;
            }
            skip_ws();
            if (pos >= s.size() || s[pos] != ')') throw ValueError("newick: expected ')'");
            ++pos;
            nodes[id].kids = kids;
            return id;
        }
        size_t start = pos;
        while (pos < s.size() && s[pos] != ',' && s[pos] != ')' && s[pos] != '(' && s[pos] != ';' &&
               s[pos] != ' ' && s[pos] != '\t' && s[pos] != '\n' && s[pos] != '\r')
            ++pos;
        if (start == pos) throw ValueError("newick: expected a leaf name");
        NewickNode node;
        node.name = s.substr(start, pos - start);
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
    }
};

}  // namespace

Decomposition from_newick(const std::string& text, const std::vector<std::string>& names) {
    NewickParser parser(text);
    int root = parser.parse_node();
    parser.skip_ws();
    if (parser.pos < parser.s.size() && parser.s[parser.pos] == ';') ++parser.pos;
    parser.skip_ws();
    if (parser.pos != parser.s.size()) throw ValueError("newick: trailing input");

    std::map<std::string, int> elem_id;
    for (size_t i = 0; i < names.size(); ++i) elem_id[names[i]] = static_cast<int>(i);

    Decomposition d;
    d.leaf_of.assign(names.size(), -1);

    // Build vertices; suppress a binary root by joining its two sides.
    std::function<int(int)> build = [&](int nid) -> int {
        const NewickNode& node = parser.nodes[nid];
        int v = d.vertex_count();
        d.adj.emplace_back();
        d.element_of.push_back(-1);
        if (node.kids.empty()) {
            auto it = elem_id.find(node.name);
            if (it == elem_id.end()) throw ValueError("newick: unknown element " + node.name);
            d.element_of[v] = it->second;
            if (d.leaf_of[it->second] != -1) throw ValueError("newick: duplicate leaf " + node.name);
            d.leaf_of[it->second] = v;
            return v;
        }
        for (int kid : node.kids) {
            int w = build(kid);
            d.adj[v].push_back(w);
            d.adj[w].push_back(v);
        }
        return v;
    };

    const NewickNode& top = parser.nodes[root];
    if (top.kids.empty()) {
        // single element
        if (names.size() != 1) throw ValueError("newick: single leaf for a larger ground set");
        build(root);
        d.validate();
        return d;
    }
    if (top.kids.size() == 2) {
        int a = build(top.kids[0]);
        int b = build(top.kids[1]);
        d.adj[a].push_back(b);
        d.adj[b].push_back(a);
        d.validate();
        return d;
    }
    if (top.kids.size() == 3) {
        int v = build(root);
        (void)v;
        d.validate();
        return d;
    }
    throw ValueError("newick: root must have 2 or 3 children");
}

namespace {

std::string newick_of(const Decomposition& d, const std::vector<std::string>& names) {
    std::ostringstream os;
    int n = d.element_count();
    if (n == 1) {
        os << names[0] << ";";
        return os.str();
    }
    int least_leaf = d.leaf_of[0];
    if (n == 2) {
        os << "(" << names[0] << "," << names[d.element_of[d.adj[least_leaf][0]]] << ");";
        return os.str();
    }
    int root = d.adj[least_leaf][0];
    std::vector<int> kids = d.adj[root];
    std::sort(kids.begin(), kids.end(),
              [&](int a, int b) { return min_leaf(d, a, root) < min_leaf(d, b, root); });
    os << "(";
    for (size_t i = 0; i < kids.size(); ++i) {
        if (i) os << ",";
        write_subtree(d, kids[i], root, names, os);
    }
    os << ");";
    return os.str();
}

}  // namespace

std::string to_newick(const Decomposition& d, const std::vector<std::string>& names) {
    return newick_of(d, names);
}

// ---- enumeration ----------------------------------------------------------------

namespace {

struct EdgeTree {
    // Leaves 0..n-1 carry elements; internal vertices numbered from n.
    std::vector<std::pair<int, int>> edges;
    int next_internal;
};

Decomposition to_decomposition(const EdgeTree& t, int n) {
    int vcount = n == 1 ? 1 : t.next_internal;
    Decomposition d;
    d.adj.assign(vcount, {});
    d.element_of.assign(vcount, -1);
    d.leaf_of.assign(n, -1);
    for (int e = 0; e < n; ++e) {
        d.element_of[e] = e;
        d.leaf_of[e] = e;
    }
    for (auto [u, v] : t.edges) {
        d.adj[u].push_back(v);
        d.adj[v].push_back(u);
    }
    return d;
}

void enumerate_rec(EdgeTree& t, int next_elem, int n, const std::function<void(const Decomposition&)>& visit) {
    if (next_elem == n) {
        visit(to_decomposition(t, n));
        return;
    }
    size_t edge_count = t.edges.size();
    for (size_t i = 0; i < edge_count; ++i) {
        auto [u, v] = t.edges[i];
        int w = t.next_internal++;
        t.edges[i] = {u, w};
        t.edges.push_back({w, v});
        t.edges.push_back({w, next_elem});
        enumerate_rec(t, next_elem + 1, n, visit);
        t.edges.pop_back();
        t.edges.pop_back();
        t.edges[i] = {u, v};
        --t.next_internal;
    }
}

}  // namespace

void enumerate_decompositions(int n, const std::function<void(const Decomposition&)>& visit) {
    if (n <= 0) throw ValueError("enumerate_decompositions: empty ground set");
    EdgeTree t;
    t.next_internal = n;
    if (n == 1) {
        visit(to_decomposition(t, 1));
        return;
    }
    t.edges.push_back({0, 1});
    enumerate_rec(t, 2, n, visit);
}

Decomposition caterpillar(const std::vector<std::vector<int>>& groups, int n) {
    std::vector<int> order;
    for (const auto& g : groups) order.insert(order.end(), g.begin(), g.end());
    if (static_cast<int>(order.size()) != n) throw ValueError("caterpillar: groups must partition the elements");
    EdgeTree t;
    t.next_internal = n;
    if (n == 1) return to_decomposition(t, 1);
    if (n == 2) {
        t.edges.push_back({order[0], order[1]});
        return to_decomposition(t, 2);
    }
    // Spine: attach leaves in order; last two leaves share the final spine node.
    int prev = order[0];
    for (int i = 1; i + 1 < n; ++i) {
        int w = t.next_internal++;
        t.edges.push_back({prev, w});
        t.edges.push_back({w, order[i]});
        prev = w;
    }
    t.edges.push_back({prev, order[n - 1]});
    return to_decomposition(t, n);
}

// ---- width --------------------------------------------------------------------

int width(const Matroid& m, const Decomposition& d) {
    d.validate();
    if (d.element_count() != m.size()) throw ValueError("width: decomposition does not match the matroid");
    if (m.size() <= 1) return 1;
    int best = 0;
    for (auto [u, v] : d.edges()) best = std::max(best, m.connectivity(d.displayed(u, v)) + 1);
    return best;
}

ExactWidth bw_exact(const Matroid& m, int cap) {
    int n = m.size();
    if (n > cap) throw ResourceError("bw_exact: ground set larger than the exhaustive cap");
    if (n == 0) throw ValueError("bw_exact: empty ground set");
    std::optional<ExactWidth> best;
    std::string best_key;
    enumerate_decompositions(n, [&](const Decomposition& d) {
        int w = width(m, d);
        if (!best || w < best->width) {
            best = ExactWidth{w, d};
            best_key = newick_of(d, m.names());
        } else if (w == best->width) {
            std::string key = newick_of(d, m.names());
            if (key < best_key) {
                best = ExactWidth{w, d};
                best_key = key;
            }
        }
    });
    return *best;
}

// ---- matroid intersection --------------------------------------------------------

IntersectionResult matroid_intersection(const Matroid& m1, const Matroid& m2) {
    if (m1.names() != m2.names()) throw ValueError("matroid intersection: ground sets differ");
    int n = m1.size();
    Subset j = 0;
    while (true) {
        // Exchange digraph on elements; BFS for a shortest X1 -> X2 path.
        std::vector<int> prev(n, -2);  // -2 unvisited, -1 source
        std::deque<int> work;
        Subset x1 = 0, x2 = 0;
        for (int e = 0; e < n; ++e) {
            if (contains(j, e)) continue;
            if (m1.independent(j | (Subset{1} << e))) x1 |= Subset{1} << e;
            if (m2.independent(j | (Subset{1} << e))) x2 |= Subset{1} << e;
        }
        for (int e = 0; e < n; ++e)
            if (contains(x1, e)) {
                prev[e] = -1;
                work.push_back(e);
            }
        int goal = -1;
        Subset reach = x1;
        while (!work.empty() && goal < 0) {
            int v = work.front();
            work.pop_front();
            if (contains(x2, v)) {
                goal = v;
                break;
            }
            for (int w = 0; w < n; ++w) {
                if (prev[w] != -2 || w == v) continue;
                bool arc = false;
                if (contains(j, v) && !contains(j, w)) {
                    // v in J, w outside: arc when J - v + w independent in M1
                    arc = m1.independent((j & ~(Subset{1} << v)) | (Subset{1} << w));
                } else if (!contains(j, v) && contains(j, w)) {
                    // v outside, w in J: arc when J - w + v independent in M2
                    arc = m2.independent((j & ~(Subset{1} << w)) | (Subset{1} << v));
                }
                if (arc) {
                    prev[w] = v;
                    reach |= Subset{1} << w;
                    work.push_back(w);
                }
            }
        }
        if (goal < 0) return {j, reach};
        // Augment along the path.
        for (int v = goal; v != -1; v = prev[v]) j ^= Subset{1} << v;
    }
}

Subset matroid_intersection_max(const Matroid& m1, const Matroid& m2) {
    return matroid_intersection(m1, m2).common;
}

Subset lambda_minimize(const Matroid& m, Subset d1, Subset d2) {
    if ((d1 & d2) != 0) throw ValueError("lambda_minimize: D1 and D2 overlap");
    int n = m.size();
    Subset eprime = full_set(n) & ~(d1 | d2);
    Matroid m1 = minor(m, d1, d2);  // M / D1 \ D2
    Matroid m2 = minor(m, d2, d1);  // M \ D1 / D2
    IntersectionResult res = matroid_intersection(m1, m2);
    // Lift E'-side ids back to M's ids.
    std::vector<int> ids = subset_ids(eprime);
    Subset not_reached = 0;
    for (int bit = 0; bit < static_cast<int>(ids.size()); ++bit)
        if (!contains(res.reachable, bit)) not_reached |= Subset{1} << ids[bit];
    return d1 | not_reached;
}

int aux_rank(const Matroid& m, Subset u, Subset basis, Subset x) {
    Subset v = full_set(m.size()) & ~u;
    Subset bmv = basis & ~v;  // B - V
    Subset bmx = basis & ~x;  // B - X
    return m.rank(x | bmv) + m.rank(v | bmx) - popcount(bmx) - popcount(bmv);
}

// ---- approximation ------------------------------------------------------------------

namespace {

struct Partial {
    std::vector<std::vector<int>> adj;
    std::vector<Subset> block_of;  // per vertex; 0 for internal vertices
};

Subset displayed_blocks(const Partial& p, int u, int v) {
    Subset out = 0;
    std::vector<bool> seen(p.adj.size(), false);
    seen[v] = true;
    std::deque<int> work{u};
    seen[u] = true;
    while (!work.empty()) {
        int w = work.front();
        work.pop_front();
        out |= p.block_of[w];
        for (int x : p.adj[w])
            if (!seen[x]) {
                seen[x] = true;
                work.push_back(x);
            }
    }
    return out;
}

bool widths_ok(const Matroid& m, const Partial& p, int bound) {
    for (size_t v = 0; v < p.adj.size(); ++v)
        for (int w : p.adj[v]) {
            if (static_cast<int>(v) > w) continue;
            if (m.connectivity(displayed_blocks(p, static_cast<int>(v), w)) + 1 > bound) return false;
        }
    return true;
}

Subset greedy_basis(const Matroid& m, Subset scope) {
    Subset acc = 0;
    for (int id : subset_ids(scope))
        if (m.independent(acc | (Subset{1} << id))) acc |= Subset{1} << id;
    return acc;
}

}  // namespace

Decomposition approx_branch_decomposition(const Matroid& m, int lambda) {
    if (lambda < 1) throw ValueError("approx_branch_decomposition: lambda must be positive");
    int n = m.size();
    if (n == 0) throw ValueError("approx_branch_decomposition: empty ground set");
    const int bound = 3 * lambda + 1;

    Partial p;
    p.adj.assign(1, {});
    p.block_of.assign(1, full_set(n));

    while (true) {
        // least leaf vertex with a splittable block
        int leaf = -1;
        for (size_t v = 0; v < p.adj.size(); ++v) {
            if (p.adj[v].size() > 1) continue;
            if (popcount(p.block_of[v]) > 1) {
                leaf = static_cast<int>(v);
                break;
            }
        }
        if (leaf < 0) break;

        Subset u_block = p.block_of[leaf];
        bool at_cap = false;
        if (!p.adj[leaf].empty()) {
            int w = m.connectivity(u_block) + 1;
            if (w > bound) throw ValueError("approx_branch_decomposition: width invariant broken");
            at_cap = (w == bound);
        }

        Subset part1;
        if (!at_cap) {
            part1 = Subset{1} << std::countr_zero(u_block);
        } else {
            Subset basis = greedy_basis(m, full_set(n));
            Matroid aux = Matroid::trusted(SetSystem::from_oracle(
                m.set_system().names_of(u_block),
                [&m, u_block, basis, ids = subset_ids(u_block)](Subset s) {
                    Subset x = 0;
                    for (int bit = 0; bit < static_cast<int>(ids.size()); ++bit)
                        if (contains(s, bit)) x |= Subset{1} << ids[bit];
                    return aux_rank(m, u_block, basis, x) == popcount(s);
                }));
            Subset d_local = greedy_basis(aux, full_set(aux.size()));
            // back to M ids
            std::vector<int> ids = subset_ids(u_block);
            Subset d_set = 0;
            for (int bit : subset_ids(d_local)) d_set |= Subset{1} << ids[bit];

            bool found = false;
            for (Subset d1 : submasks(d_set)) {
                Subset d2 = d_set & ~d1;
                int lo = std::min(popcount(d1), popcount(d2));
                if (lo < 2) continue;
                Subset z = lambda_minimize(m, d1, d2);
                if (m.connectivity(z) + 1 >= lo) continue;
                Subset inz = u_block & z;
                if (inz == 0 || inz == u_block) continue;
                if (m.connectivity(inz) + 1 > bound || m.connectivity(u_block & ~z) + 1 > bound)
                    continue;
                part1 = inz;
                found = true;
                break;
            }
            if (!found) throw ValueError("approx_branch_decomposition: branch-width exceeds lambda");
        }

        Subset part2 = u_block & ~part1;
        if (p.adj[leaf].empty()) {
            // single-vertex start: become an edge
            p.adj.push_back({});
            p.block_of.push_back(part1);
            p.adj[leaf] = {1};
            p.adj[1] = {leaf};
            p.block_of[leaf] = part2;
        } else {
            int parent = p.adj[leaf][0];
            int mid = static_cast<int>(p.adj.size());
            p.adj.push_back({});
            p.block_of.push_back(0);
            int fresh = static_cast<int>(p.adj.size());
            p.adj.push_back({});
            p.block_of.push_back(part1);
            // parent - mid - leaf, mid - fresh
            auto& pa = p.adj[parent];
            *std::find(pa.begin(), pa.end(), leaf) = mid;
            p.adj[mid] = {parent, leaf, fresh};
            p.adj[leaf] = {mid};
            p.adj[fresh] = {mid};
            p.block_of[leaf] = part2;
        }
        if (!widths_ok(m, p, bound))
            throw ValueError("approx_branch_decomposition: width invariant broken");
    }

    // blocks are singletons: convert to a Decomposition
    Decomposition d;
    d.adj = p.adj;
    d.element_of.assign(p.adj.size(), -1);
    d.leaf_of.assign(n, -1);
    for (size_t v = 0; v < p.adj.size(); ++v) {
        if (p.block_of[v] == 0) continue;
        int e = std::countr_zero(p.block_of[v]);
        d.element_of[v] = e;
        d.leaf_of[e] = v;
    }
    d.validate();
    return d;
}

Decomposition some_decomposition(const Matroid& m) {
    if (m.size() <= 8) return bw_exact(m).witness;
    for (int lambda = 1; lambda <= m.size(); ++lambda) {
        try {
            return approx_branch_decomposition(m, lambda);
        } catch (const ValueError&) {
            continue;
        }
    }
    throw ValueError("some_decomposition: no decomposition found");
}

}  // namespace mmso::branchdec
