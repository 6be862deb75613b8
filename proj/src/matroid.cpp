#include "mmso/matroid.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace mmso {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ValueError("duplicate element name");
    return names;
}

}  // namespace

// ---- SetSystem -------------------------------------------------------------

SetSystem SetSystem::from_family(std::vector<std::string> names,
                                 const std::vector<std::vector<std::string>>& family) {
    SetSystem sys;
    sys.names_ = sorted_unique(std::move(names));
    int n = sys.size();
    if (n > kTableCap) throw ResourceError("explicit family: ground set too large");
    auto table = std::make_shared<std::vector<bool>>(Subset{1} << n, false);
    for (const auto& member : family) (*table)[sys.subset_of_names(member)] = true;
    sys.table_ = std::move(table);
    return sys;
}

SetSystem SetSystem::from_table(std::vector<std::string> names, std::vector<bool> table) {
    SetSystem sys;
    sys.names_ = sorted_unique(std::move(names));
    if (table.size() != (size_t{1} << sys.size())) throw ValueError("independence table has wrong size");
    sys.table_ = std::make_shared<const std::vector<bool>>(std::move(table));
    return sys;
}

SetSystem SetSystem::from_oracle(std::vector<std::string> names, std::function<bool(Subset)> oracle) {
    SetSystem sys;
    sys.names_ = sorted_unique(std::move(names));
    int n = sys.size();
    if (n <= kTableCap) {
        auto table = std::make_shared<std::vector<bool>>(Subset{1} << n);
        for (Subset s = 0; s < (Subset{1} << n); ++s) (*table)[s] = oracle(s);
        sys.table_ = std::move(table);
    } else {
        sys.oracle_ = std::move(oracle);
        sys.memo_lock_ = std::make_shared<std::mutex>();
        sys.memo_ = std::make_shared<std::unordered_map<Subset, bool>>();
    }
    return sys;
}

int SetSystem::id_of(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw ValueError("unknown element: " + name);
    return static_cast<int>(it - names_.begin());
}

Subset SetSystem::subset_of_names(const std::vector<std::string>& names) const {
    Subset s = 0;
    for (const auto& nm : names) s |= Subset{1} << id_of(nm);
    return s;
}

std::vector<std::string> SetSystem::names_of(Subset s) const {
    std::vector<std::string> out;
    for (int id : subset_ids(s)) out.push_back(names_[id]);
    return out;
}

bool SetSystem::independent(Subset s) const {
    if (table_) return (*table_)[s];
    std::lock_guard<std::mutex> guard(*memo_lock_);
    auto it = memo_->find(s);
    if (it != memo_->end()) return it->second;
    bool v = oracle_(s);
    memo_->emplace(s, v);
    return v;
}

bool SetSystem::downward_closed() const {
    int n = size();
    for (Subset s = 0; s < (Subset{1} << n); ++s) {
        if (!independent(s)) continue;
        Subset rest = s;
        while (rest != 0) {
            Subset bit = rest & (0u - rest);
            if (!independent(s ^ bit)) return false;
            rest ^= bit;
        }
    }
    return true;
}

std::vector<Subset> SetSystem::independent_family() const {
    std::vector<Subset> out;
    for (Subset s = 0; s < (Subset{1} << size()); ++s)
        if (independent(s)) out.push_back(s);
    return out;
}

AxiomReport verify_matroid_axioms(const SetSystem& sys) {
    AxiomReport rep;
    int n = sys.size();
    bool any = false;
    for (Subset s = 0; s < (Subset{1} << n) && !any; ++s) any = sys.independent(s);
    if (!any) {
        rep.ok = false;
        rep.violation = "family is empty";
        return rep;
    }
    for (Subset s = 0; s < (Subset{1} << n); ++s) {
        if (!sys.independent(s)) continue;
        Subset rest = s;
        while (rest != 0) {
            Subset bit = rest & (0u - rest);
            if (!sys.independent(s ^ bit)) {
                rep.ok = false;
                rep.violation = "not downward closed";
                rep.witness_a = s;
                rep.witness_b = s ^ bit;
                return rep;
            }
            rest ^= bit;
        }
    }
    for (Subset a = 0; a < (Subset{1} << n); ++a) {
        if (!sys.independent(a)) continue;
        for (Subset b = 0; b < (Subset{1} << n); ++b) {
            if (!sys.independent(b) || popcount(a) >= popcount(b)) continue;
            bool extended = false;
            for (int id : subset_ids(b & ~a))
                if (sys.independent(a | (Subset{1} << id))) {
                    extended = true;
                    break;
                }
            if (!extended) {
                rep.ok = false;
                rep.violation = "exchange fails";
                rep.witness_a = a;
                rep.witness_b = b;
                return rep;
            }
        }
    }
    return rep;
}

// ---- LinearRep -------------------------------------------------------------

LinearRep::LinearRep(int q, const std::vector<std::vector<int>>& rows) {
    if (!gf::Field::is_prime_power(q))
        throw ValueError("linear: field order " + std::to_string(q) + " is not a prime power");
    field_ = std::make_shared<gf::Field>(q);
    matrix_ = std::make_shared<gf::Matrix>(gf::Matrix::from_rows(field_.get(), rows));
}

bool LinearRep::independent(Subset cols) const {
    return rank_of(cols) == popcount(cols);
}

int LinearRep::rank_of(Subset cols) const {
    return matrix_->select_columns(subset_ids(cols)).rank();
}

LinearRep LinearRep::minor(Subset contract, Subset del, int n) const {
    gf::Matrix m = *matrix_;
    const gf::Field& F = *field_;
    Subset remaining = full_set(n) & ~del;
    std::vector<bool> row_dead(m.rows(), false);
    for (int id : subset_ids(contract)) {
        remaining &= ~(Subset{1} << id);
        // Pivot the column out; a zero column (loop) just disappears.
        int pr = -1;
        for (int r = 0; r < m.rows(); ++r)
            if (!row_dead[r] && m.at(r, id) != 0) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        int s = F.inv(m.at(pr, id));
        for (int c = 0; c < m.cols(); ++c) m.at(pr, c) = F.mul(m.at(pr, c), s);
        for (int r = 0; r < m.rows(); ++r) {
            if (r == pr || row_dead[r] || m.at(r, id) == 0) continue;
            int t = m.at(r, id);
            for (int c = 0; c < m.cols(); ++c)
                m.at(r, c) = F.sub(m.at(r, c), F.mul(t, m.at(pr, c)));
        }
        row_dead[pr] = true;
    }
    std::vector<int> keep_cols = subset_ids(remaining);
    std::vector<std::vector<int>> rows;
    for (int r = 0; r < m.rows(); ++r) {
        if (row_dead[r]) continue;
        std::vector<int> row;
        for (int c : keep_cols) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) rows.push_back(std::vector<int>(keep_cols.size(), 0));
    return LinearRep(field_->order(), rows);
}

// ---- Matroid ---------------------------------------------------------------

Matroid Matroid::checked(SetSystem sys) {
    AxiomReport rep = verify_matroid_axioms(sys);
    if (!rep.ok) {
        std::string msg = "not a matroid: " + rep.violation;
        if (rep.witness_a) {
            msg += " (witness: {";
            bool first = true;
            for (const auto& nm : sys.names_of(*rep.witness_a)) {
                msg += (first ? "" : " ") + nm;
                first = false;
            }
            msg += "}";
            if (rep.witness_b) {
                msg += " / {";
                first = true;
                for (const auto& nm : sys.names_of(*rep.witness_b)) {
                    msg += (first ? "" : " ") + nm;
                    first = false;
                }
                msg += "}";
            }
            msg += ")";
        }
        throw ValueError(msg);
    }
    return trusted(std::move(sys));
}

Matroid Matroid::trusted(SetSystem sys) {
    Matroid m;
    m.sys_ = std::move(sys);
    return m;
}

int Matroid::rank(Subset s) const {
    {
        std::lock_guard<std::mutex> guard(*rank_lock_);
        auto it = rank_memo_->find(s);
        if (it != rank_memo_->end()) return it->second;
    }
    Subset acc = 0;
    int r = 0;
    for (int id : subset_ids(s)) {
        Subset cand = acc | (Subset{1} << id);
        if (sys_.independent(cand)) {
            acc = cand;
            ++r;
        }
    }
    std::lock_guard<std::mutex> guard(*rank_lock_);
    rank_memo_->emplace(s, r);
    return r;
}

int Matroid::connectivity(Subset u) const {
    Subset e = full_set(size());
    if ((u & ~e) != 0) throw ValueError("connectivity: not a subset of the ground set");
    return rank(u) + rank(e & ~u) - rank(e);
}

Subset Matroid::closure(Subset s) const {
    int r = rank(s);
    Subset out = s;
    for (int id = 0; id < size(); ++id) {
        if (contains(s, id)) continue;
        if (rank(s | (Subset{1} << id)) == r) out |= Subset{1} << id;
    }
    return out;
}

bool Matroid::is_coloop(int id) const {
    Subset e = full_set(size());
    return rank(e & ~(Subset{1} << id)) == rank(e) - 1;
}

bool Matroid::oracle_equal(const Matroid& other) const {
    if (names() != other.names()) return false;
    for (Subset s = 0; s < (Subset{1} << size()); ++s)
        if (independent(s) != other.independent(s)) return false;
    return true;
}

// ---- minors, duals, connectivity -------------------------------------------

Matroid minor(const Matroid& m, Subset contract, Subset del) {
    if ((contract & del) != 0) throw ValueError("minor: contract and delete sets overlap");
    int n = m.size();
    if (((contract | del) & ~full_set(n)) != 0) throw ValueError("minor: not a subset of the ground set");
    Subset keep = full_set(n) & ~(contract | del);
    std::vector<int> keep_ids = subset_ids(keep);
    std::vector<std::string> names;
    for (int id : keep_ids) names.push_back(m.names()[id]);
    int rc = m.rank(contract);
    Matroid base = m;  // shares tables/memos; keeps the oracle alive
    auto oracle = [base, keep_ids, contract, rc](Subset s) {
        Subset lifted = contract;
        for (int bit = 0; bit < static_cast<int>(keep_ids.size()); ++bit)
            if (contains(s, bit)) lifted |= Subset{1} << keep_ids[bit];
        return base.rank(lifted) - rc == popcount(s);
    };
    Matroid out = Matroid::trusted(SetSystem::from_oracle(std::move(names), oracle));
    if (m.linear_rep()) {
        // keep_ids are ascending, so surviving columns stay aligned with the
        // canonical (sorted) order of the surviving names.
        out.attach_linear_rep(m.linear_rep()->minor(contract, del, n));
    }
    return out;
}

Matroid restriction(const Matroid& m, Subset keep) {
    return minor(m, 0, full_set(m.size()) & ~keep);
}

Matroid rename_element(const Matroid& m, const std::string& from, const std::string& to) {
    int src = m.id_of(from);
    std::vector<std::string> names = m.names();
    names[src] = to;
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValueError("rename: name already in use: " + to);
    // new id -> old id
    std::vector<int> old_of(names.size());
    for (size_t j = 0; j < sorted.size(); ++j) {
        auto it = std::find(names.begin(), names.end(), sorted[j]);
        old_of[j] = static_cast<int>(it - names.begin());
    }
    Matroid base = m;
    auto oracle = [base, old_of](Subset s) {
        Subset mapped = 0;
        for (int bit : subset_ids(s)) mapped |= Subset{1} << old_of[bit];
        return base.independent(mapped);
    };
    Matroid out = Matroid::trusted(SetSystem::from_oracle(sorted, oracle));
    if (m.linear_rep()) {
        const gf::Matrix& mat = m.linear_rep()->matrix();
        std::vector<std::vector<int>> rows(mat.rows(), std::vector<int>(mat.cols()));
        for (int r = 0; r < mat.rows(); ++r)
            for (size_t j = 0; j < old_of.size(); ++j) rows[r][j] = mat.at(r, old_of[j]);
        out.attach_linear_rep(LinearRep(m.linear_rep()->field_order(), rows));
    }
    return out;
}

Matroid dual(const Matroid& m) {
    int n = m.size();
    int r = m.rank();
    Matroid base = m;
    auto oracle = [base, n, r](Subset s) { return base.rank(full_set(n) & ~s) == r; };
    return Matroid::trusted(SetSystem::from_oracle(m.names(), oracle));
}

std::vector<Subset> circuits(const Matroid& m) {
    int n = m.size();
    std::vector<Subset> out;
    std::vector<Subset> all;
    all.reserve(size_t{1} << n);
    for (Subset s = 0; s < (Subset{1} << n); ++s) all.push_back(s);
    std::stable_sort(all.begin(), all.end(),
                     [](Subset a, Subset b) { return popcount(a) < popcount(b); });
    for (Subset s : all) {
        if (m.independent(s)) continue;
        bool minimal = true;
        for (int id : subset_ids(s))
            if (!m.independent(s ^ (Subset{1} << id))) {
                minimal = false;
                break;
            }
        if (minimal) out.push_back(s);
    }
    return out;
}

std::vector<Subset> connected_components(const Matroid& m) {
    int n = m.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (Subset c : circuits(m)) {
        auto ids = subset_ids(c);
        for (size_t i = 1; i < ids.size(); ++i) parent[find(ids[0])] = find(ids[i]);
    }
    std::map<int, Subset> comps;
    for (int i = 0; i < n; ++i) comps[find(i)] |= Subset{1} << i;
    std::vector<Subset> out;
    for (auto& [root, s] : comps) out.push_back(s);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

bool is_connected(const Matroid& m) {
    return connected_components(m).size() <= 1;
}

std::optional<Subset> find_2separation(const Matroid& m) {
    int n = m.size();
    if (n > 20) throw ResourceError("find_2separation: ground set too large");
    if (n < 4) return std::nullopt;
    // Fix element 0 on the U side so each partition is scanned once.
    for (Subset u = 0; u < (Subset{1} << n); ++u) {
        if (!contains(u, 0)) continue;
        Subset v = full_set(n) & ~u;
        if (popcount(u) < 2 || popcount(v) < 2) continue;
        if (m.connectivity(u) <= 1) return u;
    }
    return std::nullopt;
}

// ---- parallel connection / 2-sum --------------------------------------------

namespace {

Matroid matroid_from_circuits(std::vector<std::string> names, std::vector<Subset> circ) {
    // X independent iff it contains no circuit.
    SetSystem sys = SetSystem::from_oracle(std::move(names), [circ = std::move(circ)](Subset s) {
        for (Subset c : circ)
            if (subset_of(c, s)) return false;
        return true;
    });
    return Matroid::trusted(std::move(sys));
}

}  // namespace

Matroid parallel_connection(const Matroid& m1, const Matroid& m2, const std::string& basepoint) {
    int e1 = m1.id_of(basepoint);
    int e2 = m2.id_of(basepoint);
    std::set<std::string> s1(m1.names().begin(), m1.names().end());
    std::set<std::string> s2(m2.names().begin(), m2.names().end());
    std::vector<std::string> shared;
    std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(shared));
    if (shared != std::vector<std::string>{basepoint})
        throw ValueError("parallel connection: ground sets must meet exactly in the basepoint");
    if (m1.is_loop(e1) || m2.is_loop(e2)) throw ValueError("parallel connection: basepoint is a loop");
    if (m1.is_coloop(e1) || m2.is_coloop(e2))
        throw ValueError("parallel connection: basepoint is a coloop");

    std::vector<std::string> names;
    std::set_union(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(names));
    auto lift = [&names](const Matroid& m, Subset s) {
        Subset out = 0;
        for (int id : subset_ids(s)) {
            auto it = std::lower_bound(names.begin(), names.end(), m.names()[id]);
            out |= Subset{1} << static_cast<int>(it - names.begin());
        }
        return out;
    };
    std::vector<Subset> c1, c2;
    for (Subset c : circuits(m1)) c1.push_back(lift(m1, c));
    for (Subset c : circuits(m2)) c2.push_back(lift(m2, c));
    Subset bp = Subset{1}
                << static_cast<int>(std::lower_bound(names.begin(), names.end(), basepoint) - names.begin());

    std::vector<Subset> fam = c1;
    fam.insert(fam.end(), c2.begin(), c2.end());
    for (Subset a : c1) {
        if (!(a & bp)) continue;
        for (Subset b : c2) {
            if (!(b & bp)) continue;
            fam.push_back((a & ~bp) | (b & ~bp));
        }
    }
    std::sort(fam.begin(), fam.end());
    fam.erase(std::unique(fam.begin(), fam.end()), fam.end());
    return matroid_from_circuits(std::move(names), std::move(fam));
}

Matroid two_sum(const Matroid& m1, const Matroid& m2, const std::string& basepoint) {
    Matroid p = parallel_connection(m1, m2, basepoint);
    return minor(p, 0, Subset{1} << p.id_of(basepoint));
}

// ---- constructions -----------------------------------------------------------

namespace {

std::vector<std::string> letter_names(int n) {
    std::vector<std::string> names;
    if (n > 26) {
        for (int i = 1; i <= n; ++i) {
            std::ostringstream os;
            os << "e" << (i < 10 ? "0" : "") << i;
            names.push_back(os.str());
        }
        return names;
    }
    for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    return names;
}

Matroid sparse_paving_rank3(std::vector<std::string> names, std::vector<Subset> nonspanning) {
    for (size_t i = 0; i < nonspanning.size(); ++i)
        for (size_t j = i + 1; j < nonspanning.size(); ++j)
            if (popcount(nonspanning[i] & nonspanning[j]) > 1)
                throw ValueError("rank-3 sparse paving: circuits share two elements");
    auto oracle = [nonspanning = std::move(nonspanning)](Subset s) {
        int k = popcount(s);
        if (k <= 2) return true;
        if (k >= 4) return false;
        for (Subset c : nonspanning)
            if (c == s) return false;
        return true;
    };
    return Matroid::trusted(SetSystem::from_oracle(std::move(names), oracle));
}

}  // namespace

Matroid uniform_matroid(int rank, int n) {
    return uniform_matroid(rank, letter_names(n));
}

Matroid uniform_matroid(int rank, std::vector<std::string> names) {
    if (rank < 0 || rank > static_cast<int>(names.size()))
        throw ValueError("uniform matroid: rank out of range");
    SetSystem sys = SetSystem::from_oracle(std::move(names),
                                           [rank](Subset s) { return popcount(s) <= rank; });
    return Matroid::trusted(std::move(sys));
}

Matroid rank2_with_parallel_classes(const std::vector<std::vector<std::string>>& classes) {
    std::vector<std::string> names;
    for (const auto& cls : classes) {
        if (cls.empty()) throw ValueError("parallel2: empty class");
        names.insert(names.end(), cls.begin(), cls.end());
    }
    std::vector<std::string> sorted = sorted_unique(std::move(names));
    std::vector<int> class_of(sorted.size());
    for (size_t k = 0; k < classes.size(); ++k)
        for (const auto& nm : classes[k]) {
            auto it = std::lower_bound(sorted.begin(), sorted.end(), nm);
            class_of[it - sorted.begin()] = static_cast<int>(k);
        }
    auto oracle = [class_of](Subset s) {
        auto ids = subset_ids(s);
        if (ids.size() > 2) return false;
        if (ids.size() == 2 && class_of[ids[0]] == class_of[ids[1]]) return false;
        return true;
    };
    return Matroid::trusted(SetSystem::from_oracle(sorted, oracle));
}

Matroid u2n_parallel_pairs(int n) {
    std::vector<std::vector<std::string>> classes;
    for (const auto& b : letter_names(n)) classes.push_back({b + "1", b + "2"});
    return rank2_with_parallel_classes(classes);
}

Matroid graphic_matroid(const std::vector<GraphEdge>& edges, const std::vector<std::string>& edge_names) {
    if (edges.size() != edge_names.size()) throw ValueError("graphic: one name per edge required");
    std::vector<std::string> names = sorted_unique(edge_names);
    std::vector<std::pair<int, int>> ends(names.size());
    std::map<std::string, int> vid;
    for (size_t i = 0; i < edges.size(); ++i) {
        auto it = std::lower_bound(names.begin(), names.end(), edge_names[i]);
        int e = static_cast<int>(it - names.begin());
        for (const std::string* v : {&edges[i].u, &edges[i].v})
            if (!vid.count(*v)) vid.emplace(*v, static_cast<int>(vid.size()));
        ends[e] = {vid.at(edges[i].u), vid.at(edges[i].v)};
    }
    int vcount = static_cast<int>(vid.size());
    auto oracle = [ends, vcount](Subset s) {
        std::vector<int> parent(vcount);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (int id : subset_ids(s)) {
            int a = find(ends[id].first), b = find(ends[id].second);
            if (a == b) return false;
            parent[a] = b;
        }
        return true;
    };
    return Matroid::trusted(SetSystem::from_oracle(names, oracle));
}

namespace {

void check_simple_graph(const std::vector<GraphEdge>& edges) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : edges) {
        if (e.u == e.v) throw ValueError("graph must be simple: loop edge at " + e.u);
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert(key).second)
            throw ValueError("graph must be simple: parallel edge " + e.u + "-" + e.v);
    }
}

}  // namespace

Matroid m_of_graph(const std::vector<GraphEdge>& edges) {
    check_simple_graph(edges);
    std::set<std::string> verts;
    for (const auto& e : edges) {
        verts.insert(e.u);
        verts.insert(e.v);
    }
    std::vector<std::string> names(verts.begin(), verts.end());
    for (const auto& e : edges) names.push_back(e.u + "-" + e.v);
    std::vector<std::string> sorted = sorted_unique(std::move(names));
    if (sorted.size() < 3) throw ValueError("m(G): need at least three ground elements");
    auto id = [&sorted](const std::string& nm) {
        return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), nm) - sorted.begin());
    };
    std::vector<Subset> circ;
    for (const auto& e : edges)
        circ.push_back((Subset{1} << id(e.u)) | (Subset{1} << id(e.v)) | (Subset{1} << id(e.u + "-" + e.v)));
    return sparse_paving_rank3(sorted, std::move(circ));
}

Matroid mplus_of_graph(const std::vector<GraphEdge>& edges) {
    Matroid base = m_of_graph(edges);
    std::set<std::string> verts;
    for (const auto& e : edges) {
        verts.insert(e.u);
        verts.insert(e.v);
    }
    std::vector<std::string> names = base.names();
    for (const auto& v : verts) names.push_back(v + "'");
    std::vector<std::string> sorted = sorted_unique(std::move(names));
    std::vector<int> point_of(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) {
        std::string nm = sorted[i];
        if (!nm.empty() && nm.back() == '\'') nm.pop_back();
        point_of[i] = base.id_of(nm);
    }
    auto oracle = [base_sys = base.set_system(), point_of](Subset s) {
        Subset image = 0;
        for (int id : subset_ids(s)) {
            Subset bit = Subset{1} << point_of[id];
            if (image & bit) return false;  // two parallel copies
            image |= bit;
        }
        return base_sys.independent(image);
    };
    return Matroid::trusted(SetSystem::from_oracle(sorted, oracle));
}

Matroid polygon_matroid(int n) {
    if (n < 3) throw ValueError("polygon: need n >= 3");
    std::vector<std::string> names = letter_names(2 * n);
    std::vector<Subset> circ;
    for (int k = 0; k < n; ++k) {
        int a = 2 * k, b = 2 * k + 1, c = (2 * k + 2) % (2 * n);
        circ.push_back((Subset{1} << a) | (Subset{1} << b) | (Subset{1} << c));
    }
    return sparse_paving_rank3(std::move(names), std::move(circ));
}

Matroid path_matroid(int n, const std::vector<int>& circuit_starts) {
    if (n < 3) throw ValueError("path: need n >= 3");
    std::vector<std::string> names = letter_names(n);
    std::vector<Subset> circ;
    std::vector<int> starts = circuit_starts;
    std::sort(starts.begin(), starts.end());
    for (size_t i = 0; i < starts.size(); ++i) {
        int s = starts[i];
        if (s < 1 || s + 2 > n) throw ValueError("path: circuit start out of range");
        if (i > 0 && starts[i] - starts[i - 1] < 2)
            throw ValueError("path: consecutive circuits overlap in two elements");
        circ.push_back((Subset{7} << (s - 1)));
    }
    return sparse_paving_rank3(std::move(names), std::move(circ));
}

Matroid linear_matroid(int q, const std::vector<std::vector<int>>& rows, std::vector<std::string> names) {
    if (rows.empty()) throw ValueError("linear: empty matrix");
    std::vector<std::string> given = names;
    std::vector<std::string> sorted = sorted_unique(std::move(names));
    size_t ncols = rows[0].size();
    if (ncols != sorted.size()) throw ValueError("linear: column count does not match element count");
    for (const auto& row : rows) {
        if (row.size() != ncols) throw ValueError("linear: ragged matrix");
        for (int v : row)
            if (v < 0 || v >= q) throw ValueError("linear: entry out of field range");
    }
    // Columns arrive in the order of the elements: line; permute to canonical.
    std::vector<std::vector<int>> canon(rows.size(), std::vector<int>(ncols));
    for (size_t j = 0; j < sorted.size(); ++j) {
        auto it = std::find(given.begin(), given.end(), sorted[j]);
        int src = static_cast<int>(it - given.begin());
        for (size_t r = 0; r < rows.size(); ++r) canon[r][j] = rows[r][src];
    }
    LinearRep rep(q, canon);
    auto oracle = [rep](Subset s) { return rep.independent(s); };
    Matroid m = Matroid::trusted(SetSystem::from_oracle(sorted, oracle));
    m.attach_linear_rep(std::move(rep));
    return m;
}

Matroid explicit_matroid(std::vector<std::string> names,
                         const std::vector<std::vector<std::string>>& family) {
    return Matroid::checked(SetSystem::from_family(std::move(names), family));
}

}  // namespace mmso
