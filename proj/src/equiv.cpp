#include "mmso/equiv.hpp"

#include <algorithm>
#include <unordered_map>

namespace mmso::equiv {

namespace {

struct SigHash {
    size_t operator()(const Signature& sig) const {
        size_t h = 1469598103934665603ull;
        for (std::uint64_t w : sig) {
            h ^= static_cast<size_t>(w);
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace

Signature signature(const SetSystem& sys, Subset u, Subset x) {
    int n = sys.size();
    Subset v = full_set(n) & ~u;
    std::vector<Subset> zs = submasks(v);
    Signature sig((zs.size() + 63) / 64, 0);
    for (size_t i = 0; i < zs.size(); ++i)
        if (sys.independent(x | zs[i])) sig[i / 64] |= std::uint64_t{1} << (i % 64);
    return sig;
}

ClassTable classes(const SetSystem& sys, Subset u, int exhaustive_cap) {
    int n = sys.size();
    if (n > exhaustive_cap) throw ResourceError("classes: ground set larger than the exhaustive cap");
    if ((u & ~full_set(n)) != 0) throw ValueError("classes: not a subset of the ground set");
    ClassTable table;
    table.u = u;
    std::unordered_map<Signature, int, SigHash> index;
    for (Subset x : submasks_lex(u)) {
        Signature sig = signature(sys, u, x);
        auto [it, fresh] = index.emplace(std::move(sig), static_cast<int>(table.representatives.size()));
        if (fresh) table.representatives.push_back(x);
        table.class_of[x] = it->second;
    }
    return table;
}

int class_count(const SetSystem& sys, Subset u, int exhaustive_cap) {
    int n = sys.size();
    if (n > exhaustive_cap) throw ResourceError("classes: ground set larger than the exhaustive cap");
    Subset v = full_set(n) & ~u;
    std::vector<Subset> zs = submasks(v);
    std::unordered_map<Signature, int, SigHash> index;
    for (Subset x : submasks(u)) {
        Signature sig((zs.size() + 63) / 64, 0);
        for (size_t i = 0; i < zs.size(); ++i)
            if (sys.independent(x | zs[i])) sig[i / 64] |= std::uint64_t{1} << (i % 64);
        index.emplace(std::move(sig), 0);
    }
    return static_cast<int>(index.size());
}

GfqLabeling gfq_refinement(const LinearRep& rep, int n, Subset u) {
    if ((u & ~full_set(n)) != 0) throw ValueError("gfq_refinement: not a subset of the ground set");
    const gf::Matrix& mat = rep.matrix();
    gf::Matrix span_u = mat.select_columns(subset_ids(u));
    gf::Matrix span_v = mat.select_columns(subset_ids(full_set(n) & ~u));
    // Row spaces of the transposes: work with column spans as row spans.
    auto rows_of_cols = [&](const gf::Matrix& cols) {
        std::vector<std::vector<int>> rows;
        for (int c = 0; c < cols.cols(); ++c) {
            std::vector<int> row;
            for (int r = 0; r < cols.rows(); ++r) row.push_back(cols.at(r, c));
            rows.push_back(std::move(row));
        }
        if (rows.empty()) rows.push_back(std::vector<int>(cols.rows(), 0));
        return gf::Matrix::from_rows(&rep.field(), rows);
    };
    gf::Matrix u_rows = rows_of_cols(span_u);
    gf::Matrix v_rows = rows_of_cols(span_v);
    gf::Matrix w = gf::span_intersection(u_rows, v_rows);

    GfqLabeling out;
    std::map<std::string, int> seen;
    for (Subset x : submasks_lex(u)) {
        std::string label;
        if (!rep.independent(x)) {
            label = "DEPENDENT";
        } else {
            gf::Matrix x_rows = rows_of_cols(mat.select_columns(subset_ids(x)));
            label = gf::span_intersection(x_rows, w).row_space_key();
        }
        seen.emplace(label, 0);
        out.label_of[x] = std::move(label);
    }
    out.label_count = static_cast<int>(seen.size());
    return out;
}

int ClassCounter::operator()(Subset u) {
    auto it = cache_.find(u);
    if (it != cache_.end()) return it->second;
    int c = class_count(sys_, u, SetSystem::kTableCap);
    cache_.emplace(u, c);
    return c;
}

int dw_of_decomposition(const SetSystem& sys, const branchdec::Decomposition& d) {
    d.validate();
    if (d.element_count() != sys.size())
        throw ValueError("dw_of_decomposition: decomposition does not match the set-system");
    if (sys.size() <= 1) return 1;
    ClassCounter counter(sys);
    int best = 1;
    for (Subset u : d.displayed_sets()) best = std::max(best, counter(u));
    return best;
}

int dw_exact(const SetSystem& sys, int cap) {
    int n = sys.size();
    if (n > cap) throw ResourceError("dw_exact: ground set larger than the exhaustive cap");
    if (n <= 1) return 1;
    ClassCounter counter(sys);
    int best = -1;
    branchdec::enumerate_decompositions(n, [&](const branchdec::Decomposition& d) {
        int worst = 1;
        for (Subset u : d.displayed_sets()) {
            worst = std::max(worst, counter(u));
            if (best >= 0 && worst >= best) return;  // cannot improve
        }
        if (best < 0 || worst < best) best = worst;
    });
    return best;
}

}  // namespace mmso::equiv
