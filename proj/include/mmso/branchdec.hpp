#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmso/matroid.hpp"
#include "mmso/subset.hpp"

namespace mmso::branchdec {

// Unrooted subcubic tree with leaves in bijection with the ground set.
// A one-element ground set is carried by a single-vertex tree.
struct Decomposition {
    std::vector<std::vector<int>> adj;  // vertex -> neighbours
    std::vector<int> leaf_of;           // element id -> leaf vertex
    std::vector<int> element_of;        // vertex -> element id, -1 for internal

    int vertex_count() const { return static_cast<int>(adj.size()); }
    int element_count() const { return static_cast<int>(leaf_of.size()); }
    void validate() const;

    // Elements whose leaf lies on u's side of the edge (u, v).
    Subset displayed(int u, int v) const;
    // All edges as (u, v) with u < v.
    std::vector<std::pair<int, int>> edges() const;
    // Both displayed sets per edge, deduplicated.
    std::vector<Subset> displayed_sets() const;
};

// Newick-like text: leaves are element names, round-trip stable.
std::string to_newick(const Decomposition& d, const std::vector<std::string>& names);
Decomposition from_newick(const std::string& text, const std::vector<std::string>& names);

// Every decomposition of n elements, one call each. (2n-5)!! trees for n >= 3.
void enumerate_decompositions(int n, const std::function<void(const Decomposition&)>& visit);

// A caterpillar decomposition whose cherries follow the given grouping: the
// groups are laid out left to right along a spine, pairing group members.
Decomposition caterpillar(const std::vector<std::vector<int>>& groups, int n);

int width(const Matroid& m, const Decomposition& d);

struct ExactWidth {
    int width;
    Decomposition witness;
};
ExactWidth bw_exact(const Matroid& m, int cap = 8);

// Maximum-cardinality common independent set via augmenting paths, plus the
// final exchange-graph reachability (used for the minimizing cut).
struct IntersectionResult {
    Subset common;
    Subset reachable;  // elements reachable from the M1-extendable sources
};
IntersectionResult matroid_intersection(const Matroid& m1, const Matroid& m2);
Subset matroid_intersection_max(const Matroid& m1, const Matroid& m2);

// Z with D1 <= Z <= E - D2 minimizing lambda_M(Z).
Subset lambda_minimize(const Matroid& m, Subset d1, Subset d2);

// Branch decomposition of width at most 3*lambda+1, assuming bw(M) <= lambda.
Decomposition approx_branch_decomposition(const Matroid& m, int lambda);

// Rank function of the auxiliary matroid on U used by the refinement step,
// normalized so rank of the empty set is zero.
int aux_rank(const Matroid& m, Subset u, Subset basis, Subset x);

// bw_exact witness when the ground set is small, lambda-escalating
// approximation otherwise. Deterministic.
Decomposition some_decomposition(const Matroid& m);

}  // namespace mmso::branchdec
