#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmso/branchdec.hpp"
#include "mmso/matroid.hpp"
#include "mmso/subset.hpp"

namespace mmso::equiv {

// Membership bits of X u Z over all Z inside E - U, packed in fixed Z order.
// Two subsets of U are equivalent relative to U exactly when their
// signatures agree.
using Signature = std::vector<std::uint64_t>;

Signature signature(const SetSystem& sys, Subset u, Subset x);

struct ClassTable {
    Subset u = 0;
    std::map<Subset, int> class_of;      // every X inside U
    std::vector<Subset> representatives;  // lex-least member per class

    int count() const { return static_cast<int>(representatives.size()); }
};

ClassTable classes(const SetSystem& sys, Subset u, int exhaustive_cap = 16);
int class_count(const SetSystem& sys, Subset u, int exhaustive_cap = 16);

// GF(q) refinement: label independent X by the canonical form of
// span(X) ∩ (span(U) ∩ span(E-U)); dependent X collapse to one label.
struct GfqLabeling {
    std::map<Subset, std::string> label_of;
    int label_count = 0;
};
GfqLabeling gfq_refinement(const LinearRep& rep, int n, Subset u);

// One memoising class-count evaluator per set-system (used by the
// decomposition sweeps).
class ClassCounter {
  public:
    explicit ClassCounter(const SetSystem& sys) : sys_(sys) {}
    int operator()(Subset u);

  private:
    const SetSystem& sys_;
    std::map<Subset, int> cache_;
};

int dw_of_decomposition(const SetSystem& sys, const branchdec::Decomposition& d);
int dw_exact(const SetSystem& sys, int cap = 8);

}  // namespace mmso::equiv
