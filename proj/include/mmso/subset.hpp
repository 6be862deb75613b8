#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmso {

// Subsets of a ground set with at most 32 elements, as bitmasks in canonical
// element order (bit i = element with id i).
using Subset = std::uint32_t;

inline int popcount(Subset s) { return std::popcount(s); }

inline bool subset_of(Subset a, Subset b) { return (a & ~b) == 0; }

inline Subset full_set(int n) {
    return n >= 32 ? ~Subset{0} : ((Subset{1} << n) - 1);
}

inline bool contains(Subset s, int id) { return (s >> id) & 1u; }

// Lexicographic order on the sorted id sequences of two subsets.
// {} < {0} < {0,3} < {1} < {1,2}.
inline bool lex_less(Subset a, Subset b) {
    while (a != 0 && b != 0) {
        int ia = std::countr_zero(a);
        int ib = std::countr_zero(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;
}

// All submasks of `mask` in plain numeric order (fast enumeration).
inline std::vector<Subset> submasks(Subset mask) {
    std::vector<Subset> out;
    Subset s = 0;
    while (true) {
        out.push_back(s);
        if (s == mask) break;
        s = (s - mask) & mask;
    }
    return out;
}

// All submasks of `mask` in lexicographic (sorted-id-sequence) order.
inline std::vector<Subset> submasks_lex(Subset mask) {
    std::vector<Subset> out = submasks(mask);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

inline std::vector<int> subset_ids(Subset s) {
    std::vector<int> out;
    while (s != 0) {
        out.push_back(std::countr_zero(s));
        s &= s - 1;
    }
    return out;
}

class ValueError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace mmso
