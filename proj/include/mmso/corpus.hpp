#pragma once

#include <string>
#include <vector>

#include "mmso/matroid.hpp"

namespace mmso {

// Disjoint-union of two matroids on disjoint ground sets.
Matroid direct_sum(const Matroid& a, const Matroid& b);

namespace corpus {

struct Fixture {
    std::string name;
    std::string summary;
};

std::vector<Fixture> list();
bool has(const std::string& name);
Matroid get(const std::string& name);
// The fixture in matroid text format (native type where the format has one,
// canonical explicit form otherwise).
std::string text(const std::string& name);

// Names of all fixtures with at most max_elements ground elements.
std::vector<std::string> names_up_to(int max_elements);

}  // namespace corpus
}  // namespace mmso
