#pragma once

#include <optional>
#include <string>

#include "mmso/automata.hpp"
#include "mmso/logic.hpp"
#include "mmso/matroid.hpp"

namespace mmso::decide {

// A class of set-systems presented by the language of one automaton deciding
// Ind, optionally narrowed by a defining sentence tau.
struct ClassPresentation {
    automata::TreeAutomaton automaton;  // single-index, decides Ind
    std::optional<logic::FormulaPtr> tau;
};

struct Verdict {
    bool theorem = false;
    std::optional<automata::SigmaTree> witness_tree;
    std::optional<SetSystem> counterexample;
};

// Compile tau & ~psi (or ~psi) against the presentation and test emptiness;
// a witness tree is decoded into a concrete set-system.
Verdict decide_theorem(const ClassPresentation& presentation, const logic::FormulaPtr& psi,
                       std::size_t state_cap = automata::default_state_cap(), int decode_leaf_cap = 16);

// Realize the set-system encoded by a tree: ground set = leaves, a subset is
// independent when the automaton accepts its bit-encoding.
SetSystem decode_witness(const automata::TreeAutomaton& a_ind, const automata::SigmaTree& t,
                         int leaf_cap = 16);

}  // namespace mmso::decide
