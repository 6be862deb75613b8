#include "mmso/decide.hpp"

#include <sstream>

namespace mmso::decide {

using automata::SigmaTree;
using automata::TreeAutomaton;

SetSystem decode_witness(const TreeAutomaton& a_ind, const SigmaTree& t, int leaf_cap) {
    if (a_ind.index_set.size() != 1)
        throw ValueError("decode_witness: the automaton must use exactly one variable index");
    int index = *a_ind.index_set.begin();
    std::vector<int> leaves = t.leaves();
    int n = static_cast<int>(leaves.size());
    if (n > leaf_cap) throw ResourceError("decode_witness: leaf count exceeds the cap");

    // name leaves in left-to-right order, zero-padded for canonical sorting
    std::vector<std::string> names;
    std::vector<int> element_of_node(t.nodes.size(), -1);
    for (int i = 0; i < n; ++i) {
        std::ostringstream os;
        os << "l" << (i < 10 ? "0" : "") << i;
        names.push_back(os.str());
        element_of_node[leaves[i]] = i;
    }

    std::vector<bool> table(Subset{1} << n, false);
    for (Subset y = 0; y < (Subset{1} << n); ++y) {
        SigmaTree enc = automata::encode(t, element_of_node, {{index, y}});
        table[y] = automata::accepts(a_ind, enc);
    }
    return SetSystem::from_table(names, std::move(table));
}

Verdict decide_theorem(const ClassPresentation& presentation, const logic::FormulaPtr& psi,
                       std::size_t state_cap, int decode_leaf_cap) {
    if (!logic::is_sentence(psi)) throw ValueError("decide_theorem: the sentence has free variables");
    logic::FormulaPtr query = logic::make_not(psi);
    if (presentation.tau) {
        if (!logic::is_sentence(*presentation.tau))
            throw ValueError("decide_theorem: tau has free variables");
        query = logic::make_and(*presentation.tau, query);
    }
    TreeAutomaton compiled = logic::compile(query, presentation.automaton, state_cap);
    std::optional<SigmaTree> witness = automata::emptiness_witness(compiled);
    Verdict verdict;
    if (!witness) {
        verdict.theorem = true;
        return verdict;
    }
    verdict.theorem = false;
    verdict.witness_tree = witness;
    verdict.counterexample = decode_witness(presentation.automaton, *witness, decode_leaf_cap);
    return verdict;
}

}  // namespace mmso::decide
