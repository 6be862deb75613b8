#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmso/automata.hpp"
#include "mmso/branchdec.hpp"
#include "mmso/equiv.hpp"
#include "mmso/logic.hpp"
#include "mmso/matroid.hpp"

namespace mmso::parsetree {

// A parse tree: vertex characters are serialized transition functions, the
// leaves are in bijection with the ground set.
struct ParseTree {
    automata::SigmaTree tree;
    std::vector<int> element_of_node;        // node -> element id, -1 internal
    std::vector<std::string> element_names;  // canonical order

    automata::SigmaTree encode(const std::map<int, Subset>& family) const {
        return automata::encode(tree, element_of_node, family);
    }
};

struct BuildResult {
    ParseTree ptree;
    automata::TreeAutomaton automaton;
};

// Labeling oracle: equal labels must imply equivalence relative to U.
struct EquivOracle {
    std::string kind;
    std::function<std::string(Subset u, Subset x)> label;
};

EquivOracle make_brute_oracle(const SetSystem& sys);
EquivOracle make_gfq_oracle(const Matroid& m);

using OracleFactory = std::function<EquivOracle(const Matroid&)>;
OracleFactory brute_oracle_factory();
OracleFactory gfq_oracle_factory();

struct BuildOptions {
    int label_cap = 64;           // representatives per edge
    bool self_check = true;       // exhaustive oracle-equivalence when |E| <= self_check_cap
    int self_check_cap = 9;
};

// Synthesis from a decomposition plus an equivalence oracle. Matroid-style
// independent representatives with a dependent sink when the family is
// downward closed, full-class representatives otherwise.
BuildResult build(const SetSystem& sys, const branchdec::Decomposition& dec, const EquivOracle& oracle,
                  const BuildOptions& options = {});

// 2-sum assembly over the tree of 3-connected pieces.
struct TwoSumPiece {
    Matroid matroid;
    std::vector<std::string> basepoints;  // basepoint names on this piece
};
struct TwoSumDetail {
    BuildResult result;
    std::vector<TwoSumPiece> pieces;                      // includes the root U_{1,2}
    std::vector<std::tuple<int, int, std::string>> tree;  // piece tree edges with basepoint names
};
TwoSumDetail build_via_2sum_detailed(const Matroid& m, const OracleFactory& oracles,
                                     const BuildOptions& options = {});
BuildResult build_via_2sum(const Matroid& m, const OracleFactory& oracles = brute_oracle_factory(),
                           const BuildOptions& options = {});

// Per-component parse trees joined under a fresh spine character.
BuildResult build_disconnected(const Matroid& m, const OracleFactory& oracles = brute_oracle_factory(),
                               const BuildOptions& options = {});

enum class Builder { Auto, Decomposition, TwoSum };

struct ModelCheckOptions {
    Builder builder = Builder::Auto;
    OracleFactory oracles = brute_oracle_factory();
    BuildOptions build;
    std::size_t state_cap = automata::default_state_cap();
};

bool model_check(const Matroid& m, const logic::FormulaPtr& sentence,
                 const ModelCheckOptions& options = {});

// Serialization: the automaton uses the automaton text format; the tree file
// stores the labeled tree with the leaf bijection inline.
std::string ptree_to_text(const ParseTree& t);
ParseTree ptree_from_text(const std::string& text);

}  // namespace mmso::parsetree
