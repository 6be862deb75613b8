#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include "mmso/automata.hpp"
#include "mmso/matroid.hpp"

namespace mmso::logic {

// Core kinds first, derived sugar kinds after (kept for display and fast
// evaluation; desugared before compilation).
enum class Kind {
    Ind,
    Subseteq,
    Card,
    Not,
    And,
    Exists,
    Or,
    Implies,
    Iff,
    Forall,
    Empty,
    Sing,
    Basis,
    Coind,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Kind kind;
    int var = 0;   // Ind/Card/Empty/Sing/Basis/Coind/Exists/Forall; left of Subseteq
    int var2 = 0;  // right of Subseteq
    int p = 0, q = 0;
    FormulaPtr left, right;
    std::set<int> free;
};

FormulaPtr make_atom_ind(int var);
FormulaPtr make_atom_subseteq(int var, int var2);
FormulaPtr make_atom_card(int var, int p, int q);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr make_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr make_exists(int var, FormulaPtr f);
FormulaPtr make_forall(int var, FormulaPtr f);
FormulaPtr make_named(Kind kind, int var);  // Empty/Sing/Basis/Coind

// Concrete syntax. Bound variables keep their written indices unless that
// would put a variable free in one conjunct and bound in the other, in which
// case the offending bound variable is renamed to a fresh index.
FormulaPtr parse(const std::string& text);
FormulaPtr parse_file(const std::string& path);
std::string to_string(const FormulaPtr& f);

bool is_sentence(const FormulaPtr& f);
int quantifier_depth(const FormulaPtr& f);

// Rewrite to the six core kinds.
FormulaPtr desugar(const FormulaPtr& f);

// Brute-force semantics; theta must cover the free variables.
bool evaluate(const SetSystem& sys, const FormulaPtr& f, const std::map<int, Subset>& theta);

// Named predicates (free variable X1) plus the closed matroid-axioms
// sentence, as parsed formulas.
const std::map<std::string, FormulaPtr>& stdlib_formulas();

// Lemma-style structural compilation against an automaton deciding Ind.
automata::TreeAutomaton compile(const FormulaPtr& f, const automata::TreeAutomaton& a_ind,
                                std::size_t state_cap = automata::default_state_cap());

}  // namespace mmso::logic
