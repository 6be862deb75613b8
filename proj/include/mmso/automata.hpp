#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mmso/subset.hpp"

namespace mmso::automata {

using Character = std::string;
using State = int;

// Leaf characters of an I-ary automaton are a base character plus a bit per
// variable index, encoded canonically as  base|j1=b1,j2=b2  with ascending
// indices. An empty index set leaves the base character untouched.
Character make_leaf_char(const Character& base, const std::map<int, int>& bits);
struct LeafChar {
    Character base;
    std::map<int, int> bits;
};
LeafChar split_leaf_char(const Character& c);

// Rooted tree per the run semantics: internal vertices have exactly two
// ordered children; the root may itself be the unique leaf.
struct SigmaTree {
    struct Node {
        Character label;
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;
    int root = -1;

    bool is_leaf(int v) const { return nodes[v].left < 0; }
    int leaf_count() const;
    std::vector<int> leaves() const;  // left-to-right
    void validate() const;

    static SigmaTree leaf(Character label);
    static SigmaTree join(Character root_label, const SigmaTree& left, const SigmaTree& right);
};

// Bottom-up nondeterministic tree automaton with partial transition maps.
// delta0 is keyed by full leaf characters; delta2 maps each base character
// to its pair table. A default state, when set, is the implicit image of
// every pair not in the table (an absorbing sink created by complement).
struct TreeAutomaton {
    using PairMap = std::map<std::pair<State, State>, std::set<State>>;

    std::set<Character> base_alphabet;
    std::set<int> index_set;
    int num_states = 0;
    std::set<State> accepting;
    std::map<Character, std::set<State>> delta0;
    std::map<Character, PairMap> delta2;
    std::optional<State> default_state;
    std::set<State> default_image;  // {default_state} when set

    void set_default(State q) {
        default_state = q;
        default_image = {q};
    }

    // Image of delta2, honoring the default; nullptr when undefined.
    const std::set<State>* image(const Character& c, State l, State r) const {
        auto it = delta2.find(c);
        if (it != delta2.end()) {
            auto jt = it->second.find({l, r});
            if (jt != it->second.end()) return &jt->second;
        }
        if (default_state && base_alphabet.count(c)) return &default_image;
        return nullptr;
    }

    std::size_t transition_count() const;
    bool deterministic() const;
    void validate() const;
    std::vector<Character> leaf_alphabet() const;
};

std::size_t default_state_cap();  // MMSO_STATE_CAP, default 1 << 20

// Run sets per vertex; an undefined transition contributes nothing, so a
// vertex with no applicable transition gets the empty set, which then
// propagates to every ancestor.
std::vector<std::set<State>> run(const TreeAutomaton& a, const SigmaTree& t);
bool accepts(const TreeAutomaton& a, const SigmaTree& t);

// Subset construction over reachable state sets; language-equal.
TreeAutomaton determinize(const TreeAutomaton& a, std::size_t state_cap = default_state_cap());
// Fill every undefined transition explicitly with a fresh non-accepting sink.
TreeAutomaton totalize(const TreeAutomaton& a);
// Deterministic input required; totalizes (implicitly), then flips acceptance.
TreeAutomaton complement(const TreeAutomaton& a);
// Conjunction; leaf bits are restricted to each factor's index set.
TreeAutomaton product(const TreeAutomaton& a, const TreeAutomaton& b,
                      std::size_t state_cap = default_state_cap());
// Boolean combinations of deterministic automata as one product run with the
// acceptance condition combined pairwise; inputs are completed with an
// implicit sink first.
enum class BoolOp { Or, Iff };
TreeAutomaton bool_product(BoolOp op, const TreeAutomaton& a, const TreeAutomaton& b,
                           std::size_t state_cap = default_state_cap());
// Deterministic automaton completed with an implicit non-accepting sink.
TreeAutomaton with_default_sink(const TreeAutomaton& a);
// Existential projection of one variable index.
TreeAutomaton project(const TreeAutomaton& a, int j);
// Drop states that are unreachable or cannot reach acceptance. Automata with
// a default state are returned unchanged.
TreeAutomaton prune(const TreeAutomaton& a);

// enc(T, sigma, phi, S): leaves gain membership bits, one per family index.
SigmaTree encode(const SigmaTree& t, const std::vector<int>& element_of_node,
                 const std::map<int, Subset>& family);

// Witness trees. emptiness_witness() returns a smallest-depth accepted tree
// when the language is nonempty; reachable_avoiding() additionally requires
// every run set on the witness to avoid Z.
std::optional<SigmaTree> emptiness_witness(const TreeAutomaton& a);
std::optional<SigmaTree> reachable_avoiding(const TreeAutomaton& a, const std::set<State>& z, State q);

std::string to_text(const TreeAutomaton& a);
TreeAutomaton automaton_from_text(const std::string& text);
std::string tree_to_text(const SigmaTree& t);
SigmaTree tree_from_text(const std::string& text);

// Deferred conjunction/projection chain. Intermediate products are never
// materialized: determinize() runs the subset construction directly over the
// virtual pair space, querying component transitions on demand.
class Pipeline {
  public:
    static Pipeline wrap(TreeAutomaton a);
    static Pipeline conjoin(Pipeline a, Pipeline b);
    static Pipeline project(Pipeline a, int j);

    const std::set<int>& index_set() const;
    const std::set<Character>& base_alphabet() const;
    // The wrapped automaton when the chain is a single explicit automaton.
    const TreeAutomaton* wrapped() const;

    // Subset construction over reachable run sets of the virtual automaton.
    TreeAutomaton determinize(std::size_t state_cap = default_state_cap()) const;
    // Explicit product/projection route.
    TreeAutomaton materialize(std::size_t state_cap = default_state_cap()) const;

  private:
    struct Node;
    std::shared_ptr<Node> node_;
};

}  // namespace mmso::automata
