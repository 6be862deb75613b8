#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmso/gf.hpp"
#include "mmso/subset.hpp"

namespace mmso {

// Ground sets are kept in canonical order: display names sorted ascending,
// element id = position in that order. Instances share their independence
// table / memo through shared_ptr, so copies are cheap and safe to capture
// in oracle closures.
class SetSystem {
  public:
    static constexpr int kTableCap = 24;

    SetSystem() = default;

    // Explicit family over named elements. Names are sorted internally.
    static SetSystem from_family(std::vector<std::string> names,
                                 const std::vector<std::vector<std::string>>& family);
    static SetSystem from_table(std::vector<std::string> names, std::vector<bool> table);
    static SetSystem from_oracle(std::vector<std::string> names,
                                 std::function<bool(Subset)> oracle);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int id) const { return names_[id]; }
    int id_of(const std::string& name) const;
    Subset subset_of_names(const std::vector<std::string>& names) const;
    std::vector<std::string> names_of(Subset s) const;

    bool independent(Subset s) const;
    bool has_table() const { return table_ != nullptr; }

    bool downward_closed() const;
    std::vector<Subset> independent_family() const;

  private:
    std::vector<std::string> names_;
    std::shared_ptr<const std::vector<bool>> table_;
    std::function<bool(Subset)> oracle_;
    std::shared_ptr<std::mutex> memo_lock_;
    std::shared_ptr<std::unordered_map<Subset, bool>> memo_;
};

struct AxiomReport {
    bool ok = true;
    std::string violation;            // empty when ok
    std::optional<Subset> witness_a;  // offending sets, when applicable
    std::optional<Subset> witness_b;
};

// Nonempty, downward-closed, exchange. Returns a witness on failure.
AxiomReport verify_matroid_axioms(const SetSystem& sys);

class LinearRep {
  public:
    LinearRep(int q, const std::vector<std::vector<int>>& rows);

    int field_order() const { return field_->order(); }
    const gf::Field& field() const { return *field_; }
    const gf::Matrix& matrix() const { return *matrix_; }

    bool independent(Subset cols) const;
    int rank_of(Subset cols) const;

    // Contract C and delete D (ids in this rep's column space of width n);
    // remaining columns keep their relative order.
    LinearRep minor(Subset contract, Subset del, int n) const;

  private:
    std::shared_ptr<gf::Field> field_;
    std::shared_ptr<gf::Matrix> matrix_;
};

class Matroid {
  public:
    Matroid() = default;

    // Validates the axioms (explicit-family route).
    static Matroid checked(SetSystem sys);
    // Caller guarantees matroid-ness (algebraic constructions).
    static Matroid trusted(SetSystem sys);

    const SetSystem& set_system() const { return sys_; }
    int size() const { return sys_.size(); }
    const std::vector<std::string>& names() const { return sys_.names(); }
    int id_of(const std::string& name) const { return sys_.id_of(name); }
    Subset subset_of_names(const std::vector<std::string>& v) const { return sys_.subset_of_names(v); }

    bool independent(Subset s) const { return sys_.independent(s); }
    int rank(Subset s) const;
    int rank() const { return rank(full_set(size())); }
    int connectivity(Subset u) const;
    Subset closure(Subset s) const;
    bool is_loop(int id) const { return rank(Subset{1} << id) == 0; }
    bool is_coloop(int id) const;

    const std::shared_ptr<const LinearRep>& linear_rep() const { return rep_; }
    void attach_linear_rep(LinearRep rep) { rep_ = std::make_shared<const LinearRep>(std::move(rep)); }

    bool oracle_equal(const Matroid& other) const;

  private:
    SetSystem sys_;
    std::shared_ptr<const LinearRep> rep_;
    std::shared_ptr<std::mutex> rank_lock_ = std::make_shared<std::mutex>();
    std::shared_ptr<std::unordered_map<Subset, int>> rank_memo_ =
        std::make_shared<std::unordered_map<Subset, int>>();
};

// Minors, duality, connectivity structure.
Matroid minor(const Matroid& m, Subset contract, Subset del);
Matroid dual(const Matroid& m);
Matroid restriction(const Matroid& m, Subset keep);
// Same matroid with one element renamed (linear representation kept).
Matroid rename_element(const Matroid& m, const std::string& from, const std::string& to);

// Minimal dependent sets, by increasing size.
std::vector<Subset> circuits(const Matroid& m);

std::vector<Subset> connected_components(const Matroid& m);
bool is_connected(const Matroid& m);
// A partition (U, E-U) with |U|,|E-U| >= 2 and lambda <= 1, if one exists.
std::optional<Subset> find_2separation(const Matroid& m);

// Gluing along a shared basepoint element (present in both ground sets).
Matroid parallel_connection(const Matroid& m1, const Matroid& m2, const std::string& basepoint);
Matroid two_sum(const Matroid& m1, const Matroid& m2, const std::string& basepoint);

// ---- construction descriptors -------------------------------------------

struct GraphEdge {
    std::string u, v;
};

Matroid uniform_matroid(int rank, int n);
Matroid uniform_matroid(int rank, std::vector<std::string> names);
// Rank <= 2 matroid from parallel classes (each class a group of mutually
// parallel elements).
Matroid rank2_with_parallel_classes(const std::vector<std::vector<std::string>>& classes);
// U_{2,n} with every element replaced by a parallel pair (x1, x2 per class).
Matroid u2n_parallel_pairs(int n);
Matroid graphic_matroid(const std::vector<GraphEdge>& edges, const std::vector<std::string>& edge_names);
// Rank-3 sparse paving matroid of a simple graph: ground = vertices + edges,
// non-spanning circuits {u, uv, v}.
Matroid m_of_graph(const std::vector<GraphEdge>& edges);
// m(G) with a parallel copy v' added for every vertex element v.
Matroid mplus_of_graph(const std::vector<GraphEdge>& edges);
Matroid polygon_matroid(int n);
Matroid path_matroid(int n, const std::vector<int>& circuit_starts);
Matroid linear_matroid(int q, const std::vector<std::vector<int>>& rows,
                       std::vector<std::string> names);
Matroid explicit_matroid(std::vector<std::string> names,
                         const std::vector<std::vector<std::string>>& family);

// ---- text format ----------------------------------------------------------

Matroid matroid_from_text(const std::string& text);
std::string matroid_to_text(const Matroid& m);  // canonical explicit form
Matroid matroid_from_file(const std::string& path);
void matroid_to_file(const Matroid& m, const std::string& path);

}  // namespace mmso
