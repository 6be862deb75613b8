#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmso::gf {

// Arithmetic in GF(q) for a prime power q. Elements are integers 0..q-1;
// for q = p^k with k > 1 the integer encodes a degree-<k polynomial over
// GF(p) in base p, reduced modulo a fixed monic irreducible polynomial
// (the least one in base-p encoding order).
class Field {
  public:
    explicit Field(int q);

    int order() const { return q_; }
    int characteristic() const { return p_; }
    int degree() const { return k_; }

    int add(int a, int b) const { return add_[a * q_ + b]; }
    int sub(int a, int b) const { return add(a, neg_[b]); }
    int neg(int a) const { return neg_[a]; }
    int mul(int a, int b) const { return mul_[a * q_ + b]; }
    int inv(int a) const;

    static bool is_prime_power(int q);

  private:
    int q_, p_, k_;
    std::vector<int> add_, mul_, neg_, inv_;
};

// Dense matrix over GF(q), row major.
class Matrix {
  public:
    Matrix(const Field* f, int rows, int cols)
        : field_(f), rows_(rows), cols_(cols), a_(rows * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Field& field() const { return *field_; }

    int& at(int r, int c) { return a_[r * cols_ + c]; }
    int at(int r, int c) const { return a_[r * cols_ + c]; }

    // In-place reduced row echelon form; returns the rank.
    int rref();
    int rank() const;

    // Matrix whose rows span the null space of this matrix.
    Matrix kernel_basis() const;

    // Keep the given columns, in the given order.
    Matrix select_columns(const std::vector<int>& cols) const;

    // Canonical key for the row space: RREF with zero rows dropped.
    std::string row_space_key() const;

    std::vector<std::vector<int>> row_list() const;
    static Matrix from_rows(const Field* f, const std::vector<std::vector<int>>& rows);

  private:
    const Field* field_;
    int rows_, cols_;
    std::vector<int> a_;
};

// Rows spanning the intersection of the row spaces of a and b.
Matrix span_intersection(const Matrix& a, const Matrix& b);

// Number of subspaces of GF(q)^n (sum of Gaussian binomial coefficients).
// Computed with unsigned 64-bit arithmetic; fine at desk scale.
std::uint64_t subspace_count(int q, int n);

}  // namespace mmso::gf
