#include "mmso/gf.hpp"

#include <algorithm>
#include <sstream>

#include "mmso/subset.hpp"

namespace mmso::gf {

namespace {

// Polynomials over GF(p) encoded base p, least significant coefficient first.
int poly_mul_mod(int a, int b, int p, int modpoly, int k) {
    // Schoolbook multiply into coefficient vector, then reduce by modpoly.
    std::vector<int> coef(2 * k, 0);
    std::vector<int> av, bv;
    for (int x = a; x > 0; x /= p) av.push_back(x % p);
    for (int x = b; x > 0; x /= p) bv.push_back(x % p);
    for (size_t i = 0; i < av.size(); ++i)
        for (size_t j = 0; j < bv.size(); ++j)
            coef[i + j] = (coef[i + j] + av[i] * bv[j]) % p;
    std::vector<int> mv;
    for (int x = modpoly; x > 0; x /= p) mv.push_back(x % p);
    int deg_m = static_cast<int>(mv.size()) - 1;
    for (int d = 2 * k - 1; d >= deg_m; --d) {
        if (coef[d] == 0) continue;
        int c = coef[d];  // leading coefficient of modpoly is 1
        for (int j = 0; j <= deg_m; ++j) {
            int idx = d - deg_m + j;
            coef[idx] = ((coef[idx] - c * mv[j]) % p + p * p) % p;
        }
    }
    int out = 0;
    for (int d = deg_m - 1; d >= 0; --d) out = out * p + coef[d];
    return out;
}

int poly_add(int a, int b, int p, int k) {
    int out = 0, mul = 1;
    for (int i = 0; i < k; ++i) {
        out += ((a % p + b % p) % p) * mul;
        a /= p;
        b /= p;
        mul *= p;
    }
    return out;
}

bool is_irreducible(int poly, int p, int k) {
    (void)k;
    // poly encodes a monic degree-k polynomial (leading coefficient implicit 1
    // is included in the encoding: value in [p^k, 2*p^k) range not used; we
    // pass the full encoding including the leading term).
    // Trial division by all monic polynomials of degree 1..k/2.
    std::vector<int> pv;
    for (int x = poly; x > 0; x /= p) pv.push_back(x % p);
    int deg = static_cast<int>(pv.size()) - 1;
    for (int d = 1; 2 * d <= deg; ++d) {
        int lo = 1;
        for (int i = 0; i < d; ++i) lo *= p;
        for (int tail = 0; tail < lo; ++tail) {
            int divisor = lo + tail;  // monic degree-d
            // Polynomial remainder of poly by divisor.
            std::vector<int> rem = pv;
            std::vector<int> dv;
            for (int x = divisor; x > 0; x /= p) dv.push_back(x % p);
            for (int t = deg; t >= d; --t) {
                int c = rem[t];
                if (c == 0) continue;
                for (int j = 0; j <= d; ++j) {
                    int idx = t - d + j;
                    rem[idx] = ((rem[idx] - c * dv[j]) % p + p * p) % p;
                }
            }
            bool zero = true;
            for (int j = 0; j < d; ++j)
                if (rem[j] != 0) zero = false;
            if (zero) return false;
        }
    }
    return true;
}

}  // namespace

bool Field::is_prime_power(int q) {
    if (q < 2) return false;
    int p = 2;
    while (p * p <= q) {
        if (q % p == 0) break;
        ++p;
    }
    if (p * p > q) return true;  // q itself prime
    int x = q;
    while (x % p == 0) x /= p;
    return x == 1;
}

Field::Field(int q) : q_(q) {
    if (!is_prime_power(q)) throw ValueError("GF(" + std::to_string(q) + "): order is not a prime power");
    p_ = 2;
    while (q % p_ != 0) ++p_;
    k_ = 0;
    for (int x = q; x > 1; x /= p_) ++k_;

    int modpoly = 0;
    if (k_ > 1) {
        // least monic irreducible of degree k, base-p encoded with its
        // leading coefficient
        int lo = 1;
        for (int i = 0; i < k_; ++i) lo *= p_;
        for (int tail = 0; tail < lo; ++tail) {
            if (is_irreducible(lo + tail, p_, k_)) {
                modpoly = lo + tail;
                break;
            }
        }
    }

    add_.resize(q * q);
    mul_.resize(q * q);
    neg_.resize(q);
    inv_.assign(q, -1);
    for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
            if (k_ == 1) {
                add_[a * q + b] = (a + b) % p_;
                mul_[a * q + b] = (a * b) % p_;
            } else {
                add_[a * q + b] = poly_add(a, b, p_, k_);
                mul_[a * q + b] = poly_mul_mod(a, b, p_, modpoly, k_);
            }
        }
    }
    for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
            if (add_[a * q + b] == 0) neg_[a] = b;
            if (mul_[a * q + b] == 1) inv_[a] = b;
        }
    }
}

int Field::inv(int a) const {
    if (a == 0) throw ValueError("GF: division by zero");
    return inv_[a];
}

int Matrix::rref() {
    const Field& F = *field_;
    int pivot_row = 0;
    for (int c = 0; c < cols_ && pivot_row < rows_; ++c) {
        int pr = -1;
        for (int r = pivot_row; r < rows_; ++r)
            if (at(r, c) != 0) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        for (int j = 0; j < cols_; ++j) std::swap(at(pr, j), at(pivot_row, j));
        int s = F.inv(at(pivot_row, c));
        for (int j = 0; j < cols_; ++j) at(pivot_row, j) = F.mul(at(pivot_row, j), s);
        for (int r = 0; r < rows_; ++r) {
            if (r == pivot_row || at(r, c) == 0) continue;
            int t = at(r, c);
            for (int j = 0; j < cols_; ++j)
                at(r, j) = F.sub(at(r, j), F.mul(t, at(pivot_row, j)));
        }
        ++pivot_row;
    }
    return pivot_row;
}

int Matrix::rank() const {
    Matrix m = *this;
    return m.rref();
}

Matrix Matrix::kernel_basis() const {
    Matrix m = *this;
    int rk = m.rref();
    // Locate pivot columns.
    std::vector<int> pivot_col(rk, -1);
    std::vector<bool> is_pivot(cols_, false);
    for (int r = 0, c = 0; r < rk; ++r) {
        while (c < cols_ && m.at(r, c) == 0) ++c;
        pivot_col[r] = c;
        is_pivot[c] = true;
    }
    Matrix ker(field_, cols_ - rk, cols_);
    int kr = 0;
    const Field& F = *field_;
    for (int c = 0; c < cols_; ++c) {
        if (is_pivot[c]) continue;
        ker.at(kr, c) = 1;
        for (int r = 0; r < rk; ++r)
            ker.at(kr, pivot_col[r]) = F.neg(m.at(r, c));
        ++kr;
    }
    return ker;
}

Matrix Matrix::select_columns(const std::vector<int>& cols) const {
    Matrix out(field_, rows_, static_cast<int>(cols.size()));
    for (int r = 0; r < rows_; ++r)
        for (size_t j = 0; j < cols.size(); ++j) out.at(r, static_cast<int>(j)) = at(r, cols[j]);
    return out;
}

std::string Matrix::row_space_key() const {
    Matrix m = *this;
    int rk = m.rref();
    std::ostringstream os;
    os << rk << ":";
    for (int r = 0; r < rk; ++r) {
        for (int c = 0; c < cols_; ++c) os << m.at(r, c) << (c + 1 < cols_ ? "," : "");
        os << ";";
    }
    return os.str();
}

std::vector<std::vector<int>> Matrix::row_list() const {
    std::vector<std::vector<int>> out(rows_, std::vector<int>(cols_));
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out[r][c] = at(r, c);
    return out;
}

Matrix Matrix::from_rows(const Field* f, const std::vector<std::vector<int>>& rows) {
    int rc = static_cast<int>(rows.size());
    int cc = rc == 0 ? 0 : static_cast<int>(rows[0].size());
    Matrix m(f, rc, cc);
    for (int r = 0; r < rc; ++r) {
        if (static_cast<int>(rows[r].size()) != cc) throw ValueError("ragged matrix rows");
        for (int c = 0; c < cc; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

Matrix span_intersection(const Matrix& a, const Matrix& b) {
    // Vectors x with x = u*A = v*B. Solve [A^T | -B^T] (u,v)^T = 0.
    const Field* f = &a.field();
    const Field& F = *f;
    int n = a.cols();
    Matrix sys(f, n, a.rows() + b.rows());
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < a.rows(); ++r) sys.at(c, r) = a.at(r, c);
        for (int r = 0; r < b.rows(); ++r) sys.at(c, a.rows() + r) = F.neg(b.at(r, c));
    }
    Matrix ker = sys.kernel_basis();
    Matrix out(f, ker.rows(), n);
    for (int r = 0; r < ker.rows(); ++r)
        for (int c = 0; c < n; ++c) {
            int acc = 0;
            for (int i = 0; i < a.rows(); ++i)
                acc = F.add(acc, F.mul(ker.at(r, i), a.at(i, c)));
            out.at(r, c) = acc;
        }
    return out;
}

std::uint64_t subspace_count(int q, int n) {
    // Gaussian binomial [n k]_q summed over k.
    std::uint64_t total = 0;
    for (int k = 0; k <= n; ++k) {
        // [n k]_q = prod_{i=0}^{k-1} (q^(n-i)-1)/(q^(i+1)-1)
        // evaluated with exact integer arithmetic via alternating mul/div.
        std::uint64_t num = 1, den = 1;
        for (int i = 0; i < k; ++i) {
            std::uint64_t qn = 1, qd = 1;
            for (int t = 0; t < n - i; ++t) qn *= static_cast<std::uint64_t>(q);
            for (int t = 0; t < i + 1; ++t) qd *= static_cast<std::uint64_t>(q);
            num *= qn - 1;
            den *= qd - 1;
        }
        total += num / den;
    }
    return total;
}

}  // namespace mmso::gf
