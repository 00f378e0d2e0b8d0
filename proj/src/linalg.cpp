#include "tilescope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "tilescope/error.hpp"

namespace tilescope {

BigIntMatrix to_big(const IntMatrix& m) {
    BigIntMatrix r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (long long x : m[i]) r[i].emplace_back(static_cast<long>(x));
    return r;
}

BigIntMatrix multiply(const BigIntMatrix& a, const BigIntMatrix& b) {
    const std::size_t n = a.size(), k = b.size(), p = b.empty() ? 0 : b[0].size();
    BigIntMatrix r(n, std::vector<Integer>(p, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            for (std::size_t j = 0; j < p; ++j) r[i][j] += a[i][t] * b[t][j];
        }
    return r;
}

BigIntMatrix power(const IntMatrix& m, unsigned k) {
    const std::size_t n = m.size();
    BigIntMatrix r(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
    BigIntMatrix base = to_big(m);
    while (k) {
        if (k & 1u) r = multiply(r, base);
        k >>= 1u;
        if (k) base = multiply(base, base);
    }
    return r;
}

std::optional<unsigned> primitivity_exponent(const IntMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<char>> a(n, std::vector<char>(n)), p;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j] != 0;
    p = a;
    for (unsigned l = 1; l <= n * n; ++l) {
        bool all = true;
        for (auto& row : p)
            for (char x : row) all = all && x;
        if (all) return l;
        std::vector<std::vector<char>> q(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < n; ++t)
                if (p[i][t])
                    for (std::size_t j = 0; j < n; ++j) q[i][j] |= a[t][j];
        p = q;
    }
    return std::nullopt;
}

namespace {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// null vector of (A - lambda I) by inverse iteration
std::vector<double> eigvec(const MatL& A, long double lambda) {
    const auto n = A.rows();
    MatL B = A - (lambda * (1 + 1e-15L) + 1e-15L) * MatL::Identity(n, n);
    Eigen::PartialPivLU<MatL> lu(B);
    VecL x = VecL::Ones(n);
    for (int it = 0; it < 8; ++it) {
        x = lu.solve(x);
        x /= x.cwiseAbs().maxCoeff();
    }
    long double sum = x.sum();
    std::vector<double> out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<double>(x(i) / sum);
    return out;
}

}  // namespace

PerronFrobenius perron_frobenius(const IntMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) throw std::invalid_argument("empty matrix");
    MatL A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = static_cast<long double>(m[i][j]);

    PerronFrobenius pf;
    if (n == 1) {
        pf.value = static_cast<double>(A(0, 0));
        pf.right = pf.left = {1.0};
        return pf;
    }
    Eigen::EigenSolver<MatL> es(A, false);
    auto ev = es.eigenvalues();
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i)
        if (ev(i).real() > ev(top).real()) top = i;
    long double lambda = ev(top).real();
    // polish with Newton on the long double power iteration estimate
    VecL x = VecL::Ones(n);
    for (int it = 0; it < 4000; ++it) {
        VecL y = A * x;
        y /= y.sum();
        if ((y - x).cwiseAbs().maxCoeff() < 1e-18L) {
            x = y;
            break;
        }
        x = y;
    }
    long double rq = (A * x).sum() / x.sum();
    if (std::abs(rq - lambda) < 1e-9L * std::max(1.0L, lambda)) lambda = rq;
    pf.value = static_cast<double>(lambda);
    pf.right = eigvec(A, lambda);
    pf.left = eigvec(A.transpose(), lambda);
    double second = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (i != top) second = std::max(second, static_cast<double>(std::abs(ev(i))));
    pf.second_modulus = second;
    return pf;
}

std::optional<RationalMatrix> inverse(const RationalMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("inverse of a non-square matrix");
    const std::size_t n = m.rows;
    RationalMatrix a = m, inv = RationalMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col) == 0) ++piv;
        if (piv == n) return std::nullopt;
        if (piv != col)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        Rational p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col) == 0) continue;
            Rational f = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                if (a(col, j) != 0) a(i, j) -= f * a(col, j);
                if (inv(col, j) != 0) inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

std::size_t rational_rank(const std::vector<std::vector<Rational>>& input) {
    auto rows = input;
    if (rows.empty()) return 0;
    const std::size_t n = rows[0].size();
    std::size_t r = 0;
    for (std::size_t col = 0; col < n && r < rows.size(); ++col) {
        std::size_t piv = r;
        while (piv < rows.size() && rows[piv][col] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (rows[i][col] == 0) continue;
            Rational f = rows[i][col] / rows[r][col];
            for (std::size_t j = col; j < n; ++j) rows[i][j] -= f * rows[r][j];
        }
        ++r;
    }
    return r;
}

std::vector<std::vector<Integer>> hermite_normal_form(std::vector<std::vector<Integer>> a,
                                                      std::vector<std::size_t>* pivots) {
    if (pivots) pivots->clear();
    if (a.empty()) return a;
    const std::size_t n = a[0].size();
    std::size_t r = 0;
    for (std::size_t col = 0; col < n && r < a.size(); ++col) {
        for (std::size_t i = r + 1; i < a.size(); ++i) {
            if (a[i][col] == 0) continue;
            if (a[r][col] == 0) {
                std::swap(a[r], a[i]);
                continue;
            }
            Integer g, x, y;
            mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a[r][col].get_mpz_t(), a[i][col].get_mpz_t());
            Integer p = a[r][col] / g, q = a[i][col] / g;
            for (std::size_t j = col; j < n; ++j) {
                Integer u = a[r][j], v = a[i][j];
                a[r][j] = x * u + y * v;
                a[i][j] = p * v - q * u;
            }
        }
        if (a[r][col] == 0) continue;
        if (a[r][col] < 0)
            for (auto& e : a[r]) e = -e;
        for (std::size_t k = 0; k < r; ++k) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), a[k][col].get_mpz_t(), a[r][col].get_mpz_t());
            if (q != 0)
                for (std::size_t j = col; j < n; ++j) a[k][j] -= q * a[r][j];
        }
        if (pivots) pivots->push_back(col);
        ++r;
        // guard against coefficient blow-up
        for (const auto& row : a)
            for (const auto& e : row)
                if (mpz_sizeinbase(e.get_mpz_t(), 2) > 4096)
                    throw RuntimeFailure("lattice reduction exceeded the 4096-bit coefficient budget");
    }
    a.resize(r);
    return a;
}

IntegerLattice::IntegerLattice(const std::vector<std::vector<Rational>>& gens, std::size_t dim) : dim_(dim) {
    for (const auto& g : gens)
        for (const auto& q : g) mpz_lcm(scale_.get_mpz_t(), scale_.get_mpz_t(), q.get_den_mpz_t());
    std::vector<std::vector<Integer>> rows;
    for (const auto& g : gens) {
        if (g.size() != dim) throw std::invalid_argument("lattice generator dimension");
        std::vector<Integer> row(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            Rational t = g[j] * scale_;
            row[j] = t.get_num();
        }
        rows.push_back(std::move(row));
    }
    hnf_ = hermite_normal_form(std::move(rows), &pivots_);
}

bool IntegerLattice::contains(const std::vector<Rational>& v) const {
    if (v.size() != dim_) throw std::invalid_argument("lattice vector dimension");
    std::vector<Integer> w(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
        Rational t = v[j] * scale_;
        if (t.get_den() != 1) return false;
        w[j] = t.get_num();
    }
    for (std::size_t r = 0; r < hnf_.size(); ++r) {
        std::size_t c = pivots_[r];
        if (w[c] == 0) continue;
        if (!mpz_divisible_p(w[c].get_mpz_t(), hnf_[r][c].get_mpz_t())) return false;
        Integer q = w[c] / hnf_[r][c];
        for (std::size_t j = c; j < dim_; ++j) w[j] -= q * hnf_[r][j];
    }
    return std::all_of(w.begin(), w.end(), [](const Integer& x) { return x == 0; });
}

std::vector<std::vector<Rational>> IntegerLattice::basis() const {
    std::vector<std::vector<Rational>> out;
    for (const auto& row : hnf_) {
        std::vector<Rational> r(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            r[j] = Rational(row[j], scale_);
            r[j].canonicalize();
        }
        out.push_back(std::move(r));
    }
    return out;
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m) {
    Eigen::MatrixXd r(m.size(), m.empty() ? 0 : m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) r(i, j) = m[i][j];
    return r;
}

}  // namespace tilescope
