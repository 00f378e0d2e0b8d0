#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>
#include <gmpxx.h>

namespace tilescope {

using Rational = mpq_class;
using Integer = mpz_class;
using BigFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;

// Working precision for BigFloat evaluations. Read once from
// TILESCOPE_PRECISION_BITS (default 128) and applied as the mpfr default.
unsigned precision_bits();
void set_precision_bits(unsigned bits);

class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned bits);
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_;
};

// "3", "-2/5", "0.37", "1.5e-3" -> exact rational
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
BigFloat to_bigfloat(const Rational& q);

struct HighComplex {
    BigFloat re;
    BigFloat im;
};

class MinimalPolynomial {
public:
    MinimalPolynomial() = default;
    // constant-to-leading order; must be monic, degree >= 1, irreducible over Q
    explicit MinimalPolynomial(std::vector<Integer> coefficients);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Integer>& coefficients() const { return c_; }
    std::string str(const std::string& var = "x") const;

    bool operator==(const MinimalPolynomial& o) const { return c_ == o.c_; }

private:
    std::vector<Integer> c_;
};

// All roots, sorted by decreasing modulus then decreasing real part then
// decreasing imaginary part. Complex roots come in exact conjugate pairs.
std::vector<std::complex<double>> conjugates(const MinimalPolynomial& p);
std::vector<HighComplex> conjugates_high(const MinimalPolynomial& p, unsigned bits);

class AlgebraicScalar {
public:
    AlgebraicScalar() = default;
    // selects the root of p nearest to `near`; near must lie inside that
    // root's isolation disk
    AlgebraicScalar(MinimalPolynomial p, std::complex<double> near);

    const MinimalPolynomial& minpoly() const { return p_; }
    std::complex<double> approx() const { return approx_; }
    double isolation_radius() const { return radius_; }
    int root_index() const { return index_; }
    bool is_real() const { return approx_.imag() == 0.0; }
    double modulus() const { return std::abs(approx_); }
    HighComplex value_high(unsigned bits) const;

    // true if z lies in the isolation disk of this root of the same minpoly
    bool matches(const MinimalPolynomial& q, std::complex<double> z) const;

private:
    MinimalPolynomial p_;
    std::complex<double> approx_{};
    double radius_ = 0;
    int index_ = -1;
};

enum class PisotStatus { Pisot, NotPisot, Undecided };
const char* to_string(PisotStatus s);

struct PisotVerdict {
    PisotStatus status = PisotStatus::Undecided;
    double margin = 0;  // 1 - max |gamma| over the other conjugates
};

PisotVerdict is_pisot(const AlgebraicScalar& theta);

struct FamilyVerdict {
    bool holds = false;
    bool undecided = false;  // some conjugate sits within 1e-9 of the unit circle
    std::vector<std::string> notes;
};

FamilyVerdict is_pisot_family(const std::vector<AlgebraicScalar>& theta);
FamilyVerdict is_totally_non_pisot(const std::vector<AlgebraicScalar>& theta);

// ---------------------------------------------------------------------------
// Coordinate basis: beta_1 = 1, then algebraic or free symbols.

struct BasisSymbol {
    enum class Kind { One, Algebraic, Free };
    std::string name;
    Kind kind = Kind::One;
    std::optional<AlgebraicScalar> algebraic;  // value (Algebraic) or witness (Free)
    std::string decimal;                       // decimal witness for Free symbols
    double value = 1.0;
};

class CoordinateBasis {
public:
    CoordinateBasis();

    int add_algebraic(const std::string& name, const AlgebraicScalar& value);
    int add_free(const std::string& name, const AlgebraicScalar& witness);
    int add_free(const std::string& name, const std::string& decimal_witness);

    // beta_i * beta_j = sum_k rhs[k] beta_k
    void set_product(int i, int j, std::vector<Rational> rhs);
    // squares of quadratic algebraic symbols follow from their minimal polynomial
    void derive_products();
    // numeric check of every table identity to 1e-12; throws MathError
    void validate() const;

    std::size_t size() const { return symbols_.size(); }
    const BasisSymbol& symbol(std::size_t i) const { return symbols_.at(i); }
    int index_of(std::string_view name) const;  // -1 if absent
    const std::vector<Rational>* product(int i, int j) const;
    std::vector<std::string> names() const;

    const std::vector<double>& values() const { return values_; }
    std::vector<BigFloat> values_high() const;  // at the current precision

private:
    int add(BasisSymbol sym);

    std::vector<BasisSymbol> symbols_;
    std::vector<double> values_;
    // products_[i][j] for i <= j; empty vector means undefined
    std::vector<std::vector<std::vector<Rational>>> products_;
};

// An element of the Q-span of the basis.
struct Scalar {
    std::vector<Rational> c;

    Scalar() = default;
    explicit Scalar(std::size_t s) : c(s) {}
    static Scalar rational(std::size_t s, const Rational& q);

    bool is_zero() const;
    bool is_rational() const;  // only the beta_1 component may be nonzero
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    Scalar& operator*=(const Rational& q);
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Rational& q) { return a *= q; }
    Scalar operator-() const;
    bool operator==(const Scalar& o) const { return c == o.c; }
};

// throws MathError naming the missing product
Scalar multiply(const CoordinateBasis& basis, const Scalar& a, const Scalar& b);
double evaluate(const CoordinateBasis& basis, const Scalar& x);
BigFloat evaluate_high(const CoordinateBasis& basis, const Scalar& x);

// Rational expressions over basis symbols: "tau-1", "2b+3", "(1+tau)/2", "a*tau".
// Undeclared symbol -> SchemaError; missing product -> MathError.
Scalar parse_scalar(const CoordinateBasis& basis, std::string_view text);
std::string format_scalar(const CoordinateBasis& basis, const Scalar& x);

// ---------------------------------------------------------------------------

// Point of R^d with coordinates in the basis span; coefficients stored row
// major (coordinate i, basis element k) -> i*s + k.
class SymbolicVector {
public:
    SymbolicVector() = default;
    SymbolicVector(std::size_t d, std::size_t s) : d_(d), s_(s), c_(d * s) {}

    std::size_t dim() const { return d_; }
    std::size_t basis_size() const { return s_; }
    Rational& at(std::size_t i, std::size_t k) { return c_[i * s_ + k]; }
    const Rational& at(std::size_t i, std::size_t k) const { return c_[i * s_ + k]; }
    const std::vector<Rational>& flat() const { return c_; }
    std::vector<Rational>& flat() { return c_; }

    Scalar coordinate(std::size_t i) const;
    void set_coordinate(std::size_t i, const Scalar& x);

    bool is_zero() const;
    SymbolicVector& operator+=(const SymbolicVector& o);
    SymbolicVector& operator-=(const SymbolicVector& o);
    SymbolicVector& operator*=(const Rational& q);
    friend SymbolicVector operator+(SymbolicVector a, const SymbolicVector& b) { return a += b; }
    friend SymbolicVector operator-(SymbolicVector a, const SymbolicVector& b) { return a -= b; }
    friend SymbolicVector operator*(SymbolicVector a, const Rational& q) { return a *= q; }
    SymbolicVector operator-() const;

    bool operator==(const SymbolicVector& o) const { return d_ == o.d_ && s_ == o.s_ && c_ == o.c_; }
    bool operator!=(const SymbolicVector& o) const { return !(*this == o); }
    bool operator<(const SymbolicVector& o) const;

    std::vector<double> evaluate(const CoordinateBasis& basis) const;
    std::vector<BigFloat> evaluate_high(const CoordinateBasis& basis) const;
    std::size_t hash() const;

private:
    std::size_t d_ = 0;
    std::size_t s_ = 0;
    std::vector<Rational> c_;
};

struct SymbolicVectorHash {
    std::size_t operator()(const SymbolicVector& v) const { return v.hash(); }
};

// "1/3, 0" or "tau-1,0" -> SymbolicVector of dimension d
SymbolicVector parse_vector(const CoordinateBasis& basis, std::string_view text, std::size_t d);
std::string format_vector(const CoordinateBasis& basis, const SymbolicVector& v);

std::size_t hash_rational(const Rational& q);

// Dense rational matrix, row major.
struct RationalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rational> a;

    RationalMatrix() = default;
    RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
    static RationalMatrix identity(std::size_t n);
    Rational& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    bool operator==(const RationalMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y);
std::vector<Rational> operator*(const RationalMatrix& m, const std::vector<Rational>& v);

// Matrix of multiplication by Q on SymbolicVector coefficient space (d*s square).
// Q is given row-wise as d*d scalars.
RationalMatrix q_action_matrix(const CoordinateBasis& basis,
                               const std::vector<std::vector<Scalar>>& Q);

}  // namespace tilescope

template <>
struct std::hash<tilescope::SymbolicVector> {
    std::size_t operator()(const tilescope::SymbolicVector& v) const { return v.hash(); }
};
