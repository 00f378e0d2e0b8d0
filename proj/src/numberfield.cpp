#include "tilescope/numberfield.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "tilescope/error.hpp"

namespace tilescope {

namespace {

unsigned g_bits = 0;

unsigned digits10_for(unsigned bits) { return static_cast<unsigned>(std::ceil(bits * 0.30103)) + 1; }

void apply_bits(unsigned bits) {
    g_bits = bits;
    BigFloat::default_precision(digits10_for(bits));
}

}  // namespace

unsigned precision_bits() {
    if (g_bits == 0) {
        unsigned bits = 128;
        if (const char* env = std::getenv("TILESCOPE_PRECISION_BITS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 53 || v > 65536)
                throw SchemaError("TILESCOPE_PRECISION_BITS must be an integer in [53, 65536]");
            bits = static_cast<unsigned>(v);
        }
        apply_bits(bits);
    }
    return g_bits;
}

void set_precision_bits(unsigned bits) {
    if (bits < 53) throw std::invalid_argument("precision below 53 bits");
    apply_bits(bits);
}

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_(precision_bits()) { apply_bits(std::max(bits, 53u)); }
PrecisionGuard::~PrecisionGuard() { apply_bits(saved_); }

// ---------------------------------------------------------------------------

Rational parse_rational(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    if (s.empty()) throw SchemaError("empty number");
    auto bad = [&] { return SchemaError("malformed number '" + std::string(text) + "'"); };

    if (auto slash = s.find('/'); slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw SchemaError("zero denominator in '" + std::string(text) + "'");
        Rational q = num / den;
        q.canonicalize();
        return q;
    }

    std::size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::string digits;
    long exponent = 0;
    bool any = false;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        digits += s[pos++];
        any = true;
    }
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            digits += s[pos++];
            --exponent;
            any = true;
        }
    }
    if (!any) throw bad();
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        ++pos;
        std::size_t used = 0;
        long e = 0;
        try {
            e = std::stol(s.substr(pos), &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (e > 4096 || e < -4096) throw bad();
        pos += used;
        exponent += e;
    }
    if (pos != s.size()) throw bad();

    Integer n(digits, 10);
    Integer p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
    Rational q = exponent >= 0 ? Rational(n * p) : Rational(n, p);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

BigFloat to_bigfloat(const Rational& q) {
    precision_bits();
    BigFloat num(q.get_num().get_str());
    BigFloat den(q.get_den().get_str());
    return num / den;
}

std::size_t hash_rational(const Rational& q) {
    std::size_t h = mpz_get_ui(q.get_num_mpz_t()) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::size_t>(mpz_size(q.get_num_mpz_t())) + (mpz_sgn(q.get_num_mpz_t()) < 0 ? 0x5bd1e995u : 0u);
    h = h * 31 + mpz_get_ui(q.get_den_mpz_t());
    return h;
}

// ---------------------------------------------------------------------------
// Polynomial roots

namespace {

using cld = std::complex<long double>;

std::vector<cld> aberth(const std::vector<long double>& a) {
    const int n = static_cast<int>(a.size()) - 1;
    if (n == 1) return {cld(-a[0], 0)};

    long double bound = 0;
    for (int k = 1; k <= n; ++k)
        bound = std::max(bound, std::pow(std::abs(a[n - k]), 1.0L / k));
    bound = 2 * std::max(bound, 1e-3L);

    std::vector<cld> z(n);
    for (int k = 0; k < n; ++k) {
        long double t = 2 * M_PI * k / n + 0.4L;
        z[k] = cld(bound * std::cos(t), bound * std::sin(t));
    }

    for (int iter = 0; iter < 2000; ++iter) {
        long double worst = 0;
        for (int k = 0; k < n; ++k) {
            cld p = a[n], dp = 0;
            for (int j = n - 1; j >= 0; --j) {
                dp = dp * z[k] + p;
                p = p * z[k] + a[j];
            }
            if (p == cld(0)) continue;
            cld ratio = p / dp;
            cld sum = 0;
            for (int j = 0; j < n; ++j)
                if (j != k) sum += 1.0L / (z[k] - z[j]);
            cld w = ratio / (1.0L - ratio * sum);
            z[k] -= w;
            worst = std::max(worst, std::abs(w) / std::max(1.0L, std::abs(z[k])));
        }
        if (worst < 1e-18L) break;
    }
    return z;
}

HighComplex hc_mul(const HighComplex& x, const HighComplex& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}

HighComplex hc_div(const HighComplex& x, const HighComplex& y) {
    BigFloat den = y.re * y.re + y.im * y.im;
    return {(x.re * y.re + x.im * y.im) / den, (x.im * y.re - x.re * y.im) / den};
}

BigFloat hc_abs(const HighComplex& x) { return sqrt(x.re * x.re + x.im * x.im); }

void newton_refine(const std::vector<Integer>& c, HighComplex& z, unsigned bits) {
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<BigFloat> a(n + 1);
    for (int j = 0; j <= n; ++j) a[j] = BigFloat(c[j].get_str());
    BigFloat tol = pow(BigFloat(2), -static_cast<int>(bits) + 6);
    for (int iter = 0; iter < 200; ++iter) {
        HighComplex p{a[n], BigFloat(0)}, dp{BigFloat(0), BigFloat(0)};
        for (int j = n - 1; j >= 0; --j) {
            dp = hc_mul(dp, z);
            dp.re += p.re;
            dp.im += p.im;
            p = hc_mul(p, z);
            p.re += a[j];
        }
        if (p.re == 0 && p.im == 0) return;
        HighComplex step = hc_div(p, dp);
        z.re -= step.re;
        z.im -= step.im;
        BigFloat scale = std::max(BigFloat(1), hc_abs(z));
        if (hc_abs(step) <= tol * scale) return;
    }
}

std::vector<HighComplex> roots_of(const std::vector<Integer>& c, unsigned bits) {
    PrecisionGuard guard(bits);
    std::vector<long double> a(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) a[j] = static_cast<long double>(c[j].get_d());
    std::vector<cld> z0 = aberth(a);

    std::vector<HighComplex> z;
    for (const cld& r : z0) {
        HighComplex h{BigFloat(static_cast<double>(r.real())), BigFloat(static_cast<double>(r.imag()))};
        newton_refine(c, h, bits);
        z.push_back(h);
    }

    // snap tiny imaginary parts, then force exact conjugate pairs
    BigFloat snap = pow(BigFloat(2), -static_cast<int>(bits) / 2);
    for (auto& r : z)
        if (abs(r.im) < snap * std::max(BigFloat(1), hc_abs(r))) r.im = 0;
    std::vector<bool> used(z.size(), false);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (used[i] || z[i].im <= 0) continue;
        std::size_t best = z.size();
        BigFloat best_d = 0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (j == i || used[j] || z[j].im >= 0) continue;
            BigFloat d = abs(z[j].re - z[i].re) + abs(z[j].im + z[i].im);
            if (best == z.size() || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        if (best == z.size()) throw RuntimeFailure("root finder lost a conjugate pair");
        used[i] = used[best] = true;
        z[best].re = z[i].re;
        z[best].im = -z[i].im;
    }

    std::sort(z.begin(), z.end(), [](const HighComplex& x, const HighComplex& y) {
        BigFloat mx = x.re * x.re + x.im * x.im, my = y.re * y.re + y.im * y.im;
        if (mx != my) return mx > my;
        if (x.re != y.re) return x.re > y.re;
        return x.im > y.im;
    });
    return z;
}

// exact division test of p by monic integer q
bool divides(const std::vector<Integer>& q, std::vector<Integer> p) {
    const int dq = static_cast<int>(q.size()) - 1;
    for (int top = static_cast<int>(p.size()) - 1; top >= dq; --top) {
        Integer lead = p[top];
        if (lead == 0) continue;
        for (int j = 0; j <= dq; ++j) p[top - dq + j] -= lead * q[j];
    }
    return std::all_of(p.begin(), p.begin() + dq, [](const Integer& x) { return x == 0; });
}

// Finds a nontrivial monic integer factor by multiplying out subsets of the
// numeric roots; the candidate is confirmed by exact division.
bool has_factor(const std::vector<Integer>& c, std::vector<Integer>* factor) {
    const int n = static_cast<int>(c.size()) - 1;
    if (n <= 1) return false;
    if (n > 12) throw MathError("irreducibility check supports degree <= 12 (got " + std::to_string(n) + ")");
    std::vector<HighComplex> hr = roots_of(c, 128);
    std::vector<cld> r;
    for (const auto& h : hr) r.emplace_back(static_cast<long double>(h.re), static_cast<long double>(h.im));

    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        int k = __builtin_popcount(mask);
        if (k > n / 2) continue;
        std::vector<cld> poly{cld(1)};
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) continue;
            std::vector<cld> next(poly.size() + 1, cld(0));
            for (std::size_t j = 0; j < poly.size(); ++j) {
                next[j + 1] += poly[j];
                next[j] -= poly[j] * r[i];
            }
            poly = next;
        }
        std::vector<Integer> q;
        bool integral = true;
        for (const cld& x : poly) {
            long double re = std::round(x.real());
            if (std::abs(x.imag()) > 1e-6L || std::abs(x.real() - re) > 1e-6L * std::max(1.0L, std::abs(re))) {
                integral = false;
                break;
            }
            q.emplace_back(static_cast<double>(re));
        }
        if (!integral) continue;
        // our subset polynomial is ordered constant-first already
        if (divides(q, c)) {
            if (factor) *factor = q;
            return true;
        }
    }
    return false;
}

std::string poly_str(const std::vector<Integer>& c, const std::string& var) {
    std::ostringstream os;
    bool first = true;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
        if (c[k] == 0) continue;
        Integer a = abs(c[k]);
        bool neg = c[k] < 0;
        if (first)
            os << (neg ? "-" : "");
        else
            os << (neg ? " - " : " + ");
        if (k == 0 || a != 1) os << a.get_str();
        if (k >= 1) os << var;
        if (k >= 2) os << "^" << k;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

}  // namespace

MinimalPolynomial::MinimalPolynomial(std::vector<Integer> coefficients) : c_(std::move(coefficients)) {
    if (c_.size() < 2) throw MathError("minimal polynomial must have degree >= 1");
    if (c_.back() != 1) throw MathError("minimal polynomial " + poly_str(c_, "x") + " is not monic");
    std::vector<Integer> f;
    if (has_factor(c_, &f))
        throw MathError("polynomial " + poly_str(c_, "x") + " is reducible (factor " + poly_str(f, "x") + ")");
}

std::string MinimalPolynomial::str(const std::string& var) const { return poly_str(c_, var); }

std::vector<HighComplex> conjugates_high(const MinimalPolynomial& p, unsigned bits) {
    if (p.degree() < 1) throw std::invalid_argument("empty polynomial");
    return roots_of(p.coefficients(), bits);
}

std::vector<std::complex<double>> conjugates(const MinimalPolynomial& p) {
    std::vector<std::complex<double>> out;
    for (const auto& h : conjugates_high(p, std::max(128u, precision_bits())))
        out.emplace_back(static_cast<double>(h.re), static_cast<double>(h.im));
    return out;
}

// ---------------------------------------------------------------------------

AlgebraicScalar::AlgebraicScalar(MinimalPolynomial p, std::complex<double> near) : p_(std::move(p)) {
    auto roots = conjugates(p_);
    double best = INFINITY;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double d = std::abs(roots[i] - near);
        if (d < best) {
            best = d;
            index_ = static_cast<int>(i);
        }
    }
    approx_ = roots[index_];
    radius_ = std::max(1.0, std::abs(approx_));
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (static_cast<int>(i) != index_) radius_ = std::min(radius_, std::abs(roots[i] - approx_) / 2);
    if (radius_ < 1e-12) {
        // separate at higher precision before giving up
        unsigned bits = 4 * std::max(128u, precision_bits());
        auto hr = conjugates_high(p_, bits);
        BigFloat sep = -1;
        for (std::size_t i = 0; i < hr.size(); ++i)
            for (std::size_t j = i + 1; j < hr.size(); ++j) {
                BigFloat d = hc_abs({hr[i].re - hr[j].re, hr[i].im - hr[j].im});
                if (sep < 0 || d < sep) sep = d;
            }
        if (sep < pow(BigFloat(2), -static_cast<int>(bits) / 2))
            throw RuntimeFailure("roots of " + p_.str() + " cannot be separated at " + std::to_string(bits) + " bits");
        radius_ = static_cast<double>(sep / 2);
    }
    if (best >= radius_)
        throw MathError("value near (" + std::to_string(near.real()) + "," + std::to_string(near.imag()) +
                        ") does not isolate a root of " + p_.str());
}

HighComplex AlgebraicScalar::value_high(unsigned bits) const {
    auto hr = conjugates_high(p_, bits);
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        double d = std::abs(std::complex<double>(static_cast<double>(hr[i].re), static_cast<double>(hr[i].im)) - approx_);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return hr[best];
}

bool AlgebraicScalar::matches(const MinimalPolynomial& q, std::complex<double> z) const {
    return q == p_ && std::abs(z - approx_) < radius_;
}

const char* to_string(PisotStatus s) {
    switch (s) {
        case PisotStatus::Pisot: return "Pisot";
        case PisotStatus::NotPisot: return "NotPisot";
        case PisotStatus::Undecided: return "Undecided";
    }
    return "?";
}

namespace {
constexpr double kUnitBand = 1e-9;
}

PisotVerdict is_pisot(const AlgebraicScalar& theta) {
    if (!(theta.modulus() > 1.0)) throw std::invalid_argument("is_pisot requires |theta| > 1");
    auto roots = conjugates(theta.minpoly());
    PisotVerdict v;
    double worst = 0;
    bool near_unit = false;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (static_cast<int>(i) == theta.root_index()) continue;
        double m = std::abs(roots[i]);
        worst = std::max(worst, m);
        if (std::abs(m - 1.0) < kUnitBand) near_unit = true;
    }
    v.margin = 1.0 - worst;
    if (near_unit)
        v.status = PisotStatus::Undecided;
    else
        v.status = worst < 1.0 ? PisotStatus::Pisot : PisotStatus::NotPisot;
    return v;
}

namespace {

// conjugates of theta with modulus >= 1, and whether any sits in the band
struct LargeSet {
    std::vector<std::complex<double>> roots;
    bool undecided = false;
};

LargeSet large_conjugates(const AlgebraicScalar& theta) {
    LargeSet out;
    for (const auto& g : conjugates(theta.minpoly())) {
        double m = std::abs(g);
        if (std::abs(m - 1.0) < kUnitBand) out.undecided = true;
        if (m >= 1.0 - kUnitBand) out.roots.push_back(g);
    }
    return out;
}

bool in_set(const std::vector<AlgebraicScalar>& theta, const MinimalPolynomial& p, std::complex<double> z) {
    return std::any_of(theta.begin(), theta.end(), [&](const AlgebraicScalar& t) { return t.matches(p, z); });
}

std::string fmt_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(8);
    os << z.real();
    if (z.imag() != 0) os << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
    return os.str();
}

}  // namespace

FamilyVerdict is_pisot_family(const std::vector<AlgebraicScalar>& theta) {
    if (theta.empty()) throw std::invalid_argument("is_pisot_family requires a nonempty set");
    FamilyVerdict v;
    v.holds = true;
    for (const auto& t : theta) {
        LargeSet large = large_conjugates(t);
        for (const auto& g : large.roots) {
            bool present = in_set(theta, t.minpoly(), g);
            bool band = std::abs(std::abs(g) - 1.0) < kUnitBand;
            if (present) continue;
            if (band) {
                v.undecided = true;
                v.notes.push_back("conjugate " + fmt_complex(g) + " of " + t.minpoly().str() + " is within 1e-9 of the unit circle");
            } else {
                v.holds = false;
                v.notes.push_back("conjugate " + fmt_complex(g) + " of " + t.minpoly().str() + " has modulus >= 1 and is missing");
            }
        }
    }
    return v;
}

FamilyVerdict is_totally_non_pisot(const std::vector<AlgebraicScalar>& theta) {
    if (theta.empty()) throw std::invalid_argument("is_totally_non_pisot requires a nonempty set");
    FamilyVerdict v;
    v.holds = true;
    for (const auto& t : theta) {
        LargeSet large = large_conjugates(t);
        bool all_in = true;
        bool band_only = true;
        for (const auto& g : large.roots) {
            if (in_set(theta, t.minpoly(), g)) continue;
            all_in = false;
            if (std::abs(std::abs(g) - 1.0) >= kUnitBand) band_only = false;
        }
        if (all_in) {
            v.holds = false;
            v.notes.push_back("large conjugates of " + fmt_complex(t.approx()) + " form a Pisot family inside the set");
        } else if (band_only) {
            v.undecided = true;
            v.notes.push_back("only near-unit conjugates of " + fmt_complex(t.approx()) + " are missing");
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// CoordinateBasis

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isalnum(ch) || ch == '_'; });
}

}  // namespace

CoordinateBasis::CoordinateBasis() {
    BasisSymbol one;
    one.name = "1";
    one.kind = BasisSymbol::Kind::One;
    one.value = 1.0;
    symbols_.push_back(one);
    values_.push_back(1.0);
}

int CoordinateBasis::add(BasisSymbol sym) {
    if (!is_identifier(sym.name)) throw SchemaError("basis symbol name '" + sym.name + "' is not an identifier");
    if (index_of(sym.name) >= 0) throw SchemaError("basis symbol '" + sym.name + "' declared twice");
    symbols_.push_back(std::move(sym));
    values_.push_back(symbols_.back().value);
    return static_cast<int>(symbols_.size()) - 1;
}

int CoordinateBasis::add_algebraic(const std::string& name, const AlgebraicScalar& value) {
    if (!value.is_real()) throw MathError("basis symbol '" + name + "' must be real");
    BasisSymbol s;
    s.name = name;
    s.kind = BasisSymbol::Kind::Algebraic;
    s.algebraic = value;
    s.value = value.approx().real();
    return add(std::move(s));
}

int CoordinateBasis::add_free(const std::string& name, const AlgebraicScalar& witness) {
    if (!witness.is_real()) throw MathError("witness for '" + name + "' must be real");
    BasisSymbol s;
    s.name = name;
    s.kind = BasisSymbol::Kind::Free;
    s.algebraic = witness;
    s.value = witness.approx().real();
    return add(std::move(s));
}

int CoordinateBasis::add_free(const std::string& name, const std::string& decimal_witness) {
    Rational q = parse_rational(decimal_witness);
    BasisSymbol s;
    s.name = name;
    s.kind = BasisSymbol::Kind::Free;
    s.decimal = decimal_witness;
    s.value = q.get_d();
    return add(std::move(s));
}

void CoordinateBasis::set_product(int i, int j, std::vector<Rational> rhs) {
    if (i < 0 || j < 0 || i >= static_cast<int>(size()) || j >= static_cast<int>(size()))
        throw std::out_of_range("product index");
    rhs.resize(size());
    if (i > j) std::swap(i, j);
    if (products_.size() < size()) products_.resize(size());
    for (auto& row : products_) row.resize(size());
    products_[i][j] = std::move(rhs);
}

void CoordinateBasis::derive_products() {
    for (std::size_t i = 1; i < size(); ++i) {
        const auto& sym = symbols_[i];
        if (sym.kind != BasisSymbol::Kind::Algebraic || sym.algebraic->minpoly().degree() != 2) continue;
        if (product(static_cast<int>(i), static_cast<int>(i))) continue;
        const auto& c = sym.algebraic->minpoly().coefficients();
        std::vector<Rational> rhs(size());
        rhs[0] = Rational(-c[0]);
        rhs[i] = Rational(-c[1]);
        set_product(static_cast<int>(i), static_cast<int>(i), rhs);
    }
}

const std::vector<Rational>* CoordinateBasis::product(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (static_cast<std::size_t>(i) >= products_.size()) return nullptr;
    const auto& row = products_[i];
    if (static_cast<std::size_t>(j) >= row.size() || row[j].empty()) return nullptr;
    return &row[j];
}

void CoordinateBasis::validate() const {
    auto hv = values_high();
    for (std::size_t i = 0; i < products_.size(); ++i)
        for (std::size_t j = i; j < products_[i].size(); ++j) {
            const auto& rhs = products_[i][j];
            if (rhs.empty()) continue;
            BigFloat lhs = hv[i] * hv[j];
            BigFloat r = 0;
            for (std::size_t k = 0; k < rhs.size(); ++k)
                if (rhs[k] != 0) r += to_bigfloat(rhs[k]) * hv[k];
            BigFloat err = abs(lhs - r);
            if (err > 1e-12 * std::max(BigFloat(1), abs(lhs)))
                throw MathError("product table entry " + symbols_[i].name + "*" + symbols_[j].name +
                                " is numerically wrong (error " + err.str(3) + ")");
        }
}

int CoordinateBasis::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        if (symbols_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> CoordinateBasis::names() const {
    std::vector<std::string> out;
    for (const auto& s : symbols_) out.push_back(s.name);
    return out;
}

std::vector<BigFloat> CoordinateBasis::values_high() const {
    unsigned bits = precision_bits();
    std::vector<BigFloat> out;
    for (const auto& s : symbols_) {
        if (s.kind == BasisSymbol::Kind::One)
            out.emplace_back(1);
        else if (s.algebraic)
            out.push_back(s.algebraic->value_high(bits).re);
        else
            out.push_back(to_bigfloat(parse_rational(s.decimal)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar

Scalar Scalar::rational(std::size_t s, const Rational& q) {
    Scalar x(s);
    x.c[0] = q;
    return x;
}

bool Scalar::is_zero() const {
    return std::all_of(c.begin(), c.end(), [](const Rational& q) { return q == 0; });
}

bool Scalar::is_rational() const {
    return std::all_of(c.begin() + (c.empty() ? 0 : 1), c.end(), [](const Rational& q) { return q == 0; });
}

Scalar& Scalar::operator+=(const Scalar& o) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += o.c[k];
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] -= o.c[k];
    return *this;
}

Scalar& Scalar::operator*=(const Rational& q) {
    for (auto& x : c) x *= q;
    return *this;
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    for (auto& x : r.c) x = -x;
    return r;
}

Scalar multiply(const CoordinateBasis& basis, const Scalar& a, const Scalar& b) {
    const std::size_t s = basis.size();
    Scalar r(s);
    for (std::size_t i = 0; i < s; ++i) {
        if (a.c[i] == 0) continue;
        for (std::size_t j = 0; j < s; ++j) {
            if (b.c[j] == 0) continue;
            Rational w = a.c[i] * b.c[j];
            if (i == 0) {
                r.c[j] += w;
            } else if (j == 0) {
                r.c[i] += w;
            } else {
                const auto* p = basis.product(static_cast<int>(i), static_cast<int>(j));
                if (!p)
                    throw MathError("product " + basis.symbol(i).name + "*" + basis.symbol(j).name +
                                    " is not in the product table");
                for (std::size_t k = 0; k < s; ++k)
                    if ((*p)[k] != 0) r.c[k] += w * (*p)[k];
            }
        }
    }
    return r;
}

double evaluate(const CoordinateBasis& basis, const Scalar& x) {
    double v = 0;
    for (std::size_t k = 0; k < x.c.size(); ++k)
        if (x.c[k] != 0) v += x.c[k].get_d() * basis.values()[k];
    return v;
}

BigFloat evaluate_high(const CoordinateBasis& basis, const Scalar& x) {
    auto hv = basis.values_high();
    BigFloat v = 0;
    for (std::size_t k = 0; k < x.c.size(); ++k)
        if (x.c[k] != 0) v += to_bigfloat(x.c[k]) * hv[k];
    return v;
}

// ---------------------------------------------------------------------------
// Expression parser

namespace {

class ExprParser {
public:
    ExprParser(const CoordinateBasis& b, std::string_view t) : basis_(b), text_(t) {}

    Scalar parse() {
        Scalar v = expr();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw SchemaError("cannot parse expression '" + std::string(text_) + "': " + why);
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Scalar expr() {
        Scalar v = term();
        for (;;) {
            char ch = peek();
            if (ch == '+') {
                ++pos_;
                v += term();
            } else if (ch == '-') {
                ++pos_;
                v -= term();
            } else {
                return v;
            }
        }
    }

    Scalar term() {
        Scalar v = unary();
        for (;;) {
            char ch = peek();
            if (ch == '*') {
                ++pos_;
                v = multiply(basis_, v, unary());
            } else if (ch == '/') {
                ++pos_;
                Scalar d = unary();
                if (!d.is_rational() || d.c[0] == 0) fail("division only by nonzero rationals");
                v *= Rational(1 / d.c[0]);
            } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || ch == '(') {
                v = multiply(basis_, v, power());  // implicit product, "2tau"
            } else {
                return v;
            }
        }
    }

    Scalar unary() {
        char ch = peek();
        if (ch == '-') {
            ++pos_;
            return -unary();
        }
        if (ch == '+') {
            ++pos_;
            return unary();
        }
        return power();
    }

    Scalar power() {
        Scalar base = atom();
        if (peek() != '^') return base;
        ++pos_;
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("exponent must be a natural number");
        int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
        Scalar r = Scalar::rational(basis_.size(), 1);
        for (int i = 0; i < e; ++i) r = multiply(basis_, r, base);
        return r;
    }

    Scalar atom() {
        char ch = peek();
        if (ch == '(') {
            ++pos_;
            Scalar v = expr();
            if (peek() != ')') fail("missing ')'");
            ++pos_;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            // exponent only when followed by a digit or sign+digit, so "2e" stays a product
            if (pos_ + 1 < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t q = pos_ + 1;
                if (text_[q] == '+' || text_[q] == '-') ++q;
                if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
                    pos_ = q;
                    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
                }
            }
            return Scalar::rational(basis_.size(), parse_rational(text_.substr(start, pos_ - start)));
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            int idx = basis_.index_of(name);
            if (idx < 0) throw SchemaError("undeclared symbol '" + name + "'");
            Scalar v(basis_.size());
            v.c[idx] = 1;
            return v;
        }
        fail(ch ? "unexpected '" + std::string(1, ch) + "'" : "unexpected end");
    }

    const CoordinateBasis& basis_;
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Scalar parse_scalar(const CoordinateBasis& basis, std::string_view text) { return ExprParser(basis, text).parse(); }

std::string format_scalar(const CoordinateBasis& basis, const Scalar& x) {
    std::string out;
    for (std::size_t k = 0; k < x.c.size(); ++k) {
        const Rational& q = x.c[k];
        if (q == 0) continue;
        Rational a = abs(q);
        std::string piece;
        if (k == 0)
            piece = a.get_str();
        else if (a == 1)
            piece = basis.symbol(k).name;
        else
            piece = a.get_str() + "*" + basis.symbol(k).name;
        if (out.empty())
            out = (q < 0 ? "-" : "") + piece;
        else
            out += (q < 0 ? "-" : "+") + piece;
    }
    return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------------------
// SymbolicVector

Scalar SymbolicVector::coordinate(std::size_t i) const {
    Scalar x(s_);
    for (std::size_t k = 0; k < s_; ++k) x.c[k] = at(i, k);
    return x;
}

void SymbolicVector::set_coordinate(std::size_t i, const Scalar& x) {
    for (std::size_t k = 0; k < s_; ++k) at(i, k) = x.c[k];
}

bool SymbolicVector::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const Rational& q) { return q == 0; });
}

SymbolicVector& SymbolicVector::operator+=(const SymbolicVector& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

SymbolicVector& SymbolicVector::operator-=(const SymbolicVector& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

SymbolicVector& SymbolicVector::operator*=(const Rational& q) {
    for (auto& x : c_) x *= q;
    return *this;
}

SymbolicVector SymbolicVector::operator-() const {
    SymbolicVector r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

bool SymbolicVector::operator<(const SymbolicVector& o) const {
    for (std::size_t k = 0; k < c_.size() && k < o.c_.size(); ++k) {
        int c = cmp(c_[k], o.c_[k]);
        if (c != 0) return c < 0;
    }
    return c_.size() < o.c_.size();
}

std::vector<double> SymbolicVector::evaluate(const CoordinateBasis& basis) const {
    std::vector<double> out(d_, 0.0);
    const auto& v = basis.values();
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t k = 0; k < s_; ++k)
            if (at(i, k) != 0) out[i] += at(i, k).get_d() * v[k];
    return out;
}

std::vector<BigFloat> SymbolicVector::evaluate_high(const CoordinateBasis& basis) const {
    auto hv = basis.values_high();
    std::vector<BigFloat> out(d_, BigFloat(0));
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t k = 0; k < s_; ++k)
            if (at(i, k) != 0) out[i] += to_bigfloat(at(i, k)) * hv[k];
    return out;
}

std::size_t SymbolicVector::hash() const {
    std::size_t h = d_ * 1315423911u + s_;
    for (const auto& q : c_) h = (h ^ hash_rational(q)) * 1099511628211ull;
    return h;
}

SymbolicVector parse_vector(const CoordinateBasis& basis, std::string_view text, std::size_t d) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char ch : text) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() != d)
        throw SchemaError("vector '" + std::string(text) + "' has " + std::to_string(parts.size()) +
                          " components, expected " + std::to_string(d));
    SymbolicVector v(d, basis.size());
    for (std::size_t i = 0; i < d; ++i) v.set_coordinate(i, parse_scalar(basis, parts[i]));
    return v;
}

std::string format_vector(const CoordinateBasis& basis, const SymbolicVector& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.dim(); ++i) {
        if (i) out += ",";
        out += format_scalar(basis, v.coordinate(i));
    }
    return out + ")";
}

// ---------------------------------------------------------------------------

RationalMatrix RationalMatrix::identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matrix shape mismatch");
    RationalMatrix r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            if (x(i, k) == 0) continue;
            for (std::size_t j = 0; j < y.cols; ++j)
                if (y(k, j) != 0) r(i, j) += x(i, k) * y(k, j);
        }
    return r;
}

std::vector<Rational> operator*(const RationalMatrix& m, const std::vector<Rational>& v) {
    if (m.cols != v.size()) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<Rational> r(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            if (m(i, j) != 0 && v[j] != 0) r[i] += m(i, j) * v[j];
    return r;
}

RationalMatrix q_action_matrix(const CoordinateBasis& basis, const std::vector<std::vector<Scalar>>& Q) {
    const std::size_t d = Q.size();
    const std::size_t s = basis.size();
    RationalMatrix M(d * s, d * s);
    for (std::size_t i = 0; i < d; ++i) {
        if (Q[i].size() != d) throw std::invalid_argument("Q must be square");
        for (std::size_t j = 0; j < d; ++j) {
            const Scalar& q = Q[i][j];
            for (std::size_t l = 0; l < s; ++l) {
                if (q.c[l] == 0) continue;
                for (std::size_t k = 0; k < s; ++k) {
                    // beta_l * beta_k
                    if (l == 0 || k == 0) {
                        M(i * s + (l == 0 ? k : l), j * s + k) += q.c[l];
                        continue;
                    }
                    const auto* p = basis.product(static_cast<int>(l), static_cast<int>(k));
                    if (!p)
                        throw MathError("q_action_matrix needs product " + basis.symbol(l).name + "*" +
                                        basis.symbol(k).name + ", which the product table does not define");
                    for (std::size_t m = 0; m < s; ++m)
                        if ((*p)[m] != 0) M(i * s + m, j * s + k) += q.c[l] * (*p)[m];
                }
            }
        }
    }
    return M;
}

}  // namespace tilescope
