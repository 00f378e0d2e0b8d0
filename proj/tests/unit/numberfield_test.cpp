#include <gtest/gtest.h>

#include "tilescope/error.hpp"
#include "tilescope/numberfield.hpp"

using namespace tilescope;

namespace {

MinimalPolynomial poly(std::vector<long> c) {
    std::vector<Integer> v;
    for (long x : c) v.emplace_back(x);
    return MinimalPolynomial(v);
}

AlgebraicScalar tau() { return AlgebraicScalar(poly({-1, -1, 1}), {1.618, 0}); }
AlgebraicScalar b_root() { return AlgebraicScalar(poly({-3, -1, 1}), {2.3, 0}); }

}  // namespace

TEST(Rational, ParsesDecimalsAndFractions) {
    EXPECT_EQ(parse_rational("0.37"), Rational(37, 100));
    EXPECT_EQ(parse_rational("-2/5"), Rational(-2, 5));
    EXPECT_EQ(parse_rational("1.5e-3"), Rational(3, 2000));
    EXPECT_THROW(parse_rational("x"), SchemaError);
}

TEST(Conjugates, QuadraticRoots) {
    auto r = conjugates(poly({-3, -1, 1}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].real(), 2.302776, 1e-6);
    EXPECT_NEAR(r[1].real(), -1.302776, 1e-6);
    auto g = conjugates(poly({-1, -1, 1}));
    EXPECT_NEAR(g[0].real(), 1.618034, 1e-6);
    EXPECT_NEAR(g[1].real(), -0.618034, 1e-6);
    auto l = conjugates(poly({-3, 1}));
    ASSERT_EQ(l.size(), 1u);
    EXPECT_DOUBLE_EQ(l[0].real(), 3.0);
}

TEST(Conjugates, ReducibleRejected) { EXPECT_THROW(poly({-1, 0, 1}), MathError); }

TEST(Pisot, ExampleNumbers) {
    auto t = is_pisot(tau());
    EXPECT_EQ(t.status, PisotStatus::Pisot);
    EXPECT_NEAR(t.margin, 0.381966, 1e-5);
    EXPECT_EQ(is_pisot(b_root()).status, PisotStatus::NotPisot);
    auto three = is_pisot(AlgebraicScalar(poly({-3, 1}), {3, 0}));
    EXPECT_EQ(three.status, PisotStatus::Pisot);
    EXPECT_DOUBLE_EQ(three.margin, 1.0);
}

TEST(Pisot, Families) {
    EXPECT_TRUE(is_pisot_family({tau()}).holds);
    EXPECT_FALSE(is_pisot_family({b_root()}).holds);
    AlgebraicScalar b2(poly({-3, -1, 1}), {-1.3, 0});
    EXPECT_TRUE(is_pisot_family({b_root(), b2}).holds);
    EXPECT_TRUE(is_totally_non_pisot({b_root()}).holds);
    EXPECT_FALSE(is_totally_non_pisot({tau()}).holds);
    AlgebraicScalar three(poly({-3, 1}), {3, 0});
    EXPECT_FALSE(is_totally_non_pisot({three, tau()}).holds);
}

TEST(Basis, GoldenProductsAndParsing) {
    CoordinateBasis basis;
    int t = basis.add_algebraic("tau", tau());
    basis.derive_products();
    basis.validate();
    Scalar x = parse_scalar(basis, "tau-1");
    Scalar y = parse_scalar(basis, "tau");
    Scalar p = multiply(basis, x, y);  // (tau - 1) tau = 1
    EXPECT_TRUE(p.is_rational());
    EXPECT_EQ(p.c[0], Rational(1));
    EXPECT_NEAR(evaluate(basis, parse_scalar(basis, "(1+tau)/2")), 1.309017, 1e-6);
    EXPECT_EQ(t, 1);
    EXPECT_THROW(parse_scalar(basis, "a+1"), SchemaError);
}

TEST(Basis, FreeSymbolMissingProduct) {
    CoordinateBasis basis;
    basis.add_free("a", AlgebraicScalar(poly({2, -4, 1}), {0.5858, 0}));
    basis.derive_products();
    Scalar a = parse_scalar(basis, "a");
    EXPECT_THROW(multiply(basis, a, a), MathError);
    EXPECT_NEAR(evaluate(basis, a), 2 - std::sqrt(2.0), 1e-12);
}

TEST(QAction, CompanionBlocks) {
    CoordinateBasis basis;
    basis.add_algebraic("tau", tau());
    basis.derive_products();
    std::vector<std::vector<Scalar>> Q{{parse_scalar(basis, "3"), Scalar(2)}, {Scalar(2), parse_scalar(basis, "tau")}};
    auto M = q_action_matrix(basis, Q);
    ASSERT_EQ(M.rows, 4u);
    // x-coordinate scaled by 3
    EXPECT_EQ(M(0, 0), Rational(3));
    EXPECT_EQ(M(1, 1), Rational(3));
    // tau (p + q tau) = q + (p + q) tau on the y block
    EXPECT_EQ(M(2, 2), Rational(0));
    EXPECT_EQ(M(2, 3), Rational(1));
    EXPECT_EQ(M(3, 2), Rational(1));
    EXPECT_EQ(M(3, 3), Rational(1));
}

TEST(HighPrecision, ThreePowersOfA) {
    PrecisionGuard g(128);
    CoordinateBasis basis;
    basis.add_free("a", AlgebraicScalar(poly({2, -4, 1}), {0.5858, 0}));
    Scalar x = parse_scalar(basis, "a");
    x *= Rational(Integer("12157665459056928801"));  // 3^40
    BigFloat v = evaluate_high(basis, x);
    BigFloat frac = v - boost::multiprecision::floor(v);
    EXPECT_GT(static_cast<double>(frac), 0.0);
    EXPECT_LT(static_cast<double>(frac), 1.0);
}

TEST(SymbolicVector, ArithmeticAndFormat) {
    CoordinateBasis basis;
    basis.add_algebraic("tau", tau());
    basis.derive_products();
    auto v = parse_vector(basis, "tau-1, 0", 2);
    auto w = parse_vector(basis, "1, 2", 2);
    auto s = v + w;
    EXPECT_EQ(format_vector(basis, s), "(tau,2)");
    EXPECT_EQ(s - w, v);
    EXPECT_TRUE((v - v).is_zero());
}
