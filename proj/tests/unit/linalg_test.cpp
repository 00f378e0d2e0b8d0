#include <gtest/gtest.h>

#include "tilescope/linalg.hpp"

using namespace tilescope;

TEST(PerronFrobenius, FrankRobinsonMatrix) {
    IntMatrix S{{1, 1, 1, 1}, {3, 0, 3, 0}, {3, 3, 0, 0}, {9, 0, 0, 0}};
    auto pf = perron_frobenius(S);
    EXPECT_NEAR(pf.value, 5.3027756377, 1e-8);
    EXPECT_LT(pf.second_modulus, pf.value);
}

TEST(PerronFrobenius, ModifiedKenyon) {
    auto pf = perron_frobenius(IntMatrix{{3, 3}, {3, 0}});
    EXPECT_NEAR(pf.value, 3 * (1 + std::sqrt(5.0)) / 2, 1e-9);
    // left vector proportional to (tau, 1)
    EXPECT_NEAR(pf.left[0] / pf.left[1], (1 + std::sqrt(5.0)) / 2, 1e-9);
}

TEST(Primitivity, Exponent) {
    EXPECT_EQ(primitivity_exponent({{1, 1}, {1, 0}}), 2u);
    EXPECT_FALSE(primitivity_exponent({{0, 1}, {1, 0}}).has_value());
    EXPECT_EQ(primitivity_exponent({{9}}), 1u);
}

TEST(Power, MatchesRepeatedProduct) {
    IntMatrix S{{1, 1}, {1, 0}};
    auto P = power(S, 5);
    EXPECT_EQ(P[0][0], Integer(8));
    EXPECT_EQ(P[0][1], Integer(5));
    EXPECT_EQ(P[1][1], Integer(3));
}

TEST(Inverse, ExactRational) {
    RationalMatrix m(2, 2);
    m(0, 0) = 2;
    m(0, 1) = 1;
    m(1, 0) = 1;
    m(1, 1) = 1;
    auto inv = inverse(m);
    ASSERT_TRUE(inv.has_value());
    EXPECT_EQ(m * *inv, RationalMatrix::identity(2));
    RationalMatrix s(2, 2);
    s(0, 0) = 1;
    s(0, 1) = 2;
    s(1, 0) = 2;
    s(1, 1) = 4;
    EXPECT_FALSE(inverse(s).has_value());
}

TEST(Lattice, RankAndMembership) {
    std::vector<std::vector<Rational>> gens{{1, 0}, {0, 1}, {1, 1}};
    EXPECT_EQ(rational_rank(gens), 2u);
    IntegerLattice L(gens, 2);
    EXPECT_EQ(L.rank(), 2u);
    EXPECT_TRUE(L.contains({3, -7}));
    EXPECT_FALSE(L.contains({Rational(1, 2), 0}));
    IntegerLattice H({{Rational(1, 3), 0}, {0, 2}}, 2);
    EXPECT_TRUE(H.contains({Rational(2, 3), 4}));
    EXPECT_FALSE(H.contains({0, 1}));
}

TEST(Hnf, ReducesRows) {
    auto h = hermite_normal_form({{Integer(2), Integer(4)}, {Integer(4), Integer(2)}});
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0][0], Integer(2));
    EXPECT_EQ(h[1][0], Integer(0));
    EXPECT_EQ(h[1][1], Integer(6));
}
