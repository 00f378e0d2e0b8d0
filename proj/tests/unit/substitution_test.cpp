#include <gtest/gtest.h>

#include <set>

#include "tilescope/config.hpp"
#include "tilescope/error.hpp"
#include "tilescope/substitution.hpp"

using namespace tilescope;

namespace {

const SubstitutionSystem& sys_of(const std::string& name) {
    static std::map<std::string, SystemConfig> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, load_bundled(name)).first;
    return it->second.system;
}

SymbolicVector vec(const SubstitutionSystem& s, const std::string& t) { return parse_vector(*s.basis, t, s.dim()); }

}  // namespace

TEST(Validate, PfMatchesDeterminant) {
    for (auto n : {"frank_robinson", "kenyon", "kenyon_modified", "fibonacci_1d", "square_lattice"}) {
        auto v = validate_system(sys_of(n));
        EXPECT_TRUE(v.expansive) << n;
        EXPECT_LT(v.pf_relative_error, 1e-8) << n;
    }
    EXPECT_NEAR(validate_system(sys_of("frank_robinson")).pf_value, 5.3027756, 1e-6);
    EXPECT_NEAR(validate_system(sys_of("kenyon_modified")).pf_value, 4.8541020, 1e-6);
}

TEST(Substitute, KenyonFirstLevel) {
    const auto& s = sys_of("kenyon");
    Patch p = substitute(s, {Tile{0, s.zero()}}, 1);
    ASSERT_EQ(p.size(), 9u);
    std::set<Tile> got(p.begin(), p.end());
    for (auto d : {"0,-1", "0,0", "0,1", "-1,-1", "-1,0", "-1,1", "1,-1+a", "1,a", "1,1+a"})
        EXPECT_TRUE(got.count(Tile{0, vec(s, d)})) << d;
}

TEST(Substitute, ZeroLevelIsIdentity) {
    const auto& s = sys_of("frank_robinson");
    Patch p{Tile{2, vec(s, "1,b")}};
    EXPECT_EQ(substitute(s, p, 0), p);
}

TEST(Substitute, ModifiedKenyonSecondType) {
    const auto& s = sys_of("kenyon_modified");
    Patch p = substitute(s, {Tile{1, s.zero()}}, 1);
    std::set<Tile> got(p.begin(), p.end());
    std::set<Tile> want{Tile{0, vec(s, "0,0")}, Tile{0, vec(s, "tau,0")}, Tile{0, vec(s, "2tau,a")}};
    EXPECT_EQ(got, want);
}

TEST(Substitute, CountsFollowMatrixPowers) {
    for (auto n : {"frank_robinson", "kenyon_modified", "fibonacci_1d"}) {
        const auto& s = sys_of(n);
        for (std::size_t j = 0; j < s.kappa(); ++j) {
            Patch p{Tile{static_cast<int>(j), s.zero()}};
            for (unsigned k = 1; k <= 3; ++k) {
                p = substitute(s, p, 1);
                auto c = type_counts(p, s.kappa());
                auto Sk = power(s.S, k);
                for (std::size_t i = 0; i < s.kappa(); ++i) EXPECT_EQ(Integer(c[i]), Sk[i][j]) << n;
            }
        }
    }
}

TEST(Seed, KenyonAtOrigin) {
    const auto& s = sys_of("kenyon");
    auto seed = fixed_point_seed(s);
    EXPECT_EQ(seed.tile.type, 0);
    EXPECT_TRUE(seed.tile.shift.is_zero());
    EXPECT_EQ(seed.N, 1u);
}

TEST(Seed, IsFixedByItsPeriod) {
    for (auto n : {"frank_robinson", "kenyon_modified", "fibonacci_1d", "square_lattice"}) {
        const auto& s = sys_of(n);
        auto seed = fixed_point_seed(s);
        Patch p = substitute(s, {seed.tile}, seed.N);
        EXPECT_NE(std::find(p.begin(), p.end(), seed.tile), p.end()) << n;
    }
}

TEST(Seed, FrankRobinsonInteriorPoint) {
    const auto& s = sys_of("frank_robinson");
    auto seed = fixed_point_seed(s);
    EXPECT_EQ(seed.tile.type, 0);
    // the origin lies inside the seed's support
    auto boxes = support_boxes(s);
    auto x = s.eval(seed.tile.shift);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_LT(x[a] + boxes.lo[0][a], 0.0);
        EXPECT_GT(x[a] + boxes.hi[0][a], 0.0);
    }
}

TEST(Legality, KenyonClusters) {
    const auto& s = sys_of("kenyon");
    KSetCluster single;
    single.colours = {{s.zero()}};
    auto l0 = is_legal(s, single, 4);
    EXPECT_TRUE(l0.legal);
    EXPECT_EQ(l0.k, 0u);
    KSetCluster pair;
    pair.colours = {{vec(s, "0,0"), vec(s, "1,a")}};
    auto l1 = is_legal(s, pair, 4);
    EXPECT_TRUE(l1.legal);
    EXPECT_EQ(l1.k, 1u);
    KSetCluster half;
    half.colours = {{vec(s, "0,0"), vec(s, "1/2,0")}};
    EXPECT_FALSE(is_legal(s, half, 4).legal);
}

TEST(GeneratingSet, KenyonOrigin) {
    const auto& s = sys_of("kenyon");
    auto g = generating_set(s);
    ASSERT_EQ(g.colours.size(), 1u);
    ASSERT_EQ(g.colours[0].size(), 1u);
    EXPECT_TRUE(g.colours[0][0].is_zero());
}

TEST(SpecialRank, SingleTileAndPairs) {
    const auto& s = sys_of("kenyon");
    EXPECT_EQ(special_rank(s, {Tile{0, s.zero()}}, 3), 0u);
    Patch pair{Tile{0, vec(s, "0,0")}, Tile{0, vec(s, "0,1")}};
    EXPECT_EQ(special_rank(s, pair, 3), 1u);
}

TEST(Supertiles, KenyonGroupsOfNine) {
    const auto& s = sys_of("kenyon");
    auto seed = fixed_point_seed(s);
    Patch p = fixed_point_patch(s, seed, 2);
    ASSERT_EQ(p.size(), 81u);
    auto assign = supertile_assign(s, seed, p, 1);
    std::map<std::size_t, int> sizes;
    for (auto a : assign) ++sizes[a];
    EXPECT_EQ(sizes.size(), 9u);
    for (auto& [k, v] : sizes) EXPECT_EQ(v, 9);
    auto own = supertile_assign(s, seed, p, 0);
    EXPECT_EQ(std::set<std::size_t>(own.begin(), own.end()).size(), 81u);
}

TEST(Serialize, RoundTrip) {
    const auto& s = sys_of("kenyon_modified");
    Patch p = substitute(s, {Tile{0, s.zero()}}, 2);
    Patch q = parse_patch(s, serialize_patch(s, p));
    EXPECT_EQ(std::set<Tile>(p.begin(), p.end()), std::set<Tile>(q.begin(), q.end()));
}

TEST(Window, ClippedMatchesFull) {
    const auto& s = sys_of("kenyon");
    Patch full = substitute(s, {Tile{0, s.zero()}}, 3);
    Window w{{-2, -2}, {3, 3}};
    Patch clip = substitute(s, {Tile{0, s.zero()}}, 3, &w, 1.0);
    std::size_t a = 0, b = 0;
    for (const auto& t : full) a += w.contains(s.eval(t.shift));
    for (const auto& t : clip) b += w.contains(s.eval(t.shift));
    EXPECT_EQ(a, b);
    EXPECT_LT(clip.size(), full.size());
}
