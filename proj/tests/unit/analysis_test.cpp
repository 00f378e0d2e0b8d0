#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "tilescope/analysis.hpp"
#include "tilescope/config.hpp"

using namespace tilescope;

namespace {

const SubstitutionSystem& sys_of(const std::string& name) {
    static std::map<std::string, SystemConfig> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, load_bundled(name)).first;
    return it->second.system;
}

SymbolicVector vec(const SubstitutionSystem& s, const std::string& t) { return parse_vector(*s.basis, t, s.dim()); }

bool has(const ReturnVectorSet& xi, const SymbolicVector& v) {
    return std::find(xi.vectors.begin(), xi.vectors.end(), v) != xi.vectors.end();
}

// Kenyon's digits with a = 0: the lattice tiling
SystemConfig kenyon_lattice() {
    std::ifstream in(bundled_config_dir() + "/kenyon.json");
    auto j = nlohmann::json::parse(in);
    j["name"] = "kenyon_a0";
    j.erase("basis");
    j["analysis"]["eigen_candidates"] = nlohmann::json::array();
    j["analysis"]["mixing_z"] = nlohmann::json::array();
    auto& v = j["digits"][0]["vectors"];
    v[6] = {"1", "-1"};
    v[7] = {"1", "0"};
    v[8] = {"1", "1"};
    return parse_config(j);
}

}  // namespace

TEST(Counting, KenyonDomino) {
    const auto& s = sys_of("kenyon");
    auto geo = tile_geometry(s);
    Patch T = substitute(s, {Tile{0, s.zero()}}, 1);
    Patch domino{Tile{0, vec(s, "0,0")}, Tile{0, vec(s, "0,1")}};
    Window F{{-10, -10}, {10, 10}};
    EXPECT_EQ(patch_count(s, geo, domino, F, T), 6u);
    Patch absent{Tile{0, vec(s, "0,0")}, Tile{0, vec(s, "0,1/2")}};
    EXPECT_EQ(patch_count(s, geo, absent, F, T), 0u);
}

TEST(Counting, SingleTilesGiveMatrixPowers) {
    const auto& s = sys_of("frank_robinson");
    auto geo = tile_geometry(s);
    Window F{{-1e4, -1e4}, {1e4, 1e4}};
    for (std::size_t j = 0; j < s.kappa(); ++j) {
        Patch T = substitute(s, {Tile{static_cast<int>(j), s.zero()}}, 2);
        auto S2 = power(s.S, 2);
        for (std::size_t i = 0; i < s.kappa(); ++i)
            EXPECT_EQ(Integer(patch_count(s, geo, {Tile{static_cast<int>(i), s.zero()}}, F, T)), S2[i][j]);
    }
}

TEST(Frequencies, Fibonacci) {
    const auto& s = sys_of("fibonacci_1d");
    auto r = tile_frequencies(s, tile_geometry(s));
    EXPECT_NEAR(r[0], 0.4472136, 1e-6);
    EXPECT_NEAR(r[1], 0.2763932, 1e-6);
}

TEST(Frequencies, KenyonSingleTile) {
    const auto& s = sys_of("kenyon");
    auto geo = tile_geometry(s);
    EXPECT_NEAR(tile_frequencies(s, geo)[0], 1.0, 1e-12);
    auto f = patch_frequency(s, geo, {Tile{0, s.zero()}}, 4);
    EXPECT_NEAR(f.value, 1.0, 0.05);
}

TEST(Frequencies, FibonacciLongTileCurve) {
    const auto& s = sys_of("fibonacci_1d");
    auto geo = tile_geometry(s);
    auto f = patch_frequency(s, geo, {Tile{0, s.zero()}}, 12);
    EXPECT_NEAR(f.value, 0.4472136, 1e-3);
    EXPECT_TRUE(f.type_independent);
}

TEST(ReturnVectors, KenyonLevelOne) {
    const auto& s = sys_of("kenyon");
    auto xi = return_vectors(s, 1, 3.0);
    EXPECT_TRUE(has(xi, vec(s, "0,1")));
    EXPECT_TRUE(has(xi, vec(s, "1,a")));
    EXPECT_TRUE(has(xi, vec(s, "-1,0")));
    for (const auto& v : xi.vectors) EXPECT_TRUE(has(xi, -v));
    EXPECT_TRUE(return_vectors(s, 1, 0.0).vectors.empty());
}

TEST(ReturnVectors, ModifiedKenyonLevelOne) {
    const auto& s = sys_of("kenyon_modified");
    auto xi = return_vectors(s, 1, 5.0);
    EXPECT_TRUE(has(xi, vec(s, "tau,0")));
    // (0,tau) separates an A1 child from an A2 child, so it is not a same-type vector
    EXPECT_FALSE(has(xi, vec(s, "0,tau")));
    EXPECT_TRUE(has(xi, vec(s, "2tau,a")));
}

TEST(Flc, Verdicts) {
    EXPECT_EQ(flc_scan(sys_of("kenyon"), 5, 2.5).verdict, LocalComplexity::IlcEvidence);
    EXPECT_EQ(flc_scan(sys_of("frank_robinson"), 5, 2.5).verdict, LocalComplexity::IlcEvidence);
    auto lattice = kenyon_lattice();
    EXPECT_EQ(flc_scan(lattice.system, 5, 2.5).verdict, LocalComplexity::FlcEvidence);
}

TEST(Periods, KenyonVertical) {
    const auto& s = sys_of("kenyon");
    auto p = detect_periods(s, 3, 8);
    bool vertical = false;
    for (const auto& c : p) vertical |= c.t == vec(s, "0,1") || c.t == vec(s, "0,-1");
    EXPECT_TRUE(vertical);
}

TEST(Periods, NoneForModifiedKenyon) {
    EXPECT_TRUE(detect_periods(sys_of("kenyon_modified"), 2, 8).empty());
}

TEST(Meyer, SquareLatticeGapOne) {
    const auto& s = sys_of("square_lattice");
    std::vector<ReturnVectorSet> xs{return_vectors(s, 1, 3), return_vectors(s, 2, 3)};
    auto m = meyer_scan(s, xs, 6);
    for (double g : m.min_gap) EXPECT_NEAR(g, 1.0, 1e-9);
}

TEST(Rigidity, Verdicts) {
    const auto& fr = sys_of("frank_robinson");
    auto v = rigidity_check(fr, return_vectors(fr, 2, 3.0));
    EXPECT_EQ(v.status, RigidityStatus::Rigid);
    ASSERT_EQ(v.witness.size(), 2u);

    const auto& k = sys_of("kenyon");
    auto kv = rigidity_check(k, return_vectors(k, 2, 3.0));
    EXPECT_EQ(kv.status, RigidityStatus::NotRigid);
    EXPECT_EQ(kv.qdim, 3u);
    EXPECT_EQ(kv.bound, 2u);

    const auto& mk = sys_of("kenyon_modified");
    EXPECT_EQ(rigidity_check(mk, return_vectors(mk, 1, 5.0)).status, RigidityStatus::Inapplicable);
}

TEST(Audit, NoViolations) {
    EXPECT_EQ(count_audit().violations.load(), 0u);
    EXPECT_TRUE(audit_count(1, 1.0, 1.0));
}
