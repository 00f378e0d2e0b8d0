#include <gtest/gtest.h>

#include <random>

#include "tilescope/analysis.hpp"
#include "tilescope/config.hpp"
#include "tilescope/geometry.hpp"

using namespace tilescope;

namespace {

const SubstitutionSystem& sys_of(const std::string& name) {
    static std::map<std::string, SystemConfig> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, load_bundled(name)).first;
    return it->second.system;
}

}  // namespace

TEST(Boxes, DilateErode) {
    Window w{{0, 0}, {10, 10}};
    EXPECT_DOUBLE_EQ(erode_dilate(w, 1, true).volume(), 144);
    EXPECT_DOUBLE_EQ(erode_dilate(w, 1, false).volume(), 64);
    Window unit{{0, 0}, {1, 1}};
    EXPECT_DOUBLE_EQ(erode_dilate(unit, 1, false).volume(), 0);
    EXPECT_THROW(erode_dilate(w, -1, true), std::invalid_argument);
}

TEST(Boxes, VanHove) {
    EXPECT_NEAR(vanhove_ratio(Window{{0, 0}, {100, 100}}, 1), 0.08, 1e-12);
    EXPECT_NEAR(vanhove_ratio(Window{{0, 0}, {4, 4}}, 1), 2.0, 1e-12);
    double prev = 1e9;
    for (double L : {2.0, 4.0, 8.0, 16.0, 64.0}) {
        double v = vanhove_ratio(Window{{0, 0}, {L, L}}, 1);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Masks, ErodeThenDilateInside) {
    RegionMask m(0.25, {0, 0}, {40, 40});
    std::mt19937 rng(7);
    for (std::size_t i = 0; i < m.cell_count(); ++i) m.set(i, (rng() % 5) != 0);
    RegionMask back = erode_dilate(erode_dilate(m, 0.5, false), 0.5, true);
    std::size_t outside = 0;
    for (std::size_t i = 0; i < back.cell_count(); ++i)
        if (back.get(i)) {
            long long f = m.locate(back.cell_center(i));
            if (f < 0 || !m.get(static_cast<std::size_t>(f))) ++outside;
        }
    EXPECT_EQ(outside, 0u);
}

TEST(Volumes, BundledRatios) {
    auto kv = prototile_volumes(sys_of("kenyon"));
    EXPECT_NEAR(kv.volumes[0], 1.0, 1e-9);
    auto fr = prototile_volumes(sys_of("frank_robinson"));
    ASSERT_EQ(fr.eigen_ratios.size(), 4u);
    const double b = 2.3027756377319946;
    std::vector<double> want{b * b, b, b, 1};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(fr.eigen_ratios[i] / fr.eigen_ratios[3], want[i], 1e-6);
    auto mk = prototile_volumes(sys_of("kenyon_modified"));
    EXPECT_NEAR(mk.eigen_ratios[0] / mk.eigen_ratios[1], 1.6180339887, 1e-8);
}

TEST(Volumes, EigenvectorIdentity) {
    for (auto n : {"frank_robinson", "kenyon", "kenyon_modified", "fibonacci_1d", "square_lattice"}) {
        const auto& s = sys_of(n);
        auto v = prototile_volumes(s).volumes;
        double det = validate_system(s).abs_det_q;
        for (std::size_t j = 0; j < s.kappa(); ++j) {
            double rhs = 0;
            for (std::size_t i = 0; i < s.kappa(); ++i) rhs += static_cast<double>(s.S[i][j]) * v[i];
            EXPECT_NEAR(det * v[j], rhs, 1e-9 * std::max(1.0, rhs)) << n;
        }
    }
}

TEST(Ifs, KenyonAreaNearOne) {
    auto r = solve_adjoint_ifs(sys_of("kenyon"), 1.0 / 32);
    ASSERT_EQ(r.masks.size(), 1u);
    double area = r.masks[0].volume();
    double err = r.masks[0].boundary_volume();
    EXPECT_NEAR(area, 1.0, err + 0.05);
}

TEST(Ifs, SquareIsUnit) {
    auto r = solve_adjoint_ifs(sys_of("square_lattice"), 1.0 / 16);
    EXPECT_NEAR(r.masks[0].volume(), 1.0, r.masks[0].boundary_volume() + 1e-9);
}

TEST(Ifs, BoundaryShrinks) {
    auto scan = boundary_scan(sys_of("kenyon"), 1.0 / 16);
    EXPECT_TRUE(scan.decreasing);
}

TEST(Representability, KenyonWindow) {
    auto r = representability_check(sys_of("kenyon"), 3, Window{{0, 0}, {9, 9}}, 1.0 / 32);
    EXPECT_TRUE(r.pass) << r.overlap_fraction << " " << r.gap_fraction;
}

TEST(Metric, Basics) {
    ColouredSet a;
    for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) a.push_back({0, {double(i), double(j)}});
    EXPECT_NEAR(rubber_metric(a, a), 0.0, 1e-9);
    ColouredSet b = a;
    for (auto& p : b) p.x[0] += 0.01;
    EXPECT_LE(rubber_metric(a, b), 0.01 + 1e-9);
    ColouredSet far{{0, {1e6, 1e6}}};
    ColouredSet near{{0, {0, 0}}};
    EXPECT_NEAR(rubber_metric(far, near), kRubberCap, 1e-12);
    auto e = rubber_metric_detail({}, {});
    EXPECT_TRUE(e.empty_input);
    EXPECT_NEAR(e.value, kRubberCap, 1e-12);
}

TEST(Metric, ColoursMatter) {
    ColouredSet a{{0, {0, 0}}}, b{{1, {0, 0}}};
    EXPECT_GT(rubber_metric(a, b), 0.1);
}

TEST(Metric, SymmetricAndTriangle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    auto random_set = [&] {
        ColouredSet s;
        int n = 2 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) s.push_back({static_cast<int>(rng() % 2), {u(rng), u(rng)}});
        return s;
    };
    std::size_t bad = 0;
    for (int t = 0; t < 300; ++t) {
        auto a = random_set(), b = random_set(), c = random_set();
        double ab = rubber_metric(a, b), ba = rubber_metric(b, a);
        double bc = rubber_metric(b, c), ac = rubber_metric(a, c);
        if (std::abs(ab - ba) > 1e-9) ++bad;
        if (ac > ab + bc + 1e-9) ++bad;
    }
    EXPECT_EQ(bad, 0u);
}
