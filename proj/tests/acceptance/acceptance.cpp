// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tilescope/analysis.hpp"
#include "tilescope/cli.hpp"
#include "tilescope/config.hpp"
#include "tilescope/geometry.hpp"
#include "tilescope/spectral.hpp"

using namespace tilescope;

namespace {

const char* kSystems[] = {"frank_robinson", "kenyon", "kenyon_modified", "fibonacci_1d", "square_lattice"};
const double kB = (1 + std::sqrt(13.0)) / 2;
const double kTau = (1 + std::sqrt(5.0)) / 2;

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [failed: " << what << "]";
        }
    }
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> body;
};

const SystemConfig& cfg_of(const std::string& name) {
    static std::map<std::string, SystemConfig> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, load_bundled(name)).first;
    return it->second;
}
const SubstitutionSystem& sys_of(const std::string& name) { return cfg_of(name).system; }

SymbolicVector vec(const SubstitutionSystem& s, const std::string& t) { return parse_vector(*s.basis, t, s.dim()); }

void pf_identity(Outcome& o) {
    for (auto n : kSystems) {
        auto v = validate_system(sys_of(n));
        o.check(v.pf_relative_error < 1e-8, std::string("pf ") + n);
    }
    double fr = validate_system(sys_of("frank_robinson")).pf_value;
    double mk = validate_system(sys_of("kenyon_modified")).pf_value;
    o.note << "FR PF " << std::setprecision(10) << fr << ", modified Kenyon PF " << mk;
    o.check(std::abs(fr - (kB + 3)) < 1e-7, "FR = b+3");
    o.check(std::abs(mk - 3 * kTau) < 1e-7, "modified Kenyon = 3 tau");
}

void volume_eigenvector(Outcome& o) {
    const auto& fr = sys_of("frank_robinson");
    auto ifs = solve_adjoint_ifs(fr, 1.0 / 256);
    auto v = prototile_volumes(fr, &ifs.masks);
    std::vector<double> want{kB * kB, kB, kB, 1};
    double worst = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        double got = v.mask_volumes[i] / v.mask_volumes[3];
        worst = std::max(worst, std::abs(got - want[i]) / want[i]);
    }
    auto kifs = solve_adjoint_ifs(sys_of("kenyon"), 1.0 / 64);
    double area = kifs.masks[0].volume();
    o.note << "FR raster ratio error " << std::setprecision(4) << worst * 100 << "%, Kenyon area " << area;
    o.check(worst < 0.03, "FR ratios within 3%");
    o.check(std::abs(area - 1) <= 0.05, "Kenyon area");
}

void counting_identity(Outcome& o) {
    std::size_t checks = 0;
    for (auto n : kSystems) {
        const auto& s = sys_of(n);
        for (std::size_t j = 0; j < s.kappa(); ++j) {
            Patch p{Tile{static_cast<int>(j), s.zero()}};
            for (unsigned k = 1; k <= 5; ++k) {
                p = substitute(s, p, 1);
                auto c = type_counts(p, s.kappa());
                auto Sk = power(s.S, k);
                for (std::size_t i = 0; i < s.kappa(); ++i, ++checks)
                    o.check(Integer(c[i]) == Sk[i][j], std::string(n) + " k=" + std::to_string(k));
            }
        }
    }
    o.note << checks << " entries";
}

void metric_axioms(Outcome& o) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    auto random_set = [&](const ColouredSet* near) {
        ColouredSet s;
        if (near && rng() % 2) {
            for (const auto& p : *near)
                if (rng() % 8) s.push_back({p.colour, {p.x[0] + jitter(rng), p.x[1] + jitter(rng)}});
            if (!s.empty()) return s;
        }
        int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) s.push_back({static_cast<int>(rng() % 2), {u(rng), u(rng)}});
        return s;
    };
    std::size_t sym = 0, tri = 0;
    for (int t = 0; t < 10000; ++t) {
        auto a = random_set(nullptr);
        auto b = random_set(&a);
        auto c = random_set(&b);
        double ab = rubber_metric(a, b), ba = rubber_metric(b, a);
        double bc = rubber_metric(b, c), ac = rubber_metric(a, c);
        if (std::abs(ab - ba) > 1e-9) ++sym;
        if (ac > ab + bc + 1e-9) ++tri;
    }
    o.note << "10000 triples, symmetry violations " << sym << ", triangle violations " << tri;
    o.check(sym == 0 && tri == 0, "violations");
}

void cylinder_partition(Outcome& o) {
    struct Case {
        const char* name;
        unsigned level;
    };
    for (Case c : {Case{"fibonacci_1d", 8}, Case{"kenyon", 4}}) {
        const auto& s = sys_of(c.name);
        auto geo = tile_geometry(s);
        auto smp = cylinder_sample(s, geo, c.level, 2);
        auto set = build_cylinders(smp, make_grid(separation_constant(smp.x), 2));
        auto pc = partition_check(smp, set);
        double bound = std::ldexp(1.0, -2 * static_cast<int>(s.dim()));
        o.note << c.name << ": " << set.classes.size() << " classes, max wiggle " << set.max_wiggle_volume << " (bound "
               << bound << "), total " << std::setprecision(12) << pc.total << std::setprecision(6);
        if (pc.literal_total >= 0) o.note << ", literal " << pc.literal_total;
        o.note << "; ";
        o.check(set.wiggle_bound_ok && set.max_wiggle_volume <= bound, std::string(c.name) + " wiggle bound");
        o.check(pc.total >= 0.95 && pc.total <= 1.0 + 1e-9, std::string(c.name) + " total");
    }
}

void mixing_bound(Outcome& o) {
    const auto& s = sys_of("kenyon");
    auto b = mixing_overlap_bound(s, tile_geometry(s), vec(s, "0,1"));
    o.check(b.available && !b.curve.empty(), "bound available");
    if (!b.available || b.curve.empty()) return;
    o.note << "delta " << b.delta << " (k0 " << b.k0 << "), deepest ratio " << b.curve.back().ratio << " at level "
           << b.curve.back().level;
    o.check(std::abs(b.delta - 1.0 / 36) < 1e-12, "delta = 1/36");
    o.check(b.curve.back().ratio > 2 * b.delta, "ratio > 2 delta");
}

void eigen_verdicts(Outcome& o) {
    set_precision_bits(std::max(precision_bits(), 128u));
    const auto& mk = cfg_of("kenyon_modified");
    auto mxi = return_vectors(mk.system, mk.analysis.return_level, mk.analysis.return_radius);
    auto v1 = eigenvalue_test(mk.system, vec(mk.system, "tau-1,0"), mxi.vectors, {}, 30);
    bool all_int = v1.residues.values.size() == 30;
    for (const auto& r : v1.residues.values) all_int = all_int && r.exact && r.value == 0.0;
    o.check(v1.status == EigenStatus::ExactPass && all_int, "modified Kenyon (tau-1,0)");

    const auto& k = cfg_of("kenyon");
    auto kxi = return_vectors(k.system, k.analysis.return_level, k.analysis.return_radius);
    auto v2 = eigenvalue_test(k.system, vec(k.system, "1/3,0"), kxi.vectors, {}, 30);
    o.check(v2.status == EigenStatus::ExactPass && v2.n0 <= 1, "Kenyon (1/3,0)");

    auto v3 = eigenvalue_test(k.system, vec(k.system, "0,0.37"), kxi.vectors, {}, 40);
    double tail_max = 0;
    for (const auto& r : v3.residues.values)
        if (r.n >= 20) tail_max = std::max(tail_max, r.value);
    o.check(v3.status == EigenStatus::Fail && !v3.residues.truncated && tail_max > 0.1, "Kenyon (0,0.37)");
    o.note << "(tau-1,0) " << to_string(v1.status) << " exact-integer " << (all_int ? "yes" : "no") << "; (1/3,0) "
           << to_string(v2.status) << " n0=" << v2.n0 << "; (0,0.37) " << to_string(v3.status)
           << ", max residue over 20..40 = " << tail_max;
}

void fr_pipeline(Outcome& o) {
    auto res = run_pipeline(cfg_of("frank_robinson"), "acceptance_out");
    const auto& s = res.report["summary"];
    std::set<std::string> w;
    for (const auto& x : s["rigidity_witness"]) w.insert(x.get<std::string>());
    bool b_not_pisot = false;
    for (auto& [key, val] : s["pisot"].items())
        if (std::abs(std::stod(key) - kB) < 1e-4) b_not_pisot = val == "NotPisot";
    o.note << "rigid " << s.value("rigid", "?") << ", verdict " << s.value("verdict", "?") << ", flc "
           << s.value("flc", "?") << ", totally non-Pisot " << s.value("totally_non_pisot", false);
    o.check(res.exit_code == 0, "all blocks ran");
    o.check(s.value("rigid", "") == "yes", "rigid");
    o.check(w == std::set<std::string>{"(1,0)", "(0,1)"}, "witness");
    o.check(b_not_pisot, "b not Pisot");
    o.check(s.value("totally_non_pisot", false), "totally non-Pisot");
    o.check(s.value("verdict", "") == "WEAKLY_MIXING", "verdict");
    o.check(s.value("flc", "") == "ILC_evidence", "ILC");
}

void kenyon_pipeline(Outcome& o) {
    auto res = run_pipeline(cfg_of("kenyon"), "acceptance_out");
    const auto& s = res.report["summary"];
    bool vertical = false;
    for (const auto& p : s["period_candidates"]) vertical |= p == "(0,1)" || p == "(0,-1)";
    o.note << "rigid " << s.value("rigid", "?") << " (qdim " << s.value("qdim", 0) << " > " << s.value("qdim_bound", 0)
           << "), periods " << s["period_candidates"].dump() << ", verdict " << s.value("verdict", "?")
           << ", eigenvalues " << s["eigenvalues_found"].dump();
    o.check(res.exit_code == 0, "all blocks ran");
    o.check(s.value("rigid", "") == "no" && s.value("qdim", 0) == 3 && s.value("qdim_bound", 0) == 2, "not rigid");
    o.check(vertical, "period (0,1)");
    o.check(s.value("verdict", "") == "NOT_WEAKLY_MIXING", "verdict");
    o.check(s.value("eigenvalues_first_axis_only", false), "eigenvalues of the form (a1,0)");
}

void frequency_normalisation(Outcome& o) {
    const auto& c = cfg_of("fibonacci_1d");
    const auto& s = c.system;
    auto geo = tile_geometry(s);
    auto r = tile_frequencies(s, geo);
    double norm = 0;
    for (std::size_t i = 0; i < s.kappa(); ++i) norm += r[i] * geo.volumes[i];
    std::vector<double> want{kTau / (kTau + 2), 1 / (kTau + 2)};
    o.note << std::setprecision(6);
    for (std::size_t i = 0; i < 2; ++i) {
        auto f = patch_frequency(s, geo, {Tile{static_cast<int>(i), s.zero()}}, c.analysis.freq_levels);
        o.note << "type " << i + 1 << " curve " << f.value << " (target " << want[i] << "); ";
        o.check(std::abs(f.value - want[i]) < 1e-3, "type " + std::to_string(i + 1));
    }
    o.note << "sum r Vol = " << std::setprecision(12) << norm;
    o.check(std::abs(norm - 1) < 1e-6, "normalisation");
}

void count_bound(Outcome& o) {
    auto& a = count_audit();
    o.note << a.checks.load() << " counts audited, " << a.violations.load() << " violations";
    o.check(a.checks.load() > 0, "counts were performed");
    o.check(a.violations.load() == 0, "violations");
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "pf-identity", 1, pf_identity},
        {2, "volume-eigenvector", 30, volume_eigenvector},
        {3, "counting-identity", 10, counting_identity},
        {4, "metric-axioms", 30, metric_axioms},
        {5, "cylinder-partition", 60, cylinder_partition},
        {6, "non-mixing-bound", 60, mixing_bound},
        {7, "eigenvalue-verdicts", 10, eigen_verdicts},
        {8, "frank-robinson-pipeline", 120, fr_pipeline},
        {9, "kenyon-pipeline", 120, kenyon_pipeline},
        {10, "frequency-normalisation", 10, frequency_normalisation},
        {11, "count-bound", 1, count_bound},
    };
    // system loading is not part of any budget
    for (auto n : kSystems) sys_of(n);

    int failures = 0;
    for (auto& c : criteria) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << " [exception: " << e.what() << "]";
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt > c.budget_s) o.check(false, "runtime over " + std::to_string(static_cast<int>(c.budget_s)) + " s");
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " (" << std::fixed
                  << std::setprecision(2) << dt << " s) " << std::defaultfloat << o.note.str() << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures;
}
