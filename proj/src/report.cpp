#include "tilescope/report.hpp"

#include <cmath>

#include "tilescope/config.hpp"

namespace tilescope {

json tagged(double v, const char* method) {
    json j;
    j["value"] = std::isfinite(v) ? json(v) : json(nullptr);
    j["method"] = method;
    return j;
}

json tagged(const std::string& v, const char* method) { return json{{"value", v}, {"method", method}}; }

namespace {

json vec(const SubstitutionSystem& sys, const SymbolicVector& v) { return format_vector(*sys.basis, v); }

json scalar_desc(const AlgebraicScalar& a) {
    json j;
    json c = json::array();
    for (const auto& x : a.minpoly().coefficients()) c.push_back(x.get_str());
    j["minpoly"] = c;
    j["approx"] = tagged(a.approx().real(), "float");
    if (!a.is_real()) j["approx_imag"] = tagged(a.approx().imag(), "float");
    return j;
}

}  // namespace

json block_validation(const SubstitutionSystem& sys, const ValidationReport& v) {
    json j;
    j["dimension"] = sys.dim();
    j["prototiles"] = sys.kappa();
    j["expansive"] = v.expansive;
    j["primitivity_exponent"] = v.primitivity ? json(*v.primitivity) : json(nullptr);
    j["pf_value"] = tagged(v.pf_value, "float");
    j["abs_det_q"] = tagged(v.abs_det_q, "float");
    j["pf_relative_error"] = tagged(v.pf_relative_error, "float");
    json S = json::array();
    for (const auto& row : sys.S) S.push_back(row);
    j["substitution_matrix"] = S;
    json mod = json::array();
    for (double m : v.q_eigen_moduli) mod.push_back(tagged(m, "float"));
    j["q_eigen_moduli"] = mod;
    j["warnings"] = v.warnings;
    return j;
}

json block_volumes(const VolumeReport& v) {
    json j;
    json vols = json::array(), ratios = json::array(), masks = json::array(), bars = json::array();
    const char* m = v.scale_source == "declared" ? "exact" : "float";
    for (double x : v.volumes) vols.push_back(tagged(x, m));
    for (double x : v.eigen_ratios) ratios.push_back(tagged(x, "float"));
    for (double x : v.mask_volumes) masks.push_back(tagged(x, "raster"));
    for (double x : v.mask_error_bars) bars.push_back(tagged(x, "raster"));
    j["volumes"] = vols;
    j["eigen_ratios"] = ratios;
    j["raster_volumes"] = masks;
    j["raster_error_bars"] = bars;
    j["max_ratio_disagreement"] = tagged(v.max_ratio_disagreement, "raster");
    j["scale_source"] = v.scale_source;
    j["notes"] = v.notes;
    return j;
}

json block_ifs(const IfsResult& r, double h) {
    json j;
    j["resolution"] = tagged(h, "exact");
    j["iterations"] = r.iterations;
    j["claimed_accuracy"] = tagged(r.claimed_accuracy, "raster");
    json steps = json::array();
    for (double s : r.hausdorff_steps) steps.push_back(tagged(s, "raster"));
    j["hausdorff_steps"] = steps;
    json cells = json::array();
    for (const auto& m : r.masks) cells.push_back(m.count());
    j["cells"] = cells;
    return j;
}

json block_frequency(const FrequencyEstimate& f) {
    json j;
    j["value"] = tagged(f.value, "fit");
    j["error"] = tagged(f.error, "fit");
    j["type_independent"] = f.type_independent;
    json curves = json::array();
    for (const auto& c : f.curves) {
        json cj;
        cj["start_type"] = c.start_type + 1;
        cj["estimate"] = tagged(c.estimate, "fit");
        cj["error"] = tagged(c.error, "fit");
        cj["cauchy"] = c.cauchy;
        json pts = json::array();
        for (const auto& p : c.points)
            pts.push_back({{"level", p.level}, {"count", p.count}, {"ratio", tagged(p.ratio, "float")}});
        cj["points"] = pts;
        curves.push_back(cj);
    }
    j["curves"] = curves;
    return j;
}

json block_tile_frequencies(const std::vector<double>& r, const TileGeometry& geo) {
    json j;
    json a = json::array();
    double norm = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        a.push_back(tagged(r[i], "float"));
        norm += r[i] * geo.volumes[i];
    }
    j["frequencies"] = a;
    j["normalisation"] = tagged(norm, "float");
    j["volume_source"] = geo.volume_source;
    return j;
}

json block_flc(const FlcScan& s) {
    json j;
    j["verdict"] = to_string(s.verdict);
    json lv = json::array();
    for (const auto& l : s.levels)
        lv.push_back({{"level", l.level},
                      {"configurations", l.configurations},
                      {"min_gap", tagged(l.min_gap, "float")},
                      {"exact_irrational", l.exact_irrational}});
    j["levels"] = lv;
    return j;
}

json block_periods(const SubstitutionSystem& sys, const std::vector<PeriodCandidate>& p) {
    json j = json::array();
    for (const auto& c : p) j.push_back({{"t", vec(sys, c.t)}, {"matched_window", tagged(c.matched_window, "exact")}});
    return j;
}

json block_meyer(const MeyerScan& m) {
    json j;
    j["evidence"] = m.evidence;
    json lv = json::array();
    for (std::size_t i = 0; i < m.levels.size(); ++i)
        lv.push_back({{"level", m.levels[i]}, {"min_gap", tagged(m.min_gap[i], "float")}});
    j["levels"] = lv;
    return j;
}

json block_rigidity(const SubstitutionSystem& sys, const RigidityVerdict& v) {
    json j;
    j["status"] = to_string(v.status);
    j["rigid"] = v.status == RigidityStatus::Rigid;
    j["qdim"] = tagged(static_cast<double>(v.qdim), "exact");
    j["bound"] = tagged(static_cast<double>(v.bound), "exact");
    json w = json::array();
    for (const auto& x : v.witness) w.push_back(vec(sys, x));
    j["witness"] = w;
    j["experimental"] = v.experimental;
    j["reason"] = v.reason;
    return j;
}

json block_pisot(const SubstitutionSystem& sys) {
    json j;
    auto theta = expansion_eigenvalues(sys);
    json ev = json::array();
    for (const auto& t : theta) {
        json e = scalar_desc(t);
        auto p = is_pisot(t);
        e["pisot"] = to_string(p.status);
        e["margin"] = tagged(p.margin, "float");
        ev.push_back(e);
    }
    j["eigenvalues"] = ev;
    auto fam = is_pisot_family(theta);
    auto tnp = is_totally_non_pisot(theta);
    j["pisot_family"] = fam.undecided ? json("undecided") : json(fam.holds);
    j["totally_non_pisot"] = tnp.undecided ? json("undecided") : json(tnp.holds);
    std::vector<std::string> notes = fam.notes;
    notes.insert(notes.end(), tnp.notes.begin(), tnp.notes.end());
    j["notes"] = notes;
    return j;
}

json block_eigen(const SubstitutionSystem& sys, const EigenvalueVerdict& v, const AlphaFamily& fam) {
    json j;
    j["alpha"] = vec(sys, v.alpha);
    j["status"] = to_string(v.status);
    j["period_ok"] = v.period_ok;
    j["period_violations"] = v.period_violations;
    if (v.status == EigenStatus::ExactPass) j["n0"] = v.n0;
    if (v.status == EigenStatus::NumericPass) {
        j["rho"] = tagged(v.rho, "fit");
        j["C"] = tagged(v.C, "fit");
    }
    if (v.status != EigenStatus::ExactPass) j["fit_residual"] = tagged(v.fit_residual, "fit");
    if (v.status == EigenStatus::Fail) {
        j["fail_n"] = v.fail_n;
        j["fail_residue"] = tagged(v.fail_residue, "float");
    }
    json res = json::array();
    for (const auto& r : v.residues.values) res.push_back(tagged(r.value, r.exact ? "exact" : "float"));
    j["residues"] = res;
    j["precision_bits"] = precision_bits() < 128 ? 128u : precision_bits();
    j["truncated"] = v.residues.truncated;
    if (!v.residues.note.empty()) j["note"] = v.residues.note;
    json th = json::array();
    for (const auto& t : fam.theta) th.push_back(scalar_desc(t));
    j["theta_alpha"] = th;
    j["theta_pisot_family"] = fam.undecided ? json("undecided") : json(fam.family);
    j["theta_vacuous"] = fam.vacuous;
    return j;
}

json block_cylinders(const CylinderSet& set, const PartitionCheck& pc, const BirkhoffCurve* curve) {
    json j;
    j["m"] = set.grid.m;
    j["m0"] = set.grid.m0;
    j["eta"] = tagged(set.grid.eta, "float");
    j["F_half_width"] = tagged(set.F.hi[0], "exact");
    j["classes"] = set.classes.size();
    j["patterns"] = set.patterns;
    j["sub_boxes"] = set.sub_boxes;
    j["max_wiggle_volume"] = tagged(set.max_wiggle_volume, "float");
    j["cell_volume"] = tagged(std::pow(set.grid.h(), static_cast<double>(set.F.dim())), "exact");
    j["wiggle_bound_ok"] = set.wiggle_bound_ok;
    j["corner_probe_ok"] = set.corner_probe_ok;
    j["partition_total"] = tagged(pc.total, "float");
    j["literal_total"] = pc.literal_total < 0 ? json(nullptr) : tagged(pc.literal_total, "float");
    j["tolerance"] = pc.tolerance;
    j["partition_pass"] = pc.pass;
    json pa = json::array();
    for (auto& [a, v] : pc.per_alpha) pa.push_back({{"alpha", a}, {"measure", tagged(v, "float")}});
    j["largest_patterns"] = pa;
    json top = json::array();
    for (std::size_t c = 0; c < std::min<std::size_t>(10, set.classes.size()); ++c) {
        const auto& k = set.classes[c];
        top.push_back({{"alpha", k.alpha},
                       {"points", k.offsets.size()},
                       {"wiggle_volume", tagged(k.wiggle_volume, "float")},
                       {"occurrences", k.occurrences},
                       {"freq", tagged(k.freq, "float")},
                       {"measure", tagged(k.measure, "float")}});
    }
    j["top_classes"] = top;
    if (curve) {
        json b;
        b["alpha"] = curve->alpha;
        b["target"] = tagged(curve->target, "float");
        json st = json::array();
        for (const auto& s : curve->steps)
            st.push_back({{"radius", tagged(s.radius, "exact")},
                          {"vanhove", tagged(s.vanhove, "exact")},
                          {"mean", tagged(s.mean, "float")},
                          {"spread", tagged(s.spread, "float")}});
        b["steps"] = st;
        json tl = json::array();
        for (auto& [k, v] : curve->tail) tl.push_back({{"k0", k}, {"tail", tagged(v, "float")}});
        b["tail"] = tl;
        j["birkhoff"] = b;
    }
    return j;
}

json block_mixing(const SubstitutionSystem& sys, const SymbolicVector& z, const MixingBound& b) {
    json j;
    j["z"] = vec(sys, z);
    j["available"] = b.available;
    if (!b.note.empty()) j["note"] = b.note;
    if (!b.available) return j;
    j["delta"] = tagged(b.delta, "float");
    j["k0"] = b.k0;
    j["ell"] = b.ell + 1;
    j["host"] = b.host + 1;
    json c = json::array();
    for (const auto& p : b.curve)
        c.push_back({{"n", p.n},
                     {"level", p.level},
                     {"pair_count", p.pair_count},
                     {"single_count", p.single_count},
                     {"ratio", tagged(p.ratio, "float")}});
    j["curve"] = c;
    j["pass"] = b.pass;
    return j;
}

json block_weak_mixing(const WeakMixingReport& w) {
    json j;
    j["verdict"] = to_string(w.verdict);
    j["totally_non_pisot"] = w.totally_non_pisot;
    j["reasons"] = w.reasons;
    j["warnings"] = w.warnings;
    return j;
}

json block_audit() {
    auto& a = count_audit();
    return json{{"checks", a.checks.load()}, {"violations", a.violations.load()}};
}

json new_report(const std::string& system, const std::string& command) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["system"] = system;
    j["command"] = command;
    return j;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

}  // namespace tilescope
