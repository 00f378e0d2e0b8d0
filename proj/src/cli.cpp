#include "tilescope/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "tilescope/error.hpp"

namespace tilescope {

namespace fs = std::filesystem;

SystemConfig resolve_config(const std::string& arg) {
    if (fs::exists(arg)) return load_config(arg);
    if (arg.find('/') == std::string::npos && arg.find(".json") == std::string::npos) {
        std::string p = bundled_config_dir() + "/" + arg + ".json";
        if (fs::exists(p)) return load_config(p);
    }
    throw SchemaError("cannot open config '" + arg + "'");
}

std::string artifact_name(const std::string& system, const std::string& artifact, const std::string& params,
                          const std::string& ext) {
    std::string s = system + "_" + artifact;
    if (!params.empty()) s += "_" + params;
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '-';
    return s + "." + ext;
}

Patch parse_patch_spec(const SubstitutionSystem& sys, const std::string& spec) {
    Patch p;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos) throw SchemaError("patch tile '" + item + "' needs the form type:vector");
        int type = 0;
        try {
            type = std::stoi(item.substr(0, colon));
        } catch (const std::exception&) {
            throw SchemaError("bad tile type in '" + item + "'");
        }
        if (type < 1 || type > static_cast<int>(sys.kappa()))
            throw SchemaError("tile type " + std::to_string(type) + " out of range");
        p.push_back(Tile{type - 1, parse_vector(*sys.basis, item.substr(colon + 1), sys.dim())});
    }
    if (p.empty()) throw SchemaError("empty patch");
    return p;
}

namespace {

double default_resolution(const SystemConfig& cfg) {
    if (cfg.analysis.resolution > 0) return cfg.analysis.resolution;
    auto boxes = support_boxes(cfg.system);
    double side = 0;
    for (std::size_t j = 0; j < cfg.system.kappa(); ++j)
        for (std::size_t a = 0; a < cfg.system.dim(); ++a) side = std::max(side, boxes.hi[j][a] - boxes.lo[j][a]);
    return side / 256;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    write_file_atomic((fs::path(dir) / name).string(), text);
}

std::vector<SymbolicVector> period_vectors(const std::vector<PeriodCandidate>& p) {
    std::vector<SymbolicVector> out;
    for (const auto& c : p) out.push_back(c.t);
    return out;
}

double period_window(const SystemConfig& cfg) { return cfg.analysis.period_window > 0 ? cfg.analysis.period_window : 8.0; }

// run one block; failures are recorded in the report instead of aborting
struct BlockRunner {
    json& report;
    int& code;
    void operator()(const std::string& name, const std::function<json()>& f) {
        try {
            report["blocks"][name] = f();
        } catch (const Error& e) {
            report["blocks"][name] = json{{"status", "failed"}, {"error", e.what()}, {"exit_code", e.exit_code()}};
            if (code == 0) code = e.exit_code();
        } catch (const std::exception& e) {
            report["blocks"][name] = json{{"status", "failed"}, {"error", e.what()}, {"exit_code", 4}};
            if (code == 0) code = 4;
        }
    }
};

}  // namespace

PipelineResult run_pipeline(const SystemConfig& cfg, const std::string& out_dir) {
    const auto& sys = cfg.system;
    const auto& A = cfg.analysis;
    PipelineResult res;
    res.report = new_report(sys.name, "report --all");
    BlockRunner run{res.report, res.exit_code};

    std::optional<ValidationReport> val;
    run("validation", [&] {
        val = validate_system(sys);
        return block_validation(sys, *val);
    });
    if (!val) return res;

    std::optional<TileGeometry> geo;
    run("volumes", [&] {
        double h = default_resolution(cfg);
        auto ifs = solve_adjoint_ifs(sys, h, A.ifs_iters);
        auto vr = prototile_volumes(sys, &ifs.masks);
        json j = block_volumes(vr);
        j["ifs"] = block_ifs(ifs, h);
        return j;
    });
    run("tile_frequencies", [&] {
        geo = tile_geometry(sys);
        return block_tile_frequencies(tile_frequencies(sys, *geo), *geo);
    });
    if (geo) {
        run("patch_frequency", [&] {
            Patch P{Tile{0, sys.zero()}};
            auto f = patch_frequency(sys, *geo, P, A.freq_levels);
            write_text(out_dir, artifact_name(sys.name, "freq", "T1_levels" + std::to_string(A.freq_levels), "csv"),
                       curve_csv(f));
            json j = block_frequency(f);
            j["patch"] = "1:0";
            return j;
        });
    }

    std::optional<ReturnVectorSet> xi;
    std::optional<RigidityVerdict> rig;
    run("rigidity", [&] {
        xi = return_vectors(sys, A.return_level, A.return_radius);
        rig = rigidity_check(sys, *xi);
        json j = block_rigidity(sys, *rig);
        j["return_vectors"] = xi->vectors.size();
        return j;
    });

    std::optional<FlcScan> flc;
    run("flc", [&] {
        flc = flc_scan(sys, A.flc_levels, A.flc_radius, A.flc_epsilon);
        return block_flc(*flc);
    });

    std::vector<PeriodCandidate> periods;
    run("periods", [&] {
        periods = detect_periods(sys, A.levels, period_window(cfg));
        json j;
        j["window"] = tagged(period_window(cfg), "exact");
        j["candidates"] = block_periods(sys, periods);
        return j;
    });

    run("meyer", [&] {
        std::vector<ReturnVectorSet> by_level;
        for (unsigned l = 1; l <= A.return_level + 1; ++l) by_level.push_back(return_vectors(sys, l, A.return_radius));
        return block_meyer(meyer_scan(sys, by_level, A.return_radius));
    });

    run("pisot", [&] { return block_pisot(sys); });

    std::vector<EigenvalueVerdict> eig;
    if (xi) {
        run("eigenvalues", [&] {
            json arr = json::array();
            for (const auto& c : A.eigen_candidates) {
                auto alpha = parse_vector(*sys.basis, c, sys.dim());
                auto v = eigenvalue_test(sys, alpha, xi->vectors, period_vectors(periods), A.nmax);
                write_text(out_dir, artifact_name(sys.name, "residues", c + "_N" + std::to_string(A.nmax), "csv"),
                           residues_csv(v));
                arr.push_back(block_eigen(sys, v, pisot_family_of_alpha(sys, alpha)));
                eig.push_back(std::move(v));
            }
            return arr;
        });
    }

    if (geo) {
        run("mixing", [&] {
            json arr = json::array();
            for (const auto& zs : A.mixing_z) {
                auto z = parse_vector(*sys.basis, zs, sys.dim());
                auto b = mixing_overlap_bound(sys, *geo, z);
                write_text(out_dir, artifact_name(sys.name, "mixing", zs, "csv"), mixing_csv(b));
                arr.push_back(block_mixing(sys, z, b));
            }
            return arr;
        });
        run("cylinders", [&] {
            auto smp = cylinder_sample(sys, *geo, A.cylinder_level, A.m);
            auto grid = make_grid(separation_constant(smp.x), A.m);
            auto set = build_cylinders(smp, grid);
            auto pc = partition_check(smp, set);
            auto curve = birkhoff_cylinder_estimate(sys, *geo, smp, set, 0);
            json j = block_cylinders(set, pc, &curve);
            j["level"] = A.cylinder_level;
            return j;
        });
    }

    WeakMixingReport wm;
    run("weak_mixing", [&] {
        wm = weak_mixing_verdict(sys, eig, flc, rig);
        return block_weak_mixing(wm);
    });

    // headline verdicts
    json s;
    if (rig) {
        s["rigid"] = rig->status == RigidityStatus::Rigid ? json("yes")
                     : rig->status == RigidityStatus::NotRigid ? json("no")
                                                               : json(to_string(rig->status));
        json w = json::array();
        for (const auto& v : rig->witness) w.push_back(format_vector(*sys.basis, v));
        s["rigidity_witness"] = w;
        s["qdim"] = rig->qdim;
        s["qdim_bound"] = rig->bound;
    }
    json pis = json::object();
    for (const auto& t : expansion_eigenvalues(sys)) pis[fmt(t.approx().real())] = to_string(is_pisot(t).status);
    s["pisot"] = pis;
    s["totally_non_pisot"] = wm.totally_non_pisot;
    s["verdict"] = to_string(wm.verdict);
    if (flc) s["flc"] = to_string(flc->verdict);
    json pc = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(periods.size(), 4); ++i)
        pc.push_back(format_vector(*sys.basis, periods[i].t));
    s["period_candidates"] = pc;
    json passing = json::array();
    bool first_axis_only = true;
    for (const auto& e : eig)
        if (e.status != EigenStatus::Fail && e.period_ok && !e.alpha.is_zero()) {
            passing.push_back(format_vector(*sys.basis, e.alpha));
            for (std::size_t a = 1; a < sys.dim(); ++a)
                if (!e.alpha.coordinate(a).is_zero()) first_axis_only = false;
        }
    s["eigenvalues_found"] = passing;
    s["eigenvalues_first_axis_only"] = !passing.empty() && first_axis_only;
    res.report["summary"] = s;
    res.report["count_audit"] = block_audit();
    write_text(out_dir, artifact_name(sys.name, "report", "all", "json"), dump_report(res.report));
    return res;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tilescope: substitution tilings, hulls and spectra"};
    app.require_subcommand(1);
    std::string config, out_dir = "out";
    auto common = [&](CLI::App* c) {
        c->add_option("config", config, "config file or bundled system name")->required();
        c->add_option("--out", out_dir, "artifact directory");
    };

    auto* c_validate = app.add_subcommand("validate", "load and validate a system");
    common(c_validate);

    unsigned level = 0;
    std::string window_spec;
    auto* c_generate = app.add_subcommand("generate", "fixed-point patch");
    common(c_generate);
    c_generate->add_option("--level", level, "depth in seed periods");
    c_generate->add_option("--window", window_spec, "clip box lo:hi per axis, comma separated");

    bool svg = true;
    double resolution = 0;
    unsigned iters = 0;
    auto* c_render = app.add_subcommand("render", "SVG of a fixed-point patch");
    common(c_render);
    c_render->add_flag("--svg", svg, "write SVG (default)");
    c_render->add_option("--level", level, "depth in seed periods");
    c_render->add_option("--resolution", resolution, "raster cell side");

    bool boundary = false;
    auto* c_proto = app.add_subcommand("prototiles", "attractors of the adjoint system");
    common(c_proto);
    c_proto->add_option("--resolution", resolution, "raster cell side");
    c_proto->add_option("--iters", iters, "IFS iterations (0: until stable)");
    c_proto->add_flag("--boundary", boundary, "boundary scan at h, h/2, h/4");

    std::string patch_spec = "1:0";
    unsigned levels = 0;
    auto* c_freq = app.add_subcommand("freq", "patch frequency from level curves");
    common(c_freq);
    c_freq->add_option("--patch", patch_spec, "tiles as type:vector separated by ';'");
    c_freq->add_option("--levels", levels, "substitution levels");

    double radius = 0;
    auto* c_flc = app.add_subcommand("flc", "local complexity scan");
    common(c_flc);
    c_flc->add_option("--levels", levels, "levels");
    c_flc->add_option("--radius", radius, "pair radius");

    auto* c_rig = app.add_subcommand("rigidity", "rigidity of the return-vector module");
    common(c_rig);
    c_rig->add_option("--level", level, "return-vector level");
    c_rig->add_option("--radius", radius, "return-vector radius");

    auto* c_pisot = app.add_subcommand("pisot", "Pisot classification of Q's eigenvalues");
    common(c_pisot);

    std::string alpha_spec;
    unsigned nmax = 0;
    auto* c_eig = app.add_subcommand("eigentest", "eigenvalue residue test");
    common(c_eig);
    c_eig->add_option("--alpha", alpha_spec, "candidate, e.g. \"tau-1,0\"")->required();
    c_eig->add_option("--nmax", nmax, "largest n");

    unsigned m = 0;
    auto* c_cyl = app.add_subcommand("cylinders", "cylinder classes and partition check");
    common(c_cyl);
    c_cyl->add_option("--m", m, "grid level");
    c_cyl->add_option("--level", level, "sample depth");

    std::string z_spec;
    auto* c_mix = app.add_subcommand("mixing", "non-mixing overlap bound");
    common(c_mix);
    c_mix->add_option("--z", z_spec, "return vector")->required();

    std::string file_a, file_b;
    auto* c_metric = app.add_subcommand("metric", "rubber distance between two patches");
    common(c_metric);
    c_metric->add_option("--a", file_a, "patch file")->required();
    c_metric->add_option("--b", file_b, "patch file")->required();

    bool all = false;
    auto* c_report = app.add_subcommand("report", "full pipeline");
    common(c_report);
    c_report->add_flag("--all", all, "run every analysis");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        SystemConfig cfg = resolve_config(config);
        const auto& sys = cfg.system;
        const auto& A = cfg.analysis;
        auto emit = [&](const json& rep, const std::string& artifact, const std::string& params) {
            std::string text = dump_report(rep);
            write_text(out_dir, artifact_name(sys.name, artifact, params, "json"), text);
            out << text;
        };

        if (*c_report) {
            if (!all) throw SchemaError("report needs --all");
            auto res = run_pipeline(cfg, out_dir);
            out << dump_report(res.report);
            return res.exit_code;
        }

        auto vr = validate_system(sys);
        for (const auto& w : vr.warnings) err << "warning: " << w << "\n";

        if (*c_validate) {
            json rep = new_report(sys.name, "validate");
            rep["validation"] = block_validation(sys, vr);
            emit(rep, "validate", "");
            return 0;
        }
        if (*c_generate) {
            Seed seed = fixed_point_seed(sys);
            Window w;
            bool clip = !window_spec.empty();
            if (clip) {
                std::stringstream ss(window_spec);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    auto c = part.find(':');
                    if (c == std::string::npos) throw SchemaError("window axis '" + part + "' needs lo:hi");
                    w.lo.push_back(std::stod(part.substr(0, c)));
                    w.hi.push_back(std::stod(part.substr(c + 1)));
                }
                if (w.dim() != sys.dim()) throw SchemaError("window needs one lo:hi per axis");
            }
            double side = 0;
            auto boxes = support_boxes(sys);
            for (std::size_t j = 0; j < sys.kappa(); ++j)
                for (std::size_t a = 0; a < sys.dim(); ++a) side = std::max(side, boxes.hi[j][a] - boxes.lo[j][a]);
            Patch p = fixed_point_patch(sys, seed, level, clip ? &w : nullptr, side);
            std::string params = "level" + std::to_string(level);
            write_text(out_dir, artifact_name(sys.name, "patch", params, "txt"), serialize_patch(sys, p));
            json rep = new_report(sys.name, "generate");
            rep["level"] = level;
            rep["seed"] = {{"type", seed.tile.type + 1}, {"shift", format_vector(*sys.basis, seed.tile.shift)},
                           {"period", seed.N}};
            rep["tiles"] = p.size();
            rep["type_counts"] = type_counts(p, sys.kappa());
            if (p.size() <= 16) {
                json t = json::array();
                for (const auto& x : p) t.push_back({{"type", x.type + 1}, {"shift", format_vector(*sys.basis, x.shift)}});
                rep["patch"] = t;
            }
            emit(rep, "generate", params);
            return 0;
        }
        if (*c_render) {
            double h = resolution > 0 ? resolution : default_resolution(cfg);
            auto ifs = solve_adjoint_ifs(sys, h, A.ifs_iters);
            Patch p = fixed_point_patch(sys, fixed_point_seed(sys), level);
            std::string params = "level" + std::to_string(level);
            std::string path = (fs::path(out_dir) / artifact_name(sys.name, "render", params, "svg")).string();
            write_patch_svg(sys, p, ifs.masks, path);
            json rep = new_report(sys.name, "render");
            rep["svg"] = path;
            rep["tiles"] = p.size();
            emit(rep, "render", params);
            return 0;
        }
        if (*c_proto) {
            double h = resolution > 0 ? resolution : default_resolution(cfg);
            auto ifs = solve_adjoint_ifs(sys, h, iters ? iters : A.ifs_iters);
            auto v = prototile_volumes(sys, &ifs.masks);
            std::string params = "h" + fmt(h);
            for (std::size_t j = 0; j < ifs.masks.size(); ++j)
                write_pgm(ifs.masks[j],
                          (fs::path(out_dir) / artifact_name(sys.name, "prototile" + std::to_string(j + 1), params, "pgm"))
                              .string());
            write_mask_svg(ifs.masks, (fs::path(out_dir) / artifact_name(sys.name, "prototiles", params, "svg")).string());
            json rep = new_report(sys.name, "prototiles");
            rep["ifs"] = block_ifs(ifs, h);
            rep["volumes"] = block_volumes(v);
            if (boundary) {
                auto b = boundary_scan(sys, h, iters ? iters : A.ifs_iters);
                json bs = json::array();
                for (std::size_t r = 0; r < b.resolutions.size(); ++r) {
                    json row = json::array();
                    for (double x : b.boundary_volume[r]) row.push_back(tagged(x, "raster"));
                    bs.push_back({{"resolution", b.resolutions[r]}, {"boundary_volume", row}});
                }
                rep["boundary_scan"] = {{"levels", bs}, {"decreasing", b.decreasing}};
            }
            emit(rep, "prototiles", params);
            return 0;
        }
        if (*c_freq) {
            auto geo = tile_geometry(sys);
            Patch P = parse_patch_spec(sys, patch_spec);
            unsigned n = levels ? levels : A.freq_levels;
            auto f = patch_frequency(sys, geo, P, n);
            std::string params = "levels" + std::to_string(n);
            write_text(out_dir, artifact_name(sys.name, "freq", params, "csv"), curve_csv(f));
            json rep = new_report(sys.name, "freq");
            rep["patch"] = patch_spec;
            rep["frequency"] = block_frequency(f);
            rep["tile_frequencies"] = block_tile_frequencies(tile_frequencies(sys, geo), geo);
            rep["count_audit"] = block_audit();
            emit(rep, "freq", params);
            return 0;
        }
        if (*c_flc) {
            unsigned n = levels ? levels : A.flc_levels;
            double r = radius > 0 ? radius : A.flc_radius;
            json rep = new_report(sys.name, "flc");
            rep["flc"] = block_flc(flc_scan(sys, n, r, A.flc_epsilon));
            emit(rep, "flc", "levels" + std::to_string(n) + "_r" + fmt(r));
            return 0;
        }
        if (*c_rig) {
            auto xi = return_vectors(sys, level ? level : A.return_level, radius > 0 ? radius : A.return_radius);
            json rep = new_report(sys.name, "rigidity");
            rep["rigidity"] = block_rigidity(sys, rigidity_check(sys, xi));
            rep["return_vectors"] = xi.vectors.size();
            emit(rep, "rigidity", "");
            return 0;
        }
        if (*c_pisot) {
            json rep = new_report(sys.name, "pisot");
            rep["pisot"] = block_pisot(sys);
            emit(rep, "pisot", "");
            return 0;
        }
        if (*c_eig) {
            auto alpha = parse_vector(*sys.basis, alpha_spec, sys.dim());
            unsigned N = nmax ? nmax : A.nmax;
            auto xi = return_vectors(sys, A.return_level, A.return_radius);
            auto periods = detect_periods(sys, A.levels, period_window(cfg));
            auto v = eigenvalue_test(sys, alpha, xi.vectors, period_vectors(periods), N);
            std::string params = alpha_spec + "_N" + std::to_string(N);
            write_text(out_dir, artifact_name(sys.name, "residues", params, "csv"), residues_csv(v));
            json rep = new_report(sys.name, "eigentest");
            rep["eigenvalue"] = block_eigen(sys, v, pisot_family_of_alpha(sys, alpha));
            emit(rep, "eigentest", params);
            return 0;
        }
        if (*c_cyl) {
            auto geo = tile_geometry(sys);
            unsigned mm = m ? m : A.m;
            unsigned lv = level ? level : A.cylinder_level;
            auto smp = cylinder_sample(sys, geo, lv, mm);
            auto grid = make_grid(separation_constant(smp.x), mm);
            auto set = build_cylinders(smp, grid);
            auto pc = partition_check(smp, set);
            auto curve = birkhoff_cylinder_estimate(sys, geo, smp, set, 0);
            json rep = new_report(sys.name, "cylinders");
            rep["cylinders"] = block_cylinders(set, pc, &curve);
            rep["level"] = lv;
            rep["count_audit"] = block_audit();
            emit(rep, "cylinders", "m" + std::to_string(mm) + "_level" + std::to_string(lv));
            return 0;
        }
        if (*c_mix) {
            auto geo = tile_geometry(sys);
            auto z = parse_vector(*sys.basis, z_spec, sys.dim());
            auto b = mixing_overlap_bound(sys, geo, z);
            write_text(out_dir, artifact_name(sys.name, "mixing", z_spec, "csv"), mixing_csv(b));
            json rep = new_report(sys.name, "mixing");
            rep["mixing"] = block_mixing(sys, z, b);
            rep["count_audit"] = block_audit();
            emit(rep, "mixing", z_spec);
            return 0;
        }
        if (*c_metric) {
            auto read = [&](const std::string& f) {
                std::ifstream in(f);
                if (!in) throw SchemaError("cannot open patch file '" + f + "'");
                std::stringstream ss;
                ss << in.rdbuf();
                return to_coloured(sys, parse_patch(sys, ss.str()));
            };
            auto r = rubber_metric_detail(read(file_a), read(file_b));
            json rep = new_report(sys.name, "metric");
            rep["distance"] = tagged(r.value, "float");
            rep["capped"] = r.capped;
            rep["empty_input"] = r.empty_input;
            emit(rep, "metric", "");
            return 0;
        }
        return 2;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const MathError& e) {
        err << "math error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace tilescope
