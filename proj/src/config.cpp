#include "tilescope/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tilescope/error.hpp"

namespace tilescope {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& need(const json& j, const std::string& key, const std::string& ptr) {
    if (!j.is_object()) throw SchemaError("expected an object", ptr);
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError("missing required field '" + key + "'", ptr);
    return *it;
}

const json& need_array(const json& j, const std::string& key, const std::string& ptr) {
    const json& v = need(j, key, ptr);
    if (!v.is_array()) throw SchemaError("expected an array", child(ptr, key));
    return v;
}

std::string as_text(const json& v, const std::string& ptr) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw SchemaError("expected a string expression or integer", ptr);
}

double as_double(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw SchemaError("expected a number", ptr);
    return v.get<double>();
}

unsigned as_unsigned(const json& v, const std::string& ptr) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError("expected a natural number", ptr);
    return static_cast<unsigned>(v.get<long long>());
}

template <class F>
auto at_pointer(const std::string& ptr, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError& e) {
        if (!e.pointer().empty()) throw;
        throw SchemaError(e.what(), ptr);
    }
}

MinimalPolynomial read_poly(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw SchemaError("minpoly must be a nonempty integer array", ptr);
    std::vector<Integer> c;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& x = j[i];
        if (x.is_number_integer())
            c.emplace_back(static_cast<long>(x.get<long long>()));
        else if (x.is_string())
            c.emplace_back(x.get<std::string>());
        else
            throw SchemaError("coefficient must be an integer", child(ptr, i));
    }
    return MinimalPolynomial(std::move(c));
}

AlgebraicScalar read_algebraic(const json& j, const std::string& ptr) {
    MinimalPolynomial p = read_poly(need(j, "minpoly", ptr), child(ptr, "minpoly"));
    const json& near = need(j, "near", ptr);
    std::complex<double> z;
    if (near.is_number())
        z = near.get<double>();
    else if (near.is_array() && near.size() == 2)
        z = {as_double(near[0], child(ptr, "near")), as_double(near[1], child(ptr, "near"))};
    else
        throw SchemaError("near must be a number or [re, im]", child(ptr, "near"));
    return AlgebraicScalar(std::move(p), z);
}

json algebraic_json(const AlgebraicScalar& a) {
    json poly = json::array();
    for (const auto& c : a.minpoly().coefficients()) {
        if (c.fits_slong_p())
            poly.push_back(c.get_si());
        else
            poly.push_back(c.get_str());
    }
    json near = a.is_real() ? json(a.approx().real()) : json::array({a.approx().real(), a.approx().imag()});
    return json{{"minpoly", poly}, {"near", near}};
}

SymbolicVector read_vector(const CoordinateBasis& basis, const json& j, std::size_t d, const std::string& ptr) {
    if (j.is_string()) return at_pointer(ptr, [&] { return parse_vector(basis, j.get<std::string>(), d); });
    if (!j.is_array() || j.size() != d)
        throw SchemaError("expected a vector of " + std::to_string(d) + " components", ptr);
    SymbolicVector v(d, basis.size());
    for (std::size_t i = 0; i < d; ++i)
        v.set_coordinate(i, at_pointer(child(ptr, i), [&] { return parse_scalar(basis, as_text(j[i], child(ptr, i))); }));
    return v;
}

json vector_json(const CoordinateBasis& basis, const SymbolicVector& v) {
    json out = json::array();
    for (std::size_t i = 0; i < v.dim(); ++i) out.push_back(format_scalar(basis, v.coordinate(i)));
    return out;
}

std::vector<std::string> read_string_list(const json& j, const std::string& ptr) {
    std::vector<std::string> out;
    if (!j.is_array()) throw SchemaError("expected an array of strings", ptr);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) throw SchemaError("expected a string", child(ptr, i));
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

}  // namespace

SystemConfig parse_config(const json& j) {
    const std::string root;
    if (!j.is_object()) throw SchemaError("config must be a JSON object", "/");
    const json& ver = need(j, "schema_version", root);
    if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
        throw SchemaError("unsupported schema_version", "/schema_version");

    SystemConfig cfg;
    SubstitutionSystem& sys = cfg.system;
    const json& name = need(j, "name", root);
    if (!name.is_string()) throw SchemaError("expected a string", "/name");
    sys.name = name.get<std::string>();
    const std::size_t d = as_unsigned(need(j, "dimension", root), "/dimension");
    if (d < 1) throw SchemaError("dimension must be >= 1", "/dimension");

    // basis
    auto basis = std::make_shared<CoordinateBasis>();
    if (j.contains("basis")) {
        const json& bl = need_array(j, "basis", root);
        for (std::size_t i = 0; i < bl.size(); ++i) {
            std::string p = child("/basis", i);
            const json& e = bl[i];
            const json& nm = need(e, "name", p);
            if (!nm.is_string()) throw SchemaError("expected a string", child(p, "name"));
            const json& kind = need(e, "kind", p);
            std::string k = kind.is_string() ? kind.get<std::string>() : "";
            at_pointer(p, [&] {
                if (k == "algebraic") {
                    basis->add_algebraic(nm.get<std::string>(), read_algebraic(e, p));
                } else if (k == "free") {
                    const json& w = need(e, "witness", p);
                    if (w.is_string())
                        basis->add_free(nm.get<std::string>(), w.get<std::string>());
                    else
                        basis->add_free(nm.get<std::string>(), read_algebraic(w, child(p, "witness")));
                } else {
                    throw SchemaError("kind must be 'algebraic' or 'free'", child(p, "kind"));
                }
                return 0;
            });
        }
    }
    if (j.contains("products")) {
        const json& pl = need_array(j, "products", root);
        for (std::size_t i = 0; i < pl.size(); ++i) {
            std::string p = child("/products", i);
            const json& lhs = need(pl[i], "lhs", p);
            if (!lhs.is_array() || lhs.size() != 2) throw SchemaError("lhs must name two symbols", child(p, "lhs"));
            int a = -1, b = -1;
            for (int t = 0; t < 2; ++t) {
                std::string s = lhs[t].is_string() ? lhs[t].get<std::string>() : "";
                int idx = basis->index_of(s);
                if (idx < 0) throw SchemaError("undeclared symbol '" + s + "'", child(child(p, "lhs"), t));
                (t ? b : a) = idx;
            }
            Scalar rhs = at_pointer(child(p, "rhs"), [&] { return parse_scalar(*basis, as_text(need(pl[i], "rhs", p), child(p, "rhs"))); });
            basis->set_product(a, b, rhs.c);
        }
    }
    basis->derive_products();
    basis->validate();
    sys.basis = basis;

    // expansion map
    const json& ex = need(j, "expansion", root);
    const json& mat = need_array(ex, "matrix", "/expansion");
    if (mat.size() != d) throw SchemaError("matrix must have d rows", "/expansion/matrix");
    sys.Q.dim = d;
    for (std::size_t r = 0; r < d; ++r) {
        std::string p = child("/expansion/matrix", r);
        if (!mat[r].is_array() || mat[r].size() != d) throw SchemaError("row must have d entries", p);
        std::vector<Scalar> row;
        std::vector<double> nrow;
        for (std::size_t c = 0; c < d; ++c) {
            Scalar x = at_pointer(child(p, c), [&] { return parse_scalar(*basis, as_text(mat[r][c], child(p, c))); });
            nrow.push_back(evaluate(*basis, x));
            row.push_back(std::move(x));
        }
        sys.Q.entries.push_back(std::move(row));
        sys.Q.numeric.push_back(std::move(nrow));
    }
    if (ex.contains("eigenvalues")) {
        const json& el = need_array(ex, "eigenvalues", "/expansion");
        for (std::size_t i = 0; i < el.size(); ++i) {
            std::string p = child("/expansion/eigenvalues", i);
            EigenDecl e;
            if (el[i].contains("symbol")) {
                std::string s = el[i]["symbol"].is_string() ? el[i]["symbol"].get<std::string>() : "";
                int idx = basis->index_of(s);
                if (idx < 0) throw SchemaError("undeclared symbol '" + s + "'", child(p, "symbol"));
                const auto& sym = basis->symbol(idx);
                if (sym.kind != BasisSymbol::Kind::Algebraic)
                    throw MathError("eigenvalue symbol '" + s + "' must be algebraic");
                e.value = *sym.algebraic;
            } else {
                e.value = at_pointer(p, [&] { return read_algebraic(el[i], p); });
            }
            if (el[i].contains("multiplicity")) e.multiplicity = static_cast<int>(as_unsigned(el[i]["multiplicity"], child(p, "multiplicity")));
            sys.Q.eigen_decl.push_back(std::move(e));
        }
    }

    // prototiles
    const json& pt = need_array(j, "prototiles", root);
    if (pt.empty()) throw SchemaError("at least one prototile required", "/prototiles");
    for (std::size_t i = 0; i < pt.size(); ++i) {
        std::string p = child("/prototiles", i);
        const json& lab = need(pt[i], "label", p);
        if (!lab.is_string()) throw SchemaError("expected a string", child(p, "label"));
        sys.labels.push_back(lab.get<std::string>());
        sys.anchors.push_back(pt[i].contains("anchor") ? read_vector(*basis, pt[i]["anchor"], d, child(p, "anchor"))
                                                       : SymbolicVector(d, basis->size()));
        if (pt[i].contains("volume"))
            sys.declared_volumes.push_back(at_pointer(child(p, "volume"), [&] {
                return parse_scalar(*basis, as_text(pt[i]["volume"], child(p, "volume")));
            }));
        else
            sys.declared_volumes.push_back(std::nullopt);
    }
    const std::size_t kappa = sys.labels.size();

    // digits
    sys.digits.assign(kappa, std::vector<std::vector<SymbolicVector>>(kappa));
    const json& dl = need_array(j, "digits", root);
    for (std::size_t i = 0; i < dl.size(); ++i) {
        std::string p = child("/digits", i);
        unsigned c = as_unsigned(need(dl[i], "child", p), child(p, "child"));
        unsigned par = as_unsigned(need(dl[i], "parent", p), child(p, "parent"));
        if (c < 1 || c > kappa) throw SchemaError("child index out of range", child(p, "child"));
        if (par < 1 || par > kappa) throw SchemaError("parent index out of range", child(p, "parent"));
        const json& vs = need_array(dl[i], "vectors", p);
        for (std::size_t v = 0; v < vs.size(); ++v)
            sys.digits[c - 1][par - 1].push_back(read_vector(*basis, vs[v], d, child(child(p, "vectors"), v)));
    }
    sys.finalize();

    // analysis defaults
    AnalysisDefaults& a = cfg.analysis;
    if (j.contains("analysis")) {
        const json& an = j["analysis"];
        const std::string p = "/analysis";
        if (!an.is_object()) throw SchemaError("expected an object", p);
        auto u = [&](const char* key, unsigned& dst) {
            if (an.contains(key)) dst = as_unsigned(an[key], child(p, key));
        };
        auto f = [&](const char* key, double& dst) {
            if (an.contains(key)) dst = as_double(an[key], child(p, key));
        };
        u("levels", a.levels);
        u("flc_levels", a.flc_levels);
        f("flc_radius", a.flc_radius);
        f("flc_epsilon", a.flc_epsilon);
        u("return_level", a.return_level);
        f("return_radius", a.return_radius);
        f("period_window", a.period_window);
        f("resolution", a.resolution);
        u("ifs_iters", a.ifs_iters);
        u("m", a.m);
        u("cylinder_level", a.cylinder_level);
        u("nmax", a.nmax);
        u("freq_levels", a.freq_levels);
        if (an.contains("eigen_candidates")) a.eigen_candidates = read_string_list(an["eigen_candidates"], child(p, "eigen_candidates"));
        if (an.contains("mixing_z")) a.mixing_z = read_string_list(an["mixing_z"], child(p, "mixing_z"));
        for (const auto& s : a.eigen_candidates) at_pointer(child(p, "eigen_candidates"), [&] { return parse_vector(*basis, s, d); });
        for (const auto& s : a.mixing_z) at_pointer(child(p, "mixing_z"), [&] { return parse_vector(*basis, s, d); });
    }
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what(), "/");
    }
    SystemConfig cfg = parse_config(j);
    cfg.source_path = path;
    return cfg;
}

json serialize_config(const SystemConfig& cfg) {
    const auto& sys = cfg.system;
    const auto& basis = *sys.basis;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = sys.name;
    j["dimension"] = sys.dim();

    json bl = json::array();
    for (std::size_t i = 1; i < basis.size(); ++i) {
        const auto& s = basis.symbol(i);
        json e{{"name", s.name}};
        if (s.kind == BasisSymbol::Kind::Algebraic) {
            e["kind"] = "algebraic";
            json a = algebraic_json(*s.algebraic);
            e["minpoly"] = a["minpoly"];
            e["near"] = a["near"];
        } else {
            e["kind"] = "free";
            e["witness"] = s.algebraic ? algebraic_json(*s.algebraic) : json(s.decimal);
        }
        bl.push_back(e);
    }
    j["basis"] = bl;

    json pl = json::array();
    for (std::size_t a = 1; a < basis.size(); ++a)
        for (std::size_t b = a; b < basis.size(); ++b)
            if (const auto* p = basis.product(static_cast<int>(a), static_cast<int>(b))) {
                Scalar rhs(basis.size());
                rhs.c = *p;
                pl.push_back({{"lhs", {basis.symbol(a).name, basis.symbol(b).name}}, {"rhs", format_scalar(basis, rhs)}});
            }
    j["products"] = pl;

    json mat = json::array();
    for (const auto& row : sys.Q.entries) {
        json r = json::array();
        for (const auto& x : row) r.push_back(format_scalar(basis, x));
        mat.push_back(r);
    }
    json ev = json::array();
    for (const auto& e : sys.Q.eigen_decl) {
        json a = algebraic_json(e.value);
        a["multiplicity"] = e.multiplicity;
        ev.push_back(a);
    }
    j["expansion"] = {{"matrix", mat}, {"eigenvalues", ev}};

    json pt = json::array();
    for (std::size_t i = 0; i < sys.kappa(); ++i) {
        json e{{"label", sys.labels[i]}, {"anchor", vector_json(basis, sys.anchors[i])}};
        if (sys.declared_volumes[i]) e["volume"] = format_scalar(basis, *sys.declared_volumes[i]);
        pt.push_back(e);
    }
    j["prototiles"] = pt;

    json dl = json::array();
    for (std::size_t c = 0; c < sys.kappa(); ++c)
        for (std::size_t p = 0; p < sys.kappa(); ++p) {
            if (sys.digits[c][p].empty()) continue;
            json vs = json::array();
            for (const auto& u : sys.digits[c][p]) vs.push_back(vector_json(basis, u));
            dl.push_back({{"child", c + 1}, {"parent", p + 1}, {"vectors", vs}});
        }
    j["digits"] = dl;

    const auto& a = cfg.analysis;
    j["analysis"] = {{"levels", a.levels},
                     {"flc_levels", a.flc_levels},
                     {"flc_radius", a.flc_radius},
                     {"flc_epsilon", a.flc_epsilon},
                     {"return_level", a.return_level},
                     {"return_radius", a.return_radius},
                     {"period_window", a.period_window},
                     {"resolution", a.resolution},
                     {"ifs_iters", a.ifs_iters},
                     {"m", a.m},
                     {"cylinder_level", a.cylinder_level},
                     {"nmax", a.nmax},
                     {"freq_levels", a.freq_levels},
                     {"eigen_candidates", a.eigen_candidates},
                     {"mixing_z", a.mixing_z}};
    return j;
}

std::string bundled_config_dir() {
    if (const char* env = std::getenv("TILESCOPE_CONFIG_DIR")) return env;
#ifdef TILESCOPE_CONFIG_DIR
    return TILESCOPE_CONFIG_DIR;
#else
    return "configs";
#endif
}

SystemConfig load_bundled(const std::string& name) { return load_config(bundled_config_dir() + "/" + name + ".json"); }

}  // namespace tilescope
