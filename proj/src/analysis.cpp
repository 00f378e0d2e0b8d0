#include "tilescope/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tilescope/error.hpp"

namespace tilescope {

CountAudit& count_audit() {
    static CountAudit audit;
    return audit;
}

bool audit_count(std::size_t count, double window_volume, double v_min) {
    auto& a = count_audit();
    ++a.checks;
    bool ok = static_cast<double>(count) * v_min <= window_volume * (1 + 1e-9) + 1e-12;
    if (!ok) ++a.violations;
    return ok;
}

TileGeometry tile_geometry(const SubstitutionSystem& sys) {
    TileGeometry g;
    g.boxes = support_boxes(sys);
    auto vr = prototile_volumes(sys);
    if (vr.scale_source == "unit") {
        double side = 0;
        for (std::size_t j = 0; j < sys.kappa(); ++j)
            for (std::size_t a = 0; a < sys.dim(); ++a) side = std::max(side, g.boxes.hi[j][a] - g.boxes.lo[j][a]);
        auto ifs = solve_adjoint_ifs(sys, side / 128);
        vr = prototile_volumes(sys, &ifs.masks);
    }
    g.volumes = vr.volumes;
    g.volume_source = vr.scale_source;
    g.v_min = *std::min_element(g.volumes.begin(), g.volumes.end());
    return g;
}

std::size_t patch_count(const SubstitutionSystem& sys, const TileGeometry& geo, const Patch& P, const Window& F,
                        const Patch& T, const Window* covered) {
    if (P.empty()) throw std::invalid_argument("patch_count needs a nonempty patch");
    const std::size_t d = sys.dim();
    const Tile& ref = P.front();
    auto ref_x = sys.eval(ref.shift);
    // P relative to its first tile
    std::vector<std::vector<double>> rel;
    std::vector<double> plo(d, INFINITY), phi(d, -INFINITY);
    for (const auto& t : P) {
        auto x = sys.eval(t.shift);
        for (std::size_t a = 0; a < d; ++a) {
            x[a] -= ref_x[a];
            plo[a] = std::min(plo[a], x[a] + geo.boxes.lo[t.type][a]);
            phi[a] = std::max(phi[a], x[a] + geo.boxes.hi[t.type][a]);
        }
        rel.push_back(x);
    }
    if (covered) {
        double diam = 0;
        for (std::size_t a = 0; a < d; ++a) diam = std::max(diam, phi[a] - plo[a]);
        Window need = erode_dilate(F, diam, true);
        for (std::size_t a = 0; a < d; ++a)
            if (need.lo[a] < covered->lo[a] || need.hi[a] > covered->hi[a])
                throw RuntimeFailure("patch_count: T is not complete over F inflated by " + std::to_string(diam));
    }
    TileSet set(T.begin(), T.end());
    std::size_t n = 0;
    const double slack = 1e-9;
    for (const auto& t : T) {
        if (t.type != ref.type) continue;
        auto x = sys.eval(t.shift);
        bool inside = true;
        for (std::size_t k = 0; k < P.size() && inside; ++k)
            for (std::size_t a = 0; a < d; ++a) {
                double o = x[a] + rel[k][a];
                if (o + geo.boxes.lo[P[k].type][a] < F.lo[a] - slack || o + geo.boxes.hi[P[k].type][a] > F.hi[a] + slack) {
                    inside = false;
                    break;
                }
            }
        if (!inside) continue;
        SymbolicVector g = t.shift - ref.shift;
        bool all = true;
        for (std::size_t k = 1; k < P.size() && all; ++k) all = set.count(Tile{P[k].type, P[k].shift + g}) > 0;
        n += all;
    }
    audit_count(n, F.volume(), geo.v_min);
    return n;
}

namespace {

// bounding box of Q^n B_i
Window image_box(const Eigen::MatrixXd& Qn, const std::vector<double>& lo, const std::vector<double>& hi) {
    const std::size_t d = lo.size();
    Window w{std::vector<double>(d, INFINITY), std::vector<double>(d, -INFINITY)};
    for (unsigned c = 0; c < (1u << d); ++c) {
        Eigen::VectorXd x(d);
        for (std::size_t a = 0; a < d; ++a) x(a) = (c >> a & 1u) ? hi[a] : lo[a];
        Eigen::VectorXd y = Qn * x;
        for (std::size_t a = 0; a < d; ++a) {
            w.lo[a] = std::min(w.lo[a], y(a));
            w.hi[a] = std::max(w.hi[a], y(a));
        }
    }
    return w;
}

}  // namespace

FrequencyEstimate patch_frequency(const SubstitutionSystem& sys, const TileGeometry& geo, const Patch& P,
                                  unsigned n_levels) {
    if (!sys.primitive()) throw MathError("frequencies need a primitive substitution");
    if (n_levels < 1) throw std::invalid_argument("n_levels must be >= 1");
    auto pf = perron_frobenius(sys.S);
    const double det = std::abs(to_eigen(sys.Q.numeric).determinant());
    const Eigen::MatrixXd Q = to_eigen(sys.Q.numeric);
    FrequencyEstimate est;
    std::vector<int> starts{0};
    if (sys.kappa() > 1) starts.push_back(1);
    for (int i : starts) {
        FrequencyCurve c;
        c.start_type = i;
        Patch T{Tile{i, sys.zero()}};
        Eigen::MatrixXd Qn = Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
        for (unsigned n = 1; n <= n_levels; ++n) {
            T = substitute(sys, T, 1);
            Qn = Q * Qn;
            Window F = image_box(Qn, geo.boxes.lo[i], geo.boxes.hi[i]);
            CurvePoint pt;
            pt.level = n;
            pt.count = patch_count(sys, geo, P, F, T);
            pt.volume = std::pow(det, n) * geo.volumes[i];
            pt.ratio = static_cast<double>(pt.count) / pt.volume;
            c.points.push_back(pt);
        }
        c.estimate = c.points.back().ratio;
        if (c.points.size() >= 2) {
            double diff = std::abs(c.points.back().ratio - c.points[c.points.size() - 2].ratio);
            double gain = pf.second_modulus < pf.value ? pf.value / (pf.value - pf.second_modulus) : 1.0;
            c.error = diff * gain;
            for (std::size_t k = 2; k < c.points.size(); ++k) {
                double d1 = std::abs(c.points[k - 1].ratio - c.points[k - 2].ratio);
                double d2 = std::abs(c.points[k].ratio - c.points[k - 1].ratio);
                if (d2 > d1 * (1 + 1e-9) + 1e-15) c.cauchy = false;
            }
        } else {
            c.error = c.estimate;
        }
        est.curves.push_back(c);
    }
    est.value = est.curves.front().estimate;
    est.error = est.curves.front().error;
    for (std::size_t a = 1; a < est.curves.size(); ++a) {
        const auto& x = est.curves[0];
        const auto& y = est.curves[a];
        if (std::abs(x.estimate - y.estimate) > x.error + y.error + 1e-12) est.type_independent = false;
    }
    return est;
}

std::vector<double> tile_frequencies(const SubstitutionSystem& sys, const TileGeometry& geo) {
    if (!sys.primitive()) throw MathError("frequencies need a primitive substitution");
    if (geo.volumes.size() != sys.kappa()) throw MathError("tile frequencies need prototile volumes");
    auto pf = perron_frobenius(sys.S);
    double norm = 0;
    for (std::size_t i = 0; i < sys.kappa(); ++i) norm += pf.right[i] * geo.volumes[i];
    std::vector<double> r(sys.kappa());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = pf.right[i] / norm;
    return r;
}

std::vector<std::pair<std::size_t, std::size_t>> close_pairs(const std::vector<std::vector<double>>& pts, double r) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (!(r > 0) || pts.empty()) return out;
    const std::size_t d = pts[0].size();
    std::map<std::vector<long long>, std::vector<std::size_t>> cells;
    std::vector<std::vector<long long>> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        key[i].resize(d);
        for (std::size_t a = 0; a < d; ++a) key[i][a] = static_cast<long long>(std::floor(pts[i][a] / r));
        cells[key[i]].push_back(i);
    }
    std::size_t combos = 1;
    for (std::size_t a = 0; a < d; ++a) combos *= 3;
    const double r2 = r * r * (1 + 1e-12);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t c = 0; c < combos; ++c) {
            auto k = key[i];
            std::size_t t = c;
            for (std::size_t a = 0; a < d; ++a) {
                k[a] += static_cast<long long>(t % 3) - 1;
                t /= 3;
            }
            auto it = cells.find(k);
            if (it == cells.end()) continue;
            for (std::size_t j : it->second) {
                if (j <= i) continue;
                double s = 0;
                for (std::size_t a = 0; a < d; ++a) s += (pts[i][a] - pts[j][a]) * (pts[i][a] - pts[j][a]);
                if (s <= r2) out.emplace_back(i, j);
            }
        }
    return out;
}

ReturnVectorSet return_vectors(const SubstitutionSystem& sys, unsigned level, double radius) {
    if (level < 1) throw std::invalid_argument("return_vectors needs level >= 1");
    ReturnVectorSet out;
    out.level = level;
    out.radius = radius;
    std::set<SymbolicVector> seen;
    for (std::size_t j = 0; j < sys.kappa(); ++j) {
        Patch p = substitute(sys, {Tile{static_cast<int>(j), sys.zero()}}, level);
        std::vector<std::vector<double>> pts;
        for (const auto& t : p) pts.push_back(sys.eval(t.shift));
        for (auto [a, b] : close_pairs(pts, radius)) {
            if (p[a].type != p[b].type) continue;
            SymbolicVector v = p[b].shift - p[a].shift;
            seen.insert(-v);
            seen.insert(std::move(v));
        }
    }
    out.vectors.assign(seen.begin(), seen.end());
    return out;
}

const char* to_string(LocalComplexity c) {
    switch (c) {
    case LocalComplexity::FlcEvidence: return "FLC_evidence";
    case LocalComplexity::IlcEvidence: return "ILC_evidence";
    default: return "inconclusive";
    }
}

namespace {

bool involves_irrational(const CoordinateBasis& basis, const SymbolicVector& v) {
    for (std::size_t i = 0; i < v.dim(); ++i)
        for (std::size_t k = 1; k < v.basis_size(); ++k)
            if (v.at(i, k) != 0 && basis.symbol(k).kind != BasisSymbol::Kind::One) return true;
    return false;
}

}  // namespace

FlcScan flc_scan(const SubstitutionSystem& sys, unsigned levels, double radius, double epsilon) {
    if (levels < 3) throw std::invalid_argument("flc_scan needs levels >= 3");
    const std::size_t kappa = sys.kappa();
    FlcScan scan;
    std::vector<Patch> patches;
    for (std::size_t j = 0; j < kappa; ++j) patches.push_back({Tile{static_cast<int>(j), sys.zero()}});
    for (unsigned n = 1; n <= levels; ++n) {
        TileSet configs;  // type = ta * kappa + tb, shift = displacement
        for (auto& p : patches) {
            p = substitute(sys, p, 1);
            std::vector<std::vector<double>> pts;
            for (const auto& t : p) pts.push_back(sys.eval(t.shift));
            for (auto [a, b] : close_pairs(pts, radius)) {
                SymbolicVector v = p[b].shift - p[a].shift;
                configs.insert(Tile{p[a].type * static_cast<int>(kappa) + p[b].type, v});
                configs.insert(Tile{p[b].type * static_cast<int>(kappa) + p[a].type, -v});
            }
        }
        FlcLevel lv;
        lv.level = n;
        lv.configurations = configs.size();
        // closest distinct displacements within one type pair
        std::vector<Tile> list(configs.begin(), configs.end());
        std::vector<std::vector<double>> pts;
        for (const auto& c : list) {
            auto x = sys.eval(c.shift);
            x.push_back(1e6 * c.type);  // keeps type pairs apart
            pts.push_back(x);
        }
        lv.min_gap = 1.0;
        for (auto [a, b] : close_pairs(pts, 1.0)) {
            double s = 0;
            for (std::size_t k = 0; k + 1 < pts[a].size(); ++k) s += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
            s = std::sqrt(s);
            if (s < lv.min_gap || (s == lv.min_gap && !lv.exact_irrational)) {
                lv.min_gap = s;
                lv.exact_irrational = involves_irrational(*sys.basis, list[a].shift - list[b].shift);
            }
        }
        scan.levels.push_back(lv);
    }
    const auto& L = scan.levels;
    bool growing = true;
    for (std::size_t k = 1; k < L.size(); ++k) growing = growing && L[k].configurations > L[k - 1].configurations;
    bool shrinking = L.back().min_gap < epsilon || L.back().min_gap < L.front().min_gap;
    std::size_t m = L.size();
    if (growing && shrinking)
        scan.verdict = LocalComplexity::IlcEvidence;
    else if (L[m - 1].configurations == L[m - 2].configurations && L[m - 2].configurations == L[m - 3].configurations)
        scan.verdict = LocalComplexity::FlcEvidence;
    return scan;
}

std::vector<PeriodCandidate> detect_periods(const SubstitutionSystem& sys, unsigned levels, double window) {
    if (!(window > 0)) throw std::invalid_argument("detect_periods needs a positive window");
    const std::size_t d = sys.dim();
    Seed seed = fixed_point_seed(sys);
    auto centre = sys.eval(seed.tile.shift);
    const double half = window / 2;
    Window region{centre, centre};
    for (std::size_t a = 0; a < d; ++a) {
        region.lo[a] -= 2 * half + 2;
        region.hi[a] += 2 * half + 2;
    }
    // deepen until the clipped fixed point covers the region
    Patch p;
    std::vector<std::vector<double>> pts;
    bool covered = false;
    for (unsigned lv = std::max(1u, levels); lv <= levels + 10 && !covered; ++lv) {
        p = fixed_point_patch(sys, seed, lv, &region, 1.0);
        pts.clear();
        std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
        for (const auto& t : p) {
            pts.push_back(sys.eval(t.shift));
            for (std::size_t a = 0; a < d; ++a) {
                lo[a] = std::min(lo[a], pts.back()[a]);
                hi[a] = std::max(hi[a], pts.back()[a]);
            }
        }
        covered = true;
        for (std::size_t a = 0; a < d; ++a)
            if (centre[a] - 2 * half - 1 < lo[a] || centre[a] + 2 * half + 1 > hi[a]) covered = false;
    }
    if (!covered) throw RuntimeFailure("detect_periods: fixed-point patch does not cover the window");
    TileSet set(p.begin(), p.end());
    auto in_box = [&](const std::vector<double>& x) {
        for (std::size_t a = 0; a < d; ++a)
            if (x[a] < centre[a] - half || x[a] >= centre[a] + half) return false;
        return true;
    };
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (in_box(pts[i])) inner.push_back(i);
    const Tile& ref = seed.tile;
    std::vector<std::pair<double, SymbolicVector>> found;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].type != ref.type || p[i].shift == ref.shift) continue;
        double norm = 0;
        for (std::size_t a = 0; a < d; ++a) norm = std::max(norm, std::abs(pts[i][a] - centre[a]));
        if (norm > half) continue;
        SymbolicVector t = p[i].shift - ref.shift;
        bool ok = true;
        for (std::size_t k : inner) {
            if (!set.count(Tile{p[k].type, p[k].shift + t}) || !set.count(Tile{p[k].type, p[k].shift - t})) {
                ok = false;
                break;
            }
        }
        if (ok) found.emplace_back(norm, t);
    }
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first < y.first : x.second < y.second;
    });
    std::vector<PeriodCandidate> out;
    for (auto& [n, t] : found) out.push_back({t, window});
    return out;
}

double min_difference_gap(const std::vector<SymbolicVector>& xi, const CoordinateBasis& basis, double window) {
    std::vector<std::vector<double>> num;
    for (const auto& v : xi) num.push_back(v.evaluate(basis));
    std::set<SymbolicVector> diffs;
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = 0; j < xi.size(); ++j) {
            double n = 0;
            for (std::size_t a = 0; a < num[i].size(); ++a) n = std::max(n, std::abs(num[i][a] - num[j][a]));
            if (n <= window) diffs.insert(xi[i] - xi[j]);
        }
    std::vector<std::vector<double>> pts;
    for (const auto& v : diffs) pts.push_back(v.evaluate(basis));
    double gap = 1.0;
    for (auto [a, b] : close_pairs(pts, 1.0)) {
        double s = 0;
        for (std::size_t k = 0; k < pts[a].size(); ++k) s += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
        gap = std::min(gap, std::sqrt(s));
    }
    return gap;
}

MeyerScan meyer_scan(const SubstitutionSystem& sys, const std::vector<ReturnVectorSet>& xi_by_level, double window) {
    MeyerScan m;
    for (const auto& xi : xi_by_level) {
        if (xi.vectors.empty()) continue;
        m.levels.push_back(xi.level);
        m.min_gap.push_back(min_difference_gap(xi.vectors, *sys.basis, window));
    }
    if (m.levels.empty()) throw std::invalid_argument("meyer_scan needs nonempty return vectors");
    m.evidence = "inconclusive";
    if (m.min_gap.size() >= 2) {
        double first = m.min_gap.front(), last = m.min_gap.back();
        if (last < 0.5 * first)
            m.evidence = "against";
        else if (std::abs(last - first) <= 1e-9 * first)
            m.evidence = "for";
    }
    return m;
}

const char* to_string(RigidityStatus s) {
    switch (s) {
    case RigidityStatus::Rigid: return "Rigid";
    case RigidityStatus::NotRigid: return "NotRigid";
    case RigidityStatus::Inapplicable: return "Inapplicable";
    default: return "Undetermined";
    }
}

namespace {

std::vector<std::vector<Rational>> flats(const std::vector<SymbolicVector>& v) {
    std::vector<std::vector<Rational>> out;
    for (const auto& x : v) out.push_back(x.flat());
    return out;
}

bool generates(const SubstitutionSystem& sys, const std::vector<SymbolicVector>& family, int deg,
               const std::vector<std::vector<Rational>>& targets) {
    // real independence
    const std::size_t d = sys.dim();
    Eigen::MatrixXd m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        auto x = sys.eval(family[i]);
        for (std::size_t a = 0; a < d; ++a) m(a, i) = x[a];
    }
    if (std::abs(m.determinant()) < 1e-9) return false;
    std::vector<SymbolicVector> gens;
    for (const auto& x : family) {
        SymbolicVector y = x;
        for (int n = 0; n < deg; ++n) {
            gens.push_back(y);
            y = sys.apply_Q(y);
        }
    }
    IntegerLattice L(flats(gens), d * sys.basis_size());
    for (const auto& t : targets)
        if (!L.contains(t)) return false;
    return true;
}

}  // namespace

RigidityVerdict rigidity_check(const SubstitutionSystem& sys, const ReturnVectorSet& xi) {
    RigidityVerdict v;
    const std::size_t d = sys.dim();
    const auto& decl = sys.Q.eigen_decl;
    bool applicable = !decl.empty();
    for (const auto& e : decl)
        if (!(e.value.minpoly() == decl[0].value.minpoly()) || e.multiplicity != decl[0].multiplicity) applicable = false;
    int deg = applicable ? decl[0].value.minpoly().degree() : 1;
    std::size_t distinct = 0;
    for (std::size_t a = 0; a < decl.size(); ++a) {
        bool fresh = true;
        for (std::size_t b = 0; b < a; ++b)
            if (decl[a].value.root_index() == decl[b].value.root_index() &&
                decl[a].value.minpoly() == decl[b].value.minpoly())
                fresh = false;
        distinct += fresh;
    }
    v.experimental = distinct > 1;

    std::vector<SymbolicVector> span;
    for (const auto& x : xi.vectors) {
        SymbolicVector y = x;
        for (int n = 0; n <= 2 * deg; ++n) {
            span.push_back(y);
            y = sys.apply_Q(y);
        }
    }
    v.qdim = span.empty() ? 0 : rational_rank(flats(span));
    v.bound = d * static_cast<std::size_t>(deg);

    if (!applicable) {
        v.status = RigidityStatus::Inapplicable;
        std::ostringstream os;
        os << "expansion eigenvalues are not algebraic conjugates of equal multiplicity; return vectors span a "
           << "rational space of dimension " << rational_rank(flats(xi.vectors)) << " inside R^" << d
           << ", so any " << d + 1 << " of them cannot be linearly independent over R";
        v.reason = os.str();
        return v;
    }
    if (v.qdim > v.bound) {
        v.status = RigidityStatus::NotRigid;
        v.reason = "rational span of the return vectors exceeds d * deg";
        return v;
    }
    if (xi.vectors.empty()) {
        v.status = RigidityStatus::Undetermined;
        v.reason = "no return vectors";
        return v;
    }
    IntegerLattice xl(flats(xi.vectors), d * sys.basis_size());
    auto targets = xl.basis();

    auto unit = [&](std::size_t i, const Rational& q) {
        SymbolicVector e = sys.zero();
        e.at(i, 0) = q;
        return e;
    };
    // standard basis, then scaled standard bases
    for (int den = 1; den <= 12; ++den) {
        std::vector<SymbolicVector> fam;
        for (std::size_t i = 0; i < d; ++i) fam.push_back(unit(i, Rational(1, den)));
        if (generates(sys, fam, deg, targets)) {
            v.status = RigidityStatus::Rigid;
            v.witness = fam;
            return v;
        }
    }
    // d-subsets of the lattice basis
    std::vector<SymbolicVector> lb;
    for (const auto& row : targets) {
        SymbolicVector x = sys.zero();
        x.flat() = row;
        lb.push_back(x);
    }
    std::vector<std::size_t> idx(d);
    std::size_t tried = 0;
    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) -> bool {
        if (pos == d) {
            if (++tried > 2000) return false;
            std::vector<SymbolicVector> fam;
            for (auto i : idx) fam.push_back(lb[i]);
            if (generates(sys, fam, deg, targets)) {
                v.witness = fam;
                return true;
            }
            return false;
        }
        for (std::size_t i = from; i < lb.size() && tried <= 2000; ++i) {
            idx[pos] = i;
            if (rec(pos + 1, i + 1)) return true;
        }
        return false;
    };
    if (lb.size() >= d && rec(0, 0)) {
        v.status = RigidityStatus::Rigid;
        return v;
    }
    v.status = RigidityStatus::Undetermined;
    v.reason = "dimension bound holds but no generating family was found";
    return v;
}

std::string curve_csv(const FrequencyEstimate& f) {
    std::ostringstream os;
    os.precision(12);
    os << "start_type,level,count,volume,ratio\n";
    for (const auto& c : f.curves)
        for (const auto& p : c.points)
            os << c.start_type + 1 << "," << p.level << "," << p.count << "," << p.volume << "," << p.ratio << "\n";
    return os.str();
}

}  // namespace tilescope
