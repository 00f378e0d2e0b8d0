#include "tilescope/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "tilescope/error.hpp"

namespace tilescope {

double separation_constant(const std::vector<std::vector<double>>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("separation_constant needs at least two points");
    // grow the search radius until some pair shows up
    double r = 1.0;
    for (int tries = 0; tries < 80; ++tries, r *= 2) {
        auto pairs = close_pairs(pts, r);
        if (pairs.empty()) continue;
        double best = INFINITY;
        for (auto [i, j] : pairs) {
            double s = 0;
            for (std::size_t a = 0; a < pts[i].size(); ++a) s += (pts[i][a] - pts[j][a]) * (pts[i][a] - pts[j][a]);
            best = std::min(best, std::sqrt(s));
        }
        if (best == 0) throw MathError("separation_constant: duplicate points");
        // pairs closer than r were all examined
        return best;
    }
    throw MathError("separation_constant: points too sparse");
}

unsigned grid_m0(double eta) {
    if (!(eta > 0)) throw MathError("grid needs a positive separation constant");
    unsigned m = 0;
    while (!(std::ldexp(1.0, -static_cast<int>(m)) < eta / 2)) ++m;
    return m;
}

GridSpec make_grid(double eta, unsigned m) {
    GridSpec g;
    g.eta = eta;
    g.m0 = grid_m0(eta);
    g.m = m;
    if (m < g.m0)
        throw MathError("grid level m = " + std::to_string(m) + " is below m0 = " + std::to_string(g.m0));
    return g;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t pack(const long long* c, std::size_t d) {
    std::uint64_t k = 0;
    for (std::size_t a = 0; a < d; ++a) k = (k << 21) | (static_cast<std::uint64_t>(c[a] + (1LL << 20)) & 0x1fffff);
    return k;
}

// bucket grid over the sample points
struct PointIndex {
    double side = 1;
    std::size_t d = 0;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;
    const std::vector<std::vector<double>>* x = nullptr;

    PointIndex(const std::vector<std::vector<double>>& pts, double s) : side(s), x(&pts) {
        d = pts.empty() ? 0 : pts[0].size();
        long long c[3];
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t a = 0; a < d; ++a) c[a] = static_cast<long long>(std::floor(pts[i][a] / side));
            cells[pack(c, d)].push_back(i);
        }
    }

    template <class F>
    void for_box(const std::vector<double>& lo, const std::vector<double>& hi, F&& f) const {
        long long a0[3], a1[3], c[3];
        for (std::size_t a = 0; a < d; ++a) {
            a0[a] = static_cast<long long>(std::floor(lo[a] / side));
            a1[a] = static_cast<long long>(std::floor(hi[a] / side));
            c[a] = a0[a];
        }
        while (true) {
            auto it = cells.find(pack(c, d));
            if (it != cells.end())
                for (std::size_t i : it->second) f(i);
            std::size_t a = 0;
            for (; a < d; ++a) {
                if (++c[a] <= a1[a]) break;
                c[a] = a0[a];
            }
            if (a == d) break;
        }
    }

    // index of a point of the given colour within tol of y, or -1
    long long find(const std::vector<int>& colour, int col, const std::vector<double>& y, double tol) const {
        std::vector<double> lo(y), hi(y);
        for (std::size_t a = 0; a < d; ++a) {
            lo[a] -= tol;
            hi[a] += tol;
        }
        long long hit = -1;
        for_box(lo, hi, [&](std::size_t i) {
            if (hit >= 0 || colour[i] != col) return;
            for (std::size_t a = 0; a < d; ++a)
                if (std::abs((*x)[i][a] - y[a]) > tol) return;
            hit = static_cast<long long>(i);
        });
        return hit;
    }
};

struct InWindow {
    std::vector<int> idx;
    int colour;
    std::size_t point;
};

// content of the window at translation x: cube index, colour, point
std::vector<InWindow> content_at(const CylinderSample& s, const PointIndex& index, const GridSpec& g,
                                 const std::vector<double>& x) {
    const std::size_t d = x.size();
    const double W = g.half_width(), h = g.h();
    std::vector<double> lo(d), hi(d);
    for (std::size_t a = 0; a < d; ++a) {
        lo[a] = x[a] - W;
        hi[a] = x[a] + W;
    }
    std::vector<InWindow> out;
    index.for_box(lo, hi, [&](std::size_t i) {
        std::vector<int> k(d);
        for (std::size_t a = 0; a < d; ++a) {
            double q = s.x[i][a] - x[a];
            if (q < -W || q >= W) return;
            k[a] = static_cast<int>(std::floor(q / h));
        }
        out.push_back({std::move(k), s.colour[i], i});
    });
    std::sort(out.begin(), out.end(), [](const InWindow& a, const InWindow& b) { return a.idx < b.idx; });
    return out;
}

double max_side(const TileGeometry& geo, std::size_t d) {
    double side = 0;
    for (std::size_t j = 0; j < geo.boxes.lo.size(); ++j)
        for (std::size_t a = 0; a < d; ++a) side = std::max(side, geo.boxes.hi[j][a] - geo.boxes.lo[j][a]);
    return side;
}

// largest r (block multiple) with every block in [-r, r)^d carrying at least 40%
// of its volume in tiles anchored inside it
double covered_radius(const SubstitutionSystem& sys, const TileGeometry& geo, const Patch& p, double block) {
    const std::size_t d = sys.dim();
    std::unordered_map<std::uint64_t, double> vol;
    long long c[3];
    long long reach = 0;
    for (const auto& t : p) {
        auto x = sys.eval(t.shift);
        for (std::size_t a = 0; a < d; ++a) {
            c[a] = static_cast<long long>(std::floor(x[a] / block));
            reach = std::max(reach, std::abs(c[a]) + 1);
        }
        vol[pack(c, d)] += geo.volumes[t.type];
    }
    const double need = 0.4 * std::pow(block, static_cast<double>(d));
    long long k = 0;
    for (long long r = 1; r <= reach; ++r) {
        // shell of blocks with index in [-r, r-1]^d not in [-(r-1), r-2]^d
        bool ok = true;
        std::vector<long long> cur(d, -r);
        while (ok) {
            bool shell = false;
            for (std::size_t a = 0; a < d; ++a)
                if (cur[a] == -r || cur[a] == r - 1) shell = true;
            if (shell) {
                auto it = vol.find(pack(cur.data(), d));
                if (it == vol.end() || it->second < need) ok = false;
            }
            std::size_t a = 0;
            for (; a < d; ++a) {
                if (++cur[a] <= r - 1) break;
                cur[a] = -r;
            }
            if (a == d) break;
        }
        if (!ok) break;
        k = r;
    }
    return k > 0 ? (static_cast<double>(k) - 0.5) * block : 0.0;
}

}  // namespace

CylinderSample cylinder_sample(const SubstitutionSystem& sys, const TileGeometry& geo, unsigned levels, unsigned m,
                               double f_half) {
    const std::size_t d = sys.dim();
    if (d > 3) throw std::invalid_argument("cylinder sampling supports d <= 3");
    const double W = std::ldexp(1.0, static_cast<int>(m));
    const double h = std::ldexp(1.0, -static_cast<int>(m));
    const double side = max_side(geo, d);
    const double cap = d == 1 ? 256 : d == 2 ? 16 : 4;
    double f = f_half > 0 ? f_half : cap;
    f = std::floor(f / h) * h;
    const double need = f + W + h;
    CylinderSample s;
    s.levels = levels;
    s.seed = fixed_point_seed(sys);
    Window clip{std::vector<double>(d, -(need + side)), std::vector<double>(d, need + side)};
    s.patch = fixed_point_patch(sys, s.seed, levels, &clip, side);
    s.covered_radius = covered_radius(sys, geo, s.patch, 4 * side);
    if (s.covered_radius < need) {
        if (f_half > 0)
            throw RuntimeFailure("cylinder sample covers radius " + std::to_string(s.covered_radius) + ", need " +
                                 std::to_string(need) + "; raise the level");
        f = std::floor((s.covered_radius - W - h) / h) * h;
        if (f < 1) throw RuntimeFailure("cylinder sample too small for the window; raise the level");
    }
    s.F = Window{std::vector<double>(d, -f), std::vector<double>(d, f)};
    for (const auto& t : s.patch) {
        s.x.push_back(sys.eval(t.shift));
        s.colour.push_back(t.type);
    }
    return s;
}

CylinderSet build_cylinders(const CylinderSample& s, const GridSpec& g) {
    const std::size_t d = s.F.dim();
    const double W = g.half_width(), h = g.h();
    const long long K = 1LL << (2 * g.m);  // cubes per half axis
    const double cell_vol = std::pow(h, static_cast<double>(d));
    CylinderSet out;
    out.grid = g;
    out.F = s.F;
    PointIndex index(s.x, W);

    struct Acc {
        double volume = 0;
        std::size_t first_point = SIZE_MAX;
        std::vector<double> probe;
        std::vector<double> wlo, whi;
        double wvol = 0;
        std::uint64_t alpha_key = 0;
    };
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const { return k.first ^ mix64(k.second); }
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::size_t, KeyHash> lookup;
    std::vector<Acc> acc;
    std::vector<std::pair<std::size_t, std::size_t>> occ;  // (class, first point)

    std::vector<long long> ncells(d);
    for (std::size_t a = 0; a < d; ++a) ncells[a] = std::llround((s.F.hi[a] - s.F.lo[a]) / h);
    // k-cells are visited block by block so candidate points are gathered once per block
    const long long B = std::max<long long>(1, std::llround(W / h));
    std::vector<long long> nblocks(d);
    std::size_t total_blocks = 1;
    for (std::size_t a = 0; a < d; ++a) {
        nblocks[a] = (ncells[a] + B - 1) / B;
        total_blocks *= static_cast<std::size_t>(nblocks[a]);
    }

    struct Rel {
        long long n[3];
        double f[3];
        int colour;
        std::size_t point;
    };
    std::vector<std::size_t> cand;
    std::vector<Rel> rel;
    std::vector<std::vector<double>> breaks(d);
    std::vector<std::pair<std::array<long long, 3>, std::size_t>> inwin;

    for (std::size_t bflat = 0; bflat < total_blocks; ++bflat) {
        std::vector<long long> bi(d);
        std::size_t t = bflat;
        for (std::size_t a = 0; a < d; ++a) {
            bi[a] = static_cast<long long>(t % static_cast<std::size_t>(nblocks[a]));
            t /= static_cast<std::size_t>(nblocks[a]);
        }
        std::vector<double> blo(d), bhi(d);
        for (std::size_t a = 0; a < d; ++a) {
            blo[a] = s.F.lo[a] + static_cast<double>(bi[a] * B) * h - W - h;
            bhi[a] = s.F.lo[a] + static_cast<double>(std::min(ncells[a], (bi[a] + 1) * B)) * h + W + h;
        }
        cand.clear();
        index.for_box(blo, bhi, [&](std::size_t i) { cand.push_back(i); });

        std::vector<long long> ci(d);
        std::size_t in_block = 1;
        std::vector<long long> extent(d);
        for (std::size_t a = 0; a < d; ++a) {
            extent[a] = std::min(B, ncells[a] - bi[a] * B);
            in_block *= static_cast<std::size_t>(extent[a]);
        }
        for (std::size_t cflat = 0; cflat < in_block; ++cflat) {
            std::size_t u = cflat;
            std::vector<double> c0(d);
            for (std::size_t a = 0; a < d; ++a) {
                ci[a] = bi[a] * B + static_cast<long long>(u % static_cast<std::size_t>(extent[a]));
                u /= static_cast<std::size_t>(extent[a]);
                c0[a] = s.F.lo[a] + static_cast<double>(ci[a]) * h;
            }
            rel.clear();
            for (auto& b : breaks) b.assign({0.0, h});
            for (std::size_t i : cand) {
                Rel r;
                bool keep = true;
                for (std::size_t a = 0; a < d && keep; ++a) {
                    double q = s.x[i][a] - c0[a];
                    if (q < -W || q >= W + h) keep = false;
                    r.n[a] = static_cast<long long>(std::floor(q / h));
                    r.f[a] = q - static_cast<double>(r.n[a]) * h;
                }
                if (!keep) continue;
                r.colour = s.colour[i];
                r.point = i;
                rel.push_back(r);
                for (std::size_t a = 0; a < d; ++a)
                    if (r.f[a] > 0 && r.f[a] < h) breaks[a].push_back(r.f[a]);
            }
            std::size_t nsub = 1;
            for (auto& b : breaks) {
                std::sort(b.begin(), b.end());
                std::vector<double> u2{b.front()};
                for (std::size_t k = 1; k < b.size(); ++k)
                    if (b[k] - u2.back() > 1e-12) u2.push_back(b[k]);
                u2.back() = h;
                b.swap(u2);
                nsub *= b.size() - 1;
            }
            for (std::size_t sflat = 0; sflat < nsub; ++sflat) {
                std::size_t v = sflat;
                double mid[3], vol = 1;
                for (std::size_t a = 0; a < d; ++a) {
                    std::size_t k = v % (breaks[a].size() - 1);
                    v /= breaks[a].size() - 1;
                    mid[a] = 0.5 * (breaks[a][k] + breaks[a][k + 1]);
                    vol *= breaks[a][k + 1] - breaks[a][k];
                }
                ++out.sub_boxes;
                inwin.clear();
                for (std::size_t k = 0; k < rel.size(); ++k) {
                    std::array<long long, 3> id{0, 0, 0};
                    bool in = true;
                    for (std::size_t a = 0; a < d; ++a) {
                        id[a] = mid[a] <= rel[k].f[a] ? rel[k].n[a] : rel[k].n[a] - 1;
                        if (id[a] < -K || id[a] >= K) in = false;
                    }
                    if (in) inwin.emplace_back(id, k);
                }
                std::sort(inwin.begin(), inwin.end());
                for (std::size_t k = 1; k < inwin.size(); ++k)
                    if (inwin[k].first == inwin[k - 1].first)
                        throw MathError("grid cube holds two points; m is too small for this sample");
                std::uint64_t ha = 0x1234567ULL, h1 = 0x9abcdefULL, h2 = 0x13579bdfULL;
                const Rel* first = inwin.empty() ? nullptr : &rel[inwin[0].second];
                for (auto& [id, k] : inwin) {
                    std::uint64_t e = static_cast<std::uint64_t>(rel[k].colour);
                    for (std::size_t a = 0; a < d; ++a) e = mix64(e ^ static_cast<std::uint64_t>(id[a] + K));
                    ha = mix64(ha ^ e);
                    std::uint64_t sh = e;
                    for (std::size_t a = 0; a < d; ++a) {
                        double off = s.x[rel[k].point][a] - s.x[first->point][a];
                        sh = mix64(sh ^ static_cast<std::uint64_t>(std::llround(off * 1e8)));
                    }
                    h1 = mix64(h1 ^ sh);
                    h2 = mix64(h2 + (sh | 1) * 0x2545f4914f6cdd1dULL);
                }
                auto key = std::make_pair(h1 ^ ha, h2);
                auto [it, fresh] = lookup.emplace(key, acc.size());
                if (fresh) {
                    Acc A;
                    A.alpha_key = ha;
                    A.probe.resize(d);
                    for (std::size_t a = 0; a < d; ++a) A.probe[a] = c0[a] + mid[a];
                    A.wlo.assign(d, 0);
                    A.whi.assign(d, h);
                    if (first) {
                        A.first_point = first->point;
                        // offsets inside the cubes at the probe; wiggle of the rep with its first point at 0
                        for (std::size_t a = 0; a < d; ++a) {
                            double fmin = INFINITY, fmax = -INFINITY;
                            for (auto& [id, k] : inwin) {
                                double y = s.x[rel[k].point][a] - A.probe[a];
                                double o = y - static_cast<double>(id[a]) * h;
                                fmin = std::min(fmin, o);
                                fmax = std::max(fmax, o);
                            }
                            double y1 = s.x[first->point][a] - A.probe[a];
                            double len = h - (fmax - fmin);
                            // first point at t keeps every point in its cube for t in [y1 - fmin, y1 + h - fmax)
                            A.wlo[a] = y1 - fmin;
                            A.whi[a] = A.wlo[a] + len;
                        }
                    }
                    A.wvol = 1;
                    for (std::size_t a = 0; a < d; ++a) A.wvol *= A.whi[a] - A.wlo[a];
                    acc.push_back(std::move(A));
                }
                Acc& A = acc[it->second];
                A.volume += vol;
                if (first) occ.emplace_back(it->second, first->point);
            }
        }
    }

    std::sort(occ.begin(), occ.end());
    occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
    std::vector<std::size_t> occ_count(acc.size(), 0);
    for (auto& [c, p] : occ) ++occ_count[c];

    const double volF = s.F.volume();
    std::map<std::uint64_t, std::size_t> alpha_ids;
    out.classes.reserve(acc.size());
    for (std::size_t c = 0; c < acc.size(); ++c) {
        const Acc& A = acc[c];
        CylinderClass k;
        auto [ai, _] = alpha_ids.emplace(A.alpha_key, alpha_ids.size());
        k.alpha = ai->second;
        k.first_point = A.first_point;
        k.probe = A.probe;
        k.wiggle_lo = A.wlo;
        k.wiggle_hi = A.whi;
        k.wiggle_volume = A.wvol;
        k.measure = A.volume / volF;
        if (A.first_point == SIZE_MAX) {
            // empty pattern: one occurrence per probe cell
            k.occurrences = 0;
            k.freq = k.measure / cell_vol;
        } else {
            k.occurrences = occ_count[c];
            k.freq = static_cast<double>(k.occurrences) / volF;
        }
        out.max_wiggle_volume = std::max(out.max_wiggle_volume, k.wiggle_volume);
        if (!(k.wiggle_volume <= cell_vol) || !(k.wiggle_volume > 0)) out.wiggle_bound_ok = false;
        out.classes.push_back(std::move(k));
    }
    out.patterns = alpha_ids.size();
    std::stable_sort(out.classes.begin(), out.classes.end(),
                     [](const CylinderClass& a, const CylinderClass& b) { return a.measure > b.measure; });
    // renumber patterns by first appearance in the sorted list
    std::map<std::size_t, std::size_t> renum;
    for (auto& k : out.classes) {
        auto [it, _] = renum.emplace(k.alpha, renum.size());
        k.alpha = it->second;
    }
    // explicit content for the leading classes
    const std::size_t detail = std::min<std::size_t>(out.classes.size(), 4000);
    for (std::size_t c = 0; c < detail; ++c) {
        auto& k = out.classes[c];
        auto w = content_at(s, index, g, k.probe);
        for (auto& e : w) {
            k.cubes.push_back(e.idx);
            k.colours.push_back(e.colour);
            std::vector<double> o(d);
            for (std::size_t a = 0; a < d; ++a) o[a] = s.x[e.point][a] - s.x[w.front().point][a];
            k.offsets.push_back(std::move(o));
        }
        // corner probes: rep + t stays in the cubes for t at the wiggle corners (upper ends nudged inward)
        for (unsigned corner = 0; corner < (1u << d); ++corner)
            for (std::size_t p = 0; p < k.offsets.size(); ++p)
                for (std::size_t a = 0; a < d; ++a) {
                    double t = (corner >> a & 1u) ? k.wiggle_hi[a] - 1e-9 * h : k.wiggle_lo[a];
                    double y = k.offsets[p][a] + t;
                    double lo = static_cast<double>(k.cubes[p][a]) * h;
                    if (y < lo - 1e-12 || y >= lo + h + 1e-12) out.corner_probe_ok = false;
                }
    }
    return out;
}

KSetCluster class_representative(const SubstitutionSystem& sys, const CylinderSample& sample, const GridSpec& grid,
                                 const CylinderClass& c) {
    KSetCluster out;
    out.colours.resize(sys.kappa());
    if (c.first_point == SIZE_MAX) return out;
    PointIndex index(sample.x, grid.half_width());
    auto w = content_at(sample, index, grid, c.probe);
    const SymbolicVector& base = sample.patch[w.front().point].shift;
    for (auto& e : w) out.colours[e.colour].push_back(sample.patch[e.point].shift - base);
    return out;
}

PartitionCheck partition_check(const CylinderSample& sample, const CylinderSet& set, double tolerance) {
    PartitionCheck pc;
    pc.tolerance = tolerance;
    std::map<std::size_t, double> per;
    for (const auto& k : set.classes) {
        pc.total += k.measure;
        per[k.alpha] += k.measure;
    }
    for (auto& [a, v] : per) pc.per_alpha.emplace_back(a, v);
    std::stable_sort(pc.per_alpha.begin(), pc.per_alpha.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    if (pc.per_alpha.size() > 20) pc.per_alpha.resize(20);
    pc.pass = std::abs(pc.total - 1) <= tolerance && pc.total <= 1 + 1e-9;

    // every occurrence of G_j counted, extra points in the window allowed
    const bool all_detailed = std::all_of(set.classes.begin(), set.classes.end(), [](const CylinderClass& k) {
        return k.first_point == SIZE_MAX || !k.offsets.empty();
    });
    if (!all_detailed) return pc;
    PointIndex index(sample.x, std::max(0.5, set.grid.eta / 2));
    const std::size_t d = set.F.dim();
    double lit = 0;
    std::vector<double> x(d);
    for (const auto& k : set.classes) {
        if (k.first_point == SIZE_MAX) {
            lit += k.measure;
            continue;
        }
        // an occurrence counts when the window placing it mid-wiggle sits in F
        std::size_t n = 0;
        for (std::size_t i = 0; i < sample.x.size(); ++i) {
            if (sample.colour[i] != k.colours[0]) continue;
            for (std::size_t a = 0; a < d; ++a) x[a] = sample.x[i][a] - 0.5 * (k.wiggle_lo[a] + k.wiggle_hi[a]);
            if (!set.F.contains(x)) continue;
            bool all = true;
            for (std::size_t p = 1; p < k.offsets.size() && all; ++p) {
                std::vector<double> y(d);
                for (std::size_t a = 0; a < d; ++a) y[a] = sample.x[i][a] + k.offsets[p][a];
                all = index.find(sample.colour, k.colours[p], y, 1e-7) >= 0;
            }
            n += all;
        }
        lit += k.wiggle_volume * static_cast<double>(n) / set.F.volume();
    }
    pc.literal_total = lit;
    return pc;
}

BirkhoffCurve birkhoff_cylinder_estimate(const SubstitutionSystem& sys, const TileGeometry& geo,
                                         const CylinderSample& sample, const CylinderSet& set, std::size_t alpha,
                                         unsigned steps, unsigned probes) {
    const std::size_t d = set.F.dim();
    BirkhoffCurve curve;
    curve.alpha = alpha;
    std::vector<const CylinderClass*> cls;
    for (const auto& k : set.classes)
        if (k.alpha == alpha) cls.push_back(&k);
    if (cls.empty()) throw std::invalid_argument("no classes for pattern " + std::to_string(alpha));
    for (auto* k : cls) {
        if (k->first_point != SIZE_MAX && k->offsets.empty())
            throw RuntimeFailure("pattern " + std::to_string(alpha) + " has classes without explicit content");
        curve.target += k->measure;
    }
    // largest F_n: h + F_n plus the cluster extent must stay in the complete region
    double fmax = set.F.hi[0] - 1.0;
    if (fmax < 1) throw RuntimeFailure("sample window too small for the Birkhoff boxes");
    PointIndex index(sample.x, std::max(0.5, set.grid.eta / 2));
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::vector<double>> hs(probes, std::vector<double>(d));
    for (auto& hv : hs)
        for (auto& c : hv) c = U(rng);

    for (unsigned n = 1; n <= steps; ++n) {
        double r = fmax * std::ldexp(1.0, static_cast<int>(n) - static_cast<int>(steps));
        BirkhoffStep st;
        st.radius = r;
        Window Fn{std::vector<double>(d, -r), std::vector<double>(d, r)};
        st.vanhove = vanhove_ratio(Fn, 1.0);
        double lo = INFINITY, hi = -INFINITY, sum = 0;
        for (const auto& hv : hs) {
            Window box{Fn.lo, Fn.hi};
            for (std::size_t a = 0; a < d; ++a) {
                box.lo[a] += hv[a];
                box.hi[a] += hv[a];
            }
            std::vector<std::size_t> firsts;
            index.for_box(box.lo, box.hi, [&](std::size_t i) { firsts.push_back(i); });
            std::sort(firsts.begin(), firsts.end());
            double val = 0;
            for (auto* k : cls) {
                if (k->first_point == SIZE_MAX) {
                    val += k->measure;
                    continue;
                }
                std::size_t cnt = 0;
                for (std::size_t i : firsts) {
                    if (sample.colour[i] != k->colours[0]) continue;
                    // first tile's support inside h + F_n
                    bool inside = true;
                    for (std::size_t a = 0; a < d; ++a) {
                        int ty = sample.colour[i];
                        if (sample.x[i][a] + geo.boxes.lo[ty][a] < box.lo[a] ||
                            sample.x[i][a] + geo.boxes.hi[ty][a] > box.hi[a])
                            inside = false;
                    }
                    if (!inside) continue;
                    bool all = true;
                    for (std::size_t p = 1; p < k->offsets.size() && all; ++p) {
                        std::vector<double> y(d);
                        for (std::size_t a = 0; a < d; ++a) y[a] = sample.x[i][a] + k->offsets[p][a];
                        all = index.find(sample.colour, k->colours[p], y, 1e-7) >= 0;
                    }
                    cnt += all;
                }
                audit_count(cnt, box.volume(), geo.v_min);
                val += k->wiggle_volume * static_cast<double>(cnt) / box.volume();
            }
            lo = std::min(lo, val);
            hi = std::max(hi, val);
            sum += val;
        }
        st.mean = sum / static_cast<double>(hs.size());
        st.spread = hi - lo;
        curve.steps.push_back(st);
    }
    // tail sums over the classes of alpha, largest first
    std::vector<double> terms;
    for (auto* k : cls) terms.push_back(cylinder_measure(*k, k->freq));
    std::size_t k0 = 0;
    while (true) {
        double tail = 0;
        for (std::size_t j = k0; j < terms.size(); ++j) tail += terms[j];
        curve.tail.emplace_back(k0, tail);
        if (k0 >= terms.size()) break;
        k0 = k0 == 0 ? 1 : std::min(terms.size(), 2 * k0);
    }
    (void)sys;
    return curve;
}

// ---------------------------------------------------------------------------

MixingBound mixing_overlap_bound(const SubstitutionSystem& sys, const TileGeometry& geo, const SymbolicVector& z,
                                 unsigned n_max, std::size_t tile_budget) {
    MixingBound mb;
    if (z.is_zero()) throw std::invalid_argument("mixing bound needs a nonzero return vector");
    const double det = std::abs(to_eigen(sys.Q.numeric).determinant());
    auto r = tile_frequencies(sys, geo);
    // growth of the largest tile count per level
    auto pf = perron_frobenius(sys.S);
    for (unsigned k = 1; k <= 8 && mb.ell < 0; ++k) {
        if (std::pow(pf.value, k) > static_cast<double>(tile_budget)) break;
        double best = -1;
        for (std::size_t i = 0; i < sys.kappa(); ++i) {
            Patch p = substitute(sys, {Tile{static_cast<int>(i), sys.zero()}}, k);
            TileSet set(p.begin(), p.end());
            for (const auto& t : p) {
                if (!set.count(Tile{t.type, t.shift + z})) continue;
                double w = r[t.type] * geo.volumes[t.type];
                if (w > best) {
                    best = w;
                    mb.ell = t.type;
                    mb.host = static_cast<int>(i);
                }
            }
        }
        if (mb.ell >= 0) mb.k0 = k;
    }
    if (mb.ell < 0) {
        mb.note = "no level k <= 8 within the tile budget holds {T_l, T_l + z}; bound unavailable";
        return mb;
    }
    mb.available = true;
    mb.delta = 0.25 * r[mb.ell] * geo.volumes[mb.ell] / std::pow(det, mb.k0);

    const Eigen::MatrixXd Q = to_eigen(sys.Q.numeric);
    Eigen::MatrixXd Qn = Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
    SymbolicVector zn = z;
    Patch single{Tile{mb.ell, sys.zero()}};
    for (unsigned n = 0; n <= n_max; ++n) {
        unsigned level = n + mb.k0 + 1;
        if (std::pow(pf.value, level) > static_cast<double>(tile_budget)) break;
        Patch T = substitute(sys, {Tile{mb.host, sys.zero()}}, level);
        // bounding box of the support of T
        Window F{std::vector<double>(sys.dim(), INFINITY), std::vector<double>(sys.dim(), -INFINITY)};
        for (const auto& t : T) {
            auto x = sys.eval(t.shift);
            for (std::size_t a = 0; a < sys.dim(); ++a) {
                F.lo[a] = std::min(F.lo[a], x[a] + geo.boxes.lo[t.type][a]);
                F.hi[a] = std::max(F.hi[a], x[a] + geo.boxes.hi[t.type][a]);
            }
        }
        Patch pair{Tile{mb.ell, sys.zero()}, Tile{mb.ell, zn}};
        MixingPoint pt;
        pt.n = n;
        pt.level = level;
        pt.single_count = patch_count(sys, geo, single, F, T);
        pt.pair_count = patch_count(sys, geo, pair, F, T);
        pt.ratio = pt.single_count ? static_cast<double>(pt.pair_count) / static_cast<double>(pt.single_count) : 0.0;
        mb.curve.push_back(pt);
        zn = sys.apply_Q(zn);
        Qn = Q * Qn;
    }
    if (mb.curve.empty()) {
        mb.note = "tile budget too small for any level";
        return mb;
    }
    mb.pass = mb.curve.back().ratio > 2 * mb.delta;
    return mb;
}

// ---------------------------------------------------------------------------

namespace {

Scalar pairing(const SubstitutionSystem& sys, const SymbolicVector& v, const SymbolicVector& alpha) {
    Scalar s(sys.basis_size());
    for (std::size_t a = 0; a < sys.dim(); ++a) {
        Scalar x = v.coordinate(a), y = alpha.coordinate(a);
        if (x.is_zero() || y.is_zero()) continue;
        s += multiply(*sys.basis, x, y);
    }
    return s;
}

double frac_distance(const Rational& q) {
    Integer f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    Rational r = q - Rational(f);
    double x = r.get_d();
    return std::min(x, 1 - x);
}

}  // namespace

ResidueSequence eigenvalue_residues(const SubstitutionSystem& sys, const SymbolicVector& alpha,
                                    const std::vector<SymbolicVector>& xi, unsigned N) {
    if (N < 1) throw std::invalid_argument("eigenvalue_residues needs N >= 1");
    ResidueSequence out;
    const unsigned bits = std::max(128u, precision_bits());
    PrecisionGuard guard(bits);
    std::vector<SymbolicVector> cur;
    for (const auto& z : xi) cur.push_back(sys.apply_Q(z));
    const auto& vals = sys.basis->values();
    for (unsigned n = 1; n <= N; ++n) {
        Residue r;
        r.n = n;
        r.exact = true;
        bool exhausted = false;
        for (const auto& v : cur) {
            Scalar s = pairing(sys, v, alpha);
            if (s.is_rational()) {
                r.value = std::max(r.value, frac_distance(s.c[0]));
                continue;
            }
            r.exact = false;
            // float error bound for the evaluation
            double mag = 0;
            for (std::size_t k = 0; k < s.c.size(); ++k) mag += std::abs(s.c[k].get_d() * vals[k]);
            if (mag * std::ldexp(1.0, 8 - static_cast<int>(bits)) > 1e-6) {
                exhausted = true;
                break;
            }
            BigFloat x = evaluate_high(*sys.basis, s);
            BigFloat dist = boost::multiprecision::abs(x - boost::multiprecision::round(x));
            r.value = std::max(r.value, static_cast<double>(dist));
        }
        if (exhausted) {
            out.truncated = true;
            out.note = "precision exhausted at n = " + std::to_string(n) + " with " + std::to_string(bits) + " bits";
            break;
        }
        out.values.push_back(r);
        for (auto& v : cur) v = sys.apply_Q(v);
    }
    return out;
}

const char* to_string(EigenStatus s) {
    switch (s) {
    case EigenStatus::ExactPass: return "ExactPass";
    case EigenStatus::NumericPass: return "NumericPass";
    default: return "Fail";
    }
}

EigenvalueVerdict eigenvalue_test(const SubstitutionSystem& sys, const SymbolicVector& alpha,
                                  const std::vector<SymbolicVector>& xi, const std::vector<SymbolicVector>& periods,
                                  unsigned N) {
    EigenvalueVerdict v;
    v.alpha = alpha;
    v.residues = eigenvalue_residues(sys, alpha, xi, N);
    const auto& s = v.residues.values;
    const unsigned M = static_cast<unsigned>(s.size());
    for (const auto& g : periods) {
        Scalar p = pairing(sys, g, alpha);
        bool ok = p.is_rational() && p.c[0].get_den() == 1;
        if (!ok) {
            v.period_ok = false;
            v.period_violations.push_back(format_vector(*sys.basis, g));
        }
    }
    if (M == 0) {
        v.status = EigenStatus::Fail;
        return v;
    }
    // exact zero tail
    unsigned n0 = M + 1;
    for (unsigned k = M; k >= 1; --k) {
        if (s[k - 1].exact && s[k - 1].value == 0) n0 = k;
        else break;
    }
    const unsigned half = std::max(1u, (M + 1) / 2);
    if (n0 <= half) {
        v.status = EigenStatus::ExactPass;
        v.n0 = n0;
        return v;
    }
    // log-linear fit over the second half
    std::vector<double> xs, ys;
    for (unsigned k = half; k <= M; ++k)
        if (s[k - 1].value > 0) {
            xs.push_back(k);
            ys.push_back(std::log(s[k - 1].value));
        }
    if (xs.size() >= 3) {
        double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        double slope = sxy / sxx, icpt = my - slope * mx;
        double rss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) rss += std::pow(ys[i] - (icpt + slope * xs[i]), 2);
        v.fit_residual = std::sqrt(rss / static_cast<double>(xs.size()));
        v.rho = std::exp(slope);
        v.C = std::exp(icpt);
        // at least a decade of decay across the fitted range
        double decay = slope * (xs.back() - xs.front());
        if (slope < 0 && v.fit_residual < 0.5 && decay < -std::log(10.0)) {
            v.status = EigenStatus::NumericPass;
            return v;
        }
    }
    v.status = EigenStatus::Fail;
    v.fail_n = 0;
    for (unsigned k = half; k <= M; ++k)
        if (s[k - 1].value > 1e-3) {
            v.fail_n = k;
            v.fail_residue = s[k - 1].value;
            break;
        }
    if (v.fail_n == 0) {
        auto it = std::max_element(s.begin() + (half - 1), s.end(),
                                   [](const Residue& a, const Residue& b) { return a.value < b.value; });
        v.fail_n = it->n;
        v.fail_residue = it->value;
    }
    return v;
}

std::vector<AlgebraicScalar> expansion_eigenvalues(const SubstitutionSystem& sys) {
    std::vector<AlgebraicScalar> out;
    for (const auto& e : sys.Q.eigen_decl) {
        bool dup = false;
        for (const auto& o : out)
            if (o.minpoly() == e.value.minpoly() && o.root_index() == e.value.root_index()) dup = true;
        if (!dup) out.push_back(e.value);
    }
    return out;
}

AlphaFamily pisot_family_of_alpha(const SubstitutionSystem& sys, const SymbolicVector& alpha) {
    AlphaFamily af;
    const std::size_t d = sys.dim();
    auto decl = expansion_eigenvalues(sys);
    if (decl.empty()) throw MathError("pisot_family_of_alpha needs declared eigenvalues");
    auto nearest = [&](std::complex<double> z) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < decl.size(); ++k)
            if (std::abs(decl[k].approx() - z) < std::abs(decl[best].approx() - z)) best = k;
        return best;
    };
    std::set<std::size_t> chosen;
    bool diagonal = true;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j && !sys.Q.entries[i][j].is_zero()) diagonal = false;
    if (alpha.is_zero()) {
        af.vacuous = true;
        af.family = true;
        return af;
    }
    if (diagonal) {
        for (std::size_t a = 0; a < d; ++a)
            if (!alpha.coordinate(a).is_zero()) chosen.insert(nearest(sys.Q.numeric[a][a]));
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(sys.Q.numeric));
        auto al = sys.eval(alpha);
        for (int j = 0; j < static_cast<int>(d); ++j) {
            std::complex<double> p = 0;
            for (std::size_t a = 0; a < d; ++a) p += es.eigenvectors()(static_cast<int>(a), j) * al[a];
            if (std::abs(p) > 1e-9) chosen.insert(nearest(es.eigenvalues()(j)));
            else af.undecided = true;
        }
    }
    for (std::size_t k : chosen) af.theta.push_back(decl[k]);
    auto fam = is_pisot_family(af.theta);
    af.family = fam.holds;
    if (fam.undecided) af.undecided = true;
    return af;
}

const char* to_string(MixingVerdict v) {
    switch (v) {
    case MixingVerdict::WeaklyMixing: return "WEAKLY_MIXING";
    case MixingVerdict::NotWeaklyMixing: return "NOT_WEAKLY_MIXING";
    default: return "INCONCLUSIVE";
    }
}

WeakMixingReport weak_mixing_verdict(const SubstitutionSystem& sys, const std::vector<EigenvalueVerdict>& eigen,
                                     const std::optional<FlcScan>& flc, const std::optional<RigidityVerdict>& rigidity) {
    WeakMixingReport rep;
    auto theta = expansion_eigenvalues(sys);
    auto tnp = is_totally_non_pisot(theta);
    rep.totally_non_pisot = tnp.holds && !tnp.undecided;
    std::vector<const EigenvalueVerdict*> passing;
    for (const auto& e : eigen)
        if (e.status != EigenStatus::Fail && e.period_ok && !e.alpha.is_zero()) passing.push_back(&e);
    if (rep.totally_non_pisot) {
        rep.verdict = MixingVerdict::WeaklyMixing;
        rep.reasons.push_back("eigenvalues of Q are totally non-Pisot");
        if (!passing.empty())
            rep.warnings.push_back("inconsistent: nonzero eigenvalue candidate passed for a totally non-Pisot expansion");
    } else if (!passing.empty()) {
        rep.verdict = MixingVerdict::NotWeaklyMixing;
        for (auto* e : passing)
            rep.reasons.push_back(std::string(to_string(e->status)) + " for alpha = " +
                                  format_vector(*sys.basis, e->alpha));
    } else {
        rep.reasons.push_back("no nonzero eigenvalue found and Q is not totally non-Pisot");
    }
    // relatively dense eigenvalue grid: passing alphas spanning R^d
    if (!passing.empty()) {
        std::vector<std::vector<double>> rows;
        for (auto* e : passing) rows.push_back(sys.eval(e->alpha));
        Eigen::MatrixXd M(static_cast<int>(rows.size()), static_cast<int>(sys.dim()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t a = 0; a < sys.dim(); ++a) M(static_cast<int>(i), static_cast<int>(a)) = rows[i][a];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        lu.setThreshold(1e-9);
        if (static_cast<std::size_t>(lu.rank()) == sys.dim()) {
            if (flc && flc->verdict == LocalComplexity::IlcEvidence)
                rep.warnings.push_back("inconsistent: relatively dense eigenvalues alongside ILC evidence");
            if (rigidity && rigidity->status == RigidityStatus::NotRigid)
                rep.warnings.push_back("inconsistent: relatively dense eigenvalues for a non-rigid tiling");
        }
    }
    return rep;
}

std::string residues_csv(const EigenvalueVerdict& v) {
    std::ostringstream os;
    os.precision(17);
    os << "n,residue,exact\n";
    for (const auto& r : v.residues.values) os << r.n << ',' << r.value << ',' << (r.exact ? 1 : 0) << '\n';
    return os.str();
}

std::string mixing_csv(const MixingBound& b) {
    std::ostringstream os;
    os.precision(17);
    os << "n,level,pair_count,single_count,ratio,two_delta\n";
    for (const auto& p : b.curve)
        os << p.n << ',' << p.level << ',' << p.pair_count << ',' << p.single_count << ',' << p.ratio << ','
           << 2 * b.delta << '\n';
    return os.str();
}

}  // namespace tilescope
