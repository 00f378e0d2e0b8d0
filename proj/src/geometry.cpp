#include "tilescope/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tilescope/error.hpp"

namespace tilescope {

RegionMask::RegionMask(double h, std::vector<double> origin, std::vector<int> shape)
    : h_(h), origin_(std::move(origin)), shape_(std::move(shape)) {
    if (!(h_ > 0)) throw std::invalid_argument("mask resolution must be positive");
    if (origin_.size() != shape_.size()) throw std::invalid_argument("mask origin/shape mismatch");
    stride_.assign(shape_.size(), 1);
    std::size_t total = 1;
    for (int i = static_cast<int>(shape_.size()) - 1; i >= 0; --i) {
        if (shape_[i] <= 0) throw std::invalid_argument("mask shape must be positive");
        stride_[i] = total;
        total *= static_cast<std::size_t>(shape_[i]);
    }
    if (total > 200'000'000) throw RuntimeFailure("raster grid too large; use a coarser resolution");
    cells_.assign(total, 0);
}

std::size_t RegionMask::flat_index(const std::vector<int>& c) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < c.size(); ++i) f += static_cast<std::size_t>(c[i]) * stride_[i];
    return f;
}

std::vector<int> RegionMask::unflatten(std::size_t flat) const {
    std::vector<int> c(shape_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = static_cast<int>(flat / stride_[i]);
        flat %= stride_[i];
    }
    return c;
}

std::vector<double> RegionMask::cell_center(std::size_t flat) const {
    auto c = unflatten(flat);
    std::vector<double> x(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) x[i] = origin_[i] + (c[i] + 0.5) * h_;
    return x;
}

long long RegionMask::locate(const std::vector<double>& x) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        double t = std::floor((x[i] - origin_[i]) / h_);
        if (t < 0 || t >= shape_[i]) return -1;
        f += static_cast<std::size_t>(t) * stride_[i];
    }
    return static_cast<long long>(f);
}

bool RegionMask::contains(const std::vector<double>& x) const {
    long long f = locate(x);
    return f >= 0 && cells_[static_cast<std::size_t>(f)];
}

std::size_t RegionMask::count() const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1)); }

double RegionMask::volume() const { return static_cast<double>(count()) * std::pow(h_, static_cast<double>(dim())); }

std::size_t RegionMask::boundary_count() const {
    std::size_t n = 0;
    for (std::size_t f = 0; f < cells_.size(); ++f) {
        if (!cells_[f]) continue;
        auto c = unflatten(f);
        bool edge = false;
        for (std::size_t i = 0; i < c.size() && !edge; ++i) {
            if (c[i] == 0 || c[i] == shape_[i] - 1) {
                edge = true;
                break;
            }
            edge = !cells_[f - stride_[i]] || !cells_[f + stride_[i]];
        }
        n += edge;
    }
    return n;
}

double RegionMask::boundary_volume() const {
    return static_cast<double>(boundary_count()) * std::pow(h_, static_cast<double>(dim()));
}

namespace {

std::vector<std::vector<int>> neighbour_offsets(std::size_t d) {
    std::vector<std::vector<int>> out;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= 3;
    for (std::size_t k = 0; k < total; ++k) {
        std::vector<int> o(d);
        std::size_t t = k;
        bool zero = true;
        for (std::size_t i = 0; i < d; ++i) {
            o[i] = static_cast<int>(t % 3) - 1;
            t /= 3;
            zero = zero && o[i] == 0;
        }
        if (!zero) out.push_back(o);
    }
    return out;
}

}  // namespace

std::vector<int> chessboard_distance(const RegionMask& m, int max_steps) {
    const int inf = max_steps + 1;
    std::vector<int> dist(m.cell_count(), inf);
    std::deque<std::size_t> q;
    for (std::size_t f = 0; f < m.cell_count(); ++f)
        if (m.get(f)) {
            dist[f] = 0;
            q.push_back(f);
        }
    auto offs = neighbour_offsets(m.dim());
    const auto& shape = m.shape();
    while (!q.empty()) {
        std::size_t f = q.front();
        q.pop_front();
        if (dist[f] >= max_steps) continue;
        auto c = m.unflatten(f);
        for (const auto& o : offs) {
            std::vector<int> n(c);
            bool ok = true;
            for (std::size_t i = 0; i < n.size() && ok; ++i) {
                n[i] += o[i];
                ok = n[i] >= 0 && n[i] < shape[i];
            }
            if (!ok) continue;
            std::size_t g = m.flat_index(n);
            if (dist[g] > dist[f] + 1) {
                dist[g] = dist[f] + 1;
                q.push_back(g);
            }
        }
    }
    return dist;
}

double hausdorff(const RegionMask& a, const RegionMask& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("hausdorff needs masks on the same grid");
    std::size_t na = a.count(), nb = b.count();
    if (na == 0 && nb == 0) return 0;
    if (na == 0 || nb == 0) return std::numeric_limits<double>::infinity();
    int cap = 0;
    for (int s : a.shape()) cap = std::max(cap, s);
    auto da = chessboard_distance(a, cap), db = chessboard_distance(b, cap);
    int worst = 0;
    for (std::size_t f = 0; f < a.cell_count(); ++f) {
        if (b.get(f)) worst = std::max(worst, da[f]);
        if (a.get(f)) worst = std::max(worst, db[f]);
    }
    return worst * a.resolution();
}

// ---------------------------------------------------------------------------

IfsResult solve_adjoint_ifs(const SubstitutionSystem& sys, double h, unsigned iters) {
    if (!(h > 0)) throw std::invalid_argument("resolution must be positive");
    const std::size_t d = sys.dim(), k = sys.kappa();
    Eigen::MatrixXd Q = to_eigen(sys.Q.numeric);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
    if (!lu.isInvertible()) throw MathError("Q is not invertible");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
    const double c_min = svd.singularValues().minCoeff();

    // digits[i][j] numeric
    std::vector<std::vector<std::vector<Eigen::VectorXd>>> dig(k, std::vector<std::vector<Eigen::VectorXd>>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (const auto& u : sys.digits[i][j]) {
                auto v = sys.eval(u);
                dig[i][j].push_back(Eigen::Map<Eigen::VectorXd>(v.data(), d));
            }

    auto boxes = support_boxes(sys);
    std::vector<Eigen::VectorXd> lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
        lo[j] = Eigen::Map<Eigen::VectorXd>(boxes.lo[j].data(), d);
        hi[j] = Eigen::Map<Eigen::VectorXd>(boxes.hi[j].data(), d);
    }

    IfsResult res;
    std::vector<RegionMask> masks;
    std::vector<std::vector<Eigen::VectorXd>> qcenters(k);
    double seed_diam = 0;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> origin(d);
        std::vector<int> shape(d);
        for (std::size_t a = 0; a < d; ++a) {
            origin[a] = std::floor((lo[j](a) - 2 * h) / h) * h;
            shape[a] = static_cast<int>(std::ceil((hi[j](a) + 2 * h - origin[a]) / h));
        }
        res.hull_lo.emplace_back(lo[j].data(), lo[j].data() + d);
        res.hull_hi.emplace_back(hi[j].data(), hi[j].data() + d);
        RegionMask m(h, origin, shape);
        // seed: ball about the anchor that swallows the hull
        auto anchor = sys.eval(sys.anchors[j]);
        double r2 = 0;
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
            double s = 0;
            for (std::size_t a = 0; a < d; ++a) {
                double x = (corner >> a & 1u) ? hi[j](a) : lo[j](a);
                s += (x - anchor[a]) * (x - anchor[a]);
            }
            r2 = std::max(r2, s);
        }
        double r = std::sqrt(r2) + h;
        seed_diam = std::max(seed_diam, 2 * r);
        qcenters[j].resize(m.cell_count());
        for (std::size_t f = 0; f < m.cell_count(); ++f) {
            auto c = m.cell_center(f);
            double s = 0;
            for (std::size_t a = 0; a < d; ++a) s += (c[a] - anchor[a]) * (c[a] - anchor[a]);
            m.set(f, s <= r * r);
            qcenters[j][f] = Q * Eigen::Map<Eigen::VectorXd>(c.data(), d);
        }
        masks.push_back(std::move(m));
    }

    const unsigned cap = iters ? iters : 200;
    unsigned done = 0;
    std::vector<double> y(d);
    while (done < cap) {
        std::vector<RegionMask> next = masks;
        for (std::size_t j = 0; j < k; ++j) {
            auto& m = next[j];
            for (std::size_t f = 0; f < m.cell_count(); ++f) {
                bool in = false;
                for (std::size_t i = 0; i < k && !in; ++i)
                    for (const auto& u : dig[i][j]) {
                        for (std::size_t a = 0; a < d; ++a) y[a] = qcenters[j][f](a) - u(a);
                        if (masks[i].contains(y)) {
                            in = true;
                            break;
                        }
                    }
                m.set(f, in);
            }
        }
        double step = 0;
        for (std::size_t j = 0; j < k; ++j) step = std::max(step, hausdorff(masks[j], next[j]));
        masks = std::move(next);
        res.hausdorff_steps.push_back(step);
        ++done;
        if (!iters && step < h) break;
    }
    for (const auto& m : masks)
        if (m.count() == 0) throw RuntimeFailure("adjoint IFS raster collapsed; use a finer resolution");
    res.masks = std::move(masks);
    res.iterations = done;
    res.claimed_accuracy = seed_diam * std::pow(c_min, -static_cast<double>(done)) + h * std::sqrt(static_cast<double>(d));
    return res;
}

VolumeReport prototile_volumes(const SubstitutionSystem& sys, const std::vector<RegionMask>* masks) {
    if (!sys.primitive()) throw MathError("prototile volumes need a primitive substitution matrix");
    const std::size_t k = sys.kappa();
    auto pf = perron_frobenius(sys.S);
    double det = std::abs(to_eigen(sys.Q.numeric).determinant());
    if (std::abs(pf.value - det) > 1e-6 * det)
        throw MathError("PF eigenvalue " + std::to_string(pf.value) + " of S does not match |det Q| = " +
                        std::to_string(det));
    VolumeReport rep;
    std::vector<double> v = pf.left;
    for (std::size_t i = 0; i < k; ++i) rep.eigen_ratios.push_back(v[i] / v[0]);

    double scale = 0;
    for (std::size_t i = 0; i < k && scale == 0; ++i)
        if (sys.declared_volumes[i]) {
            scale = evaluate(*sys.basis, *sys.declared_volumes[i]) / v[i];
            rep.scale_source = "declared";
        }
    if (masks) {
        if (masks->size() != k) throw std::invalid_argument("one mask per prototile expected");
        for (const auto& m : *masks) {
            rep.mask_volumes.push_back(m.volume());
            rep.mask_error_bars.push_back(m.boundary_volume());
        }
        for (std::size_t i = 0; i < k; ++i) {
            double mr = rep.mask_volumes[i] / rep.mask_volumes[0];
            rep.max_ratio_disagreement =
                std::max(rep.max_ratio_disagreement, std::abs(mr - rep.eigen_ratios[i]) / rep.eigen_ratios[i]);
        }
        if (scale == 0) {
            scale = rep.mask_volumes[0] / v[0];
            rep.scale_source = "raster";
        }
    }
    if (scale == 0) {
        scale = 1 / v[0];
        rep.scale_source = "unit";
        rep.notes.push_back("no volume data: scaled so that Vol(A_1) = 1");
    }
    for (std::size_t i = 0; i < k; ++i) rep.volumes.push_back(v[i] * scale);

    for (std::size_t i = 0; i < k; ++i)
        if (sys.declared_volumes[i]) {
            double dv = evaluate(*sys.basis, *sys.declared_volumes[i]);
            if (std::abs(dv - rep.volumes[i]) > 1e-9 * std::max(1.0, dv))
                rep.notes.push_back("declared volume of " + sys.labels[i] + " disagrees with the PF eigenvector");
        }
    return rep;
}

BoundaryScan boundary_scan(const std::vector<std::vector<RegionMask>>& by_res) {
    BoundaryScan s;
    for (const auto& masks : by_res) {
        if (masks.empty()) continue;
        s.resolutions.push_back(masks[0].resolution());
        std::vector<double> b;
        for (const auto& m : masks) b.push_back(m.boundary_volume());
        s.boundary_volume.push_back(b);
    }
    s.decreasing = s.boundary_volume.size() >= 2;
    for (std::size_t r = 1; r < s.boundary_volume.size(); ++r)
        for (std::size_t i = 0; i < s.boundary_volume[r].size(); ++i)
            if (!(s.boundary_volume[r][i] < s.boundary_volume[r - 1][i])) s.decreasing = false;
    return s;
}

BoundaryScan boundary_scan(const SubstitutionSystem& sys, double h, unsigned iters) {
    std::vector<std::vector<RegionMask>> all;
    for (double r : {h, h / 2, h / 4}) all.push_back(solve_adjoint_ifs(sys, r, iters).masks);
    return boundary_scan(all);
}

Representability representability_check(const SubstitutionSystem& sys, const Patch& patch,
                                         const std::vector<RegionMask>& masks, const Window& window, double h,
                                         double tolerance) {
    const std::size_t d = sys.dim();
    std::vector<int> shape(d);
    for (std::size_t a = 0; a < d; ++a) shape[a] = std::max(1, static_cast<int>(std::floor((window.hi[a] - window.lo[a]) / h)));
    RegionMask grid(h, window.lo, shape);
    std::vector<std::uint16_t> cover(grid.cell_count(), 0);
    Representability r;
    r.tolerance = tolerance;
    std::vector<double> p(d);
    for (const auto& t : patch) {
        const RegionMask& m = masks.at(t.type);
        if (std::abs(m.resolution() - h) > 1e-12 * h) throw std::invalid_argument("mask resolution differs from h");
        auto x = sys.eval(t.shift);
        bool used = false;
        for (std::size_t f = 0; f < m.cell_count(); ++f) {
            if (!m.get(f)) continue;
            auto c = m.cell_center(f);
            for (std::size_t a = 0; a < d; ++a) p[a] = c[a] + x[a];
            long long g = grid.locate(p);
            if (g < 0) continue;
            if (cover[g] < 65535) ++cover[g];
            used = true;
        }
        r.tiles_used += used;
    }
    std::size_t over = 0, gap = 0;
    for (auto c : cover) {
        over += c >= 2;
        gap += c == 0;
    }
    r.overlap_fraction = static_cast<double>(over) / static_cast<double>(cover.size());
    r.gap_fraction = static_cast<double>(gap) / static_cast<double>(cover.size());
    r.pass = r.overlap_fraction <= tolerance && r.gap_fraction <= tolerance;
    return r;
}

Representability representability_check(const SubstitutionSystem& sys, unsigned levels, const Window& window,
                                         double h, double tolerance) {
    auto ifs = solve_adjoint_ifs(sys, h);
    double reach = 0;
    for (std::size_t j = 0; j < sys.kappa(); ++j)
        for (std::size_t a = 0; a < sys.dim(); ++a)
            reach = std::max({reach, std::abs(ifs.hull_lo[j][a]), std::abs(ifs.hull_hi[j][a])});
    Seed seed = fixed_point_seed(sys);
    Patch p = fixed_point_patch(sys, seed, levels, &window, reach + h);
    return representability_check(sys, p, ifs.masks, window, h, tolerance);
}

// ---------------------------------------------------------------------------

Window erode_dilate(const Window& w, double r, bool dilate) {
    if (r < 0) throw std::invalid_argument("erode_dilate needs r >= 0");
    Window out = w;
    for (std::size_t a = 0; a < w.dim(); ++a) {
        if (dilate) {
            out.lo[a] -= r;
            out.hi[a] += r;
        } else {
            out.lo[a] += r;
            out.hi[a] -= r;
            if (out.hi[a] < out.lo[a]) out.hi[a] = out.lo[a];
        }
    }
    return out;
}

RegionMask erode_dilate(const RegionMask& m, double r, bool dilate) {
    if (r < 0) throw std::invalid_argument("erode_dilate needs r >= 0");
    const int k = static_cast<int>(std::floor(r / m.resolution() + 1e-9));
    if (dilate) {
        std::vector<double> origin = m.origin();
        std::vector<int> shape = m.shape();
        for (std::size_t a = 0; a < m.dim(); ++a) {
            origin[a] -= k * m.resolution();
            shape[a] += 2 * k;
        }
        RegionMask big(m.resolution(), origin, shape);
        for (std::size_t f = 0; f < m.cell_count(); ++f)
            if (m.get(f)) {
                auto c = m.unflatten(f);
                for (auto& x : c) x += k;
                big.set(big.flat_index(c), true);
            }
        auto dist = chessboard_distance(big, k);
        for (std::size_t f = 0; f < big.cell_count(); ++f) big.set(f, dist[f] <= k);
        return big;
    }
    // erosion: keep cells whose chessboard distance to the complement exceeds k
    RegionMask comp(m.resolution(), m.origin(), m.shape());
    for (std::size_t f = 0; f < m.cell_count(); ++f) comp.set(f, !m.get(f));
    auto dist = chessboard_distance(comp, k + 1);
    RegionMask out(m.resolution(), m.origin(), m.shape());
    for (std::size_t f = 0; f < m.cell_count(); ++f) {
        auto c = m.unflatten(f);
        int edge = std::numeric_limits<int>::max();
        for (std::size_t a = 0; a < c.size(); ++a) edge = std::min({edge, c[a] + 1, m.shape()[a] - c[a]});
        out.set(f, m.get(f) && dist[f] > k && edge > k);
    }
    return out;
}

double vanhove_ratio(const Window& w, double r) {
    if (r < 0) throw std::invalid_argument("vanhove_ratio needs r >= 0");
    double vol = w.volume();
    if (!(vol > 0)) throw std::invalid_argument("degenerate window");
    double outer = 1, inner = 1;
    for (std::size_t a = 0; a < w.dim(); ++a) {
        double L = w.hi[a] - w.lo[a];
        outer *= L + 2 * r;
        inner *= std::max(0.0, L - 2 * r);
    }
    return (outer - inner) / vol;
}

double vanhove_ratio(const RegionMask& m, double r) {
    double vol = m.volume();
    if (!(vol > 0)) throw std::invalid_argument("degenerate region");
    return (erode_dilate(m, r, true).volume() - erode_dilate(m, r, false).volume()) / vol;
}

// ---------------------------------------------------------------------------

namespace {

double norm2(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// for each point of `from`: (|p|, distance to nearest same-colour point of `to`)
void one_side(const ColouredSet& from, const ColouredSet& to, std::vector<std::pair<double, double>>& out) {
    for (const auto& p : from) {
        double best = INFINITY;
        for (const auto& q : to) {
            if (q.colour != p.colour) continue;
            double s = 0;
            for (std::size_t a = 0; a < p.x.size(); ++a) s += (p.x[a] - q.x[a]) * (p.x[a] - q.x[a]);
            best = std::min(best, s);
        }
        out.emplace_back(norm2(p.x), std::sqrt(best));
    }
}

}  // namespace

MetricResult rubber_metric_detail(const ColouredSet& a, const ColouredSet& b, double tol) {
    MetricResult r;
    r.empty_input = a.empty() || b.empty();
    if (r.empty_input) {
        r.value = kRubberCap;
        r.capped = true;
        return r;
    }
    std::vector<std::pair<double, double>> pts;
    one_side(a, b, pts);
    one_side(b, a, pts);
    // eps is admissible when every point inside the 1/eps ball has a partner within eps
    auto ok = [&](double eps) {
        for (const auto& [rad, near] : pts)
            if (rad <= 1.0 / eps && near > eps) return false;
        return true;
    };
    if (!ok(kRubberCap)) {
        r.value = kRubberCap;
        r.capped = true;
        return r;
    }
    double lo = 0, hi = kRubberCap;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    r.value = hi;
    return r;
}

double rubber_metric(const ColouredSet& a, const ColouredSet& b) { return rubber_metric_detail(a, b).value; }

ColouredSet to_coloured(const SubstitutionSystem& sys, const Patch& p) {
    ColouredSet out;
    for (const auto& t : p) out.push_back({t.type, sys.eval(t.shift)});
    return out;
}

// ---------------------------------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw RuntimeFailure("cannot write " + tmp.string());
        out << content;
        if (!out) throw RuntimeFailure("write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};

// merged horizontal runs of a 2D (or 1D) mask: x0, y0, length in cells
struct Run {
    int x, y, len;
};

std::vector<Run> runs(const RegionMask& m) {
    std::vector<Run> out;
    const int nx = m.shape()[0];
    const int ny = m.dim() > 1 ? m.shape()[1] : 1;
    for (int y = 0; y < ny; ++y) {
        int x = 0;
        while (x < nx) {
            auto at = [&](int xx) {
                std::vector<int> c{xx};
                if (m.dim() > 1) c.push_back(y);
                return m.get(m.flat_index(c));
            };
            if (!at(x)) {
                ++x;
                continue;
            }
            int start = x;
            while (x < nx && at(x)) ++x;
            out.push_back({start, y, x - start});
        }
    }
    return out;
}

}  // namespace

void write_pgm(const RegionMask& m, const std::string& path) {
    if (m.dim() > 2) throw std::invalid_argument("PGM export supports d <= 2");
    const int nx = m.shape()[0];
    const int ny = m.dim() > 1 ? m.shape()[1] : 1;
    std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
    for (int row = ny - 1; row >= 0; --row)
        for (int x = 0; x < nx; ++x) {
            std::vector<int> c{x};
            if (m.dim() > 1) c.push_back(row);
            out.push_back(m.get(m.flat_index(c)) ? static_cast<char>(0) : static_cast<char>(255));
        }
    write_file_atomic(path, out);
}

namespace {

std::string svg_header(double x0, double y0, double w, double h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << " " << y0 << " " << w << " " << h
       << "\" width=\"800\" height=\"" << std::max(40.0, 800 * h / w) << "\">\n"
       << "<g transform=\"scale(1,-1) translate(0," << -(2 * y0 + h) << ")\">\n";
    return os.str();
}

void emit_mask(std::ostringstream& os, const RegionMask& m, const std::vector<double>& shift, const char* fill) {
    const double h = m.resolution();
    const double bar = m.dim() > 1 ? h : 0.5;
    os << "<g fill=\"" << fill << "\">";
    for (const auto& r : runs(m)) {
        double x = m.origin()[0] + shift[0] + r.x * h;
        double y = m.dim() > 1 ? m.origin()[1] + shift[1] + r.y * h : 0;
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << r.len * h << "\" height=\"" << bar << "\"/>";
    }
    os << "</g>\n";
}

}  // namespace

void write_mask_svg(const std::vector<RegionMask>& masks, const std::string& path) {
    if (masks.empty()) throw std::invalid_argument("no masks to render");
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    std::vector<double> offsets;
    double cursor = 0;
    for (const auto& m : masks) {
        // lay prototiles out left to right
        offsets.push_back(cursor - m.origin()[0]);
        double w = m.shape()[0] * m.resolution();
        x0 = std::min(x0, cursor);
        x1 = std::max(x1, cursor + w);
        y0 = std::min(y0, m.dim() > 1 ? m.origin()[1] : 0.0);
        y1 = std::max(y1, m.dim() > 1 ? m.origin()[1] + m.shape()[1] * m.resolution() : 0.5);
        cursor += w + 0.5;
    }
    std::ostringstream os;
    os << svg_header(x0, y0, x1 - x0, y1 - y0);
    for (std::size_t i = 0; i < masks.size(); ++i)
        emit_mask(os, masks[i], {offsets[i], 0.0}, kPalette[i % 8]);
    os << "</g>\n</svg>\n";
    write_file_atomic(path, os.str());
}

void write_patch_svg(const SubstitutionSystem& sys, const Patch& p, const std::vector<RegionMask>& masks,
                     const std::string& path) {
    if (p.empty()) throw std::invalid_argument("empty patch");
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    std::vector<std::vector<double>> pos;
    for (const auto& t : p) {
        auto x = sys.eval(t.shift);
        if (x.size() == 1) x.push_back(0);
        const auto& m = masks.at(t.type);
        x0 = std::min(x0, x[0] + m.origin()[0]);
        x1 = std::max(x1, x[0] + m.origin()[0] + m.shape()[0] * m.resolution());
        double my0 = m.dim() > 1 ? m.origin()[1] : 0, my1 = m.dim() > 1 ? my0 + m.shape()[1] * m.resolution() : 0.5;
        y0 = std::min(y0, x[1] + my0);
        y1 = std::max(y1, x[1] + my1);
        pos.push_back(x);
    }
    std::ostringstream os;
    os << svg_header(x0, y0, x1 - x0, y1 - y0);
    for (std::size_t t = 0; t < p.size(); ++t) emit_mask(os, masks.at(p[t].type), pos[t], kPalette[p[t].type % 8]);
    os << "<g fill=\"#000\">";
    const double r = 0.02 * std::max(x1 - x0, y1 - y0) / std::sqrt(static_cast<double>(p.size()) + 1);
    for (const auto& x : pos) os << "<circle cx=\"" << x[0] << "\" cy=\"" << x[1] << "\" r=\"" << r << "\"/>";
    os << "</g>\n</g>\n</svg>\n";
    write_file_atomic(path, os.str());
}

}  // namespace tilescope
