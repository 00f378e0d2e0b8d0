#include "tilescope/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tilescope/error.hpp"

namespace tilescope {

std::size_t KSetCluster::size() const {
    std::size_t n = 0;
    for (const auto& c : colours) n += c.size();
    return n;
}

KSetCluster to_kset(const Patch& p, std::size_t kappa) {
    KSetCluster c;
    c.colours.resize(kappa);
    for (const auto& t : p) c.colours.at(t.type).push_back(t.shift);
    return c;
}

Patch to_patch(const KSetCluster& c) {
    Patch p;
    for (std::size_t i = 0; i < c.colours.size(); ++i)
        for (const auto& x : c.colours[i]) p.push_back({static_cast<int>(i), x});
    return p;
}

SymbolicVector apply_sparse(const RationalMatrix& m, const SymbolicVector& v) {
    SymbolicVector r(v.dim(), v.basis_size());
    auto& out = r.flat();
    const auto& in = v.flat();
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            if (m(i, j) != 0 && in[j] != 0) out[i] += m(i, j) * in[j];
    return r;
}

void SubstitutionSystem::finalize() {
    const std::size_t k = kappa();
    if (k == 0) throw MathError("system has no prototiles");
    if (digits.size() != k) throw MathError("digit matrix must be kappa x kappa");
    if (anchors.empty()) anchors.assign(k, zero());
    if (declared_volumes.size() != k) declared_volumes.resize(k);

    S.assign(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < k; ++i) {
        if (digits[i].size() != k) throw MathError("digit matrix must be kappa x kappa");
        for (std::size_t j = 0; j < k; ++j) {
            const auto& D = digits[i][j];
            std::unordered_set<SymbolicVector> seen;
            for (const auto& u : D)
                if (!seen.insert(u).second)
                    throw MathError("duplicate digit " + format_vector(*basis, u) + " in D_" + std::to_string(i + 1) +
                                    std::to_string(j + 1));
            S[i][j] = static_cast<long long>(D.size());
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        long long col = 0;
        for (std::size_t i = 0; i < k; ++i) col += S[i][j];
        if (col == 0) throw MathError("prototile " + labels[j] + " has an empty substitution");
    }

    primitive_exponent = primitivity_exponent(S);
    if (!primitive_exponent)
        warnings.push_back("substitution matrix is not primitive; frequency and spectral operations are disabled");

    q_action = q_action_matrix(*basis, Q.entries);
    auto inv = inverse(q_action);
    if (!inv) throw MathError("Q is singular");
    q_inverse_action = *inv;

    q_sparse_.clear();
    q_inv_sparse_.clear();
    for (std::size_t i = 0; i < q_action.rows; ++i)
        for (std::size_t j = 0; j < q_action.cols; ++j) {
            if (q_action(i, j) != 0) q_sparse_.push_back({i, j, q_action(i, j)});
            if (q_inverse_action(i, j) != 0) q_inv_sparse_.push_back({i, j, q_inverse_action(i, j)});
        }
}

SymbolicVector SubstitutionSystem::apply_Q(const SymbolicVector& v) const {
    SymbolicVector r(v.dim(), v.basis_size());
    auto& out = r.flat();
    const auto& in = v.flat();
    for (const auto& e : q_sparse_)
        if (in[e.col] != 0) out[e.row] += e.value * in[e.col];
    return r;
}

SymbolicVector SubstitutionSystem::apply_Q_inverse(const SymbolicVector& v) const {
    SymbolicVector r(v.dim(), v.basis_size());
    auto& out = r.flat();
    const auto& in = v.flat();
    for (const auto& e : q_inv_sparse_)
        if (in[e.col] != 0) out[e.row] += e.value * in[e.col];
    return r;
}

double SubstitutionSystem::max_digit_norm() const {
    double m = 0;
    for (const auto& row : digits)
        for (const auto& D : row)
            for (const auto& u : D)
                for (double x : eval(u)) m = std::max(m, std::abs(x));
    return m;
}

double SubstitutionSystem::q_norm() const {
    double m = 0;
    for (const auto& row : Q.numeric) {
        double s = 0;
        for (double x : row) s += std::abs(x);
        m = std::max(m, s);
    }
    return m;
}

ValidationReport validate_system(const SubstitutionSystem& sys) {
    ValidationReport rep;
    const std::size_t d = sys.dim();
    Eigen::MatrixXd q = to_eigen(sys.Q.numeric);
    Eigen::EigenSolver<Eigen::MatrixXd> es(q, false);
    std::vector<std::complex<double>> ev;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i));
    rep.expansive = true;
    for (const auto& e : ev) {
        rep.q_eigen_moduli.push_back(std::abs(e));
        if (!(std::abs(e) > 1.0)) rep.expansive = false;
    }
    if (!rep.expansive) throw MathError("Q is not expansive: an eigenvalue has modulus <= 1");

    if (sys.Q.eigen_decl.empty()) {
        rep.warnings.push_back("no eigenvalues declared for Q; spectral analysis is unavailable");
    } else {
        std::vector<std::complex<double>> declared;
        for (const auto& e : sys.Q.eigen_decl) {
            if (!(e.value.modulus() > 1.0)) throw MathError("declared eigenvalue of modulus <= 1");
            for (int m = 0; m < e.multiplicity; ++m) declared.push_back(e.value.approx());
        }
        if (declared.size() != d) throw MathError("declared eigenvalue multiplicities do not sum to the dimension");
        std::vector<bool> used(ev.size(), false);
        for (const auto& z : declared) {
            bool hit = false;
            for (std::size_t i = 0; i < ev.size() && !hit; ++i)
                if (!used[i] && std::abs(ev[i] - z) < 1e-8 * std::max(1.0, std::abs(z))) used[i] = hit = true;
            if (!hit) throw MathError("declared eigenvalue does not match the numeric spectrum of Q to 1e-8");
        }
    }

    rep.primitivity = sys.primitive_exponent;
    auto pf = perron_frobenius(sys.S);
    rep.pf_value = pf.value;
    rep.abs_det_q = std::abs(q.determinant());
    rep.pf_relative_error = std::abs(pf.value - rep.abs_det_q) / rep.abs_det_q;
    if (rep.pf_relative_error > 1e-8)
        rep.warnings.push_back("PF eigenvalue of S differs from |det Q| (relative error " +
                               std::to_string(rep.pf_relative_error) + "); not a self-affine tiling datum");
    for (const auto& w : sys.warnings) rep.warnings.push_back(w);
    return rep;
}

bool Window::contains(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(x[i] >= lo[i] && x[i] < hi[i])) return false;
    return true;
}

double Window::volume() const {
    double v = 1;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

namespace {

double sup_dist(const std::vector<double>& x, const Window& w) {
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < w.lo[i]) m = std::max(m, w.lo[i] - x[i]);
        if (x[i] > w.hi[i]) m = std::max(m, x[i] - w.hi[i]);
    }
    return m;
}

// Q^r numerically, and reach bounds R_r = maxdigit * sum_{i<r} |Q|^i
struct Reach {
    std::vector<Eigen::MatrixXd> qpow;
    std::vector<double> radius;

    Reach(const SubstitutionSystem& sys, unsigned k) {
        Eigen::MatrixXd q = to_eigen(sys.Q.numeric);
        const double dn = sys.max_digit_norm(), qn = sys.q_norm();
        qpow.push_back(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
        radius.push_back(0);
        for (unsigned r = 1; r <= k; ++r) {
            qpow.push_back(q * qpow.back());
            radius.push_back(radius.back() * qn + dn);
        }
    }

    bool keep(const std::vector<double>& x, unsigned rem, const Window& w, double margin) const {
        Eigen::VectorXd v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) v(i) = x[i];
        Eigen::VectorXd y = qpow[rem] * v;
        std::vector<double> yy(y.data(), y.data() + y.size());
        return sup_dist(yy, w) <= radius[rem] + margin + 1e-9 * (1 + radius[rem]);
    }
};

void check_budget(const SymbolicVector& v, std::size_t bits) {
    for (const auto& q : v.flat())
        if (mpz_sizeinbase(q.get_num_mpz_t(), 2) > bits || mpz_sizeinbase(q.get_den_mpz_t(), 2) > bits)
            throw RuntimeFailure("rational coefficients exceed the " + std::to_string(bits) +
                                 "-bit budget; use float mode for this depth");
}

}  // namespace

Patch substitute(const SubstitutionSystem& sys, const Patch& p, unsigned k, const Window* window, double margin,
                 std::size_t bit_budget) {
    std::optional<Reach> reach;
    if (window) reach.emplace(sys, k);

    Patch cur;
    for (const auto& t : p)
        if (!window || reach->keep(sys.eval(t.shift), k, *window, margin)) cur.push_back(t);

    for (unsigned step = 0; step < k; ++step) {
        const unsigned rem = k - step - 1;
        Patch next;
        TileSet seen;
        for (const auto& t : cur) {
            SymbolicVector qx = sys.apply_Q(t.shift);
            for (std::size_t i = 0; i < sys.kappa(); ++i)
                for (const auto& u : sys.digits[i][t.type]) {
                    Tile child{static_cast<int>(i), qx + u};
                    if (window && !reach->keep(sys.eval(child.shift), rem, *window, margin)) continue;
                    if (seen.insert(child).second) {
                        check_budget(child.shift, bit_budget);
                        next.push_back(std::move(child));
                    }
                }
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<FloatTile> substitute_float(const SubstitutionSystem& sys, const Patch& p, unsigned k,
                                        const Window* window, double margin) {
    std::optional<Reach> reach;
    if (window) reach.emplace(sys, k);
    Eigen::MatrixXd q = to_eigen(sys.Q.numeric);
    std::vector<std::vector<std::vector<std::vector<double>>>> dig(sys.kappa());
    for (std::size_t i = 0; i < sys.kappa(); ++i) {
        dig[i].resize(sys.kappa());
        for (std::size_t j = 0; j < sys.kappa(); ++j)
            for (const auto& u : sys.digits[i][j]) dig[i][j].push_back(sys.eval(u));
    }

    std::vector<FloatTile> cur;
    for (const auto& t : p) {
        auto x = sys.eval(t.shift);
        if (!window || reach->keep(x, k, *window, margin)) cur.push_back({t.type, x});
    }
    for (unsigned step = 0; step < k; ++step) {
        const unsigned rem = k - step - 1;
        std::vector<FloatTile> next;
        std::map<std::pair<int, std::vector<long long>>, bool> seen;
        for (const auto& t : cur) {
            Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(t.x.data(), t.x.size());
            Eigen::VectorXd qx = q * v;
            for (std::size_t i = 0; i < sys.kappa(); ++i)
                for (const auto& u : dig[i][t.type]) {
                    std::vector<double> c(u.size());
                    std::vector<long long> key(u.size());
                    for (std::size_t a = 0; a < u.size(); ++a) {
                        c[a] = qx(a) + u[a];
                        key[a] = std::llround(c[a] * 1e9);
                    }
                    if (window && !reach->keep(c, rem, *window, margin)) continue;
                    if (seen.emplace(std::make_pair(static_cast<int>(i), key), true).second)
                        next.push_back({static_cast<int>(i), c});
                }
        }
        cur = std::move(next);
    }
    return cur;
}

KSetCluster kset_substitute(const SubstitutionSystem& sys, const KSetCluster& c, unsigned k) {
    return to_kset(substitute(sys, to_patch(c), k), sys.kappa());
}

SupportBoxes support_boxes(const SubstitutionSystem& sys) {
    const std::size_t d = sys.dim(), k = sys.kappa();
    Eigen::MatrixXd Q = to_eigen(sys.Q.numeric);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
    if (!lu.isInvertible()) throw MathError("Q is not invertible");
    Eigen::MatrixXd Qi = lu.inverse();
    std::vector<std::vector<std::vector<Eigen::VectorXd>>> dig(k, std::vector<std::vector<Eigen::VectorXd>>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (const auto& u : sys.digits[i][j]) {
                auto v = sys.eval(u);
                dig[i][j].push_back(Eigen::Map<Eigen::VectorXd>(v.data(), d));
            }
    std::vector<Eigen::VectorXd> lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
        auto a = sys.eval(sys.anchors[j]);
        lo[j] = Eigen::Map<Eigen::VectorXd>(a.data(), d).array() - 1.0;
        hi[j] = lo[j].array() + 2.0;
    }
    for (int it = 0; it < 5000; ++it) {
        double change = 0;
        std::vector<Eigen::VectorXd> nlo(k), nhi(k);
        for (std::size_t j = 0; j < k; ++j) {
            nlo[j] = Eigen::VectorXd::Constant(d, INFINITY);
            nhi[j] = Eigen::VectorXd::Constant(d, -INFINITY);
            for (std::size_t i = 0; i < k; ++i)
                for (const auto& u : dig[i][j])
                    for (unsigned corner = 0; corner < (1u << d); ++corner) {
                        Eigen::VectorXd x(d);
                        for (std::size_t a = 0; a < d; ++a) x(a) = (corner >> a & 1u) ? hi[i](a) : lo[i](a);
                        Eigen::VectorXd y = Qi * (x + u);
                        nlo[j] = nlo[j].cwiseMin(y);
                        nhi[j] = nhi[j].cwiseMax(y);
                    }
            change = std::max({change, (nlo[j] - lo[j]).cwiseAbs().maxCoeff(), (nhi[j] - hi[j]).cwiseAbs().maxCoeff()});
        }
        lo = nlo;
        hi = nhi;
        if (change < 1e-14) break;
    }
    SupportBoxes out;
    for (std::size_t j = 0; j < k; ++j) {
        out.lo.emplace_back(lo[j].data(), lo[j].data() + d);
        out.hi.emplace_back(hi[j].data(), hi[j].data() + d);
    }
    return out;
}

namespace {

// share of the box [-R, R]^d covered by tiles of the nested patches
// omega^{kN}(seed) lying wholly inside it, once the clipped count settles
double seed_coverage(const SubstitutionSystem& sys, const Tile& seed, unsigned N, const SupportBoxes& boxes,
                     const std::vector<double>& vol, double R, double reach) {
    const std::size_t d = sys.dim();
    Window w{std::vector<double>(d, -R), std::vector<double>(d, R)};
    Patch p{seed};
    double cov = 0;
    std::size_t last = 0, stable = 0;
    for (unsigned step = 1; step <= 30 && stable < 2; ++step) {
        p = substitute(sys, p, N, &w, reach);
        cov = 0;
        std::size_t n = 0;
        for (const auto& t : p) {
            auto x = sys.eval(t.shift);
            bool inside = true;
            for (std::size_t a = 0; a < d && inside; ++a)
                inside = x[a] + boxes.lo[t.type][a] >= -R && x[a] + boxes.hi[t.type][a] <= R;
            if (!inside) continue;
            cov += vol[t.type];
            ++n;
        }
        stable = n == last ? stable + 1 : 0;
        last = n;
    }
    return cov / std::pow(2 * R, static_cast<double>(d));
}

}  // namespace

Seed fixed_point_seed(const SubstitutionSystem& sys, unsigned n_max) {
    if (!sys.primitive()) throw MathError("fixed_point_seed requires a primitive system");
    const std::size_t n = sys.q_action.rows;
    RationalMatrix qn = RationalMatrix::identity(n);
    std::vector<Patch> level(sys.kappa());
    for (std::size_t j = 0; j < sys.kappa(); ++j) level[j] = {Tile{static_cast<int>(j), sys.zero()}};

    bool have_volumes = true;
    for (const auto& v : sys.declared_volumes) have_volumes = have_volumes && v.has_value();
    const std::size_t d = sys.dim();
    auto boxes = support_boxes(sys);
    std::vector<double> vol;
    if (have_volumes)
        for (const auto& v : sys.declared_volumes) vol.push_back(evaluate(*sys.basis, *v));
    double side = 0;
    for (std::size_t j = 0; j < sys.kappa(); ++j)
        for (std::size_t a = 0; a < d; ++a) side = std::max(side, boxes.hi[j][a] - boxes.lo[j][a]);
    const double R = 8 * side;
    // tiles wholly inside the box cover at least (1 - side/R)^d of it
    const double need = 0.97 * std::pow(1 - side / R, static_cast<double>(d));

    std::size_t tried = 0;
    for (unsigned N = 1; N <= n_max; ++N) {
        qn = sys.q_action * qn;
        RationalMatrix a = RationalMatrix::identity(n);
        for (std::size_t i = 0; i < a.a.size(); ++i) a.a[i] -= qn.a[i];
        auto ainv = inverse(a);
        for (auto& p : level) p = substitute(sys, p, 1);
        if (!ainv) continue;
        std::vector<std::pair<double, Tile>> cands;
        for (std::size_t j = 0; j < sys.kappa(); ++j) {
            std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
            for (const auto& t : level[j]) {
                auto x = sys.eval(t.shift);
                for (std::size_t k = 0; k < d; ++k) {
                    lo[k] = std::min(lo[k], x[k]);
                    hi[k] = std::max(hi[k], x[k]);
                }
            }
            for (const auto& t : level[j]) {
                if (t.type != static_cast<int>(j)) continue;
                // prefilter: strictly inside the anchor hull of the level-N patch
                auto u = sys.eval(t.shift);
                bool inner = true;
                for (std::size_t k = 0; k < d; ++k) inner = inner && u[k] > lo[k] + 1e-12 && u[k] < hi[k] - 1e-12;
                if (!inner) continue;
                SymbolicVector s = apply_sparse(*ainv, t.shift);
                double norm = 0;
                for (double x : sys.eval(s)) norm += x * x;
                cands.emplace_back(norm, Tile{static_cast<int>(j), s});
            }
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first - 1e-12; });
        for (const auto& [norm, tile] : cands) {
            if (!have_volumes) return Seed{tile, N};
            if (++tried > 60) break;
            if (seed_coverage(sys, tile, N, boxes, vol, R, side) >= need) return Seed{tile, N};
        }
        std::size_t total = 0;
        for (const auto& p : level) total += p.size();
        if (total > 200000 || tried > 60) break;
    }
    throw MathError("no fixed tile with the origin in its interior found up to N = " + std::to_string(n_max) +
                    "; supply a seed manually");
}

Patch fixed_point_patch(const SubstitutionSystem& sys, const Seed& seed, unsigned levels, const Window* window,
                        double margin) {
    return substitute(sys, {seed.tile}, seed.N * levels, window, margin);
}

KSetCluster generating_set(const SubstitutionSystem& sys) {
    Seed s = fixed_point_seed(sys);
    KSetCluster c;
    c.colours.resize(sys.kappa());
    c.colours[s.tile.type].push_back(s.tile.shift);
    return c;
}

std::optional<SymbolicVector> find_translate(const Patch& sub, const Patch& whole, const TileSet& whole_set) {
    if (sub.empty()) return std::nullopt;
    const Tile& a = sub.front();
    for (const auto& t : whole) {
        if (t.type != a.type) continue;
        SymbolicVector g = t.shift - a.shift;
        bool ok = true;
        for (std::size_t i = 1; i < sub.size() && ok; ++i)
            ok = whole_set.count(Tile{sub[i].type, sub[i].shift + g}) > 0;
        if (ok) return g;
    }
    return std::nullopt;
}

namespace {

struct LevelCache {
    const SubstitutionSystem& sys;
    std::vector<std::vector<Patch>> patches;  // [k][j]
    std::vector<std::vector<TileSet>> sets;

    explicit LevelCache(const SubstitutionSystem& s) : sys(s) {}

    void ensure(unsigned k) {
        while (patches.size() <= k) {
            std::vector<Patch> lvl(sys.kappa());
            std::vector<TileSet> st(sys.kappa());
            for (std::size_t j = 0; j < sys.kappa(); ++j) {
                lvl[j] = patches.empty() ? Patch{Tile{static_cast<int>(j), sys.zero()}}
                                         : substitute(sys, patches.back()[j], 1);
                st[j] = TileSet(lvl[j].begin(), lvl[j].end());
            }
            patches.push_back(std::move(lvl));
            sets.push_back(std::move(st));
        }
    }
};

}  // namespace

Legality is_legal(const SubstitutionSystem& sys, const KSetCluster& c, unsigned k_max) {
    Patch p = to_patch(c);
    if (p.empty()) return {true, 0, -1};
    LevelCache cache(sys);
    for (unsigned k = 0; k <= k_max; ++k) {
        cache.ensure(k);
        for (std::size_t j = 0; j < sys.kappa(); ++j)
            if (find_translate(p, cache.patches[k][j], cache.sets[k][j])) return {true, k, static_cast<int>(j)};
    }
    return {};
}

std::optional<unsigned> special_rank(const SubstitutionSystem& sys, const Patch& p, unsigned k_max) {
    auto v = is_legal(sys, to_kset(p, sys.kappa()), k_max);
    if (!v.legal) return std::nullopt;
    return v.k;
}

std::vector<std::size_t> supertile_assign(const SubstitutionSystem& sys, const Seed& seed, const Patch& patch,
                                          unsigned k) {
    if (k == 0) {
        std::vector<std::size_t> id(patch.size());
        for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
        return id;
    }
    // generation history: parents[L][t] = index in level L-1
    std::vector<Patch> levels{{seed.tile}};
    std::vector<std::vector<std::size_t>> parents{{}};
    const std::size_t tile_cap = 4'000'000;
    for (unsigned L = 1;; ++L) {
        Patch next;
        std::vector<std::size_t> par;
        for (std::size_t t = 0; t < levels.back().size(); ++t) {
            const Tile& tile = levels.back()[t];
            SymbolicVector qx = sys.apply_Q(tile.shift);
            for (std::size_t i = 0; i < sys.kappa(); ++i)
                for (const auto& u : sys.digits[i][tile.type]) {
                    next.push_back({static_cast<int>(i), qx + u});
                    par.push_back(t);
                }
        }
        if (next.size() > tile_cap) throw RuntimeFailure("patch not traceable to the canonical fixed point");
        levels.push_back(std::move(next));
        parents.push_back(std::move(par));
        if (L < k || L % seed.N != 0) continue;

        std::unordered_map<Tile, std::size_t, TileHash> where;
        for (std::size_t t = 0; t < levels[L].size(); ++t) where.emplace(levels[L][t], t);
        bool all = std::all_of(patch.begin(), patch.end(), [&](const Tile& t) { return where.count(t) > 0; });
        if (!all) continue;

        std::vector<std::size_t> out;
        std::unordered_map<std::size_t, std::size_t> compact;
        for (const auto& t : patch) {
            std::size_t idx = where.at(t);
            for (unsigned s = 0; s < k; ++s) idx = parents[L - s][idx];
            auto it = compact.emplace(idx, compact.size()).first;
            out.push_back(it->second);
        }
        return out;
    }
}

std::vector<std::size_t> type_counts(const Patch& p, std::size_t kappa) {
    std::vector<std::size_t> c(kappa, 0);
    for (const auto& t : p) ++c.at(t.type);
    return c;
}

std::string serialize_patch(const SubstitutionSystem& sys, const Patch& p) {
    std::ostringstream os;
    os << "# tilescope-patch schema_version=1 system=" << sys.name << " dim=" << sys.dim() << " basis=";
    auto names = sys.basis->names();
    for (std::size_t k = 0; k < names.size(); ++k) os << (k ? "," : "") << names[k];
    os << "\n";
    char buf[64];
    for (const auto& t : p) {
        os << t.type + 1;
        for (std::size_t i = 0; i < sys.dim(); ++i) {
            os << " [";
            for (std::size_t k = 0; k < sys.basis_size(); ++k) os << (k ? ";" : "") << t.shift.at(i, k).get_str();
            os << "]";
        }
        os << " |";
        for (double x : sys.eval(t.shift)) {
            std::snprintf(buf, sizeof buf, " %.17g", x);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

Patch parse_patch(const SubstitutionSystem& sys, const std::string& text) {
    Patch p;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto where = [&] { return "patch line " + std::to_string(lineno); };
        std::istringstream ls(line);
        int type = 0;
        if (!(ls >> type) || type < 1 || type > static_cast<int>(sys.kappa()))
            throw SchemaError(where() + ": bad tile type");
        Tile t{type - 1, sys.zero()};
        for (std::size_t i = 0; i < sys.dim(); ++i) {
            std::string tok;
            if (!(ls >> tok) || tok.size() < 2 || tok.front() != '[' || tok.back() != ']')
                throw SchemaError(where() + ": expected [c;...] coordinate");
            std::string body = tok.substr(1, tok.size() - 2);
            std::size_t k = 0, start = 0;
            for (;;) {
                auto semi = body.find(';', start);
                if (k >= sys.basis_size()) throw SchemaError(where() + ": too many coefficients");
                t.shift.at(i, k++) = parse_rational(body.substr(start, semi - start));
                if (semi == std::string::npos) break;
                start = semi + 1;
            }
            if (k != sys.basis_size()) throw SchemaError(where() + ": coefficient count mismatch");
        }
        p.push_back(std::move(t));
    }
    return p;
}

}  // namespace tilescope
