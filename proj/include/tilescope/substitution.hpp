#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tilescope/linalg.hpp"
#include "tilescope/numberfield.hpp"

namespace tilescope {

struct EigenDecl {
    AlgebraicScalar value;
    int multiplicity = 1;
};

struct ExpansionMap {
    std::size_t dim = 0;
    std::vector<std::vector<Scalar>> entries;  // row major d x d
    std::vector<EigenDecl> eigen_decl;
    std::vector<std::vector<double>> numeric;
};

// Tile types are 0-based internally; configs and reports use 1-based labels.
struct Tile {
    int type = 0;
    SymbolicVector shift;

    bool operator==(const Tile& o) const { return type == o.type && shift == o.shift; }
    bool operator<(const Tile& o) const { return type != o.type ? type < o.type : shift < o.shift; }
};

struct TileHash {
    std::size_t operator()(const Tile& t) const { return t.shift.hash() * 31 + static_cast<std::size_t>(t.type); }
};

using Patch = std::vector<Tile>;
using TileSet = std::unordered_set<Tile, TileHash>;

// Delone kappa-set: one point list per colour.
struct KSetCluster {
    std::vector<std::vector<SymbolicVector>> colours;

    std::size_t size() const;
};

KSetCluster to_kset(const Patch& p, std::size_t kappa);
Patch to_patch(const KSetCluster& c);

class SubstitutionSystem {
public:
    std::string name;
    std::shared_ptr<const CoordinateBasis> basis;
    ExpansionMap Q;
    std::vector<std::string> labels;
    std::vector<SymbolicVector> anchors;
    // digits[i][j] = D_ij: type-i children of a type-j tile sit at Qx + u
    std::vector<std::vector<std::vector<SymbolicVector>>> digits;
    std::vector<std::optional<Scalar>> declared_volumes;

    // derived by finalize()
    IntMatrix S;
    std::optional<unsigned> primitive_exponent;
    RationalMatrix q_action;
    RationalMatrix q_inverse_action;
    std::vector<std::string> warnings;

    // checks digit distinctness and builds the derived data; throws MathError
    void finalize();

    std::size_t dim() const { return Q.dim; }
    std::size_t kappa() const { return labels.size(); }
    std::size_t basis_size() const { return basis->size(); }
    bool primitive() const { return primitive_exponent.has_value(); }

    SymbolicVector zero() const { return SymbolicVector(dim(), basis_size()); }
    SymbolicVector apply_Q(const SymbolicVector& v) const;
    SymbolicVector apply_Q_inverse(const SymbolicVector& v) const;
    std::vector<double> eval(const SymbolicVector& v) const { return v.evaluate(*basis); }
    double max_digit_norm() const;  // sup norm over all digits, numeric
    double q_norm() const;          // induced sup norm of Q

private:
    struct Sparse {
        std::size_t row, col;
        Rational value;
    };
    std::vector<Sparse> q_sparse_;
    std::vector<Sparse> q_inv_sparse_;
};

// exact inverse of the coordinate-space action
SymbolicVector apply_sparse(const RationalMatrix& m, const SymbolicVector& v);

struct ValidationReport {
    bool expansive = false;
    std::optional<unsigned> primitivity;
    double pf_value = 0;
    double abs_det_q = 0;
    double pf_relative_error = 0;
    std::vector<double> q_eigen_moduli;
    std::vector<std::string> warnings;
};

// throws MathError when Q is not expansive or eigen declarations disagree
ValidationReport validate_system(const SubstitutionSystem& sys);

struct Window {
    std::vector<double> lo, hi;  // half-open [lo, hi)

    bool contains(const std::vector<double>& x) const;
    double volume() const;
    std::size_t dim() const { return lo.size(); }
};

// Bit budget for rational coefficients in exact patches.
inline constexpr std::size_t kDefaultBitBudget = 2048;

// omega^k(P) in exact arithmetic. With a window, tiles whose descendants cannot
// reach window^{+margin} are dropped early.
Patch substitute(const SubstitutionSystem& sys, const Patch& p, unsigned k, const Window* window = nullptr,
                 double margin = 0.0, std::size_t bit_budget = kDefaultBitBudget);

struct FloatTile {
    int type;
    std::vector<double> x;
};

// float fallback for deep patches, duplicates merged at 1e-9
std::vector<FloatTile> substitute_float(const SubstitutionSystem& sys, const Patch& p, unsigned k,
                                        const Window* window = nullptr, double margin = 0.0);

KSetCluster kset_substitute(const SubstitutionSystem& sys, const KSetCluster& c, unsigned k);

// Bounding boxes of the attractors A_j (relative to the tile position), from
// the box-valued version of the adjoint IFS.
struct SupportBoxes {
    std::vector<std::vector<double>> lo, hi;
};
SupportBoxes support_boxes(const SubstitutionSystem& sys);

struct Seed {
    Tile tile;
    unsigned N = 1;
};

// T_j + s with T_j + s in omega^N(T_j + s) and the origin inside the support
// of T_j + s, so the nested patches exhaust R^d; preference: smallest N, then
// smallest |s|. Interiority is tested by coverage of a box about the origin
// when prototile volumes are declared.
Seed fixed_point_seed(const SubstitutionSystem& sys, unsigned n_max = 6);

// omega^{N*levels}(seed)
Patch fixed_point_patch(const SubstitutionSystem& sys, const Seed& seed, unsigned levels,
                        const Window* window = nullptr, double margin = 0.0);

KSetCluster generating_set(const SubstitutionSystem& sys);

struct Legality {
    bool legal = false;
    unsigned k = 0;
    int colour = -1;
};

// Is C a translate of a sub-cluster of Phi^k({x_j}) for some k <= k_max?
Legality is_legal(const SubstitutionSystem& sys, const KSetCluster& c, unsigned k_max);

// minimal k with P a translate of a sub-patch of omega^k(T_j); nullopt = Infinity(k_max)
std::optional<unsigned> special_rank(const SubstitutionSystem& sys, const Patch& p, unsigned k_max);

// For each tile of `patch` (a sub-patch of the canonical fixed point), the index
// of its level-k ancestor. Ancestors are numbered in order of first appearance.
std::vector<std::size_t> supertile_assign(const SubstitutionSystem& sys, const Seed& seed, const Patch& patch,
                                          unsigned k);

// does sub occur in whole as a translate?  translation returned
std::optional<SymbolicVector> find_translate(const Patch& sub, const Patch& whole, const TileSet& whole_set);

std::vector<std::size_t> type_counts(const Patch& p, std::size_t kappa);

// line format: "<type> [c;c;..] ... | f f" (1-based type)
std::string serialize_patch(const SubstitutionSystem& sys, const Patch& p);
Patch parse_patch(const SubstitutionSystem& sys, const std::string& text);

}  // namespace tilescope
