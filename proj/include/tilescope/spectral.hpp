#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tilescope/analysis.hpp"
#include "tilescope/numberfield.hpp"
#include "tilescope/substitution.hpp"

namespace tilescope {

// ---------------------------------------------------------------------------
// Cylinder sets.  Grid cubes have side h = 2^-m inside the window
// [-2^m, 2^m)^d; a pattern alpha is the set of coloured cubes holding a point.

struct GridSpec {
    unsigned m = 2;
    double eta = 0;
    unsigned m0 = 0;
    double h() const { return std::ldexp(1.0, -static_cast<int>(m)); }
    double half_width() const { return std::ldexp(1.0, static_cast<int>(m)); }
};

// minimal pairwise distance; duplicate points are an error
double separation_constant(const std::vector<std::vector<double>>& pts);
unsigned grid_m0(double eta);
GridSpec make_grid(double eta, unsigned m);  // throws MathError when m < m0

// Finite piece of the fixed point, complete over F + window.
struct CylinderSample {
    Patch patch;
    std::vector<std::vector<double>> x;
    std::vector<int> colour;
    Window F;                  // translations probed
    double covered_radius = 0; // patch is complete over [-r, r)^d
    unsigned levels = 0;
    Seed seed;
};

// F = [-f, f)^d with f = f_half, or the largest box the patch allows (capped)
CylinderSample cylinder_sample(const SubstitutionSystem& sys, const TileGeometry& geo, unsigned levels, unsigned m,
                               double f_half = 0);

struct CylinderClass {
    std::size_t alpha = 0;                    // pattern index
    std::vector<std::vector<int>> cubes;      // cube index per point, first point first
    std::vector<int> colours;
    std::vector<std::vector<double>> offsets; // point - first point
    std::size_t first_point = 0;              // sample index of one occurrence's first point
    std::vector<double> probe;                // a translation realising the class
    std::vector<double> wiggle_lo, wiggle_hi; // translations t of the canonical rep
    double wiggle_volume = 0;
    std::size_t occurrences = 0;
    double freq = 0;     // occurrences per unit volume of F
    double measure = 0;  // share of F realising the class
};

struct CylinderSet {
    GridSpec grid;
    Window F;
    std::vector<CylinderClass> classes;  // sorted by decreasing measure
    std::size_t patterns = 0;
    double max_wiggle_volume = 0;
    bool wiggle_bound_ok = true;         // Vol(V) <= 2^{-md} for every class
    bool corner_probe_ok = true;         // rep + wiggle corners stay in the cubes (detailed classes)
    std::size_t sub_boxes = 0;
};

CylinderSet build_cylinders(const CylinderSample& sample, const GridSpec& grid);

// exact representative (first point at the origin)
KSetCluster class_representative(const SubstitutionSystem& sys, const CylinderSample& sample, const GridSpec& grid,
                                 const CylinderClass& c);

inline double cylinder_measure(const CylinderClass& c, double freq) { return c.wiggle_volume * freq; }

struct PartitionCheck {
    double total = 0;           // sum of class measures
    double literal_total = -1;  // sum Vol(V_j) * freq(G_j) with every occurrence counted; -1 = skipped
    double tolerance = 0.03;
    bool pass = false;
    std::vector<std::pair<std::size_t, double>> per_alpha;  // largest patterns first
};

PartitionCheck partition_check(const CylinderSample& sample, const CylinderSet& set, double tolerance = 0.03);

struct BirkhoffStep {
    double radius = 0;
    double vanhove = 0;
    double mean = 0;
    double spread = 0;  // max - min over the probe offsets
};

struct BirkhoffCurve {
    std::size_t alpha = 0;
    double target = 0;  // sum of the class measures of alpha
    std::vector<BirkhoffStep> steps;
    std::vector<std::pair<std::size_t, double>> tail;  // (k0, tail sum)
};

// occurrences of G_j whose first tile lies in h + F_n, F_n = [-r_n, r_n)^d
BirkhoffCurve birkhoff_cylinder_estimate(const SubstitutionSystem& sys, const TileGeometry& geo,
                                         const CylinderSample& sample, const CylinderSet& set, std::size_t alpha,
                                         unsigned steps = 4, unsigned probes = 32);

// ---------------------------------------------------------------------------
// Non-mixing bound.

struct MixingPoint {
    unsigned n = 0;
    unsigned level = 0;
    std::size_t pair_count = 0;
    std::size_t single_count = 0;
    double ratio = 0;
};

struct MixingBound {
    bool available = false;
    double delta = 0;
    unsigned k0 = 0;
    int ell = -1;
    int host = -1;  // type i with {T_ell, T_ell + z} in omega^k0(T_i)
    std::vector<MixingPoint> curve;
    bool pass = false;
    std::string note;
};

MixingBound mixing_overlap_bound(const SubstitutionSystem& sys, const TileGeometry& geo, const SymbolicVector& z,
                                 unsigned n_max = 4, std::size_t tile_budget = 200000);

// ---------------------------------------------------------------------------
// Eigenvalues.

struct Residue {
    unsigned n = 0;
    double value = 0;   // distance to the nearest integer, max over z
    bool exact = false; // all pairings reduced to rationals
};

struct ResidueSequence {
    std::vector<Residue> values;
    bool truncated = false;
    std::string note;
};

// s_n = max_z || <Q^n z, alpha> ||, n = 1..N
ResidueSequence eigenvalue_residues(const SubstitutionSystem& sys, const SymbolicVector& alpha,
                                    const std::vector<SymbolicVector>& xi, unsigned N);

enum class EigenStatus { ExactPass, NumericPass, Fail };
const char* to_string(EigenStatus s);

struct EigenvalueVerdict {
    SymbolicVector alpha;
    EigenStatus status = EigenStatus::Fail;
    unsigned n0 = 0;           // ExactPass: zero from here on
    double rho = 0, C = 0;     // NumericPass fit
    double fit_residual = 0;
    unsigned fail_n = 0;       // Fail: first offending n
    double fail_residue = 0;
    bool period_ok = true;
    std::vector<std::string> period_violations;
    ResidueSequence residues;
};

EigenvalueVerdict eigenvalue_test(const SubstitutionSystem& sys, const SymbolicVector& alpha,
                                  const std::vector<SymbolicVector>& xi, const std::vector<SymbolicVector>& periods,
                                  unsigned N);

struct AlphaFamily {
    std::vector<AlgebraicScalar> theta;
    bool family = false;
    bool vacuous = false;
    bool undecided = false;
};

AlphaFamily pisot_family_of_alpha(const SubstitutionSystem& sys, const SymbolicVector& alpha);

// distinct eigenvalues of Q as declared
std::vector<AlgebraicScalar> expansion_eigenvalues(const SubstitutionSystem& sys);

enum class MixingVerdict { WeaklyMixing, NotWeaklyMixing, Inconclusive };
const char* to_string(MixingVerdict v);

struct WeakMixingReport {
    MixingVerdict verdict = MixingVerdict::Inconclusive;
    bool totally_non_pisot = false;
    std::vector<std::string> reasons;
    std::vector<std::string> warnings;
};

WeakMixingReport weak_mixing_verdict(const SubstitutionSystem& sys, const std::vector<EigenvalueVerdict>& eigen,
                                     const std::optional<FlcScan>& flc, const std::optional<RigidityVerdict>& rigidity);

std::string residues_csv(const EigenvalueVerdict& v);
std::string mixing_csv(const MixingBound& b);

}  // namespace tilescope
