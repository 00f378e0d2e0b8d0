#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "tilescope/geometry.hpp"
#include "tilescope/substitution.hpp"

namespace tilescope {

// Every patch count is audited against L_P(F) * V_min <= Vol(F).
struct CountAudit {
    std::atomic<std::size_t> checks{0};
    std::atomic<std::size_t> violations{0};
};
CountAudit& count_audit();
// records one count; returns false on a violation
bool audit_count(std::size_t count, double window_volume, double v_min);

// Support boxes and volumes of the prototiles, the data every count needs.
struct TileGeometry {
    SupportBoxes boxes;            // relative to the tile position
    std::vector<double> volumes;
    double v_min = 0;
    std::string volume_source;     // "declared", "raster" or "unit"
};
TileGeometry tile_geometry(const SubstitutionSystem& sys);

// L_P(F, T): translates g with g + P a sub-patch of T and the support boxes of
// g + P inside F. With `covered`, T must be complete over F^{+diam P}.
std::size_t patch_count(const SubstitutionSystem& sys, const TileGeometry& geo, const Patch& P, const Window& F,
                        const Patch& T, const Window* covered = nullptr);

struct CurvePoint {
    unsigned level = 0;
    std::size_t count = 0;
    double volume = 0;
    double ratio = 0;
};

struct FrequencyCurve {
    int start_type = 0;
    std::vector<CurvePoint> points;
    double estimate = 0;
    double error = 0;
    bool cauchy = true;  // successive differences shrink
};

struct FrequencyEstimate {
    std::vector<FrequencyCurve> curves;
    double value = 0;
    double error = 0;
    bool type_independent = true;
};

// c_P from L_P(omega^n(T_i)) / (|det Q|^n Vol(A_i)), n = 1..n_levels
FrequencyEstimate patch_frequency(const SubstitutionSystem& sys, const TileGeometry& geo, const Patch& P,
                                  unsigned n_levels);

// right PF eigenvector with sum r_i Vol(A_i) = 1
std::vector<double> tile_frequencies(const SubstitutionSystem& sys, const TileGeometry& geo);

struct ReturnVectorSet {
    std::vector<SymbolicVector> vectors;  // sorted, excludes 0, closed under negation
    unsigned level = 0;
    double radius = 0;
    bool legal_only = true;
};

// same-type displacements within `radius` inside omega^level(T_j), all j
ReturnVectorSet return_vectors(const SubstitutionSystem& sys, unsigned level, double radius);

enum class LocalComplexity { FlcEvidence, IlcEvidence, Inconclusive };
const char* to_string(LocalComplexity c);

struct FlcLevel {
    unsigned level = 0;
    std::size_t configurations = 0;  // distinct (type, type, displacement)
    double min_gap = 0;              // between distinct displacements of one type pair
    bool exact_irrational = false;   // some close pair differs by a free-symbol vector
};

struct FlcScan {
    LocalComplexity verdict = LocalComplexity::Inconclusive;
    std::vector<FlcLevel> levels;
};

FlcScan flc_scan(const SubstitutionSystem& sys, unsigned levels, double radius, double epsilon = 1e-6);

struct PeriodCandidate {
    SymbolicVector t;
    double matched_window = 0;  // side of the box on which the match was verified
};

// translations t, |t| <= window/2, with patch and patch + t agreeing on the
// central box of side `window`
std::vector<PeriodCandidate> detect_periods(const SubstitutionSystem& sys, unsigned levels, double window);

struct MeyerScan {
    std::vector<unsigned> levels;
    std::vector<double> min_gap;
    std::string evidence;  // "for", "against" or "inconclusive"
};

MeyerScan meyer_scan(const SubstitutionSystem& sys, const std::vector<ReturnVectorSet>& xi_by_level, double window);
double min_difference_gap(const std::vector<SymbolicVector>& xi, const CoordinateBasis& basis, double window);

enum class RigidityStatus { Rigid, NotRigid, Inapplicable, Undetermined };
const char* to_string(RigidityStatus s);

struct RigidityVerdict {
    RigidityStatus status = RigidityStatus::Undetermined;
    std::size_t qdim = 0;
    std::size_t bound = 0;
    std::vector<SymbolicVector> witness;
    bool experimental = false;
    std::string reason;
};

RigidityVerdict rigidity_check(const SubstitutionSystem& sys, const ReturnVectorSet& xi);

std::string curve_csv(const FrequencyEstimate& f);

// all unordered index pairs with |x_a - x_b| <= r (grid buckets)
std::vector<std::pair<std::size_t, std::size_t>> close_pairs(const std::vector<std::vector<double>>& pts, double r);

}  // namespace tilescope
