#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilescope/substitution.hpp"

namespace tilescope {

// Dense occupancy grid; cell c covers origin + h*[c, c+1).
class RegionMask {
public:
    RegionMask() = default;
    RegionMask(double h, std::vector<double> origin, std::vector<int> shape);

    double resolution() const { return h_; }
    const std::vector<double>& origin() const { return origin_; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t dim() const { return shape_.size(); }
    std::size_t cell_count() const { return cells_.size(); }

    bool get(std::size_t flat) const { return cells_[flat] != 0; }
    void set(std::size_t flat, bool v) { cells_[flat] = v; }
    std::size_t flat_index(const std::vector<int>& c) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::vector<double> cell_center(std::size_t flat) const;
    // cell containing x, or -1 outside the grid
    long long locate(const std::vector<double>& x) const;
    bool contains(const std::vector<double>& x) const;

    std::size_t count() const;
    double volume() const;
    std::size_t boundary_count() const;  // occupied cells with an unoccupied face neighbour
    double boundary_volume() const;

    const std::vector<std::uint8_t>& data() const { return cells_; }
    std::vector<std::uint8_t>& data() { return cells_; }

private:
    double h_ = 0;
    std::vector<double> origin_;
    std::vector<int> shape_;
    std::vector<std::size_t> stride_;
    std::vector<std::uint8_t> cells_;
};

// chessboard distance (in cells) from every cell to the occupied set; cells
// beyond max_steps get max_steps + 1
std::vector<int> chessboard_distance(const RegionMask& m, int max_steps);

// sup-norm Hausdorff distance between two masks on the same grid
double hausdorff(const RegionMask& a, const RegionMask& b);

struct IfsResult {
    std::vector<RegionMask> masks;
    std::vector<double> hausdorff_steps;  // successive-iteration distances
    unsigned iterations = 0;
    double claimed_accuracy = 0;
    std::vector<std::vector<double>> hull_lo, hull_hi;  // bounding boxes of the attractor
};

// A_j <- Q^{-1} U_i (D_ij + A_i), rasterised at h. iters = 0 runs until the
// Hausdorff step drops below h (capped at 200).
IfsResult solve_adjoint_ifs(const SubstitutionSystem& sys, double h, unsigned iters = 0);

struct VolumeReport {
    std::vector<double> volumes;           // absolute, left PF eigenvector scaled
    std::vector<double> eigen_ratios;      // volumes / volumes[0]
    std::vector<double> mask_volumes;      // raster, when masks were given
    std::vector<double> mask_error_bars;   // boundary cells * h^d
    double max_ratio_disagreement = 0;     // relative, eigen vs raster ratios
    std::string scale_source;              // "declared", "raster" or "unit"
    std::vector<std::string> notes;
};

VolumeReport prototile_volumes(const SubstitutionSystem& sys, const std::vector<RegionMask>* masks = nullptr);

struct BoundaryScan {
    std::vector<double> resolutions;
    std::vector<std::vector<double>> boundary_volume;  // [resolution][prototile]
    bool decreasing = false;
};

BoundaryScan boundary_scan(const SubstitutionSystem& sys, double h, unsigned iters = 0);
BoundaryScan boundary_scan(const std::vector<std::vector<RegionMask>>& masks_by_resolution);

struct Representability {
    double overlap_fraction = 0;
    double gap_fraction = 0;
    double tolerance = 0.02;
    bool pass = false;
    std::size_t tiles_used = 0;
};

Representability representability_check(const SubstitutionSystem& sys, const Patch& patch,
                                         const std::vector<RegionMask>& masks, const Window& window, double h,
                                         double tolerance = 0.02);
// patch = omega^{N*levels}(seed) clipped around the window
Representability representability_check(const SubstitutionSystem& sys, unsigned levels, const Window& window,
                                         double h, double tolerance = 0.02);

// Sup-norm thickening (r > 0 dilates) / shrinking (r < 0 erodes).
Window erode_dilate(const Window& w, double r, bool dilate);
RegionMask erode_dilate(const RegionMask& m, double r, bool dilate);

double vanhove_ratio(const Window& w, double r);
double vanhove_ratio(const RegionMask& m, double r);

struct ColouredPoint {
    int colour = 0;
    std::vector<double> x;
};
using ColouredSet = std::vector<ColouredPoint>;

inline const double kRubberCap = 0.70710678118654752440;

struct MetricResult {
    double value = 0;
    bool capped = false;
    bool empty_input = false;
};

MetricResult rubber_metric_detail(const ColouredSet& a, const ColouredSet& b, double tol = 1e-13);
double rubber_metric(const ColouredSet& a, const ColouredSet& b);

ColouredSet to_coloured(const SubstitutionSystem& sys, const Patch& p);

// Exports (atomic writes).
void write_pgm(const RegionMask& m, const std::string& path);
void write_mask_svg(const std::vector<RegionMask>& masks, const std::string& path);
void write_patch_svg(const SubstitutionSystem& sys, const Patch& p, const std::vector<RegionMask>& masks,
                     const std::string& path);

// temp file + rename
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace tilescope
