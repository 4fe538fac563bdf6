#pragma once

#include <vector>

#include "sfc/affinity.hpp"
#include "sfc/image.hpp"

namespace sfc {

/// Grid sampling parameters. The lattice is the coarse scale the blur runs
/// at: cells are sigma/oversample wide per axis, so the Gaussian spans
/// `oversample` cells and the trilinear splat/slice interpolation error stays
/// well under the 5% operator-equivalence budget. sigma_x below one pixel and
/// sigma_i outside (0,1] are clamped before stepping.
struct GridConfig {
    double sigma_x = 2.0;
    double sigma_i = 0.1;

    static constexpr int oversample = 3;  // cells per kernel sigma
    static constexpr int pad = 2;         // cells each side
    static constexpr int blur_radius = 8; // covers ~2.5 sigma at oversample 3

    double spatial_step() const { return (sigma_x > 1.0 ? sigma_x : 1.0) / oversample; }
    double range_step() const {
        double s = sigma_i;
        if (s > 1.0) s = 1.0;
        if (s < 1e-6) s = 1e-6;
        return s / oversample;
    }
};

struct GridDims {
    int gx = 0, gy = 0, gr = 0;
    size_t cells() const {
        return static_cast<size_t>(gx) * gy * gr;
    }
};

/// Downsampled (x, y, range) lattice. value channels carry the vectors being
/// filtered, the homogeneous channel carries the splatted ones (the per-slice
/// weight mass the denominator is read from).
class BilateralGrid {
public:
    BilateralGrid(GridDims dims, int channels)
        : dims_(dims), channels_(channels),
          values_(static_cast<size_t>(channels) * dims.cells(), 0.0),
          homogeneous_(dims.cells(), 0.0) {}

    const GridDims& dims() const { return dims_; }
    int channels() const { return channels_; }

    size_t cell_index(int x, int y, int r) const {
        return (static_cast<size_t>(r) * dims_.gy + y) * dims_.gx + x;
    }

    double* channel(int c) { return values_.data() + static_cast<size_t>(c) * dims_.cells(); }
    const double* channel(int c) const {
        return values_.data() + static_cast<size_t>(c) * dims_.cells();
    }
    double* homogeneous() { return homogeneous_.data(); }
    const double* homogeneous() const { return homogeneous_.data(); }

    /// Total mass of the homogeneous channel (equals pixel count after splat).
    double homogeneous_mass() const;

private:
    GridDims dims_;
    int channels_;
    std::vector<double> values_;
    std::vector<double> homogeneous_;
};

GridDims grid_dims(int width, int height, const GridConfig& cfg);

/// Deposits every pixel's values (and 1 into the homogeneous channel) at its
/// continuous grid position with trilinear weights. Sequential, fixed order.
BilateralGrid splat(const Image& guidance, const std::vector<std::vector<double>>& values,
                    const GridConfig& cfg);

/// Separable 5-tap Gaussian along x, y and range; out-of-grid taps read zero.
void blur(BilateralGrid& grid);

struct GridApplyResult {
    std::vector<std::vector<double>> numerators; // one per value channel: ~W v
    std::vector<double> denominator;             // ~W 1
};

/// Trilinear readout at the identical positions used by splat.
GridApplyResult slice(const BilateralGrid& grid, const Image& guidance, const GridConfig& cfg);

/// splat -> blur -> slice. The guidance is always the original image; the
/// value vectors are arbitrary iterates.
GridApplyResult grid_apply(const Image& guidance, const std::vector<std::vector<double>>& values,
                           const GridConfig& cfg);

/// Normalized filter output numerator/denominator (denominator floored at 1e-12).
std::vector<double> grid_filter(const Image& guidance, const std::vector<double>& v,
                                const GridConfig& cfg);

} // namespace sfc
