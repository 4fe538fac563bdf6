#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sfc/image.hpp"
#include "sfc/spectral_types.hpp"

namespace sfc {

/// Gaussian pixel-affinity parameters (spatial sigma, intensity sigma,
/// Chebyshev connection radius). radius <= 0 means unbounded.
struct AffinityConfig {
    double sigma_x = 2.0;   // spatial std-dev, pixels
    double sigma_i = 0.1;   // range std-dev, [0,1] intensity units
    int radius = 0;         // Chebyshev window radius; <= 0 = unbounded
    bool self_weight_included = true;
};

/// Patch-affinity parameters for the conditioned cut. Patch side is
/// 2*patch_radius+1; search window is Chebyshev search_radius.
struct PatchConfig {
    int patch_radius = 2;
    double sigma_n = 0.3;   // patch-distance std-dev
    double sigma_x = 2.0;   // spatial std-dev, pixels
    int search_radius = 10;
    bool gaussian_patch_weighting = true;

    int patch_side() const { return 2 * patch_radius + 1; }
    // center-emphasis width for the gaussian-weighted patch distance
    double sigma_p() const { return (patch_radius > 1 ? patch_radius : 1) / 2.0; }
};

/// Explicit symmetric weight matrix plus degree vector; the desk-scale oracle
/// every fast path is verified against. Row-major storage, w[i*n+j].
struct DenseAffinity {
    int n = 0;
    std::vector<double> w;
    std::vector<double> d;

    double at(int i, int j) const { return w[static_cast<size_t>(i) * n + j]; }
};

/// Eq-2 style weight: exp(-|pi-pj|^2 / 2 sigma_x^2) * exp(-(Ii-Ij)^2 / 2 sigma_i^2),
/// zero outside a finite Chebyshev radius. Coordinates are (col, row) = (x, y).
double pixel_weight(const AffinityConfig& cfg, int xi, int yi, int xj, int yj,
                    double intensity_i, double intensity_j);

/// Patch weight: spatial Gaussian times exp(-|Ni-Nj|^2 / 2 sigma_n^2), where
/// the patch distance sums squared per-channel, per-offset differences over
/// the full (2*patch_radius+1)^2 window with clamp-to-edge at borders,
/// optionally center-weighted by exp(-|offset|^2 / 2 sigma_p^2).
/// Zero outside the Chebyshev search_radius.
double patch_weight(const PatchConfig& cfg, const Image& img, int i, int j);

/// Maximum pixel count accepted by the dense oracle builders.
inline constexpr int kDenseOracleCap = 4096;

/// Dense W from pixel weights (grayscale guidance required).
DenseAffinity build_dense_affinity(const Image& img, const AffinityConfig& cfg,
                                   int pixel_cap = kDenseOracleCap);
/// Dense W from patch weights (gray or RGB guidance).
DenseAffinity build_dense_affinity(const Image& img, const PatchConfig& cfg,
                                   int pixel_cap = kDenseOracleCap);

/// Exact W v in fixed ascending-j summation order.
std::vector<double> dense_apply(const DenseAffinity& A, const std::vector<double>& v);

struct FilterSums {
    std::vector<double> numerator;   // per pixel: sum_j w_ij v_j
    std::vector<double> denominator; // per pixel: sum_j w_ij
};

/// Windowed brute-force bilateral sums (finite radius required); identical to
/// dense_apply of the radius-truncated W, summand for summand.
FilterSums brute_bilateral(const Image& guidance, const std::vector<double>& v,
                           const AffinityConfig& cfg);

/// Windowed brute-force non-local-means sums over the search window.
FilterSums brute_nlm(const Image& guidance, const std::vector<double>& v,
                     const PatchConfig& cfg);

/// Keeps each off-diagonal unordered pair with probability keep_ratio (both
/// symmetric entries together); diagonal always kept; degrees recomputed.
DenseAffinity random_sparsify(const DenseAffinity& A, double keep_ratio,
                              std::uint64_t seed);

/// Full dense eigendecomposition of N = D^{-1/2} W D^{-1/2}; top-k pairs,
/// mu descending, y = D^{-1/2} z, lambda = 1 - mu.
EigenResult dense_ncut_solve(const DenseAffinity& A, int k);

/// y^T (D - W) y / y^T D y.
double rayleigh_quotient(const DenseAffinity& A, const std::vector<double>& y);

namespace detail {

// Shared by the oracle and the NLM operator so their weights agree bit for bit.
inline double gaussian(double dist_sq, double sigma) {
    return std::exp(-dist_sq / (2.0 * sigma * sigma));
}

/// Clamp-to-edge patch of pixel i: full (2r+1)^2 window, offset-major with
/// channels innermost; out writes (2r+1)^2 * channels values.
void extract_patch(const Image& img, int i, int patch_radius, double* out);

/// Per-offset center-emphasis weights (all ones when disabled).
std::vector<double> patch_offset_weights(const PatchConfig& cfg);

} // namespace detail

} // namespace sfc
