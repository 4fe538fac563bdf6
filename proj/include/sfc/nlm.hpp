#pragma once

#include <vector>

#include "sfc/affinity.hpp"
#include "sfc/image.hpp"

namespace sfc {

/// Exact windowed non-local-means operator over a fixed guidance image.
/// Per-pixel patch tensors are extracted once (clamp-to-edge, channel
/// interleaved); weights are evaluated per application in the same summation
/// order as patch_weight, so the operator, brute_nlm and the dense patch
/// matrix agree summand for summand.
class NlmOperator {
public:
    NlmOperator(Image guidance, PatchConfig cfg);

    int pixel_count() const { return guidance_.pixel_count(); }
    const Image& guidance() const { return guidance_; }
    const PatchConfig& config() const { return cfg_; }

    /// Window sums of w_ij v_j and w_ij for one vector.
    FilterSums apply(const std::vector<double>& v) const;

    /// Same weights applied to several vectors in one pass.
    std::vector<std::vector<double>> apply_block(const std::vector<std::vector<double>>& vs) const;

    /// Row sums of the patch-weight matrix; computed once and cached.
    const std::vector<double>& degree() const;

    /// Patch-tensor distance term for (i, j); equals the exponent sum used by
    /// patch_weight bit for bit.
    double patch_distance_sq(int i, int j) const;

private:
    void apply_rows(const double* const* in, double** out, int nvec, bool with_denominator,
                    double* denominator) const;

    Image guidance_;
    PatchConfig cfg_;
    int patch_len_ = 0;                 // offsets * channels
    std::vector<double> patches_;       // n * patch_len, offset-major, channel inner
    std::vector<double> offset_weight_; // per spatial offset (all 1 when disabled)
    mutable std::vector<double> degree_; // lazily filled
};

} // namespace sfc
