#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "sfc/affinity.hpp"
#include "sfc/bilateral_grid.hpp"
#include "sfc/image.hpp"
#include "sfc/nlm.hpp"

namespace sfc {

/// Matrix-free contract for the affinity operator: apply_w(v) returns the
/// unnormalized W v, degree() the cached row sums W 1. The implied matrix must
/// be symmetric and elementwise nonnegative; every implementation here is by
/// construction. Applications are counted (one per vector).
class CutOperator {
public:
    virtual ~CutOperator() = default;

    virtual int size() const = 0;
    virtual std::vector<double> apply_w(const std::vector<double>& v) const = 0;
    virtual const std::vector<double>& degree() const = 0;

    /// Applies W to several vectors; overridden where one pass can carry
    /// multiple channels.
    virtual std::vector<std::vector<double>> apply_w_block(
        const std::vector<std::vector<double>>& vs) const;

    std::uint64_t filter_applications() const { return applications_.load(); }
    void reset_filter_applications() const { applications_.store(0); }

protected:
    void count_applications(std::uint64_t n) const { applications_.fetch_add(n); }

private:
    mutable std::atomic<std::uint64_t> applications_{0};
};

/// Exact dense oracle behind the operator contract.
class DenseOperator : public CutOperator {
public:
    explicit DenseOperator(std::shared_ptr<const DenseAffinity> A) : A_(std::move(A)) {}
    explicit DenseOperator(DenseAffinity A)
        : A_(std::make_shared<const DenseAffinity>(std::move(A))) {}

    int size() const override { return A_->n; }
    std::vector<double> apply_w(const std::vector<double>& v) const override;
    const std::vector<double>& degree() const override { return A_->d; }
    const DenseAffinity& affinity() const { return *A_; }

private:
    std::shared_ptr<const DenseAffinity> A_;
};

/// Bilateral-grid fast path (grayscale guidance, unbounded Gaussian kernel).
class GridOperator : public CutOperator {
public:
    GridOperator(Image guidance, GridConfig cfg);

    int size() const override { return guidance_.pixel_count(); }
    std::vector<double> apply_w(const std::vector<double>& v) const override;
    std::vector<std::vector<double>> apply_w_block(
        const std::vector<std::vector<double>>& vs) const override;
    const std::vector<double>& degree() const override { return degree_; }

    const Image& guidance() const { return guidance_; }
    const GridConfig& config() const { return cfg_; }

private:
    Image guidance_;
    GridConfig cfg_;
    std::vector<double> degree_;
};

/// Windowed brute-force bilateral operator (the no-grid baseline).
class BruteBilateralOperator : public CutOperator {
public:
    BruteBilateralOperator(Image guidance, AffinityConfig cfg);

    int size() const override { return guidance_.pixel_count(); }
    std::vector<double> apply_w(const std::vector<double>& v) const override;
    const std::vector<double>& degree() const override { return degree_; }

private:
    Image guidance_;
    AffinityConfig cfg_;
    std::vector<double> degree_;
};

/// Non-local-means operator for the conditioned cut.
class NlmCutOperator : public CutOperator {
public:
    NlmCutOperator(Image guidance, PatchConfig cfg);

    int size() const override { return nlm_.pixel_count(); }
    std::vector<double> apply_w(const std::vector<double>& v) const override;
    std::vector<std::vector<double>> apply_w_block(
        const std::vector<std::vector<double>>& vs) const override;
    const std::vector<double>& degree() const override { return nlm_.degree(); }

    const NlmOperator& nlm() const { return nlm_; }

private:
    NlmOperator nlm_;
};

/// Principal-submatrix restriction of another operator: (W|_S v) is the inner
/// apply on the zero-extended vector read back at S. Degrees within S come
/// from the indicator of S, not from the full-graph degrees.
class RestrictedOperator : public CutOperator {
public:
    RestrictedOperator(const CutOperator& inner, std::vector<int> indices);

    int size() const override { return static_cast<int>(indices_.size()); }
    std::vector<double> apply_w(const std::vector<double>& v) const override;
    std::vector<std::vector<double>> apply_w_block(
        const std::vector<std::vector<double>>& vs) const override;
    const std::vector<double>& degree() const override { return degree_; }

private:
    std::vector<double> extend(const std::vector<double>& v) const;
    std::vector<double> restrict_to(const std::vector<double>& full) const;

    const CutOperator& inner_;
    std::vector<int> indices_;
    std::vector<double> degree_;
};

} // namespace sfc
