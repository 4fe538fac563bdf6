#include "sfc/cut_operator.hpp"

#include <stdexcept>

namespace sfc {

std::vector<std::vector<double>> CutOperator::apply_w_block(
    const std::vector<std::vector<double>>& vs) const {
    std::vector<std::vector<double>> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(apply_w(v));
    return out;
}

// --- dense ------------------------------------------------------------------

std::vector<double> DenseOperator::apply_w(const std::vector<double>& v) const {
    count_applications(1);
    return dense_apply(*A_, v);
}

// --- bilateral grid -----------------------------------------------------------

GridOperator::GridOperator(Image guidance, GridConfig cfg)
    : guidance_(std::move(guidance)), cfg_(cfg) {
    if (guidance_.channels != 1)
        throw std::invalid_argument("GridOperator: guidance must be grayscale");
    // one homogeneous-only pass gives the degree vector
    degree_ = grid_apply(guidance_, {}, cfg_).denominator;
    count_applications(1);
}

std::vector<double> GridOperator::apply_w(const std::vector<double>& v) const {
    count_applications(1);
    return std::move(grid_apply(guidance_, {v}, cfg_).numerators[0]);
}

std::vector<std::vector<double>> GridOperator::apply_w_block(
    const std::vector<std::vector<double>>& vs) const {
    if (vs.empty()) return {};
    count_applications(vs.size());
    return std::move(grid_apply(guidance_, vs, cfg_).numerators);
}

// --- windowed brute force -----------------------------------------------------

BruteBilateralOperator::BruteBilateralOperator(Image guidance, AffinityConfig cfg)
    : guidance_(std::move(guidance)), cfg_(cfg) {
    if (guidance_.channels != 1)
        throw std::invalid_argument("BruteBilateralOperator: guidance must be grayscale");
    if (cfg_.radius <= 0)
        throw std::invalid_argument("BruteBilateralOperator: requires a finite radius");
    const std::vector<double> ones(static_cast<size_t>(guidance_.pixel_count()), 1.0);
    degree_ = brute_bilateral(guidance_, ones, cfg_).denominator;
    count_applications(1);
}

std::vector<double> BruteBilateralOperator::apply_w(const std::vector<double>& v) const {
    count_applications(1);
    return std::move(brute_bilateral(guidance_, v, cfg_).numerator);
}

// --- non-local means ----------------------------------------------------------

NlmCutOperator::NlmCutOperator(Image guidance, PatchConfig cfg)
    : nlm_(std::move(guidance), cfg) {
    nlm_.degree(); // computed up front; one application
    count_applications(1);
}

std::vector<double> NlmCutOperator::apply_w(const std::vector<double>& v) const {
    count_applications(1);
    return std::move(nlm_.apply(v).numerator);
}

std::vector<std::vector<double>> NlmCutOperator::apply_w_block(
    const std::vector<std::vector<double>>& vs) const {
    if (vs.empty()) return {};
    count_applications(vs.size());
    return nlm_.apply_block(vs);
}

// --- principal-submatrix restriction -------------------------------------------

RestrictedOperator::RestrictedOperator(const CutOperator& inner, std::vector<int> indices)
    : inner_(inner), indices_(std::move(indices)) {
    std::vector<double> indicator(static_cast<size_t>(inner_.size()), 0.0);
    for (int idx : indices_) indicator[static_cast<size_t>(idx)] = 1.0;
    degree_ = restrict_to(inner_.apply_w(indicator));
    count_applications(1);
}

std::vector<double> RestrictedOperator::extend(const std::vector<double>& v) const {
    std::vector<double> full(static_cast<size_t>(inner_.size()), 0.0);
    for (size_t s = 0; s < indices_.size(); ++s) full[static_cast<size_t>(indices_[s])] = v[s];
    return full;
}

std::vector<double> RestrictedOperator::restrict_to(const std::vector<double>& full) const {
    std::vector<double> v(indices_.size());
    for (size_t s = 0; s < indices_.size(); ++s) v[s] = full[static_cast<size_t>(indices_[s])];
    return v;
}

std::vector<double> RestrictedOperator::apply_w(const std::vector<double>& v) const {
    if (v.size() != indices_.size())
        throw std::invalid_argument("RestrictedOperator: size mismatch");
    count_applications(1);
    return restrict_to(inner_.apply_w(extend(v)));
}

std::vector<std::vector<double>> RestrictedOperator::apply_w_block(
    const std::vector<std::vector<double>>& vs) const {
    std::vector<std::vector<double>> full;
    full.reserve(vs.size());
    for (const auto& v : vs) full.push_back(extend(v));
    count_applications(vs.size());
    auto applied = inner_.apply_w_block(full);
    std::vector<std::vector<double>> out;
    out.reserve(applied.size());
    for (const auto& a : applied) out.push_back(restrict_to(a));
    return out;
}

} // namespace sfc
