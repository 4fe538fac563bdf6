#include "sfc/nlm.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "sfc/parallel.hpp"

namespace sfc {

NlmOperator::NlmOperator(Image guidance, PatchConfig cfg)
    : guidance_(std::move(guidance)), cfg_(cfg) {
    const int n = guidance_.pixel_count();
    const int side = cfg_.patch_side();
    patch_len_ = side * side * guidance_.channels;
    patches_.assign(static_cast<size_t>(n) * patch_len_, 0.0);
    parallel_for(0, n, [&](int i) {
        detail::extract_patch(guidance_, i, cfg_.patch_radius,
                              &patches_[static_cast<size_t>(i) * patch_len_]);
    });
    offset_weight_ = detail::patch_offset_weights(cfg_);
}

double NlmOperator::patch_distance_sq(int i, int j) const {
    const double* pi = &patches_[static_cast<size_t>(i) * patch_len_];
    const double* pj = &patches_[static_cast<size_t>(j) * patch_len_];
    const int ch = guidance_.channels;
    double dist_sq = 0.0;
    size_t k = 0;
    for (size_t o = 0; o < offset_weight_.size(); ++o) {
        const double gw = offset_weight_[o];
        for (int c = 0; c < ch; ++c, ++k) {
            const double diff = pi[k] - pj[k];
            dist_sq += gw * (diff * diff);
        }
    }
    return dist_sq;
}

void NlmOperator::apply_rows(const double* const* in, double** out, int nvec,
                             bool with_denominator, double* denominator) const {
    const int w = guidance_.width, h = guidance_.height, r = cfg_.search_radius;
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            double den = 0.0;
            for (int v = 0; v < nvec; ++v) out[v][i] = 0.0;
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const int j = yy * w + xx;
                    const double dx = x - xx, dy = y - yy;
                    const double wij = detail::gaussian(dx * dx + dy * dy, cfg_.sigma_x) *
                                       detail::gaussian(patch_distance_sq(i, j), cfg_.sigma_n);
                    for (int v = 0; v < nvec; ++v) out[v][i] += wij * in[v][j];
                    den += wij;
                }
            }
            if (with_denominator) denominator[i] = den;
        }
    });
}

FilterSums NlmOperator::apply(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != pixel_count())
        throw std::invalid_argument("NlmOperator::apply: size mismatch");
    FilterSums sums;
    sums.numerator.assign(v.size(), 0.0);
    sums.denominator.assign(v.size(), 0.0);
    const double* in = v.data();
    double* out = sums.numerator.data();
    apply_rows(&in, &out, 1, true, sums.denominator.data());
    return sums;
}

std::vector<std::vector<double>> NlmOperator::apply_block(
    const std::vector<std::vector<double>>& vs) const {
    std::vector<std::vector<double>> outs(vs.size(),
                                          std::vector<double>(static_cast<size_t>(pixel_count())));
    std::vector<const double*> in;
    std::vector<double*> out;
    for (size_t v = 0; v < vs.size(); ++v) {
        if (static_cast<int>(vs[v].size()) != pixel_count())
            throw std::invalid_argument("NlmOperator::apply_block: size mismatch");
        in.push_back(vs[v].data());
        out.push_back(outs[v].data());
    }
    if (!vs.empty()) apply_rows(in.data(), out.data(), static_cast<int>(vs.size()), false, nullptr);
    return outs;
}

const std::vector<double>& NlmOperator::degree() const {
    if (degree_.empty()) {
        const std::vector<double> ones(static_cast<size_t>(pixel_count()), 1.0);
        degree_ = apply(ones).denominator;
    }
    return degree_;
}

} // namespace sfc
