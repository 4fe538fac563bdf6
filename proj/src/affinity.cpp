#include "sfc/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "sfc/parallel.hpp"

namespace sfc {

namespace detail {

// Clamp-to-edge patch extraction: full (2r+1)^2 window, offset-major with
// channels innermost. Out-of-image offsets repeat the nearest edge pixel.
void extract_patch(const Image& img, int i, int patch_radius, double* out) {
    const int w = img.width, h = img.height, ch = img.channels;
    const int y = i / w, x = i % w;
    size_t k = 0;
    for (int dy = -patch_radius; dy <= patch_radius; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -patch_radius; dx <= patch_radius; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            for (int c = 0; c < ch; ++c) out[k++] = img.at(yy, xx, c);
        }
    }
}

std::vector<double> patch_offset_weights(const PatchConfig& cfg) {
    const int side = cfg.patch_side();
    std::vector<double> g(static_cast<size_t>(side) * side, 1.0);
    if (cfg.gaussian_patch_weighting) {
        const double sp = cfg.sigma_p();
        size_t k = 0;
        for (int dy = -cfg.patch_radius; dy <= cfg.patch_radius; ++dy)
            for (int dx = -cfg.patch_radius; dx <= cfg.patch_radius; ++dx)
                g[k++] = gaussian(static_cast<double>(dx * dx + dy * dy), sp);
    }
    return g;
}

} // namespace detail

namespace {

using detail::gaussian;

void check_cap(int n, int cap) {
    if (n > cap)
        throw std::invalid_argument("dense oracle cap exceeded: " + std::to_string(n) + " > " +
                                    std::to_string(cap) + " pixels (oracle is desk scale only)");
}

} // namespace

double pixel_weight(const AffinityConfig& cfg, int xi, int yi, int xj, int yj,
                    double intensity_i, double intensity_j) {
    if (cfg.radius > 0) {
        const int cheb = std::max(std::abs(xi - xj), std::abs(yi - yj));
        if (cheb > cfg.radius) return 0.0;
    }
    const double dx = xi - xj, dy = yi - yj;
    const double di = intensity_i - intensity_j;
    return gaussian(dx * dx + dy * dy, cfg.sigma_x) * gaussian(di * di, cfg.sigma_i);
}

double patch_weight(const PatchConfig& cfg, const Image& img, int i, int j) {
    const int w = img.width;
    const int xi = i % w, yi = i / w, xj = j % w, yj = j / w;
    const int cheb = std::max(std::abs(xi - xj), std::abs(yi - yj));
    if (cheb > cfg.search_radius) return 0.0;

    const int side = cfg.patch_side();
    const size_t plen = static_cast<size_t>(side) * side * img.channels;
    std::vector<double> pi(plen), pj(plen);
    detail::extract_patch(img, i, cfg.patch_radius, pi.data());
    detail::extract_patch(img, j, cfg.patch_radius, pj.data());
    const auto g = detail::patch_offset_weights(cfg);

    double dist_sq = 0.0;
    size_t k = 0;
    for (size_t o = 0; o < g.size(); ++o) {
        const double gw = g[o];
        for (int c = 0; c < img.channels; ++c, ++k) {
            const double diff = pi[k] - pj[k];
            dist_sq += gw * (diff * diff);
        }
    }
    const double dx = xi - xj, dy = yi - yj;
    return gaussian(dx * dx + dy * dy, cfg.sigma_x) * gaussian(dist_sq, cfg.sigma_n);
}

namespace {

// Symmetric fill: weight computed once per unordered pair (i < j) and
// mirrored, diagonal set explicitly, degrees summed in ascending-j order.
template <class WeightFn>
DenseAffinity build_dense(int n, double diag, WeightFn&& weight) {
    DenseAffinity A;
    A.n = n;
    A.w.assign(static_cast<size_t>(n) * n, 0.0);
    parallel_for(0, n, [&](int i) {
        double* row = &A.w[static_cast<size_t>(i) * n];
        row[i] = diag;
        for (int j = i + 1; j < n; ++j) row[j] = weight(i, j);
    });
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            A.w[static_cast<size_t>(j) * n + i] = A.w[static_cast<size_t>(i) * n + j];
    A.d.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = &A.w[static_cast<size_t>(i) * n];
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += row[j];
        A.d[static_cast<size_t>(i)] = sum;
    }
    return A;
}

} // namespace

DenseAffinity build_dense_affinity(const Image& img, const AffinityConfig& cfg, int pixel_cap) {
    if (img.channels != 1)
        throw std::invalid_argument("pixel-weight affinity requires a grayscale image");
    const int n = img.pixel_count();
    check_cap(n, pixel_cap);
    const int w = img.width;
    return build_dense(n, cfg.self_weight_included ? 1.0 : 0.0, [&](int i, int j) {
        return pixel_weight(cfg, i % w, i / w, j % w, j / w,
                            img.data[static_cast<size_t>(i)], img.data[static_cast<size_t>(j)]);
    });
}

DenseAffinity build_dense_affinity(const Image& img, const PatchConfig& cfg, int pixel_cap) {
    const int n = img.pixel_count();
    check_cap(n, pixel_cap);
    return build_dense(n, 1.0, [&](int i, int j) { return patch_weight(cfg, img, i, j); });
}

std::vector<double> dense_apply(const DenseAffinity& A, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != A.n)
        throw std::invalid_argument("dense_apply: size mismatch");
    std::vector<double> out(static_cast<size_t>(A.n), 0.0);
    parallel_for(0, A.n, [&](int i) {
        const double* row = &A.w[static_cast<size_t>(i) * A.n];
        double acc = 0.0;
        for (int j = 0; j < A.n; ++j) acc += row[j] * v[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = acc;
    });
    return out;
}

FilterSums brute_bilateral(const Image& guidance, const std::vector<double>& v,
                           const AffinityConfig& cfg) {
    if (guidance.channels != 1)
        throw std::invalid_argument("brute_bilateral: guidance must be grayscale");
    if (static_cast<int>(v.size()) != guidance.pixel_count())
        throw std::invalid_argument("brute_bilateral: size mismatch");
    if (cfg.radius <= 0)
        throw std::invalid_argument("brute_bilateral: unbounded radius (use dense_apply)");

    const int w = guidance.width, h = guidance.height, r = cfg.radius;
    FilterSums sums;
    sums.numerator.assign(v.size(), 0.0);
    sums.denominator.assign(v.size(), 0.0);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            const double gi = guidance.data[static_cast<size_t>(i)];
            double num = 0.0, den = 0.0;
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const int j = yy * w + xx;
                    const double wij =
                        pixel_weight(cfg, x, y, xx, yy, gi, guidance.data[static_cast<size_t>(j)]);
                    num += wij * v[static_cast<size_t>(j)];
                    den += wij;
                }
            }
            sums.numerator[static_cast<size_t>(i)] = num;
            sums.denominator[static_cast<size_t>(i)] = den;
        }
    });
    return sums;
}

FilterSums brute_nlm(const Image& guidance, const std::vector<double>& v, const PatchConfig& cfg) {
    if (static_cast<int>(v.size()) != guidance.pixel_count())
        throw std::invalid_argument("brute_nlm: size mismatch");
    const int w = guidance.width, h = guidance.height, r = cfg.search_radius;
    FilterSums sums;
    sums.numerator.assign(v.size(), 0.0);
    sums.denominator.assign(v.size(), 0.0);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            double num = 0.0, den = 0.0;
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const int j = yy * w + xx;
                    const double wij = patch_weight(cfg, guidance, i, j);
                    num += wij * v[static_cast<size_t>(j)];
                    den += wij;
                }
            }
            sums.numerator[static_cast<size_t>(i)] = num;
            sums.denominator[static_cast<size_t>(i)] = den;
        }
    });
    return sums;
}

DenseAffinity random_sparsify(const DenseAffinity& A, double keep_ratio, std::uint64_t seed) {
    if (keep_ratio <= 0.0 || keep_ratio > 1.0)
        throw std::invalid_argument("random_sparsify: keep_ratio must be in (0, 1]");
    DenseAffinity out = A;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < A.n; ++i) {
        for (int j = i + 1; j < A.n; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u >= keep_ratio) {
                out.w[static_cast<size_t>(i) * A.n + j] = 0.0;
                out.w[static_cast<size_t>(j) * A.n + i] = 0.0;
            }
        }
    }
    for (int i = 0; i < A.n; ++i) {
        const double* row = &out.w[static_cast<size_t>(i) * A.n];
        double sum = 0.0;
        for (int j = 0; j < A.n; ++j) sum += row[j];
        out.d[static_cast<size_t>(i)] = sum;
    }
    return out;
}

EigenResult dense_ncut_solve(const DenseAffinity& A, int k) {
    if (k > A.n) throw std::invalid_argument("dense_ncut_solve: k > n");
    const int n = A.n;

    Eigen::VectorXd dinv_sqrt(n);
    for (int i = 0; i < n; ++i) dinv_sqrt[i] = 1.0 / std::sqrt(A.d[static_cast<size_t>(i)]);

    Eigen::MatrixXd N(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            N(i, j) = dinv_sqrt[i] * A.at(i, j) * dinv_sqrt[j];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_ncut_solve: eigendecomposition failed");

    EigenResult res;
    res.mode = SolveMode::normalized;
    for (int j = 0; j < k; ++j) {
        const int col = n - 1 - j; // Eigen sorts ascending
        const double mu = es.eigenvalues()[col];
        res.mu.push_back(mu);
        res.lambda.push_back(1.0 - mu);
        std::vector<double> z(static_cast<size_t>(n)), y(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            z[static_cast<size_t>(i)] = es.eigenvectors()(i, col);
            y[static_cast<size_t>(i)] = dinv_sqrt[i] * z[static_cast<size_t>(i)];
        }
        res.sym_vectors.push_back(std::move(z));
        res.vectors.push_back(std::move(y));
        res.converged.push_back(true);
    }
    return res;
}

double rayleigh_quotient(const DenseAffinity& A, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != A.n)
        throw std::invalid_argument("rayleigh_quotient: size mismatch");
    const std::vector<double> wy = dense_apply(A, y);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < A.n; ++i) {
        const size_t si = static_cast<size_t>(i);
        num += y[si] * (A.d[si] * y[si] - wy[si]);
        den += A.d[si] * y[si] * y[si];
    }
    if (den <= 0.0) throw std::invalid_argument("rayleigh_quotient: zero D-norm");
    return num / den;
}

} // namespace sfc
