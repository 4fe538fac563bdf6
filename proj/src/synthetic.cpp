#include "sfc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sfc {

namespace {

// Box-Muller on explicit 53-bit uniforms so the stream is stable across
// standard libraries.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
    double next() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = unit(), u2 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
    bool have_ = false;
    double cached_ = 0.0;
};

} // namespace

Image two_region_image(int w, int h, double lo, double hi, double noise_sigma,
                       std::uint64_t seed) {
    Image img(w, h, 1);
    GaussianSource noise(seed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = x < w / 2 ? lo : hi;
            if (noise_sigma > 0.0) v += noise_sigma * noise.next();
            img.at(y, x) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

LabelMap two_region_truth(int w, int h) {
    LabelMap labels(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) labels.at(y, x) = x < w / 2 ? 0 : 1;
    return labels;
}

Image texture_flat_image(int w, int h, double mean, double amplitude, int cell,
                         double noise_sigma, std::uint64_t seed) {
    Image img(w, h, 1);
    GaussianSource noise(seed);
    if (cell < 1) cell = 1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v;
            if (y < h / 2) {
                const int phase = ((x / cell) + (y / cell)) % 2;
                v = phase ? mean + amplitude : mean - amplitude;
            } else {
                v = mean;
            }
            if (noise_sigma > 0.0) v += noise_sigma * noise.next();
            img.at(y, x) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

LabelMap texture_flat_truth(int w, int h) {
    LabelMap labels(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) labels.at(y, x) = y < h / 2 ? 0 : 1;
    return labels;
}

} // namespace sfc
