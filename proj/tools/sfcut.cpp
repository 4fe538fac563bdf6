// sfcut: spectral image segmentation by edge-preserving filtering.
//
// Subcommands:
//   ncut       dense-oracle normalized cut (desk-scale images only)
//   fast-ncut  bilateral-grid normalized cut
//   cond-ncut  patch-based conditioned cut via non-local means
//   filter     standalone filter application
//   compare    dense oracle vs fast path with machine-readable deltas
//   bench      speedup harness over synthetic images

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "sfc/bilateral_grid.hpp"
#include "sfc/cut_operator.hpp"
#include "sfc/eigensolver.hpp"
#include "sfc/errors.hpp"
#include "sfc/image.hpp"
#include "sfc/nlm.hpp"
#include "sfc/parallel.hpp"
#include "sfc/segmenter.hpp"
#include "sfc/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sfc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 1;
constexpr int kExitIo = 2;
constexpr int kExitDegenerate = 3;

struct CommonOpts {
    std::string input;
    std::string out_dir;
    int segments = 2;
    int eigvecs = 0;
    double sigma_spatial = 0.0;      // 0: derive from the fraction
    double sigma_spatial_frac = 0.0; // 0: default 1/32
    double sigma_range = 0.1;
    int radius = 15;
    int patch_radius = 2;
    double sigma_patch = 0.3;
    int search_radius = 10;
    std::string discretize = "kmeans";
    std::uint64_t seed = 0;
    std::string metrics_json;
    bool deterministic = false;

    double resolve_sigma_spatial(int height) const {
        if (sigma_spatial > 0.0) return sigma_spatial;
        const double frac = sigma_spatial_frac > 0.0 ? sigma_spatial_frac : 1.0 / 32.0;
        return std::max(1.0, frac * height);
    }
};

void add_sigma_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--sigma-spatial", o.sigma_spatial, "spatial sigma in pixels");
    cmd->add_option("--sigma-spatial-frac", o.sigma_spatial_frac,
                    "spatial sigma as a fraction of image height (default 1/32)");
    cmd->add_option("--sigma-range", o.sigma_range, "intensity sigma");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_flag("--deterministic", o.deterministic,
                  "single-threaded, byte-reproducible outputs; timings reported as null");
}

void add_segment_flags(CLI::App* cmd, CommonOpts& o, bool patch_flags, bool radius_flag) {
    cmd->add_option("--input", o.input, "input image (PGM/PPM/PNG)")->required();
    cmd->add_option("--out-dir", o.out_dir, "output directory")->required();
    cmd->add_option("--segments", o.segments, "number of segments")
        ->required()
        ->check(CLI::Range(2, 256));
    cmd->add_option("--eigvecs", o.eigvecs, "eigenvectors for the embedding (default: segments)");
    cmd->add_option("--discretize", o.discretize, "kmeans | twoway")
        ->check(CLI::IsMember({"kmeans", "twoway"}));
    cmd->add_option("--metrics-json", o.metrics_json, "metrics output path");
    if (radius_flag)
        cmd->add_option("--radius", o.radius, "connection radius (dense pipeline)");
    if (patch_flags) {
        cmd->add_option("--patch-radius", o.patch_radius, "patch radius");
        cmd->add_option("--sigma-patch", o.sigma_patch, "patch-distance sigma");
        cmd->add_option("--search-radius", o.search_radius, "search window radius");
    }
    add_sigma_flags(cmd, o);
}

// All writes go through a temp file and a rename so a failure leaves no
// partial output behind.
template <class WriteFn>
void atomic_write(const std::string& path, WriteFn&& fn) {
    const std::string tmp = path + ".tmp";
    fn(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError(path + ": rename failed: " + ec.message());
    }
}

void write_text_atomic(const std::string& path, const std::string& text) {
    atomic_write(path, [&](const std::string& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError(tmp + ": cannot open for writing");
        out << text;
        if (!out) throw IoError(tmp + ": write failed");
    });
}

json null_timings() {
    return json{{"build", nullptr}, {"solve", nullptr}, {"discretize", nullptr},
                {"total", nullptr}};
}

// Fixed-schema metrics document; absent quantities stay null, keys never vanish.
json metrics_skeleton(const std::string& command) {
    json j;
    j["command"] = command;
    j["image"] = nullptr;
    j["config"] = json{{"segments", nullptr},      {"eigvecs", nullptr},
                       {"sigma_spatial", nullptr}, {"sigma_range", nullptr},
                       {"radius", nullptr},        {"patch_radius", nullptr},
                       {"sigma_patch", nullptr},   {"search_radius", nullptr},
                       {"discretize", nullptr},    {"seed", nullptr},
                       {"deterministic", nullptr}, {"method", nullptr},
                       {"iterations", nullptr},    {"sizes", nullptr},
                       {"repeats", nullptr}};
    j["lambda"] = nullptr;
    j["iterations"] = nullptr;
    j["filter_applications"] = nullptr;
    j["timing_ms"] = null_timings();
    j["ncut_cost"] = nullptr;
    j["compare"] = json{{"lambda_delta", nullptr}, {"operator_rel_error", nullptr},
                        {"cost_ratio", nullptr},   {"label_agreement", nullptr},
                        {"speedup", nullptr}};
    return j;
}

json image_json(const Image& img) {
    return json{{"width", img.width}, {"height", img.height}, {"channels", img.channels}};
}

void fill_config(json& j, const CommonOpts& o, double sigma_spatial) {
    j["config"]["segments"] = o.segments;
    j["config"]["eigvecs"] = o.eigvecs > 0 ? o.eigvecs : o.segments;
    j["config"]["sigma_spatial"] = sigma_spatial;
    j["config"]["sigma_range"] = o.sigma_range;
    j["config"]["radius"] = o.radius;
    j["config"]["patch_radius"] = o.patch_radius;
    j["config"]["sigma_patch"] = o.sigma_patch;
    j["config"]["search_radius"] = o.search_radius;
    j["config"]["discretize"] = o.discretize;
    j["config"]["seed"] = o.seed;
    j["config"]["deterministic"] = o.deterministic;
}

void fill_timings(json& j, const StageTimings& t, bool deterministic) {
    if (deterministic) {
        j["timing_ms"] = null_timings();
    } else {
        j["timing_ms"] = json{{"build", t.build_ms},
                              {"solve", t.solve_ms},
                              {"discretize", t.discretize_ms},
                              {"total", t.total_ms}};
    }
}

Image overlay_boundaries(const Image& input, const LabelMap& labels) {
    Image rgb(input.width, input.height, 3);
    for (int i = 0; i < input.pixel_count(); ++i)
        for (int c = 0; c < 3; ++c)
            rgb.data[static_cast<size_t>(i) * 3 + c] =
                input.channels == 3 ? input.data[static_cast<size_t>(i) * 3 + c]
                                    : input.data[static_cast<size_t>(i)];
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const bool boundary = (x > 0 && labels.at(y, x) != labels.at(y, x - 1)) ||
                                  (y > 0 && labels.at(y, x) != labels.at(y - 1, x));
            if (boundary) {
                rgb.at(y, x, 0) = 1.0;
                rgb.at(y, x, 1) = 0.0;
                rgb.at(y, x, 2) = 0.0;
            }
        }
    }
    return rgb;
}

void write_segmentation_outputs(const Image& input, const SegmentationResult& res,
                                const CommonOpts& o) {
    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);

    atomic_write((dir / "labels.png").string(), [&](const std::string& tmp) {
        save_labelmap_png(res.labels, tmp);
    });

    const int k = res.labels.num_segments();
    for (int s = 0; s < k; ++s) {
        Image mask(res.labels.width, res.labels.height, 1);
        for (size_t i = 0; i < res.labels.labels.size(); ++i)
            mask.data[i] = res.labels.labels[i] == s ? 1.0 : 0.0;
        const std::string name = "mask_" + std::to_string(s) + ".pgm";
        atomic_write((dir / name).string(),
                     [&](const std::string& tmp) { save_image(mask, tmp); });
    }

    atomic_write((dir / "overlay.png").string(), [&](const std::string& tmp) {
        save_image(overlay_boundaries(input, res.labels), tmp);
    });
}

int run_segment(const std::string& command, Pipeline pipeline, const CommonOpts& o) {
    if (o.deterministic) set_thread_override(1);
    const Image input = load_image(o.input);

    SegmentConfig cfg;
    cfg.pipeline = pipeline;
    cfg.num_segments = o.segments;
    cfg.num_eigvecs = o.eigvecs;
    cfg.discretization =
        o.discretize == "twoway" ? Discretization::recursive_twoway : Discretization::kmeans;
    cfg.seed = o.seed;
    const double sx = o.resolve_sigma_spatial(input.height);
    cfg.affinity.sigma_x = sx;
    cfg.affinity.sigma_i = o.sigma_range;
    cfg.affinity.radius = pipeline == Pipeline::dense_ncut ? o.radius : 0;
    cfg.patch.patch_radius = o.patch_radius;
    cfg.patch.sigma_n = o.sigma_patch;
    cfg.patch.sigma_x = sx;
    cfg.patch.search_radius = o.search_radius;

    const SegmentationResult res = segment(input, cfg);
    write_segmentation_outputs(input, res, o);

    json j = metrics_skeleton(command);
    j["image"] = image_json(input);
    fill_config(j, o, sx);
    j["lambda"] = res.eigen.lambda;
    j["iterations"] = res.eigen.iterations;
    j["filter_applications"] = res.filter_applications;
    fill_timings(j, res.timings, o.deterministic);
    j["ncut_cost"] = res.ncut_cost;

    const std::string metrics_path =
        o.metrics_json.empty() ? (fs::path(o.out_dir) / "metrics.json").string() : o.metrics_json;
    write_text_atomic(metrics_path, j.dump(2) + "\n");

    std::cout << command << ": " << o.segments << " segments, lambda_2 = "
              << (res.eigen.lambda.size() > 1 ? res.eigen.lambda[1] : 0.0)
              << ", ncut_cost = " << res.ncut_cost << ", filterings = "
              << res.filter_applications << "\n";
    return kExitOk;
}

// --- filter ---------------------------------------------------------------

struct FilterOpts : CommonOpts {
    std::string method = "bilateral";
    std::string output;
    int iterations = 1;
};

int run_filter(const FilterOpts& o) {
    if (o.deterministic) set_thread_override(1);
    const Image input = load_image(o.input);
    const double sx = o.resolve_sigma_spatial(input.height);

    const Image gray = to_grayscale(input);
    std::vector<std::vector<double>> channels(static_cast<size_t>(input.channels));
    for (int c = 0; c < input.channels; ++c) {
        channels[static_cast<size_t>(c)].resize(static_cast<size_t>(input.pixel_count()));
        for (int i = 0; i < input.pixel_count(); ++i)
            channels[static_cast<size_t>(c)][static_cast<size_t>(i)] =
                input.data[static_cast<size_t>(i) * input.channels + c];
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t applications = 0;
    for (int it = 0; it < o.iterations; ++it) {
        if (o.method == "bilateral") {
            GridConfig cfg;
            cfg.sigma_x = sx;
            cfg.sigma_i = o.sigma_range;
            GridApplyResult r = grid_apply(gray, channels, cfg);
            applications += channels.size();
            for (size_t c = 0; c < channels.size(); ++c)
                for (size_t i = 0; i < channels[c].size(); ++i)
                    channels[c][i] = r.numerators[c][i] / std::max(r.denominator[i], 1e-12);
        } else if (o.method == "bilateral-brute") {
            AffinityConfig cfg;
            cfg.sigma_x = sx;
            cfg.sigma_i = o.sigma_range;
            cfg.radius = o.radius;
            for (auto& ch : channels) {
                FilterSums sums = brute_bilateral(gray, ch, cfg);
                ++applications;
                for (size_t i = 0; i < ch.size(); ++i)
                    ch[i] = sums.numerator[i] / std::max(sums.denominator[i], 1e-12);
            }
        } else { // nlm
            PatchConfig cfg;
            cfg.patch_radius = o.patch_radius;
            cfg.sigma_n = o.sigma_patch;
            cfg.sigma_x = sx;
            cfg.search_radius = o.search_radius;
            NlmOperator op(input, cfg);
            const auto& den = op.degree();
            auto nums = op.apply_block(channels);
            applications += channels.size();
            for (size_t c = 0; c < channels.size(); ++c)
                for (size_t i = 0; i < channels[c].size(); ++i)
                    channels[c][i] = nums[c][i] / std::max(den[i], 1e-12);
        }
    }
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    Image out(input.width, input.height, input.channels);
    for (int c = 0; c < input.channels; ++c)
        for (int i = 0; i < input.pixel_count(); ++i)
            out.data[static_cast<size_t>(i) * input.channels + c] =
                std::clamp(channels[static_cast<size_t>(c)][static_cast<size_t>(i)], 0.0, 1.0);
    atomic_write(o.output, [&](const std::string& tmp) { save_image(out, tmp); });

    if (!o.metrics_json.empty()) {
        json j = metrics_skeleton("filter");
        j["image"] = image_json(input);
        fill_config(j, o, sx);
        j["config"]["method"] = o.method;
        j["config"]["iterations"] = o.iterations;
        j["filter_applications"] = applications;
        if (!o.deterministic)
            j["timing_ms"] = json{{"build", nullptr}, {"solve", nullptr},
                                  {"discretize", nullptr}, {"total", wall}};
        write_text_atomic(o.metrics_json, j.dump(2) + "\n");
    }
    std::cout << "filter " << o.method << ": " << o.iterations << " iteration(s), "
              << applications << " filterings\n";
    return kExitOk;
}

// --- compare ----------------------------------------------------------------

struct CompareOpts : CommonOpts {
    std::string candidate = "fast";
};

int run_compare(const CompareOpts& o) {
    if (o.deterministic) set_thread_override(1);
    const Image input = load_image(o.input);
    const Image gray = to_grayscale(input);
    const double sx = o.resolve_sigma_spatial(input.height);
    const int n = gray.pixel_count();
    if (n > kDenseOracleCap)
        throw std::invalid_argument("compare: image exceeds the dense oracle cap of " +
                                    std::to_string(kDenseOracleCap) + " pixels");

    SegmentConfig dense_cfg;
    dense_cfg.pipeline = Pipeline::dense_ncut;
    dense_cfg.num_segments = o.segments;
    dense_cfg.num_eigvecs = o.eigvecs;
    dense_cfg.seed = o.seed;
    dense_cfg.affinity.sigma_x = sx;
    dense_cfg.affinity.sigma_i = o.sigma_range;
    dense_cfg.affinity.radius = 0; // unbounded oracle
    dense_cfg.discretization =
        o.discretize == "twoway" ? Discretization::recursive_twoway : Discretization::kmeans;

    SegmentConfig fast_cfg = dense_cfg;
    fast_cfg.pipeline = o.candidate == "dense" ? Pipeline::dense_ncut : Pipeline::fast_ncut;

    const auto td0 = std::chrono::steady_clock::now();
    const SegmentationResult rd = segment(input, dense_cfg);
    const double dense_wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - td0).count();

    const auto tf0 = std::chrono::steady_clock::now();
    const SegmentationResult rf = segment(input, fast_cfg);
    const double fast_wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tf0).count();

    // eigenvalue deltas over the shared prefix
    std::vector<double> deltas;
    const size_t kk = std::min(rd.eigen.lambda.size(), rf.eigen.lambda.size());
    for (size_t j = 0; j < kk; ++j)
        deltas.push_back(std::abs(rd.eigen.lambda[j] - rf.eigen.lambda[j]));

    // operator relative error on seeded probe vectors
    DenseOperator dense_op(build_dense_affinity(gray, dense_cfg.affinity));
    std::unique_ptr<CutOperator> fast_op;
    if (o.candidate == "dense") {
        fast_op = std::make_unique<DenseOperator>(build_dense_affinity(gray, dense_cfg.affinity));
    } else {
        GridConfig gcfg;
        gcfg.sigma_x = sx;
        gcfg.sigma_i = o.sigma_range;
        fast_op = std::make_unique<GridOperator>(gray, gcfg);
    }
    double max_rel = 0.0;
    std::mt19937_64 rng(o.seed + 12345);
    for (int probe = 0; probe < 10; ++probe) {
        std::vector<double> v(static_cast<size_t>(n));
        for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        const auto dv = dense_op.apply_w(v);
        const auto fv = fast_op->apply_w(v);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            num += (dv[static_cast<size_t>(i)] - fv[static_cast<size_t>(i)]) *
                   (dv[static_cast<size_t>(i)] - fv[static_cast<size_t>(i)]);
            den += dv[static_cast<size_t>(i)] * dv[static_cast<size_t>(i)];
        }
        max_rel = std::max(max_rel, std::sqrt(num / den));
    }

    json j = metrics_skeleton("compare");
    j["image"] = image_json(input);
    fill_config(j, o, sx);
    j["lambda"] = rf.eigen.lambda;
    j["iterations"] = rf.eigen.iterations;
    j["filter_applications"] = rf.filter_applications;
    fill_timings(j, rf.timings, o.deterministic);
    j["ncut_cost"] = rf.ncut_cost;
    j["compare"]["lambda_delta"] = deltas;
    j["compare"]["operator_rel_error"] = max_rel;
    j["compare"]["cost_ratio"] = rd.ncut_cost > 0 ? rf.ncut_cost / rd.ncut_cost
                                                  : (rf.ncut_cost > 0 ? INFINITY : 1.0);
    j["compare"]["label_agreement"] = label_agreement(rd.labels, rf.labels);
    if (!o.deterministic) j["compare"]["speedup"] = dense_wall / fast_wall;

    const std::string out = o.metrics_json.empty() ? "compare.json" : o.metrics_json;
    write_text_atomic(out, j.dump(2) + "\n");

    std::cout << "compare: |dlambda_2| = " << (deltas.size() > 1 ? deltas[1] : 0.0)
              << ", operator_rel_error = " << max_rel
              << ", agreement = " << label_agreement(rd.labels, rf.labels)
              << ", speedup = " << dense_wall / fast_wall << "\n";
    return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchOpts {
    std::string sizes = "64,128,256";
    int repeats = 3;
    int radius = 15;
    double sigma_range = 0.1;
    std::string csv;
    std::uint64_t seed = 0;
    bool deterministic = false;
};

int run_bench(const BenchOpts& o) {
    if (o.deterministic) set_thread_override(1);
    std::vector<int> sizes;
    {
        std::stringstream ss(o.sizes);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const int s = std::stoi(tok);
            if (s < 8) throw std::invalid_argument("bench: size too small: " + tok);
            sizes.push_back(s);
        }
    }
    if (sizes.empty()) throw std::invalid_argument("bench: no sizes given");

    std::ostringstream csv;
    csv << "size,pipeline,wall_ms,filter_apps,lambda2\n";

    for (int size : sizes) {
        const Image img = two_region_image(size, size, 0.2, 0.8, 0.02, o.seed + size);
        const double sx = std::max(1.0, size / 32.0);

        std::vector<double> brute_walls, grid_walls;
        std::uint64_t brute_apps = 0, grid_apps = 0;
        int brute_iters = 0, grid_iters = 0;
        double brute_lambda2 = 0.0, grid_lambda2 = 0.0;

        for (int rep = 0; rep < o.repeats; ++rep) {
            SolverConfig scfg;
            scfg.k = 1;
            scfg.seed = o.seed;

            {
                AffinityConfig acfg;
                acfg.sigma_x = sx;
                acfg.sigma_i = o.sigma_range;
                acfg.radius = o.radius;
                const auto t0 = std::chrono::steady_clock::now();
                BruteBilateralOperator op(img, acfg);
                const EigenResult res = ncut_eigs(op, scfg);
                const double wall =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t0)
                        .count();
                brute_walls.push_back(wall);
                brute_apps = res.filter_applications + 1; // + degree pass
                brute_iters = res.iterations;
                brute_lambda2 = res.lambda[1];
                csv << size << ",windowed," << wall << "," << brute_apps << "," << brute_lambda2
                    << "\n";
            }
            {
                GridConfig gcfg;
                gcfg.sigma_x = sx;
                gcfg.sigma_i = o.sigma_range;
                const auto t0 = std::chrono::steady_clock::now();
                GridOperator op(img, gcfg);
                const EigenResult res = ncut_eigs(op, scfg);
                const double wall =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t0)
                        .count();
                grid_walls.push_back(wall);
                grid_apps = res.filter_applications + 1;
                grid_iters = res.iterations;
                grid_lambda2 = res.lambda[1];
                csv << size << ",grid," << wall << "," << grid_apps << "," << grid_lambda2
                    << "\n";
            }
        }

        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            return v[v.size() / 2];
        };
        const double mb = median(brute_walls), mg = median(grid_walls);
        std::cout << "size " << size << ": windowed " << mb << " ms (" << brute_apps
                  << " apps, " << brute_iters << " iters, lambda2 " << brute_lambda2 << "), grid "
                  << mg << " ms (" << grid_apps << " apps, " << grid_iters
                  << " iters, lambda2 " << grid_lambda2 << "), speedup " << mb / mg << "x\n";
    }

    if (!o.csv.empty()) write_text_atomic(o.csv, csv.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral graph cut via edge-preserving filtering"};
    app.require_subcommand(1);

    CommonOpts seg_opts;
    FilterOpts filter_opts;
    CompareOpts compare_opts;
    BenchOpts bench_opts;

    CLI::App* ncut = app.add_subcommand("ncut", "dense-oracle normalized cut");
    add_segment_flags(ncut, seg_opts, /*patch=*/false, /*radius=*/true);

    CLI::App* fast = app.add_subcommand("fast-ncut", "bilateral-grid normalized cut");
    add_segment_flags(fast, seg_opts, /*patch=*/false, /*radius=*/false);

    CLI::App* cond = app.add_subcommand("cond-ncut", "patch-conditioned cut via NLM");
    add_segment_flags(cond, seg_opts, /*patch=*/true, /*radius=*/false);

    CLI::App* filter = app.add_subcommand("filter", "standalone filtering");
    filter->add_option("--input", filter_opts.input, "input image")->required();
    filter->add_option("--output", filter_opts.output, "output image")->required();
    filter->add_option("--method", filter_opts.method, "bilateral | bilateral-brute | nlm")
        ->check(CLI::IsMember({"bilateral", "bilateral-brute", "nlm"}));
    filter->add_option("--iterations", filter_opts.iterations, "repeated applications")
        ->check(CLI::PositiveNumber);
    filter->add_option("--radius", filter_opts.radius, "window radius (brute method)");
    filter->add_option("--patch-radius", filter_opts.patch_radius, "patch radius");
    filter->add_option("--sigma-patch", filter_opts.sigma_patch, "patch sigma");
    filter->add_option("--search-radius", filter_opts.search_radius, "search radius");
    filter->add_option("--metrics-json", filter_opts.metrics_json, "metrics output path");
    add_sigma_flags(filter, filter_opts);

    CLI::App* compare = app.add_subcommand("compare", "dense oracle vs fast path");
    compare->add_option("--input", compare_opts.input, "input image")->required();
    compare->add_option("--segments", compare_opts.segments, "number of segments")
        ->required()
        ->check(CLI::Range(2, 256));
    compare->add_option("--eigvecs", compare_opts.eigvecs, "eigenvectors");
    compare->add_option("--discretize", compare_opts.discretize, "kmeans | twoway")
        ->check(CLI::IsMember({"kmeans", "twoway"}));
    compare->add_option("--candidate", compare_opts.candidate,
                        "candidate pipeline: fast | dense (self-check)")
        ->check(CLI::IsMember({"fast", "dense"}));
    compare->add_option("--metrics-json", compare_opts.metrics_json, "metrics output path");
    add_sigma_flags(compare, compare_opts);

    CLI::App* bench = app.add_subcommand("bench", "speedup harness");
    bench->add_option("--sizes", bench_opts.sizes, "comma-separated image sizes");
    bench->add_option("--repeats", bench_opts.repeats, "timings per cell")
        ->check(CLI::PositiveNumber);
    bench->add_option("--radius", bench_opts.radius, "windowed baseline radius");
    bench->add_option("--sigma-range", bench_opts.sigma_range, "intensity sigma");
    bench->add_option("--csv", bench_opts.csv, "CSV output path");
    bench->add_option("--seed", bench_opts.seed, "RNG seed");
    bench->add_flag("--deterministic", bench_opts.deterministic, "single-threaded");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadArgs;
    }

    try {
        if (app.got_subcommand(ncut)) return run_segment("ncut", Pipeline::dense_ncut, seg_opts);
        if (app.got_subcommand(fast))
            return run_segment("fast-ncut", Pipeline::fast_ncut, seg_opts);
        if (app.got_subcommand(cond))
            return run_segment("cond-ncut", Pipeline::cond_ncut, seg_opts);
        if (app.got_subcommand(filter)) return run_filter(filter_opts);
        if (app.got_subcommand(compare)) return run_compare(compare_opts);
        if (app.got_subcommand(bench)) return run_bench(bench_opts);
        std::cerr << "no subcommand given\n";
        return kExitBadArgs;
    } catch (const DegenerateGraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    }
}
