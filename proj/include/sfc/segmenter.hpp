#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sfc/cut_operator.hpp"
#include "sfc/eigensolver.hpp"
#include "sfc/image.hpp"

namespace sfc {

enum class Pipeline { dense_ncut, fast_ncut, cond_ncut };
enum class Discretization { kmeans, recursive_twoway };

struct SegmentConfig {
    Pipeline pipeline = Pipeline::fast_ncut;
    AffinityConfig affinity;  // dense_ncut / fast_ncut
    PatchConfig patch;        // cond_ncut
    int num_segments = 2;
    int num_eigvecs = 0;      // 0 -> num_segments
    Discretization discretization = Discretization::kmeans;
    double ncut_stop_threshold = 0.06;
    int kmeans_restarts = 10;
    int kmeans_max_iterations = 100;
    bool row_normalize_embedding = false;
    int thresholds_per_split = 32;
    std::uint64_t seed = 0;
    double solver_tol = 1e-6;
    int solver_max_iterations = 300;

    int effective_eigvecs() const { return num_eigvecs > 0 ? num_eigvecs : num_segments; }
};

struct StageTimings {
    double build_ms = 0.0;
    double solve_ms = 0.0;
    double discretize_ms = 0.0;
    double total_ms = 0.0;
};

struct SegmentationResult {
    LabelMap labels;
    EigenResult eigen;
    double ncut_cost = 0.0;
    std::vector<double> per_threshold_costs; // twoway mode, first split
    StageTimings timings;
    std::uint64_t filter_applications = 0;
};

/// K-way normalized cut cost sum_s cut(s, V\s)/assoc(s, V); the W terms come
/// from one operator application per segment indicator.
double ncut_cost(const CutOperator& op, const LabelMap& labels);

struct TwowayResult {
    std::vector<int> labels; // 0/1 per element
    double best_cost = 0.0;
    std::vector<double> per_threshold_costs;
};

/// Threshold search over T quantiles of y; returns the partition minimizing
/// the two-way cut cost. Degenerate thresholds are skipped.
TwowayResult discretize_twoway(const std::vector<double>& y, const CutOperator& op,
                               int threshold_count);

/// Seeded k-means++ on the spectral embedding (rows across the eigenvectors).
std::vector<int> discretize_kmeans(const std::vector<std::vector<double>>& eigvecs,
                                   int k_seg, std::uint64_t seed, int restarts = 10,
                                   int max_iterations = 100, bool row_normalize = false);

/// Recursive two-way splitting on restricted operators. first_split, when
/// provided, supplies the already-computed full-graph eigenvector.
LabelMap recursive_split(const CutOperator& op, const SegmentConfig& cfg,
                         const EigenResult* first_split = nullptr,
                         std::vector<double>* first_split_costs = nullptr);

/// End-to-end pipeline: operator build, eigensolve, discretization, scoring.
SegmentationResult segment(const Image& img, const SegmentConfig& cfg);

/// Fraction of pixels on which two labelings agree after optimal matching of
/// segment ids (exhaustive for <= 8 segments, greedy beyond).
double label_agreement(const LabelMap& a, const LabelMap& b);

} // namespace sfc
