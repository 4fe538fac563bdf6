#include "sfc/segmenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "sfc/errors.hpp"

namespace sfc {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<size_t> segment_counts(const LabelMap& labels, int k) {
    std::vector<size_t> counts(static_cast<size_t>(k), 0);
    for (int v : labels.labels) {
        if (v < 0 || v >= k) throw std::invalid_argument("ncut_cost: label id out of range");
        ++counts[static_cast<size_t>(v)];
    }
    return counts;
}

} // namespace

double ncut_cost(const CutOperator& op, const LabelMap& labels) {
    const int n = op.size();
    if (static_cast<int>(labels.labels.size()) != n)
        throw std::invalid_argument("ncut_cost: label map size mismatch");
    const int k = labels.num_segments();
    if (k < 2) throw std::invalid_argument("ncut_cost: at least two segments required");
    const auto counts = segment_counts(labels, k);
    for (size_t c : counts)
        if (c == 0) throw std::invalid_argument("ncut_cost: empty segment");

    std::vector<std::vector<double>> indicators(static_cast<size_t>(k),
                                                std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        indicators[static_cast<size_t>(labels.labels[static_cast<size_t>(i)])]
                  [static_cast<size_t>(i)] = 1.0;

    const auto w_ind = op.apply_w_block(indicators);
    const std::vector<double>& d = op.degree();

    double cost = 0.0;
    for (int s = 0; s < k; ++s) {
        double assoc = 0.0, within = 0.0;
        for (int i = 0; i < n; ++i) {
            if (labels.labels[static_cast<size_t>(i)] == s) {
                assoc += d[static_cast<size_t>(i)];
                within += w_ind[static_cast<size_t>(s)][static_cast<size_t>(i)];
            }
        }
        if (assoc <= 0.0) throw std::invalid_argument("ncut_cost: zero-association segment");
        const double cut = std::max(assoc - within, 0.0);
        cost += cut / assoc;
    }
    return cost;
}

TwowayResult discretize_twoway(const std::vector<double>& y, const CutOperator& op,
                               int threshold_count) {
    const int n = op.size();
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("discretize_twoway: size mismatch");
    if (threshold_count < 1) throw std::invalid_argument("discretize_twoway: T must be >= 1");

    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw std::invalid_argument("discretize_twoway: all thresholds degenerate "
                                    "(y is effectively constant)");

    const std::vector<double>& d = op.degree();
    double total_assoc = 0.0;
    for (double x : d) total_assoc += x;

    // A candidate is a split index k, thresholding halfway between sorted[k]
    // and sorted[k+1]; equal neighbors make the split a no-op and are skipped.
    auto threshold_of = [&](int k) {
        return sorted[static_cast<size_t>(k)] +
               (sorted[static_cast<size_t>(k + 1)] - sorted[static_cast<size_t>(k)]) / 2.0;
    };
    TwowayResult res;
    res.best_cost = std::numeric_limits<double>::infinity();
    int best_k = -1;
    auto evaluate = [&](const std::vector<int>& splits) {
        std::vector<std::vector<double>> indicators;
        std::vector<int> usable;
        for (int k : splits) {
            if (sorted[static_cast<size_t>(k)] == sorted[static_cast<size_t>(k + 1)]) continue;
            const double th = threshold_of(k);
            std::vector<double> ind(static_cast<size_t>(n), 0.0);
            for (int i = 0; i < n; ++i)
                if (y[static_cast<size_t>(i)] > th) ind[static_cast<size_t>(i)] = 1.0;
            indicators.push_back(std::move(ind));
            usable.push_back(k);
        }
        if (usable.empty()) return;
        const auto w_ind = op.apply_w_block(indicators);
        for (size_t t = 0; t < usable.size(); ++t) {
            double assoc_a = 0.0, within_a = 0.0;
            for (int i = 0; i < n; ++i) {
                if (indicators[t][static_cast<size_t>(i)] != 0.0) {
                    assoc_a += d[static_cast<size_t>(i)];
                    within_a += w_ind[t][static_cast<size_t>(i)];
                }
            }
            const double assoc_b = total_assoc - assoc_a;
            const double cut = std::max(assoc_a - within_a, 0.0);
            const double cost = cut / assoc_a + cut / assoc_b;
            res.per_threshold_costs.push_back(cost);
            if (cost < res.best_cost) {
                res.best_cost = cost;
                best_k = usable[t];
            }
        }
    };

    // coarse pass over the (t+0.5)/T quantiles of y's values
    std::vector<int> coarse;
    for (int t = 0; t < threshold_count; ++t) {
        const int k = std::min(n - 2, static_cast<int>((t + 0.5) / threshold_count * n));
        if (coarse.empty() || k != coarse.back()) coarse.push_back(k);
    }
    evaluate(coarse);
    if (best_k < 0)
        throw std::invalid_argument("discretize_twoway: all thresholds degenerate "
                                    "(y is effectively constant)");

    // Refine around the winner: the quantile grid has stride ~n/T and can
    // miss the exact gap on near-discrete spectra. Narrow geometrically, one
    // batched evaluation per round, until the window is searched exhaustively.
    int lo = std::max(0, best_k - (n / threshold_count + 1));
    int hi = std::min(n - 2, best_k + (n / threshold_count + 1));
    while (hi > lo) {
        std::vector<int> cand;
        const bool exhaustive = hi - lo + 1 <= 2 * threshold_count;
        if (exhaustive) {
            for (int k = lo; k <= hi; ++k) cand.push_back(k);
        } else {
            for (int t = 0; t < threshold_count; ++t) {
                const int k = lo + static_cast<int>((static_cast<long long>(hi) - lo) * t /
                                                    (threshold_count - 1));
                if (cand.empty() || k != cand.back()) cand.push_back(k);
            }
        }
        evaluate(cand);
        if (exhaustive) break;
        const int stride = std::max(1, (hi - lo) / (threshold_count - 1));
        lo = std::max(lo, best_k - stride);
        hi = std::min(hi, best_k + stride);
    }

    res.labels.assign(static_cast<size_t>(n), 0);
    const double th = threshold_of(best_k);
    for (int i = 0; i < n; ++i)
        res.labels[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] > th ? 1 : 0;
    return res;
}

std::vector<int> discretize_kmeans(const std::vector<std::vector<double>>& eigvecs, int k_seg,
                                   std::uint64_t seed, int restarts, int max_iterations,
                                   bool row_normalize) {
    if (eigvecs.empty()) throw std::invalid_argument("discretize_kmeans: no eigenvectors");
    const int dims = static_cast<int>(eigvecs.size());
    const int n = static_cast<int>(eigvecs[0].size());
    if (k_seg < 1 || k_seg > n) throw std::invalid_argument("discretize_kmeans: bad k");

    // spectral embedding: pixel i -> its row across the eigenvectors
    std::vector<double> emb(static_cast<size_t>(n) * dims);
    for (int i = 0; i < n; ++i) {
        double nrm = 0.0;
        for (int c = 0; c < dims; ++c) {
            const double v = eigvecs[static_cast<size_t>(c)][static_cast<size_t>(i)];
            emb[static_cast<size_t>(i) * dims + c] = v;
            nrm += v * v;
        }
        if (row_normalize && nrm > 0) {
            nrm = std::sqrt(nrm);
            for (int c = 0; c < dims; ++c) emb[static_cast<size_t>(i) * dims + c] /= nrm;
        }
    }

    {
        std::set<std::vector<double>> distinct;
        for (int i = 0; i < n && static_cast<int>(distinct.size()) < k_seg; ++i)
            distinct.emplace(emb.begin() + static_cast<long>(i) * dims,
                             emb.begin() + static_cast<long>(i + 1) * dims);
        if (static_cast<int>(distinct.size()) < k_seg)
            throw std::invalid_argument(
                "discretize_kmeans: fewer distinct embedding rows than segments");
    }

    auto dist_sq = [&](int i, const std::vector<double>& center) {
        double s = 0.0;
        for (int c = 0; c < dims; ++c) {
            const double dd = emb[static_cast<size_t>(i) * dims + c] - center[static_cast<size_t>(c)];
            s += dd * dd;
        }
        return s;
    };

    std::vector<int> best_labels;
    double best_sse = std::numeric_limits<double>::infinity();

    for (int run = 0; run < restarts; ++run) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(run));
        auto unit = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

        // k-means++ seeding
        std::vector<std::vector<double>> centers;
        const int first = static_cast<int>(unit() * n) % n;
        centers.emplace_back(emb.begin() + static_cast<long>(first) * dims,
                             emb.begin() + static_cast<long>(first + 1) * dims);
        std::vector<double> min_d(static_cast<size_t>(n));
        while (static_cast<int>(centers.size()) < k_seg) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) m = std::min(m, dist_sq(i, c));
                min_d[static_cast<size_t>(i)] = m;
                total += m;
            }
            int pick = 0;
            if (total > 0) {
                double target = unit() * total, acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += min_d[static_cast<size_t>(i)];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<int>(unit() * n) % n;
            }
            centers.emplace_back(emb.begin() + static_cast<long>(pick) * dims,
                                 emb.begin() + static_cast<long>(pick + 1) * dims);
        }

        std::vector<int> labels(static_cast<size_t>(n), 0);
        for (int iter = 0; iter < max_iterations; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double m = dist_sq(i, centers[0]);
                for (int c = 1; c < k_seg; ++c) {
                    const double dd = dist_sq(i, centers[static_cast<size_t>(c)]);
                    if (dd < m) {
                        m = dd;
                        arg = c;
                    }
                }
                if (labels[static_cast<size_t>(i)] != arg) {
                    labels[static_cast<size_t>(i)] = arg;
                    changed = true;
                }
            }
            // refill any emptied cluster from the farthest point
            std::vector<int> counts(static_cast<size_t>(k_seg), 0);
            for (int v : labels) ++counts[static_cast<size_t>(v)];
            for (int c = 0; c < k_seg; ++c) {
                if (counts[static_cast<size_t>(c)] > 0) continue;
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double dd = dist_sq(i, centers[static_cast<size_t>(labels[static_cast<size_t>(i)])]);
                    if (dd > far_d && counts[static_cast<size_t>(labels[static_cast<size_t>(i)])] > 1) {
                        far_d = dd;
                        far_i = i;
                    }
                }
                --counts[static_cast<size_t>(labels[static_cast<size_t>(far_i)])];
                labels[static_cast<size_t>(far_i)] = c;
                ++counts[static_cast<size_t>(c)];
                changed = true;
            }
            // update step
            std::vector<std::vector<double>> sums(static_cast<size_t>(k_seg),
                                                  std::vector<double>(static_cast<size_t>(dims), 0.0));
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < dims; ++c)
                    sums[static_cast<size_t>(labels[static_cast<size_t>(i)])][static_cast<size_t>(c)] +=
                        emb[static_cast<size_t>(i) * dims + c];
            for (int c = 0; c < k_seg; ++c)
                if (counts[static_cast<size_t>(c)] > 0)
                    for (int dcol = 0; dcol < dims; ++dcol)
                        centers[static_cast<size_t>(c)][static_cast<size_t>(dcol)] =
                            sums[static_cast<size_t>(c)][static_cast<size_t>(dcol)] /
                            counts[static_cast<size_t>(c)];
            if (!changed) break;
        }

        double sse = 0.0;
        for (int i = 0; i < n; ++i)
            sse += dist_sq(i, centers[static_cast<size_t>(labels[static_cast<size_t>(i)])]);
        if (sse < best_sse) {
            best_sse = sse;
            best_labels = labels;
        }
    }

    // contiguous ids in first-occurrence order
    std::vector<int> remap(static_cast<size_t>(k_seg), -1);
    int next = 0;
    for (int& v : best_labels) {
        if (remap[static_cast<size_t>(v)] < 0) remap[static_cast<size_t>(v)] = next++;
        v = remap[static_cast<size_t>(v)];
    }
    return best_labels;
}

LabelMap recursive_split(const CutOperator& op, const SegmentConfig& cfg,
                         const EigenResult* first_split, std::vector<double>* first_split_costs) {
    const int n = op.size();
    std::vector<std::vector<int>> segments;
    {
        std::vector<int> all(static_cast<size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        segments.push_back(std::move(all));
    }
    std::vector<bool> splittable{true};

    // Split acceptance follows: a candidate is taken while the segment count is
    // below num_segments, or when its two-way cost beats ncut_stop_threshold;
    // recursion stops at num_segments or when nothing is splittable.
    int solve_counter = 0;
    while (static_cast<int>(segments.size()) < cfg.num_segments) {
        int pick = -1;
        size_t pick_size = 0;
        for (size_t s = 0; s < segments.size(); ++s) {
            if (splittable[s] && segments[s].size() > pick_size) {
                pick = static_cast<int>(s);
                pick_size = segments[s].size();
            }
        }
        if (pick < 0) break; // no segment admits an acceptable split
        auto& seg = segments[static_cast<size_t>(pick)];
        if (seg.size() < 2) {
            splittable[static_cast<size_t>(pick)] = false;
            continue;
        }

        try {
            std::vector<int> part_labels;
            double cost = 0.0;
            if (seg.size() == static_cast<size_t>(n) && first_split &&
                first_split->vectors.size() >= 2) {
                TwowayResult tw =
                    discretize_twoway(first_split->vectors[1], op, cfg.thresholds_per_split);
                part_labels = std::move(tw.labels);
                cost = tw.best_cost;
                if (first_split_costs) *first_split_costs = std::move(tw.per_threshold_costs);
            } else {
                RestrictedOperator rop(op, seg);
                SolverConfig scfg;
                scfg.k = 1;
                scfg.tol = cfg.solver_tol;
                scfg.max_iterations = cfg.solver_max_iterations;
                scfg.seed = cfg.seed + 977 * static_cast<std::uint64_t>(++solve_counter);
                const EigenResult sub = ncut_eigs(rop, scfg);
                if (sub.vectors.size() < 2 || !sub.converged[1])
                    throw DegenerateGraphError("no converged non-trivial eigenpair");
                TwowayResult tw =
                    discretize_twoway(sub.vectors[1], rop, cfg.thresholds_per_split);
                part_labels = std::move(tw.labels);
                cost = tw.best_cost;
            }
            const bool accept = cost < cfg.ncut_stop_threshold ||
                                static_cast<int>(segments.size()) < cfg.num_segments;
            if (!accept) {
                splittable[static_cast<size_t>(pick)] = false;
                continue;
            }
            std::vector<int> left, right;
            for (size_t s = 0; s < seg.size(); ++s)
                (part_labels[s] == 0 ? left : right).push_back(seg[s]);
            seg = std::move(left);
            segments.push_back(std::move(right));
            splittable.push_back(true);
        } catch (const std::exception&) {
            splittable[static_cast<size_t>(pick)] = false;
        }
    }

    // deterministic ids: order segments by their smallest pixel index
    std::vector<size_t> order(segments.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return segments[a].front() < segments[b].front();
    });

    LabelMap out;
    out.labels.assign(static_cast<size_t>(n), 0);
    for (size_t rank = 0; rank < order.size(); ++rank)
        for (int idx : segments[order[rank]])
            out.labels[static_cast<size_t>(idx)] = static_cast<int>(rank);
    return out;
}

namespace {

std::unique_ptr<CutOperator> build_operator(const Image& img, const SegmentConfig& cfg,
                                            Image& guidance_out) {
    switch (cfg.pipeline) {
    case Pipeline::dense_ncut: {
        guidance_out = to_grayscale(img);
        return std::make_unique<DenseOperator>(build_dense_affinity(guidance_out, cfg.affinity));
    }
    case Pipeline::fast_ncut: {
        guidance_out = to_grayscale(img);
        GridConfig gcfg;
        gcfg.sigma_x = cfg.affinity.sigma_x;
        gcfg.sigma_i = cfg.affinity.sigma_i;
        return std::make_unique<GridOperator>(guidance_out, gcfg);
    }
    case Pipeline::cond_ncut:
        guidance_out = img;
        return std::make_unique<NlmCutOperator>(guidance_out, cfg.patch);
    }
    throw std::logic_error("segment: unknown pipeline");
}

} // namespace

SegmentationResult segment(const Image& img, const SegmentConfig& cfg) {
    if (cfg.num_segments < 2) throw std::invalid_argument("segment: num_segments must be >= 2");
    if (cfg.effective_eigvecs() < cfg.num_segments - 1)
        throw std::invalid_argument("segment: num_eigvecs must be >= num_segments - 1");

    const auto t0 = std::chrono::steady_clock::now();

    double lo = img.data.empty() ? 0.0 : img.data[0], hi = lo;
    for (double v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12)
        throw DegenerateGraphError(
            "segment: constant image yields a structureless affinity graph");

    SegmentationResult res;
    Image guidance;
    std::unique_ptr<CutOperator> op = build_operator(img, cfg, guidance);
    res.timings.build_ms = ms_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    SolverConfig scfg;
    scfg.k = cfg.effective_eigvecs();
    scfg.tol = cfg.solver_tol;
    scfg.max_iterations = cfg.solver_max_iterations;
    scfg.seed = cfg.seed;
    res.eigen = ncut_eigs(*op, scfg);
    res.timings.solve_ms = ms_since(t1);

    bool any_converged = false;
    for (size_t p = 1; p < res.eigen.converged.size(); ++p)
        any_converged = any_converged || res.eigen.converged[p];
    if (!any_converged)
        throw DegenerateGraphError("segment: no converged non-trivial eigenpair");

    const auto t2 = std::chrono::steady_clock::now();
    if (cfg.discretization == Discretization::kmeans) {
        std::vector<std::vector<double>> eigvecs(res.eigen.vectors.begin() + 1,
                                                 res.eigen.vectors.end());
        std::vector<int> l = discretize_kmeans(eigvecs, cfg.num_segments, cfg.seed,
                                               cfg.kmeans_restarts, cfg.kmeans_max_iterations,
                                               cfg.row_normalize_embedding);
        res.labels.width = img.width;
        res.labels.height = img.height;
        res.labels.labels = std::move(l);
    } else {
        res.labels = recursive_split(*op, cfg, &res.eigen, &res.per_threshold_costs);
        res.labels.width = img.width;
        res.labels.height = img.height;
    }
    res.timings.discretize_ms = ms_since(t2);

    res.ncut_cost = ncut_cost(*op, res.labels);
    res.filter_applications = op->filter_applications();
    res.timings.total_ms = ms_since(t0);
    return res;
}

double label_agreement(const LabelMap& a, const LabelMap& b) {
    if (a.labels.size() != b.labels.size() || a.labels.empty())
        throw std::invalid_argument("label_agreement: size mismatch");
    const int ka = a.num_segments(), kb = b.num_segments();
    const int k = std::max(ka, kb);
    std::vector<std::vector<size_t>> conf(static_cast<size_t>(k),
                                          std::vector<size_t>(static_cast<size_t>(k), 0));
    for (size_t i = 0; i < a.labels.size(); ++i)
        ++conf[static_cast<size_t>(a.labels[i])][static_cast<size_t>(b.labels[i])];

    size_t matched = 0;
    if (k <= 8) {
        std::vector<int> perm(static_cast<size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            size_t total = 0;
            for (int i = 0; i < k; ++i)
                total += conf[static_cast<size_t>(i)][static_cast<size_t>(perm[static_cast<size_t>(i)])];
            matched = std::max(matched, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // greedy matching for large k
        std::vector<bool> used_a(static_cast<size_t>(k), false), used_b(static_cast<size_t>(k), false);
        for (int step = 0; step < k; ++step) {
            size_t best = 0;
            int bi = -1, bj = -1;
            for (int i = 0; i < k; ++i) {
                if (used_a[static_cast<size_t>(i)]) continue;
                for (int j = 0; j < k; ++j) {
                    if (used_b[static_cast<size_t>(j)]) continue;
                    if (conf[static_cast<size_t>(i)][static_cast<size_t>(j)] >= best) {
                        best = conf[static_cast<size_t>(i)][static_cast<size_t>(j)];
                        bi = i;
                        bj = j;
                    }
                }
            }
            if (bi < 0) break;
            used_a[static_cast<size_t>(bi)] = true;
            used_b[static_cast<size_t>(bj)] = true;
            matched += best;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(a.labels.size());
}

} // namespace sfc
