#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sfc/errors.hpp"
#include "sfc/segmenter.hpp"
#include "sfc/synthetic.hpp"

using namespace sfc;

namespace {

// two tight blocks {0,1} and {2,3} with a weak bridge
DenseAffinity four_node_blocks(double bridge) {
    DenseAffinity A;
    A.n = 4;
    A.w = {1, 0.9, bridge, bridge, 0.9, 1,      bridge, bridge,
           bridge, bridge, 1, 0.8,    bridge, bridge, 0.8, 1};
    A.d.assign(4, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A.d[static_cast<size_t>(i)] += A.w[static_cast<size_t>(i) * 4 + j];
    return A;
}

LabelMap labels_of(std::vector<int> v, int w, int h) {
    LabelMap m(w, h);
    m.labels = std::move(v);
    return m;
}

} // namespace

TEST_CASE("ncut_cost") {
    SUBCASE("disconnected blocks cost zero") {
        DenseOperator op(four_node_blocks(0.0));
        const double c = ncut_cost(op, labels_of({0, 0, 1, 1}, 4, 1));
        CHECK(c == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("2-pixel split equals lambda_2") {
        Image img(2, 1, 1);
        img.data = {0.5, 0.5};
        AffinityConfig cfg;
        cfg.sigma_x = 1.0;
        DenseAffinity A = build_dense_affinity(img, cfg);
        const double w = A.at(0, 1);
        DenseOperator op(A);
        CHECK(ncut_cost(op, labels_of({0, 1}, 2, 1)) ==
              doctest::Approx(2 * w / (1 + w)).epsilon(1e-12));
    }

    SUBCASE("single segment rejected, k-way cost bounded by k") {
        DenseOperator op(four_node_blocks(0.1));
        CHECK_THROWS_AS(ncut_cost(op, labels_of({0, 0, 0, 0}, 4, 1)), std::invalid_argument);
        const double c = ncut_cost(op, labels_of({0, 1, 2, 3}, 4, 1));
        CHECK(c <= 4.0);
        CHECK(c >= 0.0);
    }

    SUBCASE("empty segment rejected") {
        DenseOperator op(four_node_blocks(0.1));
        CHECK_THROWS_AS(ncut_cost(op, labels_of({0, 0, 2, 2}, 4, 1)), std::invalid_argument);
    }
}

TEST_CASE("discretize_twoway") {
    DenseOperator op(four_node_blocks(0.01));

    SUBCASE("finds the block split from a relaxed vector") {
        const std::vector<double> y = {0.5, 0.4, -0.3, -0.6};
        TwowayResult res = discretize_twoway(y, op, 32);
        CHECK(res.labels[0] == res.labels[1]);
        CHECK(res.labels[2] == res.labels[3]);
        CHECK(res.labels[0] != res.labels[2]);

        // the reported best is the minimum of the evaluated costs
        double mn = res.per_threshold_costs[0];
        for (double c : res.per_threshold_costs) mn = std::min(mn, c);
        CHECK(res.best_cost == mn);

        // and matches an independent evaluation of that partition
        LabelMap lm = labels_of(res.labels, 4, 1);
        CHECK(ncut_cost(op, lm) == doctest::Approx(res.best_cost).epsilon(1e-12));
    }

    SUBCASE("sign flip returns the same partition") {
        const std::vector<double> y = {0.5, 0.4, -0.3, -0.6};
        std::vector<double> neg = y;
        for (double& v : neg) v = -v;
        TwowayResult a = discretize_twoway(y, op, 32);
        TwowayResult b = discretize_twoway(neg, op, 32);
        CHECK(label_agreement(labels_of(a.labels, 4, 1), labels_of(b.labels, 4, 1)) == 1.0);
    }

    SUBCASE("constant vector has no usable threshold") {
        const std::vector<double> y(4, 0.25);
        CHECK_THROWS_AS(discretize_twoway(y, op, 8), std::invalid_argument);
    }
}

TEST_CASE("discretize_kmeans") {
    SUBCASE("piecewise-constant eigenvectors recover blocks exactly") {
        // embedding dimension 1; two well-separated values
        const std::vector<std::vector<double>> eig = {{0.5, 0.5, -0.5, -0.5, 0.5}};
        const auto labels = discretize_kmeans(eig, 2, 0);
        CHECK(labels[0] == labels[1]);
        CHECK(labels[2] == labels[3]);
        CHECK(labels[0] == labels[4]);
        CHECK(labels[0] != labels[2]);
    }

    SUBCASE("deterministic under the seed") {
        std::mt19937_64 rng(5);
        std::vector<std::vector<double>> eig(2, std::vector<double>(40));
        for (auto& v : eig)
            for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        const auto a = discretize_kmeans(eig, 4, 9);
        const auto b = discretize_kmeans(eig, 4, 9);
        CHECK(a == b);
    }

    SUBCASE("two points split into singletons") {
        const std::vector<std::vector<double>> eig = {{0.7, -0.7}};
        const auto labels = discretize_kmeans(eig, 2, 1);
        CHECK(labels[0] != labels[1]);
    }

    SUBCASE("not enough distinct rows") {
        const std::vector<std::vector<double>> eig = {{0.1, 0.1, 0.1}};
        CHECK_THROWS_AS(discretize_kmeans(eig, 2, 0), std::invalid_argument);
    }
}

TEST_CASE("restricted operator equals the principal submatrix") {
    Image img = two_region_image(16, 16, 0.25, 0.75, 0.03, 7);
    AffinityConfig cfg;
    cfg.sigma_x = 2.0;
    cfg.sigma_i = 0.1;
    DenseAffinity A = build_dense_affinity(img, cfg);
    DenseOperator dense(A);

    std::vector<int> subset;
    for (int i = 0; i < 256; i += 3) subset.push_back(i);
    RestrictedOperator rop(dense, subset);

    std::mt19937_64 rng(11);
    std::vector<double> v(subset.size());
    for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;

    // direct principal-submatrix matvec
    std::vector<double> expected(subset.size(), 0.0);
    for (size_t a = 0; a < subset.size(); ++a)
        for (size_t b = 0; b < subset.size(); ++b)
            expected[a] += A.at(subset[a], subset[b]) * v[b];

    const auto got = rop.apply_w(v);
    for (size_t a = 0; a < subset.size(); ++a) CHECK(std::abs(got[a] - expected[a]) <= 1e-12);

    // restricted degrees are the submatrix row sums, not the full-graph degrees
    const auto& d = rop.degree();
    for (size_t a = 0; a < subset.size(); ++a) {
        double row = 0.0;
        for (size_t b = 0; b < subset.size(); ++b) row += A.at(subset[a], subset[b]);
        CHECK(d[a] == doctest::Approx(row).epsilon(1e-12));
    }

    // the grid restriction approximates the same submatrix
    GridConfig gcfg;
    gcfg.sigma_x = 2.0;
    gcfg.sigma_i = 0.1;
    GridOperator grid(img, gcfg);
    RestrictedOperator grop(grid, subset);
    const auto gv = grop.apply_w(v);
    double num = 0.0, den = 0.0;
    for (size_t a = 0; a < subset.size(); ++a) {
        num += (gv[a] - expected[a]) * (gv[a] - expected[a]);
        den += expected[a] * expected[a];
    }
    CHECK(std::sqrt(num / den) <= 0.05);
}

TEST_CASE("recursive_split") {
    SUBCASE("two disconnected blocks recover exactly") {
        DenseOperator op(four_node_blocks(0.0));
        SegmentConfig cfg;
        cfg.num_segments = 2;
        LabelMap lm = recursive_split(op, cfg);
        lm.width = 4;
        lm.height = 1;
        CHECK(lm.labels[0] == lm.labels[1]);
        CHECK(lm.labels[2] == lm.labels[3]);
        CHECK(lm.labels[0] != lm.labels[2]);
        CHECK(ncut_cost(op, lm) == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("num_segments 2 equals a single twoway call") {
        Image img = two_region_image(12, 12, 0.2, 0.8, 0.02, 13);
        AffinityConfig acfg;
        acfg.sigma_x = 2.0;
        DenseOperator op(build_dense_affinity(img, acfg));
        SegmentConfig cfg;
        cfg.num_segments = 2;
        cfg.seed = 4;
        LabelMap rec = recursive_split(op, cfg);
        rec.width = 12;
        rec.height = 12;

        SolverConfig scfg;
        scfg.k = 1;
        scfg.seed = 4;
        EigenResult eig = ncut_eigs(op, scfg);
        TwowayResult tw = discretize_twoway(eig.vectors[1], op, cfg.thresholds_per_split);
        LabelMap direct = labels_of(tw.labels, 12, 12);
        CHECK(label_agreement(rec, direct) == 1.0);
    }

    SUBCASE("three components recovered with num_segments 3") {
        DenseAffinity A;
        A.n = 6;
        A.w.assign(36, 0.0);
        auto link = [&](int i, int j, double w) {
            A.w[static_cast<size_t>(i) * 6 + j] = w;
            A.w[static_cast<size_t>(j) * 6 + i] = w;
        };
        for (int i = 0; i < 6; ++i) A.w[static_cast<size_t>(i) * 6 + i] = 1.0;
        link(0, 1, 0.9);
        link(2, 3, 0.9);
        link(4, 5, 0.9);
        A.d.assign(6, 0.0);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) A.d[static_cast<size_t>(i)] += A.w[static_cast<size_t>(i) * 6 + j];
        DenseOperator op(A);
        SegmentConfig cfg;
        cfg.num_segments = 3;
        LabelMap lm = recursive_split(op, cfg);
        lm.width = 6;
        lm.height = 1;
        CHECK(lm.num_segments() == 3);
        CHECK(ncut_cost(op, lm) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(lm.labels[0] == lm.labels[1]);
        CHECK(lm.labels[2] == lm.labels[3]);
        CHECK(lm.labels[4] == lm.labels[5]);
    }
}

TEST_CASE("segment end to end") {
    SUBCASE("noiseless two-region image is recovered exactly by both pipelines") {
        Image img = two_region_image(32, 32, 0.2, 0.8, 0.0, 0);
        const LabelMap truth = two_region_truth(32, 32);

        SegmentConfig fast;
        fast.pipeline = Pipeline::fast_ncut;
        fast.num_segments = 2;
        fast.affinity.sigma_x = 2.0;
        fast.affinity.sigma_i = 0.1;
        SegmentationResult rf = segment(img, fast);
        CHECK(label_agreement(rf.labels, truth) == 1.0);

        SegmentConfig dense = fast;
        dense.pipeline = Pipeline::dense_ncut;
        dense.affinity.radius = 0;
        SegmentationResult rd = segment(img, dense);
        CHECK(label_agreement(rd.labels, truth) == 1.0);
        CHECK(label_agreement(rd.labels, rf.labels) == 1.0);
        CHECK(std::abs(rd.eigen.lambda[1] - rf.eigen.lambda[1]) <= 1e-2);

        // fast cost within 10% of the oracle cost
        CHECK(rf.ncut_cost <= 1.1 * rd.ncut_cost + 1e-12);

        CHECK(rf.filter_applications > 0);
        CHECK(rf.timings.total_ms >= 0.0);
    }

    SUBCASE("twoway discretization also works end to end") {
        Image img = two_region_image(24, 24, 0.2, 0.8, 0.02, 3);
        SegmentConfig cfg;
        cfg.pipeline = Pipeline::fast_ncut;
        cfg.num_segments = 2;
        cfg.discretization = Discretization::recursive_twoway;
        SegmentationResult res = segment(img, cfg);
        CHECK(label_agreement(res.labels, two_region_truth(24, 24)) >= 0.99);
        CHECK_FALSE(res.per_threshold_costs.empty());
    }

    SUBCASE("cond pipeline segments a texture pair") {
        Image img = texture_flat_image(24, 24, 0.5, 0.25, 1, 0.0, 0);
        SegmentConfig cfg;
        cfg.pipeline = Pipeline::cond_ncut;
        cfg.num_segments = 2;
        cfg.patch.patch_radius = 2;
        cfg.patch.search_radius = 5;
        cfg.patch.sigma_n = 0.3;
        cfg.patch.sigma_x = 3.0;
        SegmentationResult res = segment(img, cfg);
        CHECK(res.labels.num_segments() == 2);
        CHECK(res.ncut_cost >= 0.0);
    }

    SUBCASE("constant image raises a degenerate-graph error") {
        Image img(16, 16, 1, 0.5);
        SegmentConfig cfg;
        cfg.num_segments = 2;
        CHECK_THROWS_AS(segment(img, cfg), DegenerateGraphError);
    }

    SUBCASE("bad configs rejected") {
        Image img = two_region_image(8, 8, 0.2, 0.8, 0.0, 0);
        SegmentConfig cfg;
        cfg.num_segments = 1;
        CHECK_THROWS_AS(segment(img, cfg), std::invalid_argument);
        cfg.num_segments = 4;
        cfg.num_eigvecs = 2;
        CHECK_THROWS_AS(segment(img, cfg), std::invalid_argument);
    }

    SUBCASE("pipeline is deterministic under a fixed seed") {
        Image img = two_region_image(20, 20, 0.3, 0.7, 0.05, 21);
        SegmentConfig cfg;
        cfg.pipeline = Pipeline::fast_ncut;
        cfg.num_segments = 2;
        cfg.seed = 77;
        SegmentationResult a = segment(img, cfg);
        SegmentationResult b = segment(img, cfg);
        CHECK(a.labels.labels == b.labels.labels);
        CHECK(a.eigen.lambda == b.eigen.lambda);
        CHECK(a.ncut_cost == b.ncut_cost);
    }
}

TEST_CASE("label_agreement") {
    LabelMap a = labels_of({0, 0, 1, 1}, 4, 1);
    LabelMap b = labels_of({1, 1, 0, 0}, 4, 1); // permuted ids
    CHECK(label_agreement(a, a) == 1.0);
    CHECK(label_agreement(a, b) == 1.0);
    LabelMap c = labels_of({0, 1, 0, 1}, 4, 1);
    CHECK(label_agreement(a, c) == 0.5);
    LabelMap d = labels_of({0, 0, 0, 1}, 4, 1);
    CHECK(label_agreement(a, d) == 0.75);
}
