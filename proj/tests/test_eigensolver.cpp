#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sfc/cut_operator.hpp"
#include "sfc/eigensolver.hpp"
#include "sfc/synthetic.hpp"

using namespace sfc;

namespace {

// Test fixture: an explicit symmetric matrix behind the operator contract.
class MatrixOperator : public CutOperator {
public:
    explicit MatrixOperator(Eigen::MatrixXd m) : m_(std::move(m)) {
        degree_.resize(static_cast<size_t>(m_.rows()));
        for (int i = 0; i < m_.rows(); ++i) degree_[static_cast<size_t>(i)] = m_.row(i).sum();
    }
    int size() const override { return static_cast<int>(m_.rows()); }
    std::vector<double> apply_w(const std::vector<double>& v) const override {
        count_applications(1);
        std::vector<double> out(v.size(), 0.0);
        for (int i = 0; i < m_.rows(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < m_.cols(); ++j) acc += m_(i, j) * v[static_cast<size_t>(j)];
            out[static_cast<size_t>(i)] = acc;
        }
        return out;
    }
    const std::vector<double>& degree() const override { return degree_; }

private:
    Eigen::MatrixXd m_;
    std::vector<double> degree_;
};

DenseAffinity two_pixel_affinity() {
    Image img(2, 1, 1);
    img.data = {0.5, 0.5};
    AffinityConfig cfg;
    cfg.sigma_x = 1.0;
    return build_dense_affinity(img, cfg);
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

TEST_CASE("symmetric_apply modes") {
    DenseAffinity A = two_pixel_affinity();
    const double w = A.at(0, 1);
    DenseOperator op(A);

    SUBCASE("normalized fixes d^{1/2}") {
        std::vector<double> z(2);
        for (int i = 0; i < 2; ++i) z[static_cast<size_t>(i)] = std::sqrt(A.d[static_cast<size_t>(i)]);
        const auto nz = symmetric_apply(op, SolveMode::normalized, z);
        for (int i = 0; i < 2; ++i)
            CHECK(nz[static_cast<size_t>(i)] ==
                  doctest::Approx(z[static_cast<size_t>(i)]).epsilon(1e-12));
    }

    SUBCASE("normalized matrix matches the 2x2 closed form") {
        const auto col0 = symmetric_apply(op, SolveMode::normalized, {1.0, 0.0});
        CHECK(col0[0] == doctest::Approx(1.0 / (1.0 + w)).epsilon(1e-12));
        CHECK(col0[1] == doctest::Approx(w / (1.0 + w)).epsilon(1e-12));
    }

    SUBCASE("association is the raw W apply") {
        const auto out = symmetric_apply(op, SolveMode::association, {1.0, 0.0});
        CHECK(out[0] == 1.0);
        CHECK(out[1] == w);
    }

    SUBCASE("average_cut annihilates constants up to the shift") {
        const double c = average_cut_shift(op);
        CHECK(c == doctest::Approx(2.0 * (1.0 + w)).epsilon(1e-12));
        const auto out = symmetric_apply(op, SolveMode::average_cut, {1.0, 1.0});
        CHECK(out[0] == doctest::Approx(c).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("power iteration finds the dominant pair and respects deflation") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    MatrixOperator op(m);
    SolverConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iterations = 500;
    cfg.mode = SolveMode::association;

    PowerResult top = power_iterate(op, SolveMode::association, {}, cfg);
    CHECK(top.converged);
    CHECK(top.mu == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(top.z[0]) == doctest::Approx(1.0).epsilon(1e-6));

    PowerResult second = power_iterate(op, SolveMode::association, {{1.0, 0.0}}, cfg);
    CHECK(second.converged);
    CHECK(second.mu == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(second.z[1]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("power iteration on the deflated 2-pixel normalized operator") {
    DenseAffinity A = two_pixel_affinity();
    const double w = A.at(0, 1);
    DenseOperator op(A);

    std::vector<double> q1(2);
    double nrm = 0.0;
    for (int i = 0; i < 2; ++i) {
        q1[static_cast<size_t>(i)] = std::sqrt(A.d[static_cast<size_t>(i)]);
        nrm += q1[static_cast<size_t>(i)] * q1[static_cast<size_t>(i)];
    }
    for (double& x : q1) x /= std::sqrt(nrm);

    SolverConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iterations = 500;
    const PowerResult res = power_iterate(op, SolveMode::normalized, {q1}, cfg);
    CHECK(res.converged);
    CHECK(res.mu == doctest::Approx((1 - w) / (1 + w)).epsilon(1e-9));
}

TEST_CASE("lanczos on a 2x2 closed form") {
    Eigen::MatrixXd m(2, 2);
    m << 2, 1, 1, 2;
    MatrixOperator op(m);
    SolverConfig cfg;
    cfg.k = 2;
    cfg.tol = 1e-10;
    EigenResult res = lanczos(op, SolveMode::association, cfg);
    REQUIRE(res.mu.size() == 2);
    CHECK(res.mu[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(res.mu[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.all_converged());
    // vectors proportional to {1,1} and {1,-1}
    CHECK(res.sym_vectors[0][0] * res.sym_vectors[0][1] > 0.0);
    CHECK(res.sym_vectors[1][0] * res.sym_vectors[1][1] < 0.0);
    // association mode: lambda = mu
    CHECK(res.lambda == res.mu);
}

TEST_CASE("lanczos survives breakdown on an identity operator") {
    // every start vector is an eigenvector; the recurrence hits beta ~ 0
    // immediately and must restart orthogonally to recover the full spectrum
    MatrixOperator op(Eigen::MatrixXd::Identity(4, 4));
    SolverConfig cfg;
    cfg.k = 3;
    cfg.tol = 1e-10;
    EigenResult res = lanczos(op, SolveMode::association, cfg);
    REQUIRE(res.mu.size() == 3);
    for (double mu : res.mu) CHECK(mu == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.all_converged());
}

TEST_CASE("lanczos top-5 matches a dense eigendecomposition on random 40x40") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::mt19937_64 rng(7000 + seed);
        Eigen::MatrixXd m(40, 40);
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
                m(i, j) = v;
                m(j, i) = v;
            }
        MatrixOperator op(m);
        SolverConfig cfg;
        cfg.k = 5;
        cfg.tol = 1e-10;
        cfg.seed = seed;
        EigenResult res = lanczos(op, SolveMode::association, cfg);
        CHECK(res.all_converged());

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        for (int p = 0; p < 5; ++p)
            CHECK(std::abs(res.mu[static_cast<size_t>(p)] - es.eigenvalues()[39 - p]) <= 1e-8);

        // orthonormal Ritz vectors
        for (size_t a = 0; a < res.sym_vectors.size(); ++a)
            for (size_t b = a; b < res.sym_vectors.size(); ++b)
                CHECK(std::abs(vec_dot(res.sym_vectors[a], res.sym_vectors[b]) -
                               (a == b ? 1.0 : 0.0)) <= 1e-8);
    }
}

TEST_CASE("lanczos flags unconverged pairs instead of failing") {
    std::mt19937_64 rng(4242);
    Eigen::MatrixXd m(30, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            m(i, j) = v;
            m(j, i) = v;
        }
    MatrixOperator op(m);
    SolverConfig cfg;
    cfg.k = 3;
    cfg.tol = 1e-30; // unreachable
    cfg.max_iterations = 10;
    EigenResult res = lanczos(op, SolveMode::association, cfg);
    CHECK_FALSE(res.all_converged());
    CHECK(res.mu.size() == 3);
}

TEST_CASE("average_cut solves the smallest Laplacian eigenvalues") {
    DenseAffinity A = two_pixel_affinity();
    const double w = A.at(0, 1);
    DenseOperator op(A);
    SolverConfig cfg;
    cfg.k = 2;
    cfg.tol = 1e-10;
    EigenResult res = lanczos(op, SolveMode::average_cut, cfg);
    REQUIRE(res.lambda.size() == 2);
    // (D - W) spectrum is {0, 2w}; lambda ascending as mu descends
    CHECK(res.lambda[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.lambda[1] == doctest::Approx(2.0 * w).epsilon(1e-9));
}

TEST_CASE("ncut_eigs on the 2-pixel and disconnected cases") {
    SUBCASE("2-pixel closed form") {
        DenseAffinity A = two_pixel_affinity();
        const double w = A.at(0, 1);
        DenseOperator op(A);
        SolverConfig cfg;
        cfg.k = 1;
        cfg.tol = 1e-10;
        EigenResult res = ncut_eigs(op, cfg);
        REQUIRE(res.lambda.size() == 2);
        CHECK(res.mu[0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(res.lambda[1] == doctest::Approx(2 * w / (1 + w)).epsilon(1e-10));
        CHECK(res.vectors[1][0] * res.vectors[1][1] < 0.0);
    }

    SUBCASE("disconnected blocks split exactly") {
        DenseAffinity A;
        A.n = 4;
        A.w = {1, 0.8, 0, 0, 0.8, 1, 0, 0, 0, 0, 1, 0.6, 0, 0, 0.6, 1};
        A.d = {1.8, 1.8, 1.6, 1.6};
        DenseOperator op(A);
        SolverConfig cfg;
        cfg.k = 2;
        cfg.tol = 1e-10;
        EigenResult res = ncut_eigs(op, cfg);
        CHECK(res.lambda[1] == doctest::Approx(0.0).epsilon(1e-9));
        const auto& y2 = res.vectors[1];
        CHECK(y2[0] * y2[2] < 0.0);
        CHECK(y2[0] == doctest::Approx(y2[1]).epsilon(1e-7));
        CHECK(y2[2] == doctest::Approx(y2[3]).epsilon(1e-7));
    }
}

TEST_CASE("grid lambda_2 tracks the dense oracle on a two-region image") {
    Image img = two_region_image(24, 24, 0.2, 0.8, 0.02, 5);
    AffinityConfig acfg;
    acfg.sigma_x = 2.0;
    acfg.sigma_i = 0.1;
    DenseOperator dense(build_dense_affinity(img, acfg));
    GridConfig gcfg;
    gcfg.sigma_x = 2.0;
    gcfg.sigma_i = 0.1;
    GridOperator grid(img, gcfg);

    SolverConfig cfg;
    cfg.k = 1;
    cfg.tol = 1e-8;
    EigenResult rd = ncut_eigs(dense, cfg);
    EigenResult rg = ncut_eigs(grid, cfg);
    CHECK(std::abs(rd.lambda[1] - rg.lambda[1]) <= 1e-2);
    CHECK(rd.converged[1]);
    CHECK(rg.converged[1]);
}

TEST_CASE("power iteration and lanczos agree on mu_2") {
    Image img = two_region_image(16, 16, 0.2, 0.8, 0.02, 9);
    AffinityConfig acfg;
    acfg.sigma_x = 2.0;
    acfg.sigma_i = 0.1;
    DenseOperator op(build_dense_affinity(img, acfg));

    SolverConfig cfg;
    cfg.k = 1;
    cfg.tol = 1e-9;
    cfg.max_iterations = 3000;
    EigenResult viaLanczos = ncut_eigs(op, cfg);

    const auto& d = op.degree();
    std::vector<double> q1(d.size());
    double nrm = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
        q1[i] = std::sqrt(d[i]);
        nrm += d[i];
    }
    for (double& x : q1) x /= std::sqrt(nrm);
    PowerResult viaPower = power_iterate(op, SolveMode::normalized, {q1}, cfg);

    CHECK(viaPower.converged);
    CHECK(std::abs(viaPower.mu - viaLanczos.mu[1]) <= 1e-6);
}

TEST_CASE("identical seeds give bit-identical results") {
    Image img = two_region_image(12, 12, 0.3, 0.7, 0.05, 3);
    GridConfig gcfg;
    GridOperator op(img, gcfg);
    SolverConfig cfg;
    cfg.k = 3;
    cfg.seed = 11;
    EigenResult a = ncut_eigs(op, cfg);
    EigenResult b = ncut_eigs(op, cfg);
    CHECK(a.mu == b.mu);
    CHECK(a.lambda == b.lambda);
    for (size_t p = 0; p < a.vectors.size(); ++p) CHECK(a.vectors[p] == b.vectors[p]);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("filter applications are counted") {
    Image img = two_region_image(10, 10, 0.2, 0.8, 0.0, 1);
    GridConfig gcfg;
    GridOperator op(img, gcfg);
    const std::uint64_t before = op.filter_applications();
    SolverConfig cfg;
    cfg.k = 2;
    EigenResult res = ncut_eigs(op, cfg);
    CHECK(res.filter_applications > 0);
    CHECK(op.filter_applications() == before + res.filter_applications);
    CHECK(res.iterations > 0);
}
