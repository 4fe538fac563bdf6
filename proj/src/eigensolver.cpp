#include "sfc/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace sfc {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::vector<double>& v, double s) {
    for (double& x : v) x *= s;
}

std::vector<double> seeded_uniform(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    return v;
}

void orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
    for (const auto& q : basis) axpy(-dot(q, w), q, w);
}

// Seeded start vector orthogonal to every vector in the two basis sets; tries
// up to five seeds before giving up.
std::vector<double> start_vector(int n, std::uint64_t seed,
                                 const std::vector<std::vector<double>>& deflate,
                                 const std::vector<std::vector<double>>& basis) {
    for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
        std::vector<double> v = seeded_uniform(n, seed + attempt);
        orthogonalize(v, deflate);
        orthogonalize(v, basis);
        const double nv = norm(v);
        if (nv > 1e-12) {
            scale(v, 1.0 / nv);
            return v;
        }
    }
    throw std::runtime_error("eigensolver: start vector annihilated after 5 attempts");
}

std::vector<double> floored_degree(const CutOperator& op, double floor) {
    std::vector<double> d = op.degree();
    for (double& x : d)
        if (x < floor) x = floor;
    return d;
}

} // namespace

double average_cut_shift(const CutOperator& op) {
    double mx = 0.0;
    for (double x : op.degree()) mx = std::max(mx, x);
    return 2.0 * mx;
}

std::vector<double> symmetric_apply(const CutOperator& op, SolveMode mode,
                                    const std::vector<double>& z, double degree_floor) {
    if (static_cast<int>(z.size()) != op.size())
        throw std::invalid_argument("symmetric_apply: size mismatch");
    switch (mode) {
    case SolveMode::association:
        return op.apply_w(z);
    case SolveMode::normalized: {
        const std::vector<double> d = floored_degree(op, degree_floor);
        std::vector<double> u(z.size());
        for (size_t i = 0; i < z.size(); ++i) {
            if (d[i] <= 0.0)
                throw std::runtime_error("symmetric_apply: nonpositive degree");
            u[i] = z[i] / std::sqrt(d[i]);
        }
        std::vector<double> w = op.apply_w(u);
        for (size_t i = 0; i < w.size(); ++i) w[i] /= std::sqrt(d[i]);
        return w;
    }
    case SolveMode::average_cut: {
        const std::vector<double>& d = op.degree();
        const double c = average_cut_shift(op);
        std::vector<double> w = op.apply_w(z);
        for (size_t i = 0; i < w.size(); ++i) w[i] = c * z[i] - (d[i] * z[i] - w[i]);
        return w;
    }
    }
    throw std::logic_error("symmetric_apply: unknown mode");
}

PowerResult power_iterate(const CutOperator& op, SolveMode mode,
                          const std::vector<std::vector<double>>& deflate,
                          const SolverConfig& cfg) {
    const int n = op.size();
    std::vector<double> b = start_vector(n, cfg.seed, deflate, {});

    PowerResult res;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        std::vector<double> w = symmetric_apply(op, mode, b, cfg.degree_floor);
        orthogonalize(w, deflate);
        const double mu = dot(b, w);
        double resid_sq = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            const double r = w[i] - mu * b[i];
            resid_sq += r * r;
        }
        res.mu = mu;
        res.iterations = it;
        if (std::sqrt(resid_sq) <= cfg.tol * std::max(std::abs(mu), 1.0)) {
            res.converged = true;
            res.z = b;
            return res;
        }
        const double wn = norm(w);
        if (wn < 1e-250) {
            // iterate annihilated; restart from a fresh seed
            b = start_vector(n, cfg.seed + 17 * static_cast<std::uint64_t>(it), deflate, {});
            continue;
        }
        scale(w, 1.0 / wn);
        b = std::move(w);
    }
    res.z = b;
    return res;
}

EigenResult lanczos(const CutOperator& op, SolveMode mode, const SolverConfig& cfg,
                    const std::vector<std::vector<double>>& deflate) {
    const int n = op.size();
    const int space = n - static_cast<int>(deflate.size());
    if (cfg.k < 1 || cfg.k > space)
        throw std::invalid_argument("lanczos: k out of range for the deflated space");
    const std::uint64_t apps_before = op.filter_applications();

    const int m_init = std::min(space, std::max(2 * cfg.k + 10, 30));
    const int max_steps = std::min(space, std::max(cfg.max_iterations, m_init));

    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta; // beta[j] couples V[j] and V[j+1]
    V.push_back(start_vector(n, cfg.seed, deflate, {}));

    EigenResult res;
    res.mode = mode;

    int target = m_init;
    int steps = 0;
    while (true) {
        while (steps < target) {
            const int j = steps;
            std::vector<double> w = symmetric_apply(op, mode, V[static_cast<size_t>(j)],
                                                    cfg.degree_floor);
            const double a = dot(V[static_cast<size_t>(j)], w);
            alpha.push_back(a);
            axpy(-a, V[static_cast<size_t>(j)], w);
            if (j > 0) axpy(-beta[static_cast<size_t>(j - 1)], V[static_cast<size_t>(j - 1)], w);
            // full reorthogonalization against everything we hold
            orthogonalize(w, deflate);
            orthogonalize(w, V);
            const double b = norm(w);
            ++steps;
            if (steps >= target && steps >= max_steps) {
                // last step: no next basis vector needed
                beta.push_back(0.0);
                break;
            }
            if (b < 1e-12) {
                // invariant subspace found; restart orthogonally to it
                if (static_cast<int>(V.size()) + static_cast<int>(deflate.size()) >= n) {
                    target = steps;
                    break;
                }
                beta.push_back(0.0);
                V.push_back(start_vector(n, cfg.seed + 101 * static_cast<std::uint64_t>(j + 1),
                                         deflate, V));
            } else {
                beta.push_back(b);
                scale(w, 1.0 / b);
                V.push_back(std::move(w));
            }
        }

        const int m = static_cast<int>(alpha.size());
        Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
        for (int i = 0; i < m; ++i) diag[i] = alpha[static_cast<size_t>(i)];
        for (int i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("lanczos: tridiagonal eigensolve failed");

        const int kout = std::min(cfg.k, m);
        res.mu.assign(static_cast<size_t>(kout), 0.0);
        res.sym_vectors.assign(static_cast<size_t>(kout), {});
        res.converged.assign(static_cast<size_t>(kout), false);
        bool all_ok = true;
        for (int p = 0; p < kout; ++p) {
            const int col = m - 1 - p; // ascending order from Eigen
            const double theta = es.eigenvalues()[col];
            std::vector<double> z(static_cast<size_t>(n), 0.0);
            for (int j = 0; j < m; ++j)
                axpy(es.eigenvectors()(j, col), V[static_cast<size_t>(j)], z);
            const double zn = norm(z);
            if (zn > 0) scale(z, 1.0 / zn);
            // true residual; one extra application per pair
            std::vector<double> az = symmetric_apply(op, mode, z, cfg.degree_floor);
            orthogonalize(az, deflate);
            double resid_sq = 0.0;
            for (size_t i = 0; i < az.size(); ++i) {
                const double r = az[i] - theta * z[i];
                resid_sq += r * r;
            }
            const bool ok = std::sqrt(resid_sq) <= cfg.tol * std::max(std::abs(theta), 1.0);
            all_ok = all_ok && ok;
            res.mu[static_cast<size_t>(p)] = theta;
            res.sym_vectors[static_cast<size_t>(p)] = std::move(z);
            res.converged[static_cast<size_t>(p)] = ok;
        }

        if (all_ok || steps >= max_steps || steps >= space) break;
        target = std::min(max_steps, target + std::max(cfg.k + 5, 10));
        if (target <= steps) break;
    }

    res.iterations = steps;

    // back-transform to the cut eigenproblem
    res.lambda.resize(res.mu.size());
    res.vectors.resize(res.mu.size());
    if (mode == SolveMode::normalized) {
        const std::vector<double> d = floored_degree(op, cfg.degree_floor);
        for (size_t p = 0; p < res.mu.size(); ++p) {
            res.lambda[p] = 1.0 - res.mu[p];
            std::vector<double> y = res.sym_vectors[p];
            for (size_t i = 0; i < y.size(); ++i) y[i] /= std::sqrt(d[i]);
            res.vectors[p] = std::move(y);
        }
    } else if (mode == SolveMode::average_cut) {
        const double c = average_cut_shift(op);
        for (size_t p = 0; p < res.mu.size(); ++p) {
            res.lambda[p] = c - res.mu[p];
            res.vectors[p] = res.sym_vectors[p];
        }
    } else {
        for (size_t p = 0; p < res.mu.size(); ++p) {
            res.lambda[p] = res.mu[p];
            res.vectors[p] = res.sym_vectors[p];
        }
    }

    res.filter_applications = op.filter_applications() - apps_before;
    return res;
}

EigenResult ncut_eigs(const CutOperator& op, const SolverConfig& cfg) {
    if (cfg.mode != SolveMode::normalized)
        throw std::invalid_argument("ncut_eigs: mode must be normalized");
    const std::uint64_t apps_before = op.filter_applications();
    const int n = op.size();

    const std::vector<double> d = floored_degree(op, cfg.degree_floor);
    std::vector<double> q1(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) q1[static_cast<size_t>(i)] = std::sqrt(d[static_cast<size_t>(i)]);
    scale(q1, 1.0 / norm(q1));

    // verify the analytically known top pair with one application
    const std::vector<double> nq1 = symmetric_apply(op, SolveMode::normalized, q1,
                                                    cfg.degree_floor);
    const double mu1 = dot(q1, nq1);

    EigenResult sub = lanczos(op, SolveMode::normalized, cfg, {q1});

    EigenResult res;
    res.mode = SolveMode::normalized;
    res.mu.push_back(mu1);
    res.lambda.push_back(1.0 - mu1);
    res.sym_vectors.push_back(q1);
    {
        std::vector<double> y1(q1.size());
        for (size_t i = 0; i < q1.size(); ++i) y1[i] = q1[i] / std::sqrt(d[i]);
        res.vectors.push_back(std::move(y1));
    }
    res.converged.push_back(std::abs(mu1 - 1.0) <= std::max(cfg.tol, 1e-9));

    double dnorm = 0.0;
    for (double x : d) dnorm += x * x;
    dnorm = std::sqrt(dnorm);
    for (size_t p = 0; p < sub.mu.size(); ++p) {
        const std::vector<double>& y = sub.vectors[p];
        double yd = 0.0, yn = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            yd += y[i] * d[i];
            yn += y[i] * y[i];
        }
        yn = std::sqrt(yn);
        if (yn > 0 && std::abs(yd) / (yn * dnorm) > 1e-8)
            throw std::runtime_error("ncut_eigs: returned vector violates y^T D 1 = 0");
        res.mu.push_back(sub.mu[p]);
        res.lambda.push_back(sub.lambda[p]);
        res.vectors.push_back(std::move(sub.vectors[p]));
        res.sym_vectors.push_back(std::move(sub.sym_vectors[p]));
        res.converged.push_back(sub.converged[p]);
    }
    res.iterations = sub.iterations;
    res.filter_applications = op.filter_applications() - apps_before;
    return res;
}

} // namespace sfc
