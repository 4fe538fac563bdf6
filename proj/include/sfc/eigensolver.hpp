#pragma once

#include <cstdint>
#include <vector>

#include "sfc/cut_operator.hpp"
#include "sfc/spectral_types.hpp"

namespace sfc {

struct SolverConfig {
    int k = 1;                    // requested eigenpairs
    double tol = 1e-6;            // residual tolerance |Az - mu z| <= tol max(|mu|,1)
    int max_iterations = 300;     // cap on total operator applications per solve
    std::uint64_t seed = 0;       // start-vector RNG
    SolveMode mode = SolveMode::normalized;
    double degree_floor = 1e-12;
};

/// One application of the symmetric form of the chosen eigenproblem:
///   normalized  : d^{-1/2} .* W (d^{-1/2} .* z)
///   association : W z
///   average_cut : c z - (d .* z - W z), c = 2 max(d)
std::vector<double> symmetric_apply(const CutOperator& op, SolveMode mode,
                                    const std::vector<double>& z,
                                    double degree_floor = 1e-12);

/// Shift used by the average_cut mode (2 max(d)).
double average_cut_shift(const CutOperator& op);

struct PowerResult {
    double mu = 0.0;
    std::vector<double> z;
    int iterations = 0;
    bool converged = false;
};

/// Deflated power iteration: b_{k+1} = A b_k / |A b_k|, reorthogonalized
/// against the (orthonormal) deflate set every step.
PowerResult power_iterate(const CutOperator& op, SolveMode mode,
                          const std::vector<std::vector<double>>& deflate,
                          const SolverConfig& cfg);

/// Lanczos with full reorthogonalization against the deflate set and all
/// stored basis vectors. Returns the top-k Ritz pairs (descending), extended
/// past the initial m = min(n, max(2k+10, 30)) steps until residuals meet tol
/// or max_iterations is hit; unconverged pairs are flagged, not fatal.
EigenResult lanczos(const CutOperator& op, SolveMode mode, const SolverConfig& cfg,
                    const std::vector<std::vector<double>>& deflate = {});

/// Normalized-cut eigenpairs: deflates the known top vector d^{1/2}/|d^{1/2}|,
/// verifies its eigenvalue with one application, then runs Lanczos for cfg.k
/// further pairs. Result index 0 is the constant pair; indices 1..k the
/// nontrivial ones. Enforces y_j^T d ~ 0 for j >= 1.
EigenResult ncut_eigs(const CutOperator& op, const SolverConfig& cfg);

} // namespace sfc
