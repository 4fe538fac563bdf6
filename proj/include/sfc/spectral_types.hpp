#pragma once

#include <cstdint>
#include <vector>

namespace sfc {

/// Which eigenproblem the operator spectrum is mapped onto.
///   normalized   : D^{-1/2} W D^{-1/2} z = mu z, cut eigenvalue lambda = 1 - mu
///   association  : W x = lambda x (operator eigenvalue is the cut eigenvalue)
///   average_cut  : (D - W) x = lambda x, solved as (cI - (D-W)) with c = 2 max(d),
///                  so lambda = c - mu
enum class SolveMode { normalized, association, average_cut };

/// Eigenpairs of the cut operator. mu is sorted descending; vectors holds the
/// back-transformed solutions y (for the normalized mode y = d^{-1/2} .* z),
/// sym_vectors the orthonormal symmetric-form vectors z they came from.
struct EigenResult {
    SolveMode mode = SolveMode::normalized;
    std::vector<double> mu;
    std::vector<double> lambda;
    std::vector<std::vector<double>> vectors;
    std::vector<std::vector<double>> sym_vectors;
    std::vector<bool> converged;
    int iterations = 0;
    std::uint64_t filter_applications = 0;

    bool all_converged() const {
        for (bool c : converged)
            if (!c) return false;
        return true;
    }
};

} // namespace sfc
