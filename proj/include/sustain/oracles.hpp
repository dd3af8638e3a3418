#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sustain/dense_matrix.hpp"
#include "sustain/projection.hpp"

namespace sustain::oracle {

// Exhaustive minimizers used to certify the closed-form subproblem solvers.
// They evaluate the objective directly and share no code with the solvers.

inline constexpr std::uint64_t kMaxCandidates = 1'000'000;

struct ColumnOptimum {
    std::vector<double> argmin;
    double objective = 0.0;
};

struct LambdaOptimum {
    std::int64_t argmin = 1;
    double objective = 0.0;
};

/// ||R - lambda x b^T||_F^2.
double column_objective(const DenseMatrix& residual, std::span<const double> x,
                        std::int64_t lambda_k, std::span<const double> b);

/// ||R - lambda u v^T||_F^2.
double lambda_objective(const DenseMatrix& residual, std::span<const double> u,
                        std::span<const double> v, double lambda_k);

/// Enumerates all of {0..tau}^N in lexicographic order and keeps the first
/// strict minimum. Throws CapacityError if (tau+1)^N > kMaxCandidates.
ColumnOptimum brute_force_column(const DenseMatrix& residual, std::span<const double> x,
                                 std::int64_t lambda_k, BoxSet box);

/// ||beta - b||^2 over {0..tau}^N; the nearest-point form of the projection.
ColumnOptimum brute_force_nearest(std::span<const double> beta, BoxSet box);

/// Scans lambda = 1..cap with cap = ceil(2 * max(unconstrained optimum, 0)) + 2.
LambdaOptimum brute_force_lambda(const DenseMatrix& residual, std::span<const double> u,
                                 std::span<const double> v);

} // namespace sustain::oracle
