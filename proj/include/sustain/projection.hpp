#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sustain/dense_matrix.hpp"

namespace sustain {

/// The integer box {0, 1, ..., tau}.
struct BoxSet {
    int tau = 5;

    explicit BoxSet(int upper);
};

/// Nearest point of {0..tau}: min(max(round(alpha), 0), tau), with .5 ties
/// rounded away from zero. Throws NumericError on NaN.
int project_scalar(double alpha, BoxSet box);

/// Coordinatewise project_scalar.
std::vector<double> project_vector(std::span<const double> beta, BoxSet box);
void project_vector_inplace(std::span<double> values, BoxSet box);

/// One column update expressed through cached intermediates instead of a
/// dense residual. For column k of factor F:
///   current   = F(:,k)
///   mttkrp    = M(:,k)
///   weighted  = t = F (lambda * C(:,k)), using the present lambda(k)
///   gram_kk   = C(k,k)
struct ColumnSubproblem {
    std::span<const double> current;
    std::span<const double> mttkrp;
    std::span<const double> weighted;
    double gram_kk = 0.0;
    std::int64_t lambda_k = 1;
};

/// Unconstrained minimizer b = F(:,k) + (M(:,k) - t) / (C(k,k) lambda(k)).
/// Throws DegenerateColumnError if the denominator is not positive.
std::vector<double> unconstrained_column(const ColumnSubproblem& sub);

/// argmin over b in {0..tau}^N of ||R_k - lambda(k) x b^T||^2, solved by
/// projecting the unconstrained minimizer onto the box.
std::vector<double> optimal_scaled_column(const ColumnSubproblem& sub, BoxSet box);

/// Same problem with the residual given explicitly: residual is P x N, x has
/// length P.
std::vector<double> optimal_scaled_column(const DenseMatrix& residual, std::span<const double> x,
                                          std::int64_t lambda_k, BoxSet box);

/// Inputs of the lambda(k) step, again through cached intermediates:
/// alpha = lambda(k) + F(:,k)^T (M(:,k) - t) / (C(k,k) ||F(:,k)||^2).
struct LambdaSubproblem {
    std::span<const double> column;
    std::span<const double> mttkrp;
    std::span<const double> weighted;
    double gram_kk = 0.0;
    std::int64_t lambda_k = 1;
};

/// Real-valued stationary point alpha of the lambda(k) quadratic.
double unconstrained_lambda(const LambdaSubproblem& sub);

/// max(1, round(alpha)), the minimizer of the convex quadratic over the
/// positive integers. Throws DegenerateColumnError on zero norms and
/// NumericError if the result does not fit in 62 bits.
std::int64_t optimal_lambda(const LambdaSubproblem& sub);

/// Explicit form: max(1, round(u^T R v / (||u||^2 ||v||^2))).
std::int64_t optimal_lambda(std::span<const double> u, const DenseMatrix& residual,
                            std::span<const double> v);

/// Rounds a real lambda candidate into the positive integers with overflow
/// checking.
std::int64_t round_lambda(double alpha);

} // namespace sustain
