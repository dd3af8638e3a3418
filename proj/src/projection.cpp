#include "sustain/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sustain/error.hpp"

namespace sustain {

BoxSet::BoxSet(int upper) : tau(upper) {
    if (upper < 1) throw InvariantError("BoxSet: tau must be >= 1, got " + std::to_string(upper));
}

int project_scalar(double alpha, BoxSet box) {
    if (std::isnan(alpha)) throw NumericError("project_scalar: NaN input");
    // std::round rounds halfway cases away from zero.
    const double r = std::round(alpha);
    if (r <= 0.0) return 0;
    if (r >= box.tau) return box.tau;
    return static_cast<int>(r);
}

std::vector<double> project_vector(std::span<const double> beta, BoxSet box) {
    std::vector<double> out(beta.begin(), beta.end());
    project_vector_inplace(out, box);
    return out;
}

void project_vector_inplace(std::span<double> values, BoxSet box) {
    for (double& v : values) v = project_scalar(v, box);
}

std::vector<double> unconstrained_column(const ColumnSubproblem& sub) {
    const std::size_t n = sub.current.size();
    if (sub.mttkrp.size() != n || sub.weighted.size() != n) {
        throw DimensionError("column subproblem: vector lengths differ");
    }
    const double denom = sub.gram_kk * static_cast<double>(sub.lambda_k);
    if (!(denom > 0.0)) throw DegenerateColumnError("column subproblem: C(k,k) * lambda(k) is not positive");
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = sub.current[i] + (sub.mttkrp[i] - sub.weighted[i]) / denom;
    return b;
}

std::vector<double> optimal_scaled_column(const ColumnSubproblem& sub, BoxSet box) {
    auto b = unconstrained_column(sub);
    project_vector_inplace(b, box);
    return b;
}

std::vector<double> optimal_scaled_column(const DenseMatrix& residual, std::span<const double> x,
                                          std::int64_t lambda_k, BoxSet box) {
    if (x.size() != residual.rows()) throw DimensionError("optimal_scaled_column: x length mismatch");
    double xx = 0.0;
    for (double v : x) xx += v * v;
    const double denom = xx * static_cast<double>(lambda_k);
    if (!(denom > 0.0)) throw DegenerateColumnError("optimal_scaled_column: lambda * ||x||^2 is not positive");
    std::vector<double> beta(residual.cols(), 0.0);
    for (std::size_t p = 0; p < residual.rows(); ++p) {
        const auto row = residual.row(p);
        for (std::size_t j = 0; j < residual.cols(); ++j) beta[j] += x[p] * row[j];
    }
    for (double& v : beta) v /= denom;
    project_vector_inplace(beta, box);
    return beta;
}

double unconstrained_lambda(const LambdaSubproblem& sub) {
    const std::size_t n = sub.column.size();
    if (sub.mttkrp.size() != n || sub.weighted.size() != n) {
        throw DimensionError("lambda subproblem: vector lengths differ");
    }
    double ff = 0.0;
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ff += sub.column[i] * sub.column[i];
        num += sub.column[i] * (sub.mttkrp[i] - sub.weighted[i]);
    }
    const double denom = sub.gram_kk * ff;
    if (!(denom > 0.0)) throw DegenerateColumnError("lambda subproblem: C(k,k) * ||F(:,k)||^2 is not positive");
    return static_cast<double>(sub.lambda_k) + num / denom;
}

std::int64_t round_lambda(double alpha) {
    if (std::isnan(alpha)) throw NumericError("lambda update: NaN");
    if (alpha >= 0x1.0p62) throw NumericError("lambda update: value exceeds the 64-bit range");
    const double r = std::round(alpha);
    return r < 1.0 ? 1 : static_cast<std::int64_t>(r);
}

std::int64_t optimal_lambda(const LambdaSubproblem& sub) {
    return round_lambda(unconstrained_lambda(sub));
}

std::int64_t optimal_lambda(std::span<const double> u, const DenseMatrix& residual, std::span<const double> v) {
    if (u.size() != residual.rows() || v.size() != residual.cols()) {
        throw DimensionError("optimal_lambda: vector lengths do not match the residual");
    }
    double uu = 0.0;
    double vv = 0.0;
    for (double x : u) uu += x * x;
    for (double x : v) vv += x * x;
    const double denom = uu * vv;
    if (!(denom > 0.0)) throw DegenerateColumnError("optimal_lambda: zero-norm column");
    double num = 0.0;
    for (std::size_t p = 0; p < residual.rows(); ++p) {
        const auto row = residual.row(p);
        double s = 0.0;
        for (std::size_t j = 0; j < residual.cols(); ++j) s += row[j] * v[j];
        num += u[p] * s;
    }
    return round_lambda(num / denom);
}

} // namespace sustain
