#include "sustain/oracles.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sustain/error.hpp"

namespace sustain::oracle {

namespace {

std::uint64_t candidate_count(std::size_t n, int tau) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n; ++i) {
        count *= static_cast<std::uint64_t>(tau) + 1;
        if (count > kMaxCandidates) {
            throw CapacityError("oracle: search space exceeds " + std::to_string(kMaxCandidates) + " candidates");
        }
    }
    return count;
}

// Advances a base-(tau+1) counter; returns false after the last candidate.
bool next_candidate(std::vector<double>& b, int tau) {
    for (std::size_t i = b.size(); i-- > 0;) {
        if (b[i] < tau) {
            b[i] += 1.0;
            return true;
        }
        b[i] = 0.0;
    }
    return false;
}

} // namespace

double column_objective(const DenseMatrix& residual, std::span<const double> x, std::int64_t lambda_k,
                        std::span<const double> b) {
    const auto lam = static_cast<double>(lambda_k);
    double s = 0.0;
    for (std::size_t p = 0; p < residual.rows(); ++p) {
        for (std::size_t j = 0; j < residual.cols(); ++j) {
            const double e = residual(p, j) - lam * x[p] * b[j];
            s += e * e;
        }
    }
    return s;
}

double lambda_objective(const DenseMatrix& residual, std::span<const double> u, std::span<const double> v,
                        double lambda_k) {
    double s = 0.0;
    for (std::size_t p = 0; p < residual.rows(); ++p) {
        for (std::size_t j = 0; j < residual.cols(); ++j) {
            const double e = residual(p, j) - lambda_k * u[p] * v[j];
            s += e * e;
        }
    }
    return s;
}

ColumnOptimum brute_force_column(const DenseMatrix& residual, std::span<const double> x, std::int64_t lambda_k,
                                 BoxSet box) {
    candidate_count(residual.cols(), box.tau);
    std::vector<double> b(residual.cols(), 0.0);
    ColumnOptimum best{b, std::numeric_limits<double>::infinity()};
    do {
        const double obj = column_objective(residual, x, lambda_k, b);
        if (obj < best.objective) best = {b, obj};
    } while (next_candidate(b, box.tau));
    return best;
}

ColumnOptimum brute_force_nearest(std::span<const double> beta, BoxSet box) {
    candidate_count(beta.size(), box.tau);
    std::vector<double> b(beta.size(), 0.0);
    ColumnOptimum best{b, std::numeric_limits<double>::infinity()};
    do {
        double obj = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) obj += (beta[i] - b[i]) * (beta[i] - b[i]);
        if (obj < best.objective) best = {b, obj};
    } while (next_candidate(b, box.tau));
    return best;
}

LambdaOptimum brute_force_lambda(const DenseMatrix& residual, std::span<const double> u, std::span<const double> v) {
    double uu = 0.0;
    double vv = 0.0;
    for (double a : u) uu += a * a;
    for (double a : v) vv += a * a;
    if (!(uu * vv > 0.0)) throw DegenerateColumnError("brute_force_lambda: zero-norm vector");
    double num = 0.0;
    for (std::size_t p = 0; p < residual.rows(); ++p) {
        for (std::size_t j = 0; j < residual.cols(); ++j) num += u[p] * residual(p, j) * v[j];
    }
    const double center = std::max(num / (uu * vv), 0.0);
    const double cap = std::ceil(2.0 * center) + 2.0;
    if (cap > static_cast<double>(kMaxCandidates)) throw CapacityError("brute_force_lambda: window too large");

    LambdaOptimum best{1, std::numeric_limits<double>::infinity()};
    for (std::int64_t lam = 1; lam <= static_cast<std::int64_t>(cap); ++lam) {
        const double obj = lambda_objective(residual, u, v, static_cast<double>(lam));
        if (obj < best.objective) best = {lam, obj};
    }
    return best;
}

} // namespace sustain::oracle
