#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "reference.hpp"
#include "sustain/error.hpp"
#include "sustain/oracles.hpp"
#include "sustain/projection.hpp"
#include "sustain/rng.hpp"

using namespace sustain;
using namespace sustain::testing;

namespace {

// Integer-valued residual with entries in [-lo, hi].
DenseMatrix integer_matrix(std::size_t rows, std::size_t cols, int lo, int hi, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = static_cast<double>(rng.uniform_int(lo, hi));
    return m;
}

std::vector<double> nonzero_integer_vector(std::size_t n, int tau, Rng& rng) {
    std::vector<double> x(n, 0.0);
    for (double& v : x) v = static_cast<double>(rng.uniform_int(0, tau));
    x[rng.uniform_index(n)] = static_cast<double>(rng.uniform_int(1, tau));
    return x;
}

} // namespace

TEST(ProjectScalar, Examples) {
    const BoxSet box(5);
    EXPECT_EQ(project_scalar(7.2, box), 5);
    EXPECT_EQ(project_scalar(-1.3, box), 0);
    EXPECT_EQ(project_scalar(2.4, box), 2);
    EXPECT_EQ(project_scalar(2.5, box), 3);
    EXPECT_EQ(project_scalar(-0.5, box), 0);
    EXPECT_EQ(project_scalar(4.5, box), 5);
    EXPECT_THROW(project_scalar(NAN, box), NumericError);
    EXPECT_EQ(project_scalar(INFINITY, box), 5);
}

TEST(BoxSet, RejectsNonPositiveTau) {
    EXPECT_THROW(BoxSet(0), InvariantError);
    EXPECT_NO_THROW(BoxSet(1));
}

TEST(ProjectVector, Examples) {
    const BoxSet box(5);
    EXPECT_EQ(project_vector(std::vector<double>{0.2, 4.9, 9.0}, box), (std::vector<double>{0, 5, 5}));
    EXPECT_EQ(project_vector(std::vector<double>(4, 0.0), box), std::vector<double>(4, 0.0));
}

TEST(ProjectVector, MatchesNearestPointOracle) {
    Rng rng(3);
    const BoxSet box(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> beta(4);
        for (double& b : beta) b = -2.0 + 7.0 * rng.uniform_real();
        const auto got = project_vector(beta, box);
        const auto oracle = oracle::brute_force_nearest(beta, box);
        EXPECT_EQ(got, oracle.argmin);
    }
}

TEST(ProjectVector, Idempotent) {
    Rng rng(8);
    const BoxSet box(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> beta(6);
        for (double& b : beta) b = -3.0 + 10.0 * rng.uniform_real();
        const auto once = project_vector(beta, box);
        EXPECT_EQ(project_vector(once, box), once);
    }
}

TEST(OptimalScaledColumn, ZeroResidualFixedPoint) {
    const std::vector<double> x{1, 2, 0, 3};
    const std::vector<double> b_star{2, 0, 5, 1, 4};
    const std::int64_t lam = 3;
    DenseMatrix r(4, 5);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t j = 0; j < 5; ++j) r(p, j) = lam * x[p] * b_star[j];
    }
    EXPECT_EQ(optimal_scaled_column(r, x, lam, BoxSet(5)), b_star);
}

TEST(OptimalScaledColumn, N3Tau2MatchesExhaustive) {
    Rng rng(19);
    const BoxSet box(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = integer_matrix(4, 3, -4, 9, rng);
        const auto x = nonzero_integer_vector(4, 3, rng);
        const std::int64_t lam = rng.uniform_int(1, 3);
        const auto got = optimal_scaled_column(r, x, lam, box);
        const auto oracle = oracle::brute_force_column(r, x, lam, box);
        EXPECT_EQ(oracle::column_objective(r, x, lam, got), oracle.objective);
    }
}

TEST(OptimalScaledColumn, NegativeCorrelationGivesZero) {
    const std::vector<double> x{1, 2, 1};
    DenseMatrix r(3, 4);
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t j = 0; j < 4; ++j) r(p, j) = -static_cast<double>(p + j);
    }
    EXPECT_EQ(optimal_scaled_column(r, x, 2, BoxSet(5)), std::vector<double>(4, 0.0));
}

TEST(OptimalScaledColumn, ZeroDenominatorIsDegenerate) {
    const DenseMatrix r(3, 2, 1.0);
    EXPECT_THROW(optimal_scaled_column(r, std::vector<double>(3, 0.0), 1, BoxSet(5)), DegenerateColumnError);
    const std::vector<double> col{1.0, 0.0};
    const ColumnSubproblem sub{col, col, col, 0.0, 1};
    EXPECT_THROW(optimal_scaled_column(sub, BoxSet(5)), DegenerateColumnError);
}

TEST(OptimalScaledColumn, CachedFormMatchesDenseForm) {
    // Residual R_k = X - sum_{r != k} lambda_r u_r v_r^T built explicitly;
    // the cached form uses M = X^T U and C = U^T U.
    Rng rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t rows = 5;
        const std::size_t cols = 4;
        const std::size_t rank = 3;
        const auto x = integer_matrix(rows, cols, 0, 6, rng);
        DenseMatrix u(rows, rank);
        DenseMatrix v(cols, rank);
        for (std::size_t k = 0; k < rank; ++k) {
            u.set_column(k, nonzero_integer_vector(rows, 3, rng));
            v.set_column(k, nonzero_integer_vector(cols, 3, rng));
        }
        std::vector<std::int64_t> lambda{rng.uniform_int(1, 3), rng.uniform_int(1, 3), rng.uniform_int(1, 3)};
        const std::size_t k = rng.uniform_index(rank);

        DenseMatrix resid_t(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                double s = x(i, j);
                for (std::size_t r = 0; r < rank; ++r) {
                    if (r != k) s -= lambda[r] * u(i, r) * v(j, r);
                }
                resid_t(i, j) = s;
            }
        }
        const auto m = matmul(transpose(x), u);
        const auto c = matmul(transpose(u), u);
        std::vector<double> t(cols, 0.0);
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t r = 0; r < rank; ++r) t[j] += v(j, r) * lambda[r] * c(r, k);
        }
        const auto vk = v.column(k);
        const auto mk = m.column(k);
        const ColumnSubproblem sub{vk, mk, t, c(k, k), lambda[k]};
        const auto cached = optimal_scaled_column(sub, BoxSet(4));
        const auto dense = optimal_scaled_column(resid_t, u.column(k), lambda[k], BoxSet(4));
        EXPECT_EQ(cached, dense);

        const LambdaSubproblem lsub{vk, mk, t, c(k, k), lambda[k]};
        EXPECT_EQ(optimal_lambda(lsub), optimal_lambda(u.column(k), resid_t, vk));
    }
}

TEST(OptimalLambda, ExactScale) {
    const std::vector<double> u{1, 2, 1};
    const std::vector<double> v{2, 1};
    DenseMatrix r(3, 2);
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t j = 0; j < 2; ++j) r(p, j) = 3.0 * u[p] * v[j];
    }
    EXPECT_EQ(optimal_lambda(u, r, v), 3);
}

TEST(OptimalLambda, NonPositiveCorrelationGivesOne) {
    const std::vector<double> u{1, 2};
    const std::vector<double> v{1, 1};
    EXPECT_EQ(optimal_lambda(u, DenseMatrix(2, 2, -1.0), v), 1);
    EXPECT_EQ(optimal_lambda(u, DenseMatrix(2, 2, 0.0), v), 1);
}

TEST(OptimalLambda, MatchesWindowedOracle) {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto r = integer_matrix(4, 3, -3, 20, rng);
        const auto u = nonzero_integer_vector(4, 3, rng);
        const auto v = nonzero_integer_vector(3, 3, rng);
        const std::int64_t got = optimal_lambda(u, r, v);
        EXPECT_GE(got, 1);
        const auto oracle = oracle::brute_force_lambda(r, u, v);
        EXPECT_EQ(oracle::lambda_objective(r, u, v, static_cast<double>(got)), oracle.objective);
    }
}

TEST(OptimalLambda, ZeroNormIsDegenerate) {
    EXPECT_THROW(optimal_lambda(std::vector<double>{0, 0}, DenseMatrix(2, 2, 1.0), std::vector<double>{1, 1}),
                 DegenerateColumnError);
    const std::vector<double> z{0.0, 0.0};
    const LambdaSubproblem sub{z, z, z, 1.0, 1};
    EXPECT_THROW(optimal_lambda(sub), DegenerateColumnError);
}

TEST(RoundLambda, ClampsAndChecksRange) {
    EXPECT_EQ(round_lambda(-5.0), 1);
    EXPECT_EQ(round_lambda(0.49), 1);
    EXPECT_EQ(round_lambda(2.5), 3);
    EXPECT_EQ(round_lambda(7.49), 7);
    EXPECT_THROW(round_lambda(NAN), NumericError);
    EXPECT_THROW(round_lambda(1e30), NumericError);
}

TEST(Oracles, ColumnOracleAgreesWithProjection) {
    // With R = x b^T structure the column problem is the nearest-point
    // problem in a metric scaled by lambda^2 ||x||^2, so both oracles agree.
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(4);
        const BoxSet box(static_cast<int>(1 + rng.uniform_index(3)));
        const auto r = random_matrix(3, n, -2.0, 8.0, 1000 + trial);
        const std::vector<double> x{1.0 + rng.uniform_index(2), 1.0, static_cast<double>(rng.uniform_index(3))};
        const std::int64_t lam = rng.uniform_int(1, 2);
        const auto exhaustive = oracle::brute_force_column(r, x, lam, box);
        const auto projected = optimal_scaled_column(r, x, lam, box);
        EXPECT_EQ(projected, exhaustive.argmin);
    }
}

TEST(Oracles, SingleCoordinateReducesToProjectScalar) {
    const BoxSet box(4);
    for (double beta : {-1.2, 0.3, 1.7, 2.5, 3.49, 9.0}) {
        const auto o = oracle::brute_force_nearest(std::vector<double>{beta}, box);
        const double p = project_scalar(beta, box);
        EXPECT_EQ((beta - p) * (beta - p), o.objective);
        // Off a tie the minimizer is unique.
        if (beta != 2.5) EXPECT_EQ(o.argmin.front(), p);
    }
}

TEST(Oracles, GlobalMinimumBeatsUnitNeighbours) {
    const BoxSet box(3);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto r = random_matrix(4, 3, -1.0, 9.0, 2000 + s);
        const std::vector<double> x{1.0, 2.0, 0.0, 1.0};
        const auto best = oracle::brute_force_column(r, x, 2, box);
        for (std::size_t j = 0; j < 3; ++j) {
            for (double step : {-1.0, 1.0}) {
                auto nb = best.argmin;
                nb[j] += step;
                if (nb[j] < 0 || nb[j] > box.tau) continue;
                EXPECT_GT(oracle::column_objective(r, x, 2, nb), best.objective);
            }
        }
    }
}

TEST(Oracles, CapacityCap) {
    const DenseMatrix r(1, 13, 1.0);
    EXPECT_THROW(oracle::brute_force_column(r, std::vector<double>{1.0}, 1, BoxSet(3)), CapacityError);
}

TEST(MonotoneStep, ColumnAndLambdaNeverIncreaseObjective) {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const auto resid = integer_matrix(4, 5, -2, 8, rng);
        const auto u = nonzero_integer_vector(4, 4, rng);
        auto v = nonzero_integer_vector(5, 4, rng);
        std::int64_t lam = rng.uniform_int(1, 4);
        const double before = oracle::lambda_objective(resid, u, v, static_cast<double>(lam));
        lam = optimal_lambda(u, resid, v);
        const double mid = oracle::lambda_objective(resid, u, v, static_cast<double>(lam));
        EXPECT_LE(mid, before);
        v = optimal_scaled_column(resid, u, lam, BoxSet(4));
        const double after = oracle::lambda_objective(resid, u, v, static_cast<double>(lam));
        EXPECT_LE(after, mid);
    }
}
