#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sustain/dense_matrix.hpp"
#include "sustain/model.hpp"
#include "sustain/rng.hpp"
#include "sustain/solver.hpp"
#include "sustain/sparse_tensor.hpp"

namespace sustain {

// ---------------------------------------------------------------------------
// Real-valued nonnegative factorizations (HALS)
// ---------------------------------------------------------------------------

struct RealFitOptions {
    std::size_t rank = 1;
    double tol = 1e-6;
    std::size_t max_iters = 200;
};

struct RealFitResult {
    RealFactorModel model;
    /// Objective per sweep, entry 0 for the starting point.
    std::vector<double> objective;
};

/// Nonnegative matrix factorization X ~ U V^T by HALS; lambda stays all-ones.
RealFitResult nmf_hals(const SparseTensor& x, const RealFitOptions& options, Rng& rng);

/// Nonnegative CP decomposition by HALS. Columns are normalized to unit
/// length after every mode update with the norms moved into lambda.
RealFitResult cp_als_nonneg(const SparseTensor& x, const RealFitOptions& options, Rng& rng);

/// nmf_hals for matrices, cp_als_nonneg otherwise.
RealFitResult fit_real_model(const SparseTensor& x, const RealFitOptions& options, Rng& rng);

// ---------------------------------------------------------------------------
// Post-processing heuristics
// ---------------------------------------------------------------------------

/// Absorbs lambda^(1/d) into every factor column, rounds every entry into
/// {0..tau}, sets lambda to ones and repairs zeroed columns.
IntegerFactorModel round_model(const RealFactorModel& real, int tau, Rng& rng);

/// Absorbs lambda^(1/d) as round_model does, then scales every column so its
/// maximum is tau before rounding; the product of the inverse scalings,
/// rounded and clamped to >= 1, becomes lambda.
IntegerFactorModel scale_and_round_model(const RealFactorModel& real, int tau, Rng& rng);

// ---------------------------------------------------------------------------
// Box-constrained integer least squares
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxIlsDimension = 24;

/// Reduction of min ||G z - y||^2 to the triangular form ||R z - yhat||^2.
/// One reduction serves every right-hand side sharing the basis G.
class IlsReduction {
public:
    /// Householder QR of the basis.
    static IlsReduction from_basis(const DenseMatrix& basis);

    [[nodiscard]] std::size_t dimension() const noexcept { return r_.rows(); }
    [[nodiscard]] bool regularized() const noexcept { return regularized_; }
    [[nodiscard]] const DenseMatrix& triangular() const noexcept { return r_; }

    /// yhat = R^{-T} (G^T y), given the already-formed G^T y.
    [[nodiscard]] std::vector<double> reduce_rhs(std::span<const double> gty) const;

private:
    DenseMatrix r_;
    bool regularized_ = false;
};

struct IlsBox {
    std::vector<std::int64_t> lower;
    std::vector<std::int64_t> upper;

    static IlsBox uniform(std::size_t n, std::int64_t lo, std::int64_t hi);
};

struct IlsSolution {
    std::vector<std::int64_t> z;
    /// ||R z - yhat||^2, the objective up to a constant.
    double reduced_objective = 0.0;
    std::uint64_t nodes = 0;
    bool regularized = false;
};

/// Global minimizer of ||R z - yhat||^2 over the box by depth-first
/// Schnorr-Euchner enumeration with box pruning.
IlsSolution box_ils_search(const DenseMatrix& r, std::span<const double> yhat, const IlsBox& box);

/// Global minimizer of ||G z - y||^2 over integer z in the box. Throws
/// CapacityError when G has more than kMaxIlsDimension columns.
IlsSolution box_ils_solve(const DenseMatrix& basis, std::span<const double> y, const IlsBox& box);

// ---------------------------------------------------------------------------
// Alternating integer least squares
// ---------------------------------------------------------------------------

/// Largest number of rows of the materialized V (.) U basis of the lambda
/// solve.
inline constexpr std::size_t kMaxAilsKrpRows = 20'000'000;

/// Matrix-only baseline: every sweep solves each row of U exactly (basis
/// V diag(lambda)), then each row of V (basis U diag(lambda)), then lambda
/// from the vectorized problem (V (.) U) lambda ~ vec(X). Initialization and
/// stopping follow `config` exactly as in sustain_m.
SolverResult ails_matrix(const SparseTensor& x, const SolverConfig& config);

} // namespace sustain
