#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sustain/dense_matrix.hpp"
#include "sustain/model.hpp"
#include "sustain/rng.hpp"
#include "sustain/sparse_tensor.hpp"

namespace sustain {

enum class InitScheme { random, random_sampling, round_seed, scale_round_seed, explicit_model };

enum class ConvergenceMetric {
    /// |J_prev - J| / ||X||^2 < tol
    normalized,
    /// |J_prev - J| < tol
    raw,
};

struct SolverConfig {
    std::size_t rank = 1;
    int tau = 5;
    double tol = 1e-4;
    std::size_t max_iters = 200;
    InitScheme init = InitScheme::random;
    std::uint64_t seed = 0;
    ConvergenceMetric convergence = ConvergenceMetric::normalized;
    /// Record the objective after every factor update, not only per sweep.
    bool objective_tracking = true;
    /// Used when init == explicit_model.
    std::optional<IntegerFactorModel> initial_model;
    /// Sweep budget and tolerance of the real-valued fit behind the
    /// round/scale-round seeds.
    std::size_t seed_max_iters = 200;
    double seed_tol = 1e-6;

    /// Throws InvariantError on rank 0, tau < 1 or tol <= 0.
    void validate() const;
};

/// Per-sweep record. Entry 0 describes the initial model.
struct SolverTrace {
    std::vector<double> objective;
    std::vector<double> fit;
    std::vector<double> seconds;
    std::vector<std::size_t> zero_lock_repairs;
    /// Multiply and add operations counted by the sweep's kernels.
    std::vector<std::uint64_t> flops;
    /// Objective after each individual factor update (objective_tracking).
    std::vector<double> update_objective;
    /// Sweep index of each update_objective entry.
    std::vector<std::size_t> update_sweep;
    bool converged = false;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t sweeps() const noexcept {
        return objective.empty() ? 0 : objective.size() - 1;
    }
};

/// Scratch vectors of the factor update, reused across columns.
struct UpdateWorkspace {
    /// t = F (lambda * C(:,k))
    std::vector<double> weighted;
    /// t_k = F(:,k) * lambda(k) * C(k,k)
    std::vector<double> own;
    std::vector<double> column;
    std::vector<double> mttkrp_column;
};

/// Counts of one factor update.
struct UpdateStats {
    std::size_t zero_lock_repairs = 0;
    std::uint64_t flops = 0;
};

/// Sets one uniformly chosen coordinate of an all-zero column to 1. Returns
/// true if a repair happened; non-zero columns are left untouched and no
/// random number is drawn for them.
bool zero_lock_repair(std::span<double> column, Rng& rng);

/// Repairs every all-zero column of `f`, left to right.
std::size_t zero_lock_repair_columns(DenseMatrix& f, Rng& rng);

/// Loads column k of F and M into the workspace and forms t and t_k.
void prepare_component(const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                       std::span<const std::int64_t> lambda, std::size_t k, UpdateWorkspace& ws);

/// Optimal lambda(k) for the prepared component; adjusts t in place to the
/// new lambda(k).
std::int64_t update_component_lambda(const DenseMatrix& c, std::span<std::int64_t> lambda,
                                     std::size_t k, UpdateWorkspace& ws);

/// Optimal column k given the updated lambda(k), written back into F, with
/// zero-lock repair. Returns true if the column had to be repaired.
bool update_component_column(DenseMatrix& f, const DenseMatrix& c,
                             std::span<const std::int64_t> lambda, std::size_t k, int tau,
                             Rng& rng, UpdateWorkspace& ws);

/// One pass over the R components of factor F: for k = 1..R update lambda(k),
/// then F(:,k), each exactly optimal with everything else fixed. `m` is the
/// product of the data with the Khatri-Rao product of the other factors and
/// `c` the Hadamard product of their Gram matrices.
UpdateStats update_factor(DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                          std::span<std::int64_t> lambda, int tau, Rng& rng, UpdateWorkspace& ws);

/// Objective ||X - Xhat||^2 right after a factor update, from the data norm,
/// the updated factor F, the M and C used in that update and the current
/// lambda. No pass over the data is needed.
double objective_after_update(double norm_x_sq, const DenseMatrix& f, const DenseMatrix& m,
                              const DenseMatrix& c, std::span<const std::int64_t> lambda);

/// Builds the starting model for `x`. Random draws happen in this order:
/// real-valued seed fit (round schemes), factor entries mode by mode in
/// row-major order, then zero-lock repairs column by column.
IntegerFactorModel initialize(const SparseTensor& x, const SolverConfig& config, Rng& rng);

struct SolverResult {
    IntegerFactorModel model;
    SolverTrace trace;
};

/// Integer matrix factorization X ~ U diag(lambda) V^T.
SolverResult sustain_m(const SparseTensor& x, const SolverConfig& config);

/// Integer CP factorization of an order-d tensor. For d = 2 the result is
/// bit-identical to sustain_m under the same configuration.
SolverResult sustain_t(const SparseTensor& x, const SolverConfig& config);

/// Runs sustain_m or sustain_t by tensor order.
SolverResult sustain(const SparseTensor& x, const SolverConfig& config);

} // namespace sustain
