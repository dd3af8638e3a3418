#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sustain/dense_matrix.hpp"
#include "sustain/model.hpp"
#include "sustain/solver.hpp"
#include "sustain/sparse_tensor.hpp"

namespace sustain {

/// |Pearson correlation| between every column of d1 (rows k) and d2
/// (columns j). Throws MetricUndefinedError on a zero-variance column.
DenseMatrix cross_correlation(const DenseMatrix& d1, const DenseMatrix& d2);

/// (2R - sum_j max_k C(k,j) - sum_k max_j C(k,j)) / 2R, in [0, 1]; zero when
/// d2 is a column permutation of d1.
double dissimilarity(const DenseMatrix& d1, const DenseMatrix& d2);

struct StabilityOptions {
    std::vector<std::size_t> ranks;
    std::size_t repetitions = 20;
    /// Mode whose factor is compared between runs.
    std::size_t assess_mode = 1;
    /// Worker threads; 0 means SUSTAIN_THREADS or the hardware count.
    std::size_t threads = 0;
};

struct StabilityPair {
    std::size_t first = 0;
    std::size_t second = 0;
    double diss = 0.0;
};

struct StabilityRun {
    std::size_t rank = 0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double fit = 0.0;
    bool degenerate = false;
};

struct RankStability {
    std::size_t rank = 0;
    double score = 0.0;
    std::vector<StabilityPair> pairs;
    std::vector<StabilityRun> runs;
};

struct StabilityReport {
    std::size_t repetitions = 0;
    std::size_t assess_mode = 1;
    std::vector<RankStability> per_rank;
    std::size_t selected_rank = 0;
    /// Highest-fit run at the selected rank.
    std::size_t best_repetition = 0;
    double best_fit = 0.0;
    IntegerFactorModel best_model;
    std::vector<std::string> warnings;
};

/// Average pairwise dissimilarity over the B(B-1)/2 pairs of a rank.
double stability_score(const std::vector<DenseMatrix>& factors);

/// Runs the solver `repetitions` times per candidate rank with distinct
/// seeds (derived from config.seed, rank and repetition), scores each rank
/// by its mean pairwise dissimilarity and selects the minimizer (smallest
/// rank on ties). Runs whose assessed factor has a zero-variance column are
/// excluded with a warning.
StabilityReport stability_select(const SparseTensor& x, const StabilityOptions& options,
                                 const SolverConfig& config);

/// Worker count from SUSTAIN_THREADS, else the hardware concurrency.
std::size_t default_worker_count();

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

enum class NoiseKind { none, poisson };

struct PlantedSpec {
    std::vector<std::size_t> dims;
    std::size_t rank = 3;
    int tau = 5;
    std::int64_t lambda_min = 1;
    std::int64_t lambda_max = 5;
    /// Target fraction of nonzero cells in the assembled tensor.
    double density = 0.1;
    NoiseKind noise = NoiseKind::none;
    /// Mean of the Poisson count added to every nonzero.
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

struct PlantedInstance {
    IntegerFactorModel truth;
    SparseTensor tensor;
    PlantedSpec spec;
};

/// Samples integer factors whose columns each have a fixed number of
/// nonzeros (values uniform in 1..tau), chosen so the union of the rank-one
/// supports covers roughly `density` of the cells, plus lambda uniform in
/// [lambda_min, lambda_max]; assembles X exactly and optionally adds Poisson
/// noise to its nonzeros. Throws InvariantError on an infeasible spec.
PlantedInstance generate_planted(const PlantedSpec& spec);

// ---------------------------------------------------------------------------
// Sparsity versus fit
// ---------------------------------------------------------------------------

/// Keeps the `k` largest entries of every column (mode > 0) or every row
/// (mode 0) of each factor; `keep[n]` is the k of mode n.
RealFactorModel truncate_top_k(const RealFactorModel& model, const std::vector<std::size_t>& keep);

struct SparsityComparison {
    std::vector<std::size_t> integer_nnz;
    std::vector<std::size_t> truncated_nnz;
    std::vector<std::size_t> keep;
    double integer_fit = 0.0;
    double truncated_fit = 0.0;
    double real_fit = 0.0;
};

/// Truncation targets matching the integer factors' sparsity: mode 0 keeps
/// round(nnz / I_0) per row, other modes round(nnz / R) per column, clamped
/// to at least one.
std::vector<std::size_t> matching_keep(const IntegerFactorModel& model);

/// Fits an integer model (sustain) and a real nonnegative model, truncates
/// the real model to the integer model's sparsity and reports both fits.
SparsityComparison sparsity_vs_fit_comparison(const SparseTensor& x, const SolverConfig& config);

} // namespace sustain
