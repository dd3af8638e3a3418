#include "sustain/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sustain/baselines.hpp"
#include "sustain/error.hpp"
#include "sustain/kernels.hpp"
#include "sustain/projection.hpp"

namespace sustain {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool column_is_zero(const DenseMatrix& f, std::size_t k) {
    for (std::size_t i = 0; i < f.rows(); ++i) {
        if (f(i, k) != 0.0) return false;
    }
    return true;
}

void check_update_shapes(const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c, std::size_t rank) {
    if (f.cols() != rank) throw DimensionError("update_factor: factor rank does not match lambda");
    if (m.rows() != f.rows() || m.cols() != rank) throw DimensionError("update_factor: M has the wrong shape");
    if (c.rows() != rank || c.cols() != rank) throw DimensionError("update_factor: C has the wrong shape");
}

double objective_with_gram(double norm_x_sq, const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                           const DenseMatrix& g, std::span<const std::int64_t> lambda) {
    const std::size_t rank = lambda.size();
    std::vector<double> col_inner(rank, 0.0);
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const auto frow = f.row(i);
        const auto mrow = m.row(i);
        for (std::size_t r = 0; r < rank; ++r) col_inner[r] += frow[r] * mrow[r];
    }
    double inner = 0.0;
    for (std::size_t r = 0; r < rank; ++r) inner += static_cast<double>(lambda[r]) * col_inner[r];
    double model_sq = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
        for (std::size_t b = 0; b < rank; ++b) {
            model_sq += static_cast<double>(lambda[a]) * (c(a, b) * g(a, b)) * static_cast<double>(lambda[b]);
        }
    }
    return std::max(0.0, norm_x_sq - 2.0 * inner + model_sq);
}

std::uint64_t gram_flops(std::size_t rows, std::size_t rank) {
    return static_cast<std::uint64_t>(rows) * rank * (rank + 1);
}

bool has_converged(double previous, double current, double norm_x_sq, const SolverConfig& config) {
    const double diff = std::abs(previous - current);
    if (config.convergence == ConvergenceMetric::raw) return diff < config.tol;
    return diff / norm_x_sq < config.tol;
}

// Sweep bookkeeping shared by the matrix and tensor drivers so both produce
// identical traces.
class TraceRecorder {
public:
    TraceRecorder(SolverTrace& trace, const SolverConfig& config, double norm_x_sq, Clock::time_point start)
        : trace_(trace), config_(config), norm_x_sq_(norm_x_sq), start_(start) {}

    void record_initial(double objective) {
        trace_.objective.push_back(objective);
        trace_.fit.push_back(fit_from_residual(objective, norm_x_sq_));
        trace_.seconds.push_back(seconds_since(start_));
        trace_.zero_lock_repairs.push_back(0);
        trace_.flops.push_back(0);
    }

    void record_update(std::size_t sweep, double objective, const UpdateStats& stats) {
        repairs_ += stats.zero_lock_repairs;
        flops_ += stats.flops;
        last_ = objective;
        if (config_.objective_tracking) {
            trace_.update_objective.push_back(objective);
            trace_.update_sweep.push_back(sweep);
        }
    }

    void add_flops(std::uint64_t flops) { flops_ += flops; }

    // Closes a sweep; returns true when the stopping rule is met.
    bool close_sweep() {
        const double previous = trace_.objective.back();
        trace_.objective.push_back(last_);
        trace_.fit.push_back(fit_from_residual(last_, norm_x_sq_));
        trace_.seconds.push_back(seconds_since(start_));
        trace_.zero_lock_repairs.push_back(repairs_);
        trace_.flops.push_back(flops_);
        repairs_ = 0;
        flops_ = 0;
        return has_converged(previous, last_, norm_x_sq_, config_);
    }

private:
    SolverTrace& trace_;
    const SolverConfig& config_;
    double norm_x_sq_;
    Clock::time_point start_;
    double last_ = 0.0;
    std::size_t repairs_ = 0;
    std::uint64_t flops_ = 0;
};

double checked_norm(const SparseTensor& x) {
    if (x.nnz() == 0) throw NumericError("solver: input tensor has no nonzeros");
    const double nx = x.norm_sq();
    if (!(nx > 0.0)) throw NumericError("solver: input tensor is all zero");
    return nx;
}

void warn_on_rank(const SparseTensor& x, const SolverConfig& config, SolverTrace& trace) {
    const std::size_t smallest = *std::min_element(x.dims().begin(), x.dims().end());
    if (config.rank > smallest) {
        trace.warnings.push_back("rank " + std::to_string(config.rank) + " exceeds the smallest dimension " +
                                 std::to_string(smallest));
    }
}

// Scales a nonnegative vector so its maximum is at most tau, then rounds.
void fill_scaled_column(DenseMatrix& f, std::size_t k, std::span<const double> values, int tau) {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, v);
    const double scale = mx > tau ? tau / mx : 1.0;
    const BoxSet box(tau);
    for (std::size_t i = 0; i < values.size(); ++i) f(i, k) = project_scalar(values[i] * scale, box);
}

DenseMatrix random_factor(std::size_t rows, std::size_t rank, int tau, Rng& rng) {
    DenseMatrix f(rows, rank);
    for (double& v : f.values()) v = static_cast<double>(rng.uniform_int(0, tau));
    return f;
}

// Offsets of each mode-0 index in the sorted nonzero list.
std::vector<std::size_t> leading_offsets(const SparseTensor& x) {
    std::vector<std::size_t> start(x.dim(0) + 1, 0);
    for (std::size_t e = 0; e < x.nnz(); ++e) ++start[x.index(e)[0] + 1];
    for (std::size_t i = 0; i < x.dim(0); ++i) start[i + 1] += start[i];
    return start;
}

IntegerFactorModel sampling_init(const SparseTensor& x, const SolverConfig& config, Rng& rng) {
    const std::size_t d = x.order();
    if (d > 3) {
        throw UnsupportedSchemeError("random_sampling initialization is defined for matrices and order-3 tensors");
    }
    const std::size_t rank = config.rank;
    IntegerFactorModel model;
    model.tau = config.tau;
    model.lambda.assign(rank, 1);
    model.factors.push_back(random_factor(x.dim(0), rank, config.tau, rng));
    for (std::size_t n = 1; n < d; ++n) model.factors.emplace_back(x.dim(n), rank);

    const auto start = leading_offsets(x);
    std::vector<std::size_t> populated;
    for (std::size_t i = 0; i < x.dim(0); ++i) {
        if (start[i + 1] > start[i]) populated.push_back(i);
    }

    for (std::size_t j = 0; j < rank; ++j) {
        const std::size_t i = populated[rng.uniform_index(populated.size())];
        if (d == 2) {
            std::vector<double> row(x.dim(1), 0.0);
            for (std::size_t e = start[i]; e < start[i + 1]; ++e) row[x.index(e)[1]] = x.value(e);
            fill_scaled_column(model.factors[1], j, row, config.tau);
            continue;
        }
        // Slice X(i,:,:): the mode-2 fiber with the largest sum populates
        // A3(:,j), the mode-1 fiber with the largest sum populates A2(:,j).
        std::vector<double> fiber1_sum(x.dim(1), 0.0);
        std::vector<double> fiber2_sum(x.dim(2), 0.0);
        for (std::size_t e = start[i]; e < start[i + 1]; ++e) {
            const auto idx = x.index(e);
            fiber1_sum[idx[1]] += x.value(e);
            fiber2_sum[idx[2]] += x.value(e);
        }
        const auto p = static_cast<std::size_t>(std::max_element(fiber1_sum.begin(), fiber1_sum.end()) - fiber1_sum.begin());
        const auto q = static_cast<std::size_t>(std::max_element(fiber2_sum.begin(), fiber2_sum.end()) - fiber2_sum.begin());
        std::vector<double> along2(x.dim(2), 0.0);
        std::vector<double> along1(x.dim(1), 0.0);
        for (std::size_t e = start[i]; e < start[i + 1]; ++e) {
            const auto idx = x.index(e);
            if (idx[1] == p) along2[idx[2]] = x.value(e);
            if (idx[2] == q) along1[idx[1]] = x.value(e);
        }
        fill_scaled_column(model.factors[1], j, along1, config.tau);
        fill_scaled_column(model.factors[2], j, along2, config.tau);
    }
    return model;
}

} // namespace

void SolverConfig::validate() const {
    if (rank < 1) throw InvariantError("SolverConfig: rank must be >= 1");
    if (tau < 1) throw InvariantError("SolverConfig: tau must be >= 1");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InvariantError("SolverConfig: tol must be positive");
}

bool zero_lock_repair(std::span<double> column, Rng& rng) {
    if (column.empty()) return false;
    for (double v : column) {
        if (v != 0.0) return false;
    }
    column[rng.uniform_index(column.size())] = 1.0;
    return true;
}

std::size_t zero_lock_repair_columns(DenseMatrix& f, Rng& rng) {
    std::size_t repairs = 0;
    for (std::size_t k = 0; k < f.cols(); ++k) {
        if (column_is_zero(f, k) && f.rows() > 0) {
            f(rng.uniform_index(f.rows()), k) = 1.0;
            ++repairs;
        }
    }
    return repairs;
}

void prepare_component(const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                       std::span<const std::int64_t> lambda, std::size_t k, UpdateWorkspace& ws) {
    const std::size_t rows = f.rows();
    const std::size_t rank = f.cols();
    ws.weighted.assign(rows, 0.0);
    ws.own.resize(rows);
    ws.column.resize(rows);
    ws.mttkrp_column.resize(rows);

    std::vector<double> w(rank);
    for (std::size_t r = 0; r < rank; ++r) w[r] = static_cast<double>(lambda[r]) * c(r, k);
    const double own_scale = static_cast<double>(lambda[k]) * c(k, k);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto frow = f.row(i);
        double s = 0.0;
        for (std::size_t r = 0; r < rank; ++r) s += frow[r] * w[r];
        ws.weighted[i] = s;
        ws.column[i] = frow[k];
        ws.own[i] = frow[k] * own_scale;
        ws.mttkrp_column[i] = m(i, k);
    }
}

std::int64_t update_component_lambda(const DenseMatrix& c, std::span<std::int64_t> lambda, std::size_t k,
                                     UpdateWorkspace& ws) {
    const LambdaSubproblem sub{ws.column, ws.mttkrp_column, ws.weighted, c(k, k), lambda[k]};
    const std::int64_t updated = optimal_lambda(sub);
    lambda[k] = updated;
    // t <- t - t_k + F(:,k) * lambda'(k) * C(k,k)
    const double own_scale = static_cast<double>(updated) * c(k, k);
    for (std::size_t i = 0; i < ws.weighted.size(); ++i) {
        const double own = ws.column[i] * own_scale;
        ws.weighted[i] = ws.weighted[i] - ws.own[i] + own;
        ws.own[i] = own;
    }
    return updated;
}

bool update_component_column(DenseMatrix& f, const DenseMatrix& c, std::span<const std::int64_t> lambda,
                             std::size_t k, int tau, Rng& rng, UpdateWorkspace& ws) {
    const ColumnSubproblem sub{ws.column, ws.mttkrp_column, ws.weighted, c(k, k), lambda[k]};
    std::vector<double> b = optimal_scaled_column(sub, BoxSet(tau));
    const bool repaired = zero_lock_repair(b, rng);
    f.set_column(k, b);
    return repaired;
}

UpdateStats update_factor(DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                          std::span<std::int64_t> lambda, int tau, Rng& rng, UpdateWorkspace& ws) {
    const std::size_t rank = lambda.size();
    check_update_shapes(f, m, c, rank);
    const std::size_t rows = f.rows();
    UpdateStats stats;
    for (std::size_t k = 0; k < rank; ++k) {
        if (!(c(k, k) > 0.0)) {
            throw DegenerateColumnError("update_factor: C(" + std::to_string(k) + "," + std::to_string(k) +
                                        ") is not positive; another factor has a zero column");
        }
        if (column_is_zero(f, k)) {
            f(rng.uniform_index(rows), k) = 1.0;
            ++stats.zero_lock_repairs;
        }
        prepare_component(f, m, c, lambda, k, ws);
        update_component_lambda(c, lambda, k, ws);
        if (update_component_column(f, c, lambda, k, tau, rng, ws)) ++stats.zero_lock_repairs;
        stats.flops += 2ULL * rows * rank + 12ULL * rows;
    }
    return stats;
}

double objective_after_update(double norm_x_sq, const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                              std::span<const std::int64_t> lambda) {
    check_update_shapes(f, m, c, lambda.size());
    return objective_with_gram(norm_x_sq, f, m, c, gram(f), lambda);
}

IntegerFactorModel initialize(const SparseTensor& x, const SolverConfig& config, Rng& rng) {
    config.validate();
    const std::size_t d = x.order();
    IntegerFactorModel model;

    switch (config.init) {
    case InitScheme::random:
        model.tau = config.tau;
        model.lambda.assign(config.rank, 1);
        for (std::size_t n = 0; n < d; ++n) model.factors.push_back(random_factor(x.dim(n), config.rank, config.tau, rng));
        break;
    case InitScheme::random_sampling:
        if (x.nnz() == 0) throw NumericError("initialize: sampling needs at least one nonzero");
        model = sampling_init(x, config, rng);
        break;
    case InitScheme::round_seed:
    case InitScheme::scale_round_seed: {
        const RealFitOptions options{config.rank, config.seed_tol, config.seed_max_iters};
        const RealFitResult real = fit_real_model(x, options, rng);
        model = config.init == InitScheme::round_seed ? round_model(real.model, config.tau, rng)
                                                      : scale_and_round_model(real.model, config.tau, rng);
        break;
    }
    case InitScheme::explicit_model:
        if (!config.initial_model) throw InvariantError("initialize: explicit scheme without an initial model");
        model = *config.initial_model;
        if (model.dims() != x.dims()) throw DimensionError("initialize: initial model dims do not match the tensor");
        if (model.rank() != config.rank) throw DimensionError("initialize: initial model rank does not match config");
        if (model.tau != config.tau) throw InvariantError("initialize: initial model tau does not match config");
        break;
    }

    for (auto& f : model.factors) zero_lock_repair_columns(f, rng);
    model.check_invariants();
    return model;
}

SolverResult sustain_m(const SparseTensor& x, const SolverConfig& config) {
    if (x.order() != 2) throw DimensionError("sustain_m: input must be a matrix");
    config.validate();
    const double nx = checked_norm(x);
    const auto start = Clock::now();

    SolverResult result;
    warn_on_rank(x, config, result.trace);
    Rng rng(config.seed);
    result.model = initialize(x, config, rng);
    IntegerFactorModel& model = result.model;
    DenseMatrix& u = model.factors[0];
    DenseMatrix& v = model.factors[1];
    const std::size_t rank = config.rank;

    const CsrMatrix xr = CsrMatrix::from_tensor(x);
    const CsrMatrix xt = xr.transposed();
    TraceRecorder recorder(result.trace, config, nx, start);
    recorder.record_initial(residual_norm_sq(x, model));

    UpdateWorkspace ws;
    for (std::size_t sweep = 1; sweep <= config.max_iters; ++sweep) {
        {
            const DenseMatrix m = spmm(xr, v);
            const DenseMatrix c = gram(v);
            recorder.add_flops(2ULL * x.nnz() * rank + gram_flops(v.rows(), rank));
            const UpdateStats stats = update_factor(u, m, c, model.lambda, config.tau, rng, ws);
            recorder.record_update(sweep, objective_with_gram(nx, u, m, c, gram(u), model.lambda), stats);
        }
        {
            const DenseMatrix m = spmm(xt, u);
            const DenseMatrix c = gram(u);
            recorder.add_flops(2ULL * x.nnz() * rank + gram_flops(u.rows(), rank));
            const UpdateStats stats = update_factor(v, m, c, model.lambda, config.tau, rng, ws);
            recorder.record_update(sweep, objective_with_gram(nx, v, m, c, gram(v), model.lambda), stats);
        }
        if (recorder.close_sweep()) {
            result.trace.converged = true;
            break;
        }
    }
    model.check_invariants();
    return result;
}

SolverResult sustain_t(const SparseTensor& x, const SolverConfig& config) {
    config.validate();
    const double nx = checked_norm(x);
    const auto start = Clock::now();

    SolverResult result;
    warn_on_rank(x, config, result.trace);
    Rng rng(config.seed);
    result.model = initialize(x, config, rng);
    IntegerFactorModel& model = result.model;
    const std::size_t d = x.order();
    const std::size_t rank = config.rank;

    std::vector<DenseMatrix> grams;
    grams.reserve(d);
    for (const auto& f : model.factors) grams.push_back(gram(f));

    TraceRecorder recorder(result.trace, config, nx, start);
    recorder.record_initial(residual_norm_sq(x, model));

    UpdateWorkspace ws;
    for (std::size_t sweep = 1; sweep <= config.max_iters; ++sweep) {
        for (std::size_t n = 0; n < d; ++n) {
            const DenseMatrix m = mttkrp(x, model.factors, n);
            const DenseMatrix c = hadamard_excluding(grams, n);
            recorder.add_flops(static_cast<std::uint64_t>(d) * x.nnz() * rank +
                               static_cast<std::uint64_t>(d - 2) * rank * rank);
            const UpdateStats stats = update_factor(model.factors[n], m, c, model.lambda, config.tau, rng, ws);
            grams[n] = gram(model.factors[n]);
            recorder.add_flops(gram_flops(model.factors[n].rows(), rank));
            recorder.record_update(sweep, objective_with_gram(nx, model.factors[n], m, c, grams[n], model.lambda),
                                   stats);
        }
        if (recorder.close_sweep()) {
            result.trace.converged = true;
            break;
        }
    }
    model.check_invariants();
    return result;
}

SolverResult sustain(const SparseTensor& x, const SolverConfig& config) {
    return x.order() == 2 ? sustain_m(x, config) : sustain_t(x, config);
}

} // namespace sustain
