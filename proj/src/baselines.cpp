#include "sustain/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "sustain/error.hpp"
#include "sustain/kernels.hpp"
#include "sustain/projection.hpp"

namespace sustain {

namespace {

using Clock = std::chrono::steady_clock;

// Floor of the nonnegative projection; keeps HALS denominators positive.
constexpr double kHalsFloor = 1e-16;

double real_objective(double norm_x_sq, const DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c,
                      std::span<const double> lambda) {
    const std::size_t rank = lambda.size();
    const DenseMatrix g = gram(f);
    double inner = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        for (std::size_t r = 0; r < rank; ++r) inner += lambda[r] * f(i, r) * m(i, r);
    }
    double model_sq = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
        for (std::size_t b = 0; b < rank; ++b) model_sq += lambda[a] * c(a, b) * g(a, b) * lambda[b];
    }
    return std::max(0.0, norm_x_sq - 2.0 * inner + model_sq);
}

// Exact nonnegative least-squares update of every column of F in turn, with
// lambda held fixed.
void hals_update_real(DenseMatrix& f, const DenseMatrix& m, const DenseMatrix& c, std::span<const double> lambda) {
    const std::size_t rows = f.rows();
    const std::size_t rank = f.cols();
    std::vector<double> w(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const double denom = lambda[k] * c(k, k);
        if (!(denom > 0.0)) continue;
        for (std::size_t r = 0; r < rank; ++r) w[r] = lambda[r] * c(r, k);
        for (std::size_t i = 0; i < rows; ++i) {
            const auto frow = f.row(i);
            double t = 0.0;
            for (std::size_t r = 0; r < rank; ++r) t += frow[r] * w[r];
            f(i, k) = std::max(kHalsFloor, f(i, k) + (m(i, k) - t) / denom);
        }
    }
}

void normalize_columns(DenseMatrix& f, std::vector<double>& lambda) {
    for (std::size_t k = 0; k < f.cols(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.rows(); ++i) s += f(i, k) * f(i, k);
        const double norm = std::sqrt(s);
        if (!(norm > 0.0)) continue;
        for (std::size_t i = 0; i < f.rows(); ++i) f(i, k) /= norm;
        lambda[k] *= norm;
    }
}

RealFitResult hals_driver(const SparseTensor& x, const RealFitOptions& options, Rng& rng, bool normalize) {
    if (options.rank < 1) throw InvariantError("HALS: rank must be >= 1");
    const double nx = x.norm_sq();
    if (!(nx > 0.0)) throw NumericError("HALS: input tensor is all zero");
    const std::size_t d = x.order();
    const std::size_t rank = options.rank;

    RealFitResult result;
    RealFactorModel& model = result.model;
    model.lambda.assign(rank, 1.0);
    for (std::size_t n = 0; n < d; ++n) {
        DenseMatrix f(x.dim(n), rank);
        for (double& v : f.values()) v = rng.uniform_real();
        model.factors.push_back(std::move(f));
    }
    std::vector<DenseMatrix> grams;
    for (const auto& f : model.factors) grams.push_back(gram(f));
    result.objective.push_back(residual_norm_sq(x, model));

    for (std::size_t sweep = 0; sweep < options.max_iters; ++sweep) {
        double objective = 0.0;
        for (std::size_t n = 0; n < d; ++n) {
            const DenseMatrix m = mttkrp(x, model.factors, n);
            const DenseMatrix c = hadamard_excluding(grams, n);
            hals_update_real(model.factors[n], m, c, model.lambda);
            objective = real_objective(nx, model.factors[n], m, c, model.lambda);
            if (normalize) normalize_columns(model.factors[n], model.lambda);
            grams[n] = gram(model.factors[n]);
        }
        const double previous = result.objective.back();
        result.objective.push_back(objective);
        if (std::abs(previous - objective) / nx < options.tol) break;
    }
    return result;
}

// Moves lambda(k)^(1/d) into every factor column k.
std::vector<DenseMatrix> absorb_lambda(const RealFactorModel& real) {
    const std::size_t d = real.order();
    if (d < 2) throw DimensionError("real model must have at least two factors");
    std::vector<DenseMatrix> factors = real.factors;
    for (std::size_t k = 0; k < real.rank(); ++k) {
        const double lam = real.lambda[k];
        if (!(lam >= 0.0) || !std::isfinite(lam)) throw NumericError("real model: lambda must be finite and >= 0");
        const double root = d == 3 ? std::cbrt(lam) : std::pow(lam, 1.0 / static_cast<double>(d));
        for (auto& f : factors) {
            if (f.cols() != real.rank()) throw DimensionError("real model: factor rank does not match lambda");
            for (std::size_t i = 0; i < f.rows(); ++i) f(i, k) *= root;
        }
    }
    return factors;
}

DenseMatrix scaled_basis(const DenseMatrix& f, std::span<const std::int64_t> lambda) {
    DenseMatrix g = f;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t r = 0; r < g.cols(); ++r) g(i, r) *= static_cast<double>(lambda[r]);
    }
    return g;
}

} // namespace

RealFitResult nmf_hals(const SparseTensor& x, const RealFitOptions& options, Rng& rng) {
    if (x.order() != 2) throw DimensionError("nmf_hals: input must be a matrix");
    return hals_driver(x, options, rng, false);
}

RealFitResult cp_als_nonneg(const SparseTensor& x, const RealFitOptions& options, Rng& rng) {
    return hals_driver(x, options, rng, true);
}

RealFitResult fit_real_model(const SparseTensor& x, const RealFitOptions& options, Rng& rng) {
    return x.order() == 2 ? nmf_hals(x, options, rng) : cp_als_nonneg(x, options, rng);
}

IntegerFactorModel round_model(const RealFactorModel& real, int tau, Rng& rng) {
    const BoxSet box(tau);
    IntegerFactorModel model;
    model.tau = tau;
    model.factors = absorb_lambda(real);
    model.lambda.assign(real.rank(), 1);
    for (auto& f : model.factors) project_vector_inplace(f.values(), box);
    for (auto& f : model.factors) zero_lock_repair_columns(f, rng);
    return model;
}

IntegerFactorModel scale_and_round_model(const RealFactorModel& real, int tau, Rng& rng) {
    const BoxSet box(tau);
    IntegerFactorModel model;
    model.tau = tau;
    model.factors = absorb_lambda(real);
    std::vector<double> gamma_product(real.rank(), 1.0);
    for (auto& f : model.factors) {
        for (std::size_t k = 0; k < f.cols(); ++k) {
            double mx = 0.0;
            for (std::size_t i = 0; i < f.rows(); ++i) mx = std::max(mx, f(i, k));
            const double gamma = mx > 0.0 ? tau / mx : 1.0;
            gamma_product[k] *= gamma;
            for (std::size_t i = 0; i < f.rows(); ++i) f(i, k) = project_scalar(gamma * f(i, k), box);
        }
    }
    model.lambda.resize(real.rank());
    for (std::size_t k = 0; k < real.rank(); ++k) model.lambda[k] = round_lambda(1.0 / gamma_product[k]);
    for (auto& f : model.factors) zero_lock_repair_columns(f, rng);
    return model;
}

// ---------------------------------------------------------------------------

IlsReduction IlsReduction::from_basis(const DenseMatrix& basis) {
    const auto rows = static_cast<Eigen::Index>(basis.rows());
    const auto n = static_cast<Eigen::Index>(basis.cols());
    if (n == 0) throw DimensionError("ILS: basis has no columns");
    Eigen::MatrixXd g(rows, n);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = basis(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }

    IlsReduction red;
    red.r_ = DenseMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    bool deficient = rows < n;
    if (!deficient) {
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        const Eigen::MatrixXd& packed = qr.matrixQR();
        double max_diag = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(packed(i, i)));
        for (Eigen::Index i = 0; i < n && !deficient; ++i) {
            deficient = !(std::abs(packed(i, i)) > 1e-12 * max_diag);
        }
        if (!deficient) {
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = i; j < n; ++j) {
                    red.r_(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = packed(i, j);
                }
            }
            return red;
        }
    }

    // Rank deficient: factor G^T G + delta I instead.
    Eigen::MatrixXd gtg = g.transpose() * g;
    const double trace = gtg.trace();
    const double delta = trace > 0.0 ? 1e-10 * trace : 1e-10;
    gtg.diagonal().array() += delta;
    const Eigen::LLT<Eigen::MatrixXd> llt(gtg);
    if (llt.info() != Eigen::Success) throw NumericError("ILS: regularized Gram matrix is not positive definite");
    const Eigen::MatrixXd upper = llt.matrixU();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            red.r_(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = upper(i, j);
        }
    }
    red.regularized_ = true;
    return red;
}

std::vector<double> IlsReduction::reduce_rhs(std::span<const double> gty) const {
    const std::size_t n = r_.rows();
    if (gty.size() != n) throw DimensionError("ILS: right-hand side length mismatch");
    // Forward substitution with R^T.
    std::vector<double> yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = gty[i];
        for (std::size_t j = 0; j < i; ++j) s -= r_(j, i) * yhat[j];
        yhat[i] = s / r_(i, i);
    }
    return yhat;
}

IlsBox IlsBox::uniform(std::size_t n, std::int64_t lo, std::int64_t hi) {
    return {std::vector<std::int64_t>(n, lo), std::vector<std::int64_t>(n, hi)};
}

namespace {

class SchnorrEuchner {
public:
    SchnorrEuchner(const DenseMatrix& r, std::span<const double> yhat, const IlsBox& box)
        : r_(r), yhat_(yhat), box_(box), z_(r.rows(), 0), best_z_(r.rows(), 0) {}

    IlsSolution run() {
        const std::size_t n = r_.rows();
        search(n - 1, 0.0);
        IlsSolution sol;
        sol.z = best_z_;
        sol.reduced_objective = best_;
        sol.nodes = nodes_;
        return sol;
    }

private:
    void search(std::size_t level, double partial) {
        double s = yhat_[level];
        for (std::size_t j = level + 1; j < z_.size(); ++j) s -= r_(level, j) * static_cast<double>(z_[j]);
        const double rkk = r_(level, level);
        const double center = s / rkk;
        const std::int64_t lo = box_.lower[level];
        const std::int64_t hi = box_.upper[level];

        std::int64_t first;
        if (center <= static_cast<double>(lo)) {
            first = lo;
        } else if (center >= static_cast<double>(hi)) {
            first = hi;
        } else {
            first = static_cast<std::int64_t>(std::llround(center));
        }
        // Candidates in order of increasing distance from the center, both
        // directions bounded by the box.
        std::int64_t below = first - 1;
        std::int64_t above = first + 1;
        std::int64_t candidate = first;
        while (true) {
            ++nodes_;
            const double diff = rkk * (static_cast<double>(candidate) - center);
            const double cost = partial + diff * diff;
            if (cost >= best_) break;
            z_[level] = candidate;
            if (level == 0) {
                best_ = cost;
                best_z_ = z_;
            } else {
                search(level - 1, cost);
            }
            const bool below_ok = below >= lo;
            const bool above_ok = above <= hi;
            if (!below_ok && !above_ok) break;
            if (below_ok && (!above_ok || center - static_cast<double>(below) <= static_cast<double>(above) - center)) {
                candidate = below--;
            } else {
                candidate = above++;
            }
        }
    }

    const DenseMatrix& r_;
    std::span<const double> yhat_;
    const IlsBox& box_;
    std::vector<std::int64_t> z_;
    std::vector<std::int64_t> best_z_;
    double best_ = std::numeric_limits<double>::infinity();
    std::uint64_t nodes_ = 0;
};

} // namespace

IlsSolution box_ils_search(const DenseMatrix& r, std::span<const double> yhat, const IlsBox& box) {
    const std::size_t n = r.rows();
    if (n == 0 || r.cols() != n) throw DimensionError("ILS: triangular factor must be square");
    if (n > kMaxIlsDimension) throw CapacityError("ILS: dimension " + std::to_string(n) + " exceeds " +
                                                  std::to_string(kMaxIlsDimension));
    if (yhat.size() != n || box.lower.size() != n || box.upper.size() != n) {
        throw DimensionError("ILS: box or right-hand side length mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (box.lower[i] > box.upper[i]) throw InvariantError("ILS: empty box");
    }
    return SchnorrEuchner(r, yhat, box).run();
}

IlsSolution box_ils_solve(const DenseMatrix& basis, std::span<const double> y, const IlsBox& box) {
    if (basis.cols() > kMaxIlsDimension) {
        throw CapacityError("ILS: dimension " + std::to_string(basis.cols()) + " exceeds " +
                            std::to_string(kMaxIlsDimension));
    }
    if (y.size() != basis.rows()) throw DimensionError("ILS: y length does not match the basis");
    const IlsReduction red = IlsReduction::from_basis(basis);
    std::vector<double> gty(basis.cols(), 0.0);
    for (std::size_t i = 0; i < basis.rows(); ++i) {
        for (std::size_t j = 0; j < basis.cols(); ++j) gty[j] += basis(i, j) * y[i];
    }
    const auto yhat = red.reduce_rhs(gty);
    IlsSolution sol = box_ils_search(red.triangular(), yhat, box);
    sol.regularized = red.regularized();
    return sol;
}

// ---------------------------------------------------------------------------

namespace {

// Solves every row of F against the shared basis G = other * diag(lambda);
// the rows of `data` are the right-hand sides.
std::uint64_t solve_rows(DenseMatrix& f, const CsrMatrix& data, const DenseMatrix& other,
                         std::span<const std::int64_t> lambda, int tau, bool& regularized) {
    const std::size_t rank = lambda.size();
    const DenseMatrix basis = scaled_basis(other, lambda);
    const IlsReduction red = IlsReduction::from_basis(basis);
    regularized = regularized || red.regularized();
    const IlsBox box = IlsBox::uniform(rank, 0, tau);
    std::uint64_t flops = 2ULL * basis.rows() * rank * rank;
    std::vector<double> gty(rank);
    for (std::size_t i = 0; i < data.rows; ++i) {
        std::fill(gty.begin(), gty.end(), 0.0);
        for (std::size_t p = data.row_ptr[i]; p < data.row_ptr[i + 1]; ++p) {
            const auto brow = basis.row(data.col_idx[p]);
            for (std::size_t r = 0; r < rank; ++r) gty[r] += data.values[p] * brow[r];
        }
        const auto yhat = red.reduce_rhs(gty);
        const IlsSolution sol = box_ils_search(red.triangular(), yhat, box);
        for (std::size_t r = 0; r < rank; ++r) f(i, r) = static_cast<double>(sol.z[r]);
        flops += 2ULL * (data.row_ptr[i + 1] - data.row_ptr[i]) * rank + rank * rank + 2ULL * sol.nodes * rank;
    }
    return flops;
}

std::uint64_t solve_lambda(const SparseTensor& x, const IntegerFactorModel& model, std::vector<std::int64_t>& lambda,
                           bool& regularized) {
    const DenseMatrix& u = model.factors[0];
    const DenseMatrix& v = model.factors[1];
    const std::size_t rows = u.rows();
    const std::size_t cols = v.rows();
    const std::size_t rank = lambda.size();
    if (rows * cols > kMaxAilsKrpRows) throw CapacityError("AILS: Khatri-Rao basis of the lambda solve is too large");

    // Column-major vec(X) pairs with V (.) U: row j*M + i holds V(j,:) * U(i,:).
    DenseMatrix krp(rows * cols, rank);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i) {
            auto dst = krp.row(j * rows + i);
            for (std::size_t r = 0; r < rank; ++r) dst[r] = v(j, r) * u(i, r);
        }
    }
    const IlsReduction red = IlsReduction::from_basis(krp);
    regularized = regularized || red.regularized();
    std::vector<double> gty(rank, 0.0);
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const auto idx = x.index(e);
        for (std::size_t r = 0; r < rank; ++r) gty[r] += x.value(e) * u(idx[0], r) * v(idx[1], r);
    }
    const auto yhat = red.reduce_rhs(gty);
    const IlsSolution sol =
        box_ils_search(red.triangular(), yhat, IlsBox::uniform(rank, 1, std::int64_t{1} << 40));
    lambda = sol.z;
    return 2ULL * rows * cols * rank * rank + 3ULL * x.nnz() * rank + 2ULL * sol.nodes * rank;
}

} // namespace

SolverResult ails_matrix(const SparseTensor& x, const SolverConfig& config) {
    if (x.order() != 2) throw DimensionError("ails_matrix: input must be a matrix");
    config.validate();
    if (config.rank > kMaxIlsDimension) {
        throw CapacityError("ails_matrix: rank " + std::to_string(config.rank) + " exceeds " +
                            std::to_string(kMaxIlsDimension));
    }
    if (x.nnz() == 0 || !(x.norm_sq() > 0.0)) throw NumericError("ails_matrix: input tensor is all zero");
    const double nx = x.norm_sq();
    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    SolverResult result;
    SolverTrace& trace = result.trace;
    Rng rng(config.seed);
    result.model = initialize(x, config, rng);
    IntegerFactorModel& model = result.model;

    const CsrMatrix xr = CsrMatrix::from_tensor(x);
    const CsrMatrix xt = xr.transposed();

    double objective = residual_norm_sq(x, model);
    trace.objective.push_back(objective);
    trace.fit.push_back(fit_from_residual(objective, nx));
    trace.seconds.push_back(elapsed());
    trace.zero_lock_repairs.push_back(0);
    trace.flops.push_back(0);

    bool regularized = false;
    for (std::size_t sweep = 1; sweep <= config.max_iters; ++sweep) {
        std::size_t repairs = 0;
        std::uint64_t flops = 0;
        auto record = [&] {
            objective = residual_norm_sq(x, model);
            if (config.objective_tracking) {
                trace.update_objective.push_back(objective);
                trace.update_sweep.push_back(sweep);
            }
        };

        flops += solve_rows(model.factors[0], xr, model.factors[1], model.lambda, config.tau, regularized);
        repairs += zero_lock_repair_columns(model.factors[0], rng);
        record();
        flops += solve_rows(model.factors[1], xt, model.factors[0], model.lambda, config.tau, regularized);
        repairs += zero_lock_repair_columns(model.factors[1], rng);
        record();
        flops += solve_lambda(x, model, model.lambda, regularized);
        record();

        const double previous = trace.objective.back();
        trace.objective.push_back(objective);
        trace.fit.push_back(fit_from_residual(objective, nx));
        trace.seconds.push_back(elapsed());
        trace.zero_lock_repairs.push_back(repairs);
        trace.flops.push_back(flops);
        const double diff = std::abs(previous - objective);
        const bool done = config.convergence == ConvergenceMetric::raw ? diff < config.tol : diff / nx < config.tol;
        if (done) {
            trace.converged = true;
            break;
        }
    }
    if (regularized) trace.warnings.push_back("rank-deficient ILS basis was regularized");
    model.check_invariants();
    return result;
}

} // namespace sustain
