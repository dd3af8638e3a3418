#include "sustain/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "sustain/baselines.hpp"
#include "sustain/error.hpp"
#include "sustain/kernels.hpp"
#include "sustain/rng.hpp"

namespace sustain {

namespace {

// Centered copy of column k and its sum of squares.
std::vector<double> centered_column(const DenseMatrix& d, std::size_t k, double& sum_sq) {
    std::vector<double> c = d.column(k);
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(c.size());
    sum_sq = 0.0;
    for (double& v : c) {
        v -= mean;
        sum_sq += v * v;
    }
    return c;
}

bool has_constant_column(const DenseMatrix& d) {
    for (std::size_t k = 0; k < d.cols(); ++k) {
        double ss = 0.0;
        centered_column(d, k, ss);
        if (!(ss > 0.0)) return true;
    }
    return false;
}

} // namespace

DenseMatrix cross_correlation(const DenseMatrix& d1, const DenseMatrix& d2) {
    if (d1.rows() != d2.rows()) throw DimensionError("cross_correlation: row counts differ");
    if (d1.rows() < 2) throw MetricUndefinedError("cross_correlation: need at least two rows");
    std::vector<std::vector<double>> a(d1.cols());
    std::vector<std::vector<double>> b(d2.cols());
    std::vector<double> ssa(d1.cols());
    std::vector<double> ssb(d2.cols());
    for (std::size_t k = 0; k < d1.cols(); ++k) {
        a[k] = centered_column(d1, k, ssa[k]);
        if (!(ssa[k] > 0.0)) throw MetricUndefinedError("cross_correlation: column " + std::to_string(k) + " of the first factor is constant");
    }
    for (std::size_t j = 0; j < d2.cols(); ++j) {
        b[j] = centered_column(d2, j, ssb[j]);
        if (!(ssb[j] > 0.0)) throw MetricUndefinedError("cross_correlation: column " + std::to_string(j) + " of the second factor is constant");
    }
    DenseMatrix c(d1.cols(), d2.cols());
    for (std::size_t k = 0; k < d1.cols(); ++k) {
        for (std::size_t j = 0; j < d2.cols(); ++j) {
            double num = 0.0;
            for (std::size_t i = 0; i < d1.rows(); ++i) num += a[k][i] * b[j][i];
            // sqrt(s * s) == s exactly, so identical columns correlate to 1.
            c(k, j) = std::min(1.0, std::abs(num) / std::sqrt(ssa[k] * ssb[j]));
        }
    }
    return c;
}

double dissimilarity(const DenseMatrix& d1, const DenseMatrix& d2) {
    if (d1.rows() != d2.rows() || d1.cols() != d2.cols()) throw DimensionError("dissimilarity: shapes differ");
    const std::size_t rank = d1.cols();
    if (rank == 0) throw DimensionError("dissimilarity: no columns");
    const DenseMatrix c = cross_correlation(d1, d2);
    double col_max_sum = 0.0;
    for (std::size_t j = 0; j < rank; ++j) {
        double mx = 0.0;
        for (std::size_t k = 0; k < rank; ++k) mx = std::max(mx, c(k, j));
        col_max_sum += mx;
    }
    double row_max_sum = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
        double mx = 0.0;
        for (std::size_t j = 0; j < rank; ++j) mx = std::max(mx, c(k, j));
        row_max_sum += mx;
    }
    const double two_r = 2.0 * static_cast<double>(rank);
    return std::clamp((two_r - col_max_sum - row_max_sum) / two_r, 0.0, 1.0);
}

double stability_score(const std::vector<DenseMatrix>& factors) {
    if (factors.size() < 2) throw InvariantError("stability_score: need at least two runs");
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t b = 0; b < factors.size(); ++b) {
        for (std::size_t c = b + 1; c < factors.size(); ++c) {
            total += dissimilarity(factors[b], factors[c]);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

std::size_t default_worker_count() {
    if (const char* env = std::getenv("SUSTAIN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

StabilityReport stability_select(const SparseTensor& x, const StabilityOptions& options, const SolverConfig& config) {
    if (options.repetitions < 2) throw InvariantError("stability_select: need at least two repetitions");
    if (options.ranks.empty()) throw InvariantError("stability_select: no candidate ranks");
    if (options.assess_mode >= x.order()) throw DimensionError("stability_select: assessed mode out of range");

    std::vector<std::size_t> ranks = options.ranks;
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
    if (ranks.front() == 0) throw InvariantError("stability_select: rank must be >= 1");

    const std::size_t b_count = options.repetitions;
    struct Job {
        std::size_t rank;
        std::size_t repetition;
        std::uint64_t seed;
        IntegerFactorModel model;
        double fit = 0.0;
        std::string error;
    };
    std::vector<Job> jobs;
    for (std::size_t r : ranks) {
        for (std::size_t b = 0; b < b_count; ++b) {
            jobs.push_back({r, b, Rng::derive_seed(config.seed, r, b), {}, 0.0, {}});
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
            Job& job = jobs[j];
            SolverConfig run = config;
            run.rank = job.rank;
            run.seed = job.seed;
            run.objective_tracking = false;
            try {
                SolverResult res = sustain(x, run);
                job.fit = res.trace.fit.back();
                job.model = std::move(res.model);
            } catch (const std::exception& e) {
                job.error = e.what();
            }
        }
    };
    const std::size_t threads =
        std::max<std::size_t>(1, std::min(options.threads == 0 ? default_worker_count() : options.threads, jobs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    StabilityReport report;
    report.repetitions = b_count;
    report.assess_mode = options.assess_mode;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
        RankStability rs;
        rs.rank = ranks[ri];
        std::vector<std::size_t> valid;
        for (std::size_t b = 0; b < b_count; ++b) {
            const Job& job = jobs[ri * b_count + b];
            StabilityRun run{job.rank, job.repetition, job.seed, job.fit, false};
            if (!job.error.empty()) {
                run.degenerate = true;
                report.warnings.push_back("rank " + std::to_string(job.rank) + " run " + std::to_string(b) +
                                          " failed: " + job.error);
            } else if (has_constant_column(job.model.factors[options.assess_mode])) {
                run.degenerate = true;
                report.warnings.push_back("rank " + std::to_string(job.rank) + " run " + std::to_string(b) +
                                          " excluded: constant column in the assessed factor");
            } else {
                valid.push_back(b);
            }
            rs.runs.push_back(run);
        }
        double total = 0.0;
        for (std::size_t p = 0; p < valid.size(); ++p) {
            for (std::size_t q = p + 1; q < valid.size(); ++q) {
                const auto& f1 = jobs[ri * b_count + valid[p]].model.factors[options.assess_mode];
                const auto& f2 = jobs[ri * b_count + valid[q]].model.factors[options.assess_mode];
                const double diss = dissimilarity(f1, f2);
                rs.pairs.push_back({valid[p], valid[q], diss});
                total += diss;
            }
        }
        if (rs.pairs.empty()) {
            rs.score = std::numeric_limits<double>::quiet_NaN();
            report.warnings.push_back("rank " + std::to_string(rs.rank) + " has fewer than two usable runs");
        } else {
            rs.score = total / static_cast<double>(rs.pairs.size());
            if (rs.score < best_score) {
                best_score = rs.score;
                report.selected_rank = rs.rank;
            }
        }
        report.per_rank.push_back(std::move(rs));
    }
    if (report.selected_rank == 0) throw NumericError("stability_select: no rank produced a usable score");

    for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
        if (ranks[ri] != report.selected_rank) continue;
        bool found = false;
        for (const StabilityRun& run : report.per_rank[ri].runs) {
            if (run.degenerate) continue;
            if (!found || run.fit > report.best_fit) {
                found = true;
                report.best_fit = run.fit;
                report.best_repetition = run.repetition;
            }
        }
        report.best_model = jobs[ri * b_count + report.best_repetition].model;
    }
    return report;
}

// ---------------------------------------------------------------------------

PlantedInstance generate_planted(const PlantedSpec& spec) {
    const std::size_t d = spec.dims.size();
    if (d < 2) throw InvariantError("generate_planted: order must be >= 2");
    for (std::size_t n : spec.dims) {
        if (n == 0) throw InvariantError("generate_planted: empty mode");
    }
    if (spec.rank == 0) throw InvariantError("generate_planted: rank must be >= 1");
    if (spec.tau < 1) throw InvariantError("generate_planted: tau must be >= 1");
    if (spec.lambda_min < 1 || spec.lambda_max < spec.lambda_min) {
        throw InvariantError("generate_planted: lambda range must satisfy 1 <= min <= max");
    }
    if (!(spec.density > 0.0 && spec.density <= 1.0)) {
        throw InvariantError("generate_planted: density must lie in (0, 1]");
    }
    if (!(spec.noise_level >= 0.0) || !std::isfinite(spec.noise_level)) {
        throw InvariantError("generate_planted: noise level must be finite and >= 0");
    }

    // Per-component cell fraction q so that R independent supports cover
    // about `density` of the cells, split evenly over the modes.
    const double rank = static_cast<double>(spec.rank);
    const double per_component = 1.0 - std::pow(1.0 - spec.density, 1.0 / rank);
    const double per_mode = std::pow(per_component, 1.0 / static_cast<double>(d));
    std::vector<std::size_t> support(d);
    double raw_entries = rank;
    for (std::size_t n = 0; n < d; ++n) {
        const auto target = static_cast<std::size_t>(std::llround(per_mode * static_cast<double>(spec.dims[n])));
        support[n] = std::clamp<std::size_t>(target, 1, spec.dims[n]);
        raw_entries *= static_cast<double>(support[n]);
    }
    if (raw_entries > 2e8) throw CapacityError("generate_planted: instance too large to assemble");

    Rng rng(spec.seed);
    PlantedInstance inst;
    inst.spec = spec;
    inst.truth.tau = spec.tau;
    std::vector<std::vector<std::vector<Index>>> rows_of(d, std::vector<std::vector<Index>>(spec.rank));
    for (std::size_t n = 0; n < d; ++n) {
        DenseMatrix f(spec.dims[n], spec.rank);
        std::vector<Index> pool(spec.dims[n]);
        for (std::size_t k = 0; k < spec.rank; ++k) {
            std::iota(pool.begin(), pool.end(), Index{0});
            // Partial Fisher-Yates: the first support[n] slots form the sample.
            for (std::size_t s = 0; s < support[n]; ++s) {
                const std::size_t pick = s + rng.uniform_index(pool.size() - s);
                std::swap(pool[s], pool[pick]);
            }
            std::vector<Index> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(support[n]));
            std::sort(chosen.begin(), chosen.end());
            for (Index i : chosen) f(i, k) = static_cast<double>(rng.uniform_int(1, spec.tau));
            rows_of[n][k] = std::move(chosen);
        }
        inst.truth.factors.push_back(std::move(f));
    }
    inst.truth.lambda.resize(spec.rank);
    for (auto& lam : inst.truth.lambda) lam = rng.uniform_int(spec.lambda_min, spec.lambda_max);

    std::vector<Index> coords;
    std::vector<double> values;
    coords.reserve(static_cast<std::size_t>(raw_entries) * d);
    values.reserve(static_cast<std::size_t>(raw_entries));
    std::vector<std::size_t> pos(d);
    for (std::size_t k = 0; k < spec.rank; ++k) {
        std::fill(pos.begin(), pos.end(), 0);
        while (true) {
            double v = static_cast<double>(inst.truth.lambda[k]);
            for (std::size_t n = 0; n < d; ++n) {
                const Index i = rows_of[n][k][pos[n]];
                coords.push_back(i);
                v *= inst.truth.factors[n](i, k);
            }
            values.push_back(v);
            std::size_t n = d;
            while (n-- > 0) {
                if (++pos[n] < rows_of[n][k].size()) break;
                pos[n] = 0;
            }
            if (n == static_cast<std::size_t>(-1)) break;
        }
    }
    SparseTensor exact = SparseTensor::assemble(spec.dims, coords, values);

    if (spec.noise == NoiseKind::poisson && spec.noise_level > 0.0) {
        std::vector<double> noisy(exact.values().begin(), exact.values().end());
        for (double& v : noisy) v += static_cast<double>(rng.poisson(spec.noise_level));
        inst.tensor = SparseTensor::assemble(spec.dims, exact.coords(), noisy);
    } else {
        inst.tensor = std::move(exact);
    }
    return inst;
}

// ---------------------------------------------------------------------------

RealFactorModel truncate_top_k(const RealFactorModel& model, const std::vector<std::size_t>& keep) {
    if (keep.size() != model.order()) throw DimensionError("truncate_top_k: one k per mode is required");
    RealFactorModel out = model;
    auto truncate = [](std::vector<std::pair<double, std::size_t>>& entries, std::size_t k,
                       auto&& zero) {
        if (k >= entries.size()) return;
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t p = k; p < entries.size(); ++p) zero(entries[p].second);
    };
    for (std::size_t n = 0; n < out.order(); ++n) {
        DenseMatrix& f = out.factors[n];
        std::vector<std::pair<double, std::size_t>> entries;
        if (n == 0) {
            for (std::size_t i = 0; i < f.rows(); ++i) {
                entries.clear();
                for (std::size_t r = 0; r < f.cols(); ++r) entries.emplace_back(f(i, r), r);
                truncate(entries, keep[n], [&](std::size_t r) { f(i, r) = 0.0; });
            }
        } else {
            for (std::size_t r = 0; r < f.cols(); ++r) {
                entries.clear();
                for (std::size_t i = 0; i < f.rows(); ++i) entries.emplace_back(f(i, r), i);
                truncate(entries, keep[n], [&](std::size_t i) { f(i, r) = 0.0; });
            }
        }
    }
    return out;
}

namespace {

std::size_t count_nonzeros(const DenseMatrix& f) {
    return static_cast<std::size_t>(std::count_if(f.values().begin(), f.values().end(), [](double v) { return v != 0.0; }));
}

} // namespace

std::vector<std::size_t> matching_keep(const IntegerFactorModel& model) {
    std::vector<std::size_t> keep;
    const auto rank = static_cast<double>(model.rank());
    for (std::size_t n = 0; n < model.order(); ++n) {
        const DenseMatrix& f = model.factors[n];
        const auto nnz = static_cast<double>(count_nonzeros(f));
        if (n == 0) {
            const auto k = static_cast<std::size_t>(std::llround(nnz / static_cast<double>(f.rows())));
            keep.push_back(std::clamp<std::size_t>(k, 1, f.cols()));
        } else {
            const auto k = static_cast<std::size_t>(std::llround(nnz / rank));
            keep.push_back(std::clamp<std::size_t>(k, 1, f.rows()));
        }
    }
    return keep;
}

SparsityComparison sparsity_vs_fit_comparison(const SparseTensor& x, const SolverConfig& config) {
    const SolverResult integer = sustain(x, config);
    Rng rng(Rng::derive_seed(config.seed, 0x7e11));
    const RealFitResult real = fit_real_model(x, {config.rank, config.seed_tol, config.seed_max_iters}, rng);

    SparsityComparison out;
    out.keep = matching_keep(integer.model);
    const RealFactorModel truncated = truncate_top_k(real.model, out.keep);
    for (std::size_t n = 0; n < x.order(); ++n) {
        out.integer_nnz.push_back(count_nonzeros(integer.model.factors[n]));
        out.truncated_nnz.push_back(count_nonzeros(truncated.factors[n]));
    }
    out.integer_fit = fit(x, integer.model);
    out.truncated_fit = fit(x, truncated);
    out.real_fit = fit(x, real.model);
    return out;
}

} // namespace sustain
