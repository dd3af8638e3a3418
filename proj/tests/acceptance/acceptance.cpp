// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "reference.hpp"
#include "sustain/baselines.hpp"
#include "sustain/evaluation.hpp"
#include "sustain/io.hpp"
#include "sustain/kernels.hpp"
#include "sustain/oracles.hpp"
#include "sustain/projection.hpp"
#include "sustain/solver.hpp"

using namespace sustain;
using namespace sustain::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

PlantedInstance planted(std::vector<std::size_t> dims, std::size_t rank, double density, std::uint64_t seed,
                        NoiseKind noise = NoiseKind::none, double level = 0.0) {
    PlantedSpec spec;
    spec.dims = std::move(dims);
    spec.rank = rank;
    spec.density = density;
    spec.seed = seed;
    spec.noise = noise;
    spec.noise_level = level;
    return generate_planted(spec);
}

SolverConfig config_for(std::size_t rank, std::uint64_t seed, InitScheme init = InitScheme::random) {
    SolverConfig c;
    c.rank = rank;
    c.seed = seed;
    c.init = init;
    return c;
}

DenseMatrix integer_matrix(std::size_t rows, std::size_t cols, std::int64_t lo, std::int64_t hi, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = static_cast<double>(rng.uniform_int(lo, hi));
    return m;
}

std::vector<double> nonzero_vector(std::size_t n, std::int64_t hi, Rng& rng) {
    std::vector<double> v(n);
    do {
        for (auto& e : v) e = static_cast<double>(rng.uniform_int(0, hi));
    } while (std::all_of(v.begin(), v.end(), [](double e) { return e == 0.0; }));
    return v;
}

// Smallest per-sweep wall time of a trace (entries are cumulative).
double min_sweep_seconds(const SolverTrace& trace) {
    double best = INFINITY;
    for (std::size_t s = 1; s < trace.seconds.size(); ++s) best = std::min(best, trace.seconds[s] - trace.seconds[s - 1]);
    return best;
}

void block_optimality() {
    const auto start = Clock::now();
    Rng rng(1001);
    std::size_t column_ok = 0;
    std::size_t lambda_ok = 0;
    const std::size_t trials = 500;
    for (std::size_t t = 0; t < trials; ++t) {
        // tau^N <= 3^6
        const int tau = static_cast<int>(rng.uniform_int(1, 3));
        const std::size_t max_n = tau == 1 ? 8 : (tau == 2 ? 9 : 6);
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_n)));
        const std::size_t p = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const BoxSet box(tau);
        const auto r = integer_matrix(p, n, -6, 12, rng);
        const auto x = nonzero_vector(p, 4, rng);
        const std::int64_t lam = rng.uniform_int(1, 4);
        const auto got = optimal_scaled_column(r, x, lam, box);
        const auto best = oracle::brute_force_column(r, x, lam, box);
        if (oracle::column_objective(r, x, lam, got) == best.objective) ++column_ok;

        const auto v = nonzero_vector(n, tau, rng);
        const std::int64_t l = optimal_lambda(x, r, v);
        const auto lbest = oracle::brute_force_lambda(r, x, v);
        if (l >= 1 && oracle::lambda_objective(r, x, v, static_cast<double>(l)) == lbest.objective) ++lambda_ok;
    }
    const double secs = seconds_since(start);
    report(1, "block optimality vs exhaustive search",
           column_ok == trials && lambda_ok == trials && secs < 60.0,
           fmt("column %zu/%zu, lambda %zu/%zu exact, %.2fs (limit 60s)", column_ok, trials, lambda_ok, trials, secs));
}

// Every recorded objective (after each factor update) must not exceed its
// predecessor by more than 1e-9 ||X||^2, except within sweeps with repairs.
bool monotone(const SolverTrace& trace, double norm_x_sq, std::size_t& exempt) {
    double prev = trace.objective.front();
    for (std::size_t i = 0; i < trace.update_objective.size(); ++i) {
        const double j = trace.update_objective[i];
        const std::size_t sweep = trace.update_sweep[i];
        if (trace.zero_lock_repairs[sweep] > 0) {
            ++exempt;
        } else if (j > prev + 1e-9 * norm_x_sq) {
            return false;
        }
        prev = j;
    }
    for (std::size_t s = 1; s < trace.objective.size(); ++s) {
        if (trace.zero_lock_repairs[s] > 0) continue;
        if (trace.objective[s] > trace.objective[s - 1] + 1e-9 * norm_x_sq) return false;
    }
    return true;
}

void monotonicity() {
    const auto start = Clock::now();
    Rng rng(2002);
    std::size_t ok = 0;
    std::size_t exempt = 0;
    std::size_t updates = 0;
    for (std::size_t t = 0; t < 100; ++t) {
        const bool tensor = t >= 50;
        std::vector<std::size_t> dims(tensor ? 3 : 2);
        for (auto& d : dims) d = static_cast<std::size_t>(rng.uniform_int(5, 30));
        const std::size_t rank = static_cast<std::size_t>(rng.uniform_int(1, 4));
        const auto inst = planted(dims, rank, 0.15, 5000 + t, NoiseKind::poisson, 0.5);
        const std::size_t fit_rank = static_cast<std::size_t>(rng.uniform_int(1, 4));
        const auto init = t % 3 == 0 ? InitScheme::random
                                     : (t % 3 == 1 ? InitScheme::random_sampling : InitScheme::scale_round_seed);
        const auto cfg = config_for(fit_rank, t, init);
        const auto res = tensor ? sustain_t(inst.tensor, cfg) : sustain_m(inst.tensor, cfg);
        updates += res.trace.update_objective.size();
        if (monotone(res.trace, inst.tensor.norm_sq(), exempt)) ++ok;
    }
    const double secs = seconds_since(start);
    report(2, "objective monotone per factor update", ok == 100 && secs < 120.0,
           fmt("%zu/100 instances, %zu updates checked, %zu exempted (zero-lock), %.2fs (limit 120s)", ok, updates,
               exempt, secs));
}

void planted_fixed_point() {
    std::size_t ok = 0;
    std::size_t total = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        for (const bool tensor : {false, true}) {
            const auto inst = tensor ? planted({25, 20, 15}, 3, 0.05, 300 + s) : planted({40, 30}, 4, 0.25, 400 + s);
            auto cfg = config_for(inst.truth.rank(), s, InitScheme::explicit_model);
            cfg.initial_model = inst.truth;
            cfg.max_iters = 1;
            const auto res = tensor ? sustain_t(inst.tensor, cfg) : sustain_m(inst.tensor, cfg);
            ++total;
            if (res.model == inst.truth && res.trace.fit.back() == 1.0 && fit(inst.tensor, res.model) == 1.0) ++ok;
        }
    }
    report(3, "planted fixed point", ok == total, fmt("%zu/%zu instances bit-stable with fit = 1", ok, total));
}

void heuristic_dominance() {
    std::size_t ok = 0;
    double gain = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto inst = planted({60, 30}, 3, 0.2, 700 + s, NoiseKind::poisson, 1.0);
        const auto res = sustain_m(inst.tensor, config_for(3, s, InitScheme::scale_round_seed));
        const double seeded = res.trace.fit.front();
        const double final_fit = res.trace.fit.back();
        if (final_fit >= seeded) ++ok;
        gain += final_fit - seeded;
    }
    report(4, "scale-and-round seed never loses fit", ok == 50,
           fmt("%zu/50 instances, mean fit improvement %.4f", ok, gain / 50.0));
}

void ails_parity() {
    std::size_t close = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const std::size_t rank = s < 10 ? 3 : 5;
        const auto inst = planted({200, 40}, rank, 0.2, 800 + s);
        // Both methods get the same starts; each keeps its best fit.
        double a = -INFINITY;
        double b = -INFINITY;
        for (const auto init : {InitScheme::round_seed, InitScheme::scale_round_seed, InitScheme::random,
                                InitScheme::random_sampling}) {
            const auto cfg = config_for(rank, s, init);
            a = std::max(a, sustain_m(inst.tensor, cfg).trace.fit.back());
            b = std::max(b, ails_matrix(inst.tensor, cfg).trace.fit.back());
        }
        worst = std::max(worst, std::abs(a - b));
        if (std::abs(a - b) <= 0.02) ++close;
    }
    const bool parity = close >= 16;

    double ratio = INFINITY;
    double t_sustain = 0.0;
    double t_ails = 0.0;
    {
        const auto inst = planted({500, 80}, 10, 0.2, 900);
        auto cfg = config_for(10, 1);
        cfg.max_iters = 3;
        cfg.tol = 1e-300;
        cfg.objective_tracking = false;
        t_sustain = min_sweep_seconds(sustain_m(inst.tensor, cfg).trace);
        t_ails = min_sweep_seconds(ails_matrix(inst.tensor, cfg).trace);
        ratio = t_ails / t_sustain;
    }
    report(5, "AILS parity and speed", parity && ratio >= 10.0,
           fmt("|dfit| <= 0.02 on %zu/20 (need 16, worst %.4f); sweep %.2es vs AILS %.2es, speedup %.1fx (need 10x)",
               close, worst, t_sustain, t_ails, ratio));
}

void mttkrp_oracle() {
    Rng rng(6006);
    std::size_t ok = 0;
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 200; ++t) {
        const std::size_t order = static_cast<std::size_t>(rng.uniform_int(2, 4));
        std::vector<std::size_t> dims(order);
        std::size_t dense = 1;
        for (auto& d : dims) {
            d = static_cast<std::size_t>(rng.uniform_int(1, order == 2 ? 90 : (order == 3 ? 20 : 9)));
            dense *= d;
        }
        const std::size_t rank = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const std::size_t nnz = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(std::min<std::size_t>(dense, 400))));
        const auto x = random_real_tensor(dims, nnz, 10'000 + t);
        std::vector<DenseMatrix> factors;
        for (std::size_t n = 0; n < order; ++n) factors.push_back(random_matrix(dims[n], rank, 0.0, 3.0, 20'000 + t * 8 + n));
        const double tol = 1e-10 * std::sqrt(x.norm_sq());
        bool all = dense <= 10'000;
        const auto xd = to_dense(x);
        for (std::size_t n = 0; n < order; ++n) {
            const auto fast = mttkrp(x, factors, n);
            const auto slow = matmul(matricize(xd, n), khatri_rao_excluding(factors, n));
            for (std::size_t i = 0; i < fast.rows(); ++i)
                for (std::size_t r = 0; r < rank; ++r) {
                    const double d = std::abs(fast(i, r) - slow(i, r));
                    worst = std::max(worst, d / std::sqrt(x.norm_sq()));
                    if (d > tol) all = false;
                }
        }
        if (all) ++ok;
    }
    report(6, "MTTKRP equals dense oracle", ok == 200, fmt("%zu/200 tensors, worst |d|/||X|| = %.2e (limit 1e-10)", ok, worst));
}

void order_two_consistency() {
    std::size_t ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto inst = planted({30 + s, 20}, 3, 0.2, 1100 + s, NoiseKind::poisson, 1.0);
        const auto init = s % 2 == 0 ? InitScheme::random : InitScheme::scale_round_seed;
        const auto cfg = config_for(2 + s % 3, s, init);
        const auto m = sustain_m(inst.tensor, cfg);
        const auto t = sustain_t(inst.tensor, cfg);
        if (m.model == t.model && m.trace.objective == t.trace.objective &&
            m.trace.update_objective == t.trace.update_objective &&
            m.trace.zero_lock_repairs == t.trace.zero_lock_repairs)
            ++ok;
    }
    report(7, "order-2 tensor solver matches matrix solver", ok == 20, fmt("%zu/20 bit-identical", ok));
}

void nnz_scaling() {
    const std::vector<std::size_t> scales{1, 2, 4};
    std::vector<double> log_nnz;
    std::vector<double> log_time;
    std::string detail;
    for (const std::size_t s : scales) {
        const auto inst = planted({1000 * s, 100, 50}, 10, 0.02, 1200 + s);
        auto cfg = config_for(10, 3);
        cfg.max_iters = 4;
        cfg.tol = 1e-300;
        cfg.objective_tracking = false;
        const double secs = min_sweep_seconds(sustain_t(inst.tensor, cfg).trace);
        log_nnz.push_back(std::log(static_cast<double>(inst.tensor.nnz())));
        log_time.push_back(std::log(secs));
        detail += fmt("nnz=%zu sweep=%.4fs; ", inst.tensor.nnz(), secs);
    }
    const double mx = std::accumulate(log_nnz.begin(), log_nnz.end(), 0.0) / 3.0;
    const double my = std::accumulate(log_time.begin(), log_time.end(), 0.0) / 3.0;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        sxy += (log_nnz[i] - mx) * (log_time[i] - my);
        sxx += (log_nnz[i] - mx) * (log_nnz[i] - mx);
    }
    const double slope = sxy / sxx;
    report(8, "sweep time linear in nnz", slope >= 0.8 && slope <= 1.3,
           detail + fmt("log-log slope %.3f (need [0.8, 1.3])", slope));
}

void stability_metric() {
    Rng rng(9009);
    std::size_t zero = 0;
    for (std::size_t t = 0; t < 20; ++t) {
        const std::size_t rows = static_cast<std::size_t>(rng.uniform_int(5, 40));
        const std::size_t cols = static_cast<std::size_t>(rng.uniform_int(2, 8));
        DenseMatrix d;
        bool varied = false;
        while (!varied) {
            d = integer_matrix(rows, cols, 0, 5, rng);
            varied = true;
            for (std::size_t c = 0; c < cols; ++c) {
                bool constant = true;
                for (std::size_t i = 1; i < rows; ++i) constant = constant && d(i, c) == d(0, c);
                varied = varied && !constant;
            }
        }
        std::vector<std::size_t> perm(cols);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = cols; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        DenseMatrix dp(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t c = 0; c < cols; ++c) dp(i, perm[c]) = d(i, c);
        if (dissimilarity(d, dp) == 0.0) ++zero;
    }

    std::size_t ordered = 0;
    std::string scores;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto inst = planted({100, 30}, 3, 0.2, 1300 + s);
        StabilityOptions opts;
        opts.ranks = {2, 3, 4};
        opts.repetitions = 5;
        opts.assess_mode = 1;
        auto cfg = config_for(3, s, InitScheme::round_seed);
        const auto rep = stability_select(inst.tensor, opts, cfg);
        const double y3 = rep.per_rank[1].score;
        const double y4 = rep.per_rank[2].score;
        if (y3 <= y4) ++ordered;
    }
    report(9, "stability metric", zero == 20 && ordered >= 16,
           fmt("diss(D, DP) = 0 on %zu/20 permutations; Y(3) <= Y(4) on %zu/20 trials (need 16)", zero, ordered));
}

void io_round_trip() {
    const fs::path dir = fs::temp_directory_path() / "sustain_acceptance_io";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::size_t tensors_ok = 0;
    std::size_t models_ok = 0;
    Rng rng(1010);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const std::size_t order = static_cast<std::size_t>(rng.uniform_int(2, 4));
        std::vector<std::size_t> dims(order);
        for (auto& d : dims) d = static_cast<std::size_t>(rng.uniform_int(2, 12));
        const auto x = random_real_tensor(dims, static_cast<std::size_t>(rng.uniform_int(1, 60)), 30'000 + t);
        io::save_tensor(dir / "x.tns", x);
        io::save_tensor(dir / "x.bin", x, io::FileFormat::binary);
        if (io::load_tensor(dir / "x.tns") == x && io::load_tensor(dir / "x.bin") == x) ++tensors_ok;

        const auto inst = planted(dims, static_cast<std::size_t>(rng.uniform_int(1, 4)), 0.3, 31'000 + t);
        const double f = fit(inst.tensor, inst.truth);
        fs::remove_all(dir / "m");
        io::save_model(dir / "m", inst.truth, t, f);
        io::save_model(dir / "b", inst.truth, t, f, io::FileFormat::binary);
        const auto text = io::load_model(dir / "m");
        const auto bin = io::load_model(dir / "b");
        if (text.model == inst.truth && bin.model == inst.truth && text.metadata.fit == std::optional<double>(f) &&
            bin.metadata.fit == std::optional<double>(f))
            ++models_ok;
    }
    fs::remove_all(dir);
    report(10, "tensor and model files round-trip exactly", tensors_ok == 20 && models_ok == 20,
           fmt("tensors %zu/20, models %zu/20", tensors_ok, models_ok));
}

} // namespace

int main() {
    const std::vector<std::pair<int, std::function<void()>>> criteria{
        {1, block_optimality},  {2, monotonicity},          {3, planted_fixed_point}, {4, heuristic_dominance},
        {5, ails_parity},       {6, mttkrp_oracle},         {7, order_two_consistency}, {8, nnz_scaling},
        {9, stability_metric},  {10, io_round_trip},
    };
    for (const auto& [id, run] : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            report(id, "criterion raised", false, e.what());
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
