#include "sustain/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sustain/baselines.hpp"
#include "sustain/error.hpp"
#include "sustain/evaluation.hpp"
#include "sustain/io.hpp"
#include "sustain/kernels.hpp"
#include "sustain/solver.hpp"

namespace sustain::cli {

namespace fs = std::filesystem;

namespace {

struct SolverFlags {
    std::string input;
    std::string out;
    std::size_t rank = 0;
    int tau = 5;
    double tol = 1e-4;
    std::size_t max_iters = 200;
    std::string init = "random";
    std::string init_model;
    std::uint64_t seed = 0;
    std::string format = "text";
    bool raw_convergence = false;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool rank_required = true) {
    cmd->add_option("--input", f.input, "Input tensor (.tns or binary)")->required()->check(CLI::ExistingFile);
    auto* rank = cmd->add_option("--rank", f.rank, "Number of components")->check(CLI::PositiveNumber);
    if (rank_required) rank->required();
    cmd->add_option("--tau", f.tau, "Largest factor value")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--tol", f.tol, "Convergence tolerance")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-iters", f.max_iters, "Sweep budget")->capture_default_str();
    cmd->add_option("--init", f.init, "Initialization scheme")
        ->capture_default_str()
        ->check(CLI::IsMember({"random", "sampling", "round", "scale-round", "explicit"}));
    cmd->add_option("--init-model", f.init_model, "Model directory used by --init explicit");
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", f.out, "Output directory")->required();
    cmd->add_option("--format", f.format, "Model file format")
        ->capture_default_str()
        ->check(CLI::IsMember({"text", "binary"}));
    cmd->add_flag("--raw-convergence", f.raw_convergence, "Compare unnormalized objective differences");
}

io::FileFormat file_format(const std::string& s) { return s == "binary" ? io::FileFormat::binary : io::FileFormat::text; }

SolverConfig make_config(const SolverFlags& f) {
    SolverConfig c;
    c.rank = f.rank;
    c.tau = f.tau;
    c.tol = f.tol;
    c.max_iters = f.max_iters;
    c.seed = f.seed;
    c.convergence = f.raw_convergence ? ConvergenceMetric::raw : ConvergenceMetric::normalized;
    static const std::map<std::string, InitScheme> schemes{{"random", InitScheme::random},
                                                           {"sampling", InitScheme::random_sampling},
                                                           {"round", InitScheme::round_seed},
                                                           {"scale-round", InitScheme::scale_round_seed},
                                                           {"explicit", InitScheme::explicit_model}};
    c.init = schemes.at(f.init);
    if (c.init == InitScheme::explicit_model) {
        if (f.init_model.empty()) throw CLI::ValidationError("--init explicit requires --init-model");
        c.initial_model = io::load_model(f.init_model).model;
        c.tau = c.initial_model->tau;
        c.rank = c.initial_model->rank();
    } else if (f.rank == 0) {
        throw CLI::ValidationError("--rank is required");
    }
    return c;
}

void write_run_outputs(const SolverFlags& f, const SolverResult& res, const std::string& command,
                       const std::vector<std::string>& args) {
    const fs::path out(f.out);
    io::save_model(out, res.model, f.seed, res.trace.fit.back(), file_format(f.format));
    io::write_trace_csv(out / "trace.csv", res.trace);
    io::write_manifest(out / "manifest.json", {io::kFormatVersion, command, f.input, f.out, args});
}

void print_summary(std::ostream& out, const SolverResult& res) {
    double total = 0.0;
    for (double s : res.trace.seconds) total += s;
    char line[160];
    std::snprintf(line, sizeof line, "fit=%.6f objective=%.6g sweeps=%zu seconds=%.3f converged=%s\n",
                  res.trace.fit.back(), res.trace.objective.back(), res.trace.sweeps(), total,
                  res.trace.converged ? "yes" : "no");
    out << line;
}

std::vector<std::size_t> parse_rank_list(const std::string& spec) {
    std::vector<std::size_t> ranks;
    const auto colon = spec.find(':');
    try {
        if (colon != std::string::npos) {
            const auto lo = std::stoul(spec.substr(0, colon));
            const auto hi = std::stoul(spec.substr(colon + 1));
            if (lo == 0 || hi < lo) throw CLI::ValidationError("--ranks", "expected lo:hi with 1 <= lo <= hi");
            for (auto r = lo; r <= hi; ++r) ranks.push_back(r);
        } else {
            std::stringstream ss(spec);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const auto r = std::stoul(tok);
                if (r == 0) throw CLI::ValidationError("--ranks", "ranks must be >= 1");
                ranks.push_back(r);
            }
        }
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("--ranks", "expected lo:hi or a comma list");
    }
    if (ranks.empty()) throw CLI::ValidationError("--ranks", "no ranks given");
    return ranks;
}

std::vector<std::size_t> parse_dims(const std::string& spec) {
    std::vector<std::size_t> dims;
    std::stringstream ss(spec);
    std::string tok;
    try {
        while (std::getline(ss, tok, ',')) dims.push_back(std::stoul(tok));
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("--dims", "expected a comma list of sizes");
    }
    return dims;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    CLI::App app{"Integer-constrained sparse matrix and tensor factorization"};
    app.name("sustain");
    app.require_subcommand(1);

    SolverFlags fm;
    auto* factor_m = app.add_subcommand("factor-m", "Factorize a sparse matrix");
    add_solver_flags(factor_m, fm, false);

    SolverFlags ft;
    auto* factor_t = app.add_subcommand("factor-t", "Factorize a sparse tensor");
    add_solver_flags(factor_t, ft, false);

    SolverFlags fb;
    std::string method;
    auto* baseline = app.add_subcommand("baseline", "Run a comparison method");
    add_solver_flags(baseline, fb);
    baseline->add_option("--method", method, "round, scale-round or ails")
        ->required()
        ->check(CLI::IsMember({"round", "scale-round", "ails"}));

    SolverFlags fs_;
    std::string ranks_spec;
    std::size_t reps = 20;
    std::size_t assess_mode = 1;
    std::size_t threads = 0;
    auto* stability = app.add_subcommand("stability", "Select a rank by run-to-run stability");
    add_solver_flags(stability, fs_, false);
    fs_.init = "round";
    stability->get_option("--init")->default_str("round");
    stability->add_option("--ranks", ranks_spec, "Candidate ranks, lo:hi or a comma list")->required();
    stability->add_option("--reps", reps, "Runs per rank")->capture_default_str();
    stability->add_option("--mode", assess_mode, "Mode whose factor is compared")->capture_default_str();
    stability->add_option("--threads", threads, "Worker threads (0: SUSTAIN_THREADS or hardware)");

    PlantedSpec gen;
    std::string dims_spec;
    std::string gen_out;
    std::string truth_dir;
    std::string noise = "none";
    std::string gen_format = "text";
    auto* generate = app.add_subcommand("generate", "Write a planted synthetic tensor");
    generate->add_option("--dims", dims_spec, "Comma-separated mode sizes")->required();
    generate->add_option("--rank", gen.rank)->capture_default_str()->check(CLI::PositiveNumber);
    generate->add_option("--tau", gen.tau)->capture_default_str()->check(CLI::PositiveNumber);
    generate->add_option("--lambda-min", gen.lambda_min)->capture_default_str();
    generate->add_option("--lambda-max", gen.lambda_max)->capture_default_str();
    generate->add_option("--density", gen.density)->capture_default_str();
    generate->add_option("--noise", noise)->capture_default_str()->check(CLI::IsMember({"none", "poisson"}));
    generate->add_option("--noise-level", gen.noise_level)->capture_default_str();
    generate->add_option("--seed", gen.seed)->capture_default_str();
    generate->add_option("--out", gen_out, "Tensor file to write")->required();
    generate->add_option("--truth", truth_dir, "Directory for the planted model");
    generate->add_option("--format", gen_format)->capture_default_str()->check(CLI::IsMember({"text", "binary"}));

    std::string fit_input;
    std::string fit_model;
    auto* fit_cmd = app.add_subcommand("fit", "Evaluate a saved model against a tensor");
    fit_cmd->add_option("--input", fit_input)->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--model", fit_model)->required()->check(CLI::ExistingPath);

    std::string report_model;
    std::string report_names;
    std::string report_out;
    std::size_t report_mode = 1;
    auto* report = app.add_subcommand("report", "Print per-component score tables");
    report->add_option("--model", report_model)->required()->check(CLI::ExistingPath);
    report->add_option("--mode", report_mode, "Mode to tabulate")->capture_default_str();
    report->add_option("--names", report_names, "Feature names, one per line")->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Write the table to this file");

    std::string manifest_path;
    auto* replay = app.add_subcommand("run", "Replay a run manifest");
    replay->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::vector<std::string> rest(args.begin() + 1, args.end());
    const std::string& command = args.front();

    try {
        if (*factor_m || *factor_t) {
            const SolverFlags& f = *factor_m ? fm : ft;
            const SparseTensor x = io::load_tensor(f.input);
            if (*factor_m && x.order() != 2) {
                err << "factor-m expects a matrix; the input has order " << x.order() << '\n';
                return kExitUsage;
            }
            const SolverConfig config = make_config(f);
            const SolverResult res = *factor_m ? sustain_m(x, config) : sustain_t(x, config);
            write_run_outputs(f, res, command, rest);
            for (const auto& w : res.trace.warnings) err << "warning: " << w << '\n';
            print_summary(out, res);
        } else if (*baseline) {
            const SparseTensor x = io::load_tensor(fb.input);
            const SolverConfig config = make_config(fb);
            if (method == "ails") {
                if (x.order() != 2) {
                    err << "ails supports matrices only\n";
                    return kExitUsage;
                }
                const SolverResult res = ails_matrix(x, config);
                write_run_outputs(fb, res, command, rest);
                print_summary(out, res);
            } else {
                Rng rng(config.seed);
                const RealFitResult real = fit_real_model(x, {config.rank, config.seed_tol, config.seed_max_iters}, rng);
                const IntegerFactorModel model = method == "round" ? round_model(real.model, config.tau, rng)
                                                                   : scale_and_round_model(real.model, config.tau, rng);
                const double f = fit(x, model);
                io::save_model(fb.out, model, fb.seed, f, file_format(fb.format));
                io::write_manifest(fs::path(fb.out) / "manifest.json",
                                   {io::kFormatVersion, command, fb.input, fb.out, rest});
                char line[96];
                std::snprintf(line, sizeof line, "fit=%.6f real_fit=%.6f\n", f, sustain::fit(x, real.model));
                out << line;
            }
        } else if (*stability) {
            const SparseTensor x = io::load_tensor(fs_.input);
            StabilityOptions opts;
            opts.ranks = parse_rank_list(ranks_spec);
            opts.repetitions = reps;
            opts.assess_mode = assess_mode;
            opts.threads = threads;
            SolverConfig config = make_config(SolverFlags{fs_.input, fs_.out, 1, fs_.tau, fs_.tol, fs_.max_iters,
                                                          fs_.init, fs_.init_model, fs_.seed, fs_.format,
                                                          fs_.raw_convergence});
            const StabilityReport rep = stability_select(x, opts, config);
            const fs::path dir(fs_.out);
            io::write_stability_report(dir / "stability.json", rep);
            io::save_model(dir / "best", rep.best_model, std::nullopt, rep.best_fit, file_format(fs_.format));
            io::write_manifest(dir / "manifest.json", {io::kFormatVersion, command, fs_.input, fs_.out, rest});
            for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
            for (const auto& r : rep.per_rank) {
                char line[96];
                std::snprintf(line, sizeof line, "rank=%zu score=%.6f\n", r.rank, r.score);
                out << line;
            }
            char line[96];
            std::snprintf(line, sizeof line, "selected_rank=%zu best_fit=%.6f\n", rep.selected_rank, rep.best_fit);
            out << line;
        } else if (*generate) {
            gen.dims = parse_dims(dims_spec);
            gen.noise = noise == "poisson" ? NoiseKind::poisson : NoiseKind::none;
            const PlantedInstance inst = generate_planted(gen);
            io::save_tensor(gen_out, inst.tensor, file_format(gen_format));
            if (!truth_dir.empty()) io::save_model(truth_dir, inst.truth, gen.seed, sustain::fit(inst.tensor, inst.truth));
            out << "nnz=" << inst.tensor.nnz() << '\n';
        } else if (*fit_cmd) {
            const SparseTensor x = io::load_tensor(fit_input);
            const io::LoadedModel lm = io::load_model(fit_model);
            char line[64];
            std::snprintf(line, sizeof line, "fit=%.10f\n", sustain::fit(x, lm.model));
            out << line;
        } else if (*report) {
            const io::LoadedModel lm = io::load_model(report_model);
            std::vector<std::string> names;
            if (!report_names.empty()) names = io::load_feature_names(report_names);
            const std::string table = io::format_score_table(lm.model, report_mode, names);
            if (report_out.empty()) {
                out << table;
            } else {
                io::write_text_file(report_out, table);
            }
        } else if (*replay) {
            if (depth > 0) {
                err << "a manifest cannot replay another manifest\n";
                return kExitUsage;
            }
            const io::RunManifest m = io::read_manifest(manifest_path);
            std::vector<std::string> replay_args{m.command};
            replay_args.insert(replay_args.end(), m.arguments.begin(), m.arguments.end());
            return run(replay_args, out, err, depth + 1);
        }
    } catch (const CLI::ValidationError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const DegenerateColumnError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const MetricUndefinedError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    if (args.empty()) {
        err << "usage: sustain <command> [options]; see --help\n";
        return kExitUsage;
    }
    return execute(args, out, err, depth);
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return run(args, out, err, 0);
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace sustain::cli
