#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdos/error.hpp"
#include "fdos/io.hpp"
#include "fdos/model.hpp"
#include "fdos/simbench.hpp"
#include "fdos/tuning.hpp"

namespace fs = std::filesystem;

namespace {

/// Flags shared by fit, cv, predict and benchmark. Values only override the
/// config file when given on the command line.
struct CommonFlags {
    std::string config_path;
    std::string mode;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double varphi = 0.0;
    int knots = 0;
    int degree = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    double rho = 0.0;
    double eps_tol = 0.0;
    int max_iter = 0;
    double a = 0.0;
    std::vector<double> lambda1_values;
    std::vector<double> lambda2_values;
    std::vector<double> varphi_values;
    bool pad = false;
    std::size_t resample = 0;
    bool differentiate = false;
    double fft_max_hz = 0.0;

    std::vector<CLI::Option*> options;

    void add(CLI::App* app) {
        auto* o = app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        options = {
            o,
            app->add_option("--mode", mode, "fdos (unit weights) or faddos (adaptive weights)")
                ->check(CLI::IsMember({"fdos", "faddos"})),
            app->add_option("--lambda1", lambda1, "local sparsity weight")->check(CLI::NonNegativeNumber),
            app->add_option("--lambda2", lambda2, "group sparsity weight")->check(CLI::NonNegativeNumber),
            app->add_option("--varphi", varphi, "roughness weight")->check(CLI::NonNegativeNumber),
            app->add_option("--knots", knots, "number of equal knot intervals")->check(CLI::PositiveNumber),
            app->add_option("--degree", degree, "B-spline degree")->check(CLI::Range(2, 10)),
            app->add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 1000)),
            app->add_option("--seed", seed, "random seed"),
            app->add_option("--rho", rho, "ADMM penalty parameter")->check(CLI::PositiveNumber),
            app->add_option("--eps-tol", eps_tol, "relative change stopping tolerance")->check(CLI::PositiveNumber),
            app->add_option("--max-iter", max_iter, "ADMM iteration cap")->check(CLI::PositiveNumber),
            app->add_option("--a", a, "adaptive weight exponent")->check(CLI::PositiveNumber),
            app->add_option("--lambda1-values", lambda1_values, "lambda1 tuning values")->delimiter(','),
            app->add_option("--lambda2-values", lambda2_values, "lambda2 tuning values")->delimiter(','),
            app->add_option("--varphi-values", varphi_values, "varphi tuning values")->delimiter(','),
            app->add_flag("--pad", pad, "pad shorter series with their last observation"),
            app->add_option("--resample", resample, "resample every series onto this many points")
                ->check(CLI::Range(std::size_t{2}, std::size_t{1000000})),
            app->add_flag("--differentiate", differentiate, "use first derivatives (velocity)"),
            app->add_option("--fft-max-hz", fft_max_hz, "use the magnitude spectrum on [0, f] Hz")
                ->check(CLI::PositiveNumber),
        };
    }

    bool given(const char* name) const {
        for (const auto* o : options) {
            if (o->check_lname(std::string(name).substr(2)) && o->count() > 0) {
                return true;
            }
        }
        return false;
    }

    fdos::RunConfig resolve() const {
        fdos::RunConfig cfg;
        if (!config_path.empty()) {
            cfg = fdos::config_from_json(fdos::read_file(config_path));
        }
        if (given("--mode")) cfg.mode = fdos::parse_mode(mode);
        if (given("--lambda1")) cfg.lambda1 = lambda1;
        if (given("--lambda2")) cfg.lambda2 = lambda2;
        if (given("--varphi")) cfg.varphi = varphi;
        if (given("--knots")) cfg.intervals = knots;
        if (given("--degree")) cfg.degree = degree;
        if (given("--folds")) cfg.tuning.k_folds = folds;
        if (given("--seed")) {
            cfg.seed = seed;
            cfg.tuning.seed = seed;
        }
        if (given("--rho")) cfg.rho = rho;
        if (given("--eps-tol")) cfg.eps_tol = eps_tol;
        if (given("--max-iter")) cfg.max_iter = max_iter;
        if (given("--a")) cfg.a = a;
        if (given("--lambda1-values")) cfg.tuning.lambda1_values = lambda1_values;
        if (given("--lambda2-values")) cfg.tuning.lambda2_values = lambda2_values;
        if (given("--varphi-values")) cfg.tuning.varphi_values = varphi_values;
        if (given("--pad")) cfg.preprocess.pad = pad;
        if (given("--resample")) cfg.preprocess.resample_points = resample;
        if (given("--differentiate")) cfg.preprocess.differentiate = differentiate;
        if (given("--fft-max-hz")) cfg.preprocess.fft_max_hz = fft_max_hz;
        cfg.validate();
        return cfg;
    }
};

std::vector<std::pair<std::string, std::string>> preprocess_metadata(const fdos::RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> meta;
    const auto& p = cfg.preprocess;
    meta.emplace_back("preprocess.pad", p.pad ? "last-observation" : "none");
    meta.emplace_back("preprocess.resample_points", std::to_string(p.resample_points));
    meta.emplace_back("preprocess.differentiate", p.differentiate ? "central, one-sided second order at ends" : "none");
    if (p.fft_max_hz) {
        meta.emplace_back("preprocess.fft",
                          "magnitude up to " + fdos::format_double(*p.fft_max_hz) +
                              " Hz; Hann window on the mean-removed signal, bins scaled by 2/sum(window); "
                              "0 Hz bin holds |mean|");
    } else {
        meta.emplace_back("preprocess.fft", "none");
    }
    return meta;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
    std::ostringstream out;
    writer(out);
    fdos::write_file_atomic(path, out.str());
}

fdos::SimulationSpec simulation_spec(std::size_t n, std::size_t n_test, std::size_t replicates, std::uint64_t seed,
                                     double noise_sd) {
    fdos::SimulationSpec spec;
    spec.n_train = n;
    spec.n_test = n_test;
    spec.n_replicates = replicates;
    spec.seed = seed;
    spec.noise_sd = noise_sd;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalar-on-function regression with doubly sparse coefficient functions"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "write a synthetic train/test dataset as long-format CSV");
    std::size_t sim_n = 200;
    std::size_t sim_n_test = 1000;
    std::uint64_t sim_seed = 1;
    std::uint64_t sim_replicate = 0;
    double sim_noise = 1.0;
    std::string sim_out = ".";
    sim->add_option("--n", sim_n, "training subjects")->check(CLI::PositiveNumber);
    sim->add_option("--n-test", sim_n_test, "test subjects")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--replicate", sim_replicate, "replicate index");
    sim->add_option("--noise-sd", sim_noise, "response noise standard deviation")->check(CLI::NonNegativeNumber);
    sim->add_option("--out", sim_out, "output directory");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit at fixed tuning parameters");
    CommonFlags fit_flags;
    std::string fit_signals, fit_response, fit_out = ".";
    std::size_t fit_samples = 201;
    fit_cmd->add_option("--signals", fit_signals, "long-format signal CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--response", fit_response, "response CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit_out, "output directory");
    fit_cmd->add_option("--samples", fit_samples, "coefficient sample points")->check(CLI::Range(2, 1000000));
    fit_flags.add(fit_cmd);

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation over a tuning grid");
    CommonFlags cv_flags;
    std::string cv_signals, cv_response, cv_out = ".";
    cv_cmd->add_option("--signals", cv_signals, "long-format signal CSV")->required()->check(CLI::ExistingFile);
    cv_cmd->add_option("--response", cv_response, "response CSV")->required()->check(CLI::ExistingFile);
    cv_cmd->add_option("--out", cv_out, "output directory");
    cv_flags.add(cv_cmd);

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "predict responses from a stored fit");
    CommonFlags pred_flags;
    std::string pred_result, pred_signals, pred_response, pred_out = "predictions.csv";
    pred_cmd->add_option("--result", pred_result, "result file written by fit")->required()->check(CLI::ExistingFile);
    pred_cmd->add_option("--signals", pred_signals, "long-format signal CSV")->required()->check(CLI::ExistingFile);
    pred_cmd->add_option("--response", pred_response, "optional response CSV; reports PMSE")
        ->check(CLI::ExistingFile);
    pred_cmd->add_option("--out", pred_out, "prediction CSV path");
    pred_flags.add(pred_cmd);

    // benchmark
    auto* bench_cmd = app.add_subcommand("benchmark", "simulation study with metrics tables");
    CommonFlags bench_flags;
    std::size_t bench_n = 200, bench_n_test = 1000, bench_reps = 20;
    double bench_noise = 1.0;
    std::vector<std::string> bench_methods{"fdos", "faddos"};
    bool bench_fixed = false;
    std::string bench_out = ".";
    bench_cmd->add_option("--n", bench_n, "training subjects")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--n-test", bench_n_test, "test subjects")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--replicates", bench_reps, "replicates")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--noise-sd", bench_noise, "response noise standard deviation")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--methods", bench_methods, "fdos,faddos")
        ->delimiter(',')
        ->check(CLI::IsMember({"fdos", "faddos"}));
    bench_cmd->add_flag("--fixed", bench_fixed,
                        "fit every cell of the tuning grid without CV (first method only)");
    bench_cmd->add_option("--out", bench_out, "output directory");
    bench_flags.add(bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) {
            const auto spec = simulation_spec(sim_n, sim_n_test, 1, sim_seed, sim_noise);
            const fdos::SimulatedData data = fdos::simulate_dataset(spec, sim_replicate);
            const fs::path dir(sim_out);
            write_with(dir / "train_signals.csv", [&](std::ostream& o) { fdos::write_long_csv(o, data.train); });
            write_with(dir / "train_response.csv", [&](std::ostream& o) { fdos::write_responses_csv(o, data.train); });
            write_with(dir / "test_signals.csv", [&](std::ostream& o) { fdos::write_long_csv(o, data.test); });
            write_with(dir / "test_response.csv", [&](std::ostream& o) { fdos::write_responses_csv(o, data.test); });
            std::cout << "wrote " << sim_n << " training and " << sim_n_test << " test subjects to " << dir.string()
                      << "\n";
        } else if (*fit_cmd) {
            const fdos::RunConfig cfg = fit_flags.resolve();
            const auto data = fdos::load_long_csv(fit_signals, fit_response, cfg.preprocess);
            fdos::FitResult result = fdos::fit(data, cfg.basis_for(data.grid), cfg.fit_options());
            result.metadata = preprocess_metadata(cfg);
            const fs::path dir(fit_out);
            fdos::write_file_atomic(dir / "result.json", fdos::result_to_json(result));
            write_with(dir / "coefficients.csv",
                       [&](std::ostream& o) { fdos::write_coefficient_samples_csv(o, result, fit_samples, false); });
            std::cout << "mode=" << fdos::to_string(result.mode) << " iterations=" << result.diagnostics.iterations
                      << " converged=" << (result.diagnostics.converged ? "yes" : "no")
                      << " objective=" << fdos::format_double(result.diagnostics.objective) << " selected=";
            for (std::size_t k = 0; k < result.selected.size(); ++k) {
                std::cout << (k ? "," : "") << result.covariate_ids[result.selected[k]];
            }
            std::cout << "\n";
            if (!result.diagnostics.converged) {
                std::cerr << "fdos: warning: ADMM stopped at max_iter before reaching eps_tol\n";
            }
        } else if (*cv_cmd) {
            fdos::RunConfig cfg = cv_flags.resolve();
            const auto data = fdos::load_long_csv(cv_signals, cv_response, cfg.preprocess);
            const auto ctx = fdos::DesignContext::build(data, cfg.basis_for(data.grid));
            const fdos::CVResult cv = fdos::cross_validate(ctx, cfg.tuning, cfg.fit_options());
            const fdos::CVCell& best = cv.cells[cv.best];
            cfg.lambda1 = best.lambda1;
            cfg.lambda2 = best.lambda2;
            cfg.varphi = best.varphi;
            const fdos::FitResult refit = fdos::fit(ctx, cfg.fit_options());
            const fs::path dir(cv_out);
            write_with(dir / "cv_cells.csv", [&](std::ostream& o) {
                o << "lambda1,lambda2,varphi,mean_pmse,sd_pmse,convergence_rate,best\n";
                for (std::size_t c = 0; c < cv.cells.size(); ++c) {
                    const auto& cell = cv.cells[c];
                    o << fdos::format_double(cell.lambda1) << ',' << fdos::format_double(cell.lambda2) << ','
                      << fdos::format_double(cell.varphi) << ',' << fdos::format_double(cell.mean_pmse) << ','
                      << fdos::format_double(cell.sd_pmse) << ',' << fdos::format_double(cell.convergence_rate)
                      << ',' << (c == cv.best ? 1 : 0) << '\n';
                }
            });
            std::string chosen = fdos::config_to_json(cfg);
            // attach the refit summary so a later `fit --config` can be checked against it
            chosen.pop_back();
            chosen.pop_back();
            chosen += ",\n  \"refit\": {\"objective\": " + fdos::format_double(refit.diagnostics.objective) +
                      ", \"iterations\": " + std::to_string(refit.diagnostics.iterations) + "}\n}\n";
            fdos::write_file_atomic(dir / "cv_config.json", chosen);
            std::cout << "best lambda1=" << fdos::format_double(best.lambda1)
                      << " lambda2=" << fdos::format_double(best.lambda2)
                      << " varphi=" << fdos::format_double(best.varphi)
                      << " cv_pmse=" << fdos::format_double(best.mean_pmse) << "\n";
        } else if (*pred_cmd) {
            const fdos::RunConfig cfg = pred_flags.resolve();
            const fdos::FitResult result = fdos::result_from_json(fdos::read_file(pred_result));
            std::optional<fs::path> response;
            if (!pred_response.empty()) {
                response = pred_response;
            }
            const auto data = fdos::load_long_csv(pred_signals, response, cfg.preprocess);
            const Eigen::VectorXd pred = fdos::predict(result, data);
            write_with(pred_out, [&](std::ostream& o) {
                o << "subject_id,prediction\n";
                for (std::size_t i = 0; i < data.n(); ++i) {
                    o << data.subject_ids[i] << ',' << fdos::format_double(pred(static_cast<Eigen::Index>(i))) << '\n';
                }
            });
            if (response) {
                const double pmse = (data.Y - pred).squaredNorm() / static_cast<double>(data.n());
                std::cout << "pmse=" << fdos::format_double(pmse) << "\n";
            }
        } else if (*bench_cmd) {
            const fdos::RunConfig cfg = bench_flags.resolve();
            const auto spec = simulation_spec(bench_n, bench_n_test, bench_reps, cfg.seed, bench_noise);
            fdos::BenchmarkOptions opts;
            opts.n_intervals = cfg.intervals;
            opts.degree = cfg.degree;
            opts.base = cfg.fit_options();
            fdos::BenchmarkReport report;
            if (bench_fixed) {
                std::vector<fdos::CVCell> cells;
                for (double v : cfg.tuning.varphi_values) {
                    for (double l2 : cfg.tuning.lambda2_values) {
                        for (double l1 : cfg.tuning.lambda1_values) {
                            cells.push_back({l1, l2, v, 0.0, 0.0, 0.0});
                        }
                    }
                }
                report = fdos::run_fixed_cells(spec, fdos::parse_mode(bench_methods.at(0)), cells, opts);
            } else {
                std::vector<fdos::Mode> methods;
                for (const auto& m : bench_methods) {
                    methods.push_back(fdos::parse_mode(m));
                }
                report = fdos::run_benchmark(spec, methods, cfg.tuning, opts);
            }
            const fs::path dir(bench_out);
            write_with(dir / "replicates.csv", [&](std::ostream& o) { fdos::write_replicates_csv(o, report); });
            write_with(dir / "aggregate.csv", [&](std::ostream& o) { fdos::write_aggregate_csv(o, report); });
            for (const auto& a : report.aggregate) {
                std::cout << a.label << ": pmse=" << fdos::format_double(a.pmse.mean)
                          << " tnr=" << fdos::format_double(a.tnr.mean)
                          << " sum_ise_null=" << fdos::format_double(a.sum_ise_null.mean) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "fdos: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
