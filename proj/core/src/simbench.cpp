#include "fdos/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "fdos/error.hpp"
#include "fdos/io.hpp"
#include "fdos/parallel.hpp"

namespace fdos {

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;

/// Composite trapezoid of f over [a, b] with m + 1 nodes.
double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t m) {
    const double h = (b - a) / static_cast<double>(m);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < m; ++i) {
        sum += f(a + h * static_cast<double>(i));
    }
    return sum * h;
}

std::size_t nodes_for(double length, std::size_t per_unit) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(length * static_cast<double>(per_unit))));
}

std::mt19937_64 replicate_generator(std::uint64_t seed, std::uint64_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

void SimulationSpec::validate() const {
    if (n_train == 0 || n_test == 0 || n_replicates == 0) {
        throw ConfigError("simulation sizes must be positive");
    }
    if (J == 0 || J > 10) {
        throw ConfigError("simulation supports 1..10 covariates");
    }
    if (!(noise_sd >= 0.0)) {
        throw ConfigError("noise_sd must be >= 0");
    }
    if (x_knots < 2 || x_degree < 1 || grid_points < 2 || signal_grid_points < 2) {
        throw ConfigError("invalid covariate basis or grid size");
    }
}

double true_beta(int j, double t) {
    if (j < 1 || j > 10) {
        throw DomainError("true_beta: covariate index " + std::to_string(j) + " outside 1..10");
    }
    if (!(t >= -1e-12 && t <= 1.0 + 1e-12)) {
        throw DomainError("true_beta: t = " + std::to_string(t) + " outside [0, 1]");
    }
    const double s = std::sin(3.0 * std::numbers::pi * t);
    switch (j) {
    case 1:
        if (t <= kThird) {
            return 2.0 * s;
        }
        if (t < kTwoThirds) {
            return 0.0;
        }
        return -2.0 * s;
    case 2:
        return 1.5 * t * t + 2.0 * s;
    default:
        return 0.0;
    }
}

SimulatedData simulate_dataset(const SimulationSpec& spec, std::uint64_t replicate) {
    spec.validate();
    const BasisSystem xbasis({0.0, 1.0}, spec.x_knots - 1, spec.x_degree);
    const EvalGrid grid = EvalGrid::uniform(0.0, 1.0, spec.grid_points);
    const Eigen::MatrixXd B_obs = basis_matrix(xbasis, grid);
    const Eigen::Index Kx = xbasis.size();

    // c_j = int B(t) beta_j(t) dt on the fine grid (trapezoid)
    const EvalGrid fine = EvalGrid::uniform(0.0, 1.0, spec.signal_grid_points);
    const Eigen::MatrixXd B_fine = basis_matrix(xbasis, fine);
    Eigen::VectorXd w_fine = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fine.size()), fine.spacing());
    w_fine(0) *= 0.5;
    w_fine(w_fine.size() - 1) *= 0.5;
    std::vector<Eigen::VectorXd> c(spec.J, Eigen::VectorXd::Zero(Kx));
    if (!spec.null_signal) {
        for (std::size_t j = 0; j < spec.J; ++j) {
            Eigen::VectorXd beta(static_cast<Eigen::Index>(fine.size()));
            for (std::size_t r = 0; r < fine.size(); ++r) {
                beta(static_cast<Eigen::Index>(r)) = true_beta(static_cast<int>(j) + 1, fine[r]);
            }
            c[j] = B_fine.transpose() * w_fine.cwiseProduct(beta);
        }
    }

    auto gen = replicate_generator(spec.seed, replicate);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto draw = [&](std::size_t n, FunctionalDataset& data, Eigen::VectorXd& signal) {
        data.grid = grid;
        data.X.assign(spec.J, Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size())));
        signal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        Eigen::VectorXd a(Kx);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            for (std::size_t j = 0; j < spec.J; ++j) {
                for (Eigen::Index k = 0; k < Kx; ++k) {
                    a(k) = normal(gen);
                }
                data.X[j].row(row) = (B_obs * a).transpose();
                signal(row) += a.dot(c[j]);
            }
        }
        data.Y = signal;
        for (std::size_t i = 0; i < n; ++i) {
            data.Y(static_cast<Eigen::Index>(i)) += spec.noise_sd * normal(gen);
        }
        data.subject_ids.clear();
        for (std::size_t i = 0; i < n; ++i) {
            data.subject_ids.push_back("s" + std::to_string(i + 1));
        }
        data.covariate_ids.clear();
        for (std::size_t j = 0; j < spec.J; ++j) {
            data.covariate_ids.push_back("X" + std::to_string(j + 1));
        }
    };

    SimulatedData out;
    draw(spec.n_train, out.train, out.signal_train);
    draw(spec.n_test, out.test, out.signal_test);
    return out;
}

double ise(const std::function<double(double)>& beta_hat, int j, Region region, std::size_t points) {
    if (region != Region::all && j != 1) {
        throw ConfigError("ise: zero/nonzero regions are only defined for beta_1");
    }
    auto sq = [&](double t) {
        const double e = beta_hat(t) - true_beta(j, t);
        return e * e;
    };
    switch (region) {
    case Region::all:
        return trapezoid(sq, 0.0, 1.0, nodes_for(1.0, points));
    case Region::zero:
        return trapezoid(sq, kThird, kTwoThirds, nodes_for(kThird, points)) / kThird;
    case Region::nonzero:
        return (trapezoid(sq, 0.0, kThird, nodes_for(kThird, points)) +
                trapezoid(sq, kTwoThirds, 1.0, nodes_for(kThird, points))) /
               kTwoThirds;
    }
    throw ConfigError("ise: unknown region");
}

double tnr(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& true_nulls) {
    if (true_nulls.empty()) {
        throw ConfigError("tnr: no true nulls");
    }
    std::size_t excluded = 0;
    for (const std::size_t j : true_nulls) {
        if (std::find(selected.begin(), selected.end(), j) == selected.end()) {
            ++excluded;
        }
    }
    return static_cast<double>(excluded) / static_cast<double>(true_nulls.size());
}

double pmse(const FitResult& fit, const FunctionalDataset& test) {
    const Eigen::VectorXd pred = predict(fit, test);
    return (test.Y - pred).squaredNorm() / static_cast<double>(test.Y.size());
}

double zero_region_coverage(const FitResult& fit, std::size_t j, Interval target) {
    double covered = 0.0;
    for (const Interval& iv : zero_subregions(fit, j)) {
        covered += std::max(0.0, std::min(iv.end, target.end) - std::max(iv.start, target.start));
    }
    return covered / target.length();
}

ReplicateMetrics evaluate_fit(const FitResult& fit, const FunctionalDataset& test) {
    ReplicateMetrics m;
    m.pmse = pmse(fit, test);
    std::vector<std::size_t> nulls;
    for (std::size_t j = 0; j < fit.J(); ++j) {
        auto beta_hat = [&](double t) { return reconstruct_coefficient(fit, j, t); };
        const int index = static_cast<int>(j) + 1;
        m.ise.push_back(ise(beta_hat, index, Region::all));
        if (index == 1) {
            m.ise0_beta1 = ise(beta_hat, 1, Region::zero);
            m.ise1_beta1 = ise(beta_hat, 1, Region::nonzero);
            m.zero_coverage_beta1 = zero_region_coverage(fit, 0, {kThird, kTwoThirds});
        }
        if (index >= 3) {
            m.sum_ise_null += m.ise.back();
            nulls.push_back(j);
        }
    }
    m.tnr = nulls.empty() ? 1.0 : tnr(fit.selected, nulls);
    return m;
}

AggregateRow summarize(const std::string& label, const std::vector<const BenchmarkRow*>& rows) {
    AggregateRow agg;
    agg.label = label;
    agg.count = rows.size();
    auto stat = [&](auto getter) {
        MetricSummary s;
        if (rows.empty()) {
            return s;
        }
        for (const auto* r : rows) {
            s.mean += getter(*r);
        }
        s.mean /= static_cast<double>(rows.size());
        if (rows.size() > 1) {
            double ss = 0.0;
            for (const auto* r : rows) {
                ss += (getter(*r) - s.mean) * (getter(*r) - s.mean);
            }
            s.sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
        }
        return s;
    };
    agg.pmse = stat([](const BenchmarkRow& r) { return r.metrics.pmse; });
    agg.ise0_beta1 = stat([](const BenchmarkRow& r) { return r.metrics.ise0_beta1; });
    agg.ise1_beta1 = stat([](const BenchmarkRow& r) { return r.metrics.ise1_beta1; });
    agg.ise_beta1 = stat([](const BenchmarkRow& r) { return r.metrics.ise.at(0); });
    agg.ise_beta2 = stat([](const BenchmarkRow& r) { return r.metrics.ise.size() > 1 ? r.metrics.ise[1] : 0.0; });
    agg.sum_ise_null = stat([](const BenchmarkRow& r) { return r.metrics.sum_ise_null; });
    agg.tnr = stat([](const BenchmarkRow& r) { return r.metrics.tnr; });
    agg.zero_coverage_beta1 = stat([](const BenchmarkRow& r) { return r.metrics.zero_coverage_beta1; });
    agg.convergence_rate = stat([](const BenchmarkRow& r) { return r.converged ? 1.0 : 0.0; }).mean;
    return agg;
}

BenchmarkReport run_benchmark(const SimulationSpec& spec, const std::vector<Mode>& methods, const TuningGrid& grid,
                              const BenchmarkOptions& options) {
    spec.validate();
    if (methods.empty()) {
        throw ConfigError("run_benchmark: no methods requested");
    }
    const BasisSystem basis({0.0, 1.0}, options.n_intervals, options.degree);
    std::vector<std::vector<BenchmarkRow>> per_replicate(spec.n_replicates);

    parallel_for(spec.n_replicates, [&](std::size_t rep) {
        const SimulatedData sim = simulate_dataset(spec, rep);
        const DesignContext ctx = DesignContext::build(sim.train, basis);
        TuningGrid tg = grid;
        tg.seed = grid.seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1));
        for (const Mode mode : methods) {
            FitOptions opts = options.base;
            opts.mode = mode;
            const CVResult cv = cross_validate(ctx, tg, opts);
            const CVCell& best = cv.cells[cv.best];
            const FitResult result = fit(ctx, with_cell(opts, best));
            BenchmarkRow row;
            row.replicate = rep;
            row.mode = mode;
            row.lambda1 = best.lambda1;
            row.lambda2 = best.lambda2;
            row.varphi = best.varphi;
            row.metrics = evaluate_fit(result, sim.test);
            row.iterations = result.diagnostics.iterations;
            row.converged = result.diagnostics.converged;
            per_replicate[rep].push_back(std::move(row));
        }
    });

    BenchmarkReport report;
    for (auto& rows : per_replicate) {
        for (auto& r : rows) {
            report.rows.push_back(std::move(r));
        }
    }
    for (const Mode mode : methods) {
        std::vector<const BenchmarkRow*> sel;
        for (const auto& r : report.rows) {
            if (r.mode == mode) {
                sel.push_back(&r);
            }
        }
        report.aggregate.push_back(summarize(to_string(mode), sel));
    }
    return report;
}

BenchmarkReport run_fixed_cells(const SimulationSpec& spec, Mode mode, const std::vector<CVCell>& cells,
                                const BenchmarkOptions& options) {
    spec.validate();
    if (cells.empty()) {
        throw ConfigError("run_fixed_cells: no cells");
    }
    const BasisSystem basis({0.0, 1.0}, options.n_intervals, options.degree);
    std::vector<std::vector<BenchmarkRow>> per_replicate(spec.n_replicates);

    parallel_for(spec.n_replicates, [&](std::size_t rep) {
        const SimulatedData sim = simulate_dataset(spec, rep);
        const DesignContext ctx = DesignContext::build(sim.train, basis);
        FitOptions opts = options.base;
        opts.mode = mode;
        const AdaptiveWeights weights = resolve_weights(ctx, opts);
        double blocks_varphi = -1.0;
        std::vector<DesignBlock> blocks;
        for (const CVCell& cell : cells) {
            if (cell.varphi != blocks_varphi) {
                blocks = ctx.blocks(cell.varphi);
                blocks_varphi = cell.varphi;
            }
            const FitOptions cell_opts = with_cell(opts, cell);
            const FitResult result = fit_with_blocks(ctx, blocks, cell_opts, weights);
            BenchmarkRow row;
            row.replicate = rep;
            row.mode = mode;
            row.lambda1 = cell.lambda1;
            row.lambda2 = cell.lambda2;
            row.varphi = cell.varphi;
            row.metrics = evaluate_fit(result, sim.test);
            row.iterations = result.diagnostics.iterations;
            row.converged = result.diagnostics.converged;
            per_replicate[rep].push_back(std::move(row));
        }
    });

    BenchmarkReport report;
    for (auto& rows : per_replicate) {
        for (auto& r : rows) {
            report.rows.push_back(std::move(r));
        }
    }
    for (const CVCell& cell : cells) {
        std::vector<const BenchmarkRow*> sel;
        for (const auto& r : report.rows) {
            if (r.lambda1 == cell.lambda1 && r.lambda2 == cell.lambda2 && r.varphi == cell.varphi) {
                sel.push_back(&r);
            }
        }
        report.aggregate.push_back(summarize("lambda1=" + format_double(cell.lambda1) + ";lambda2=" +
                                                 format_double(cell.lambda2) + ";varphi=" + format_double(cell.varphi),
                                             sel));
    }
    return report;
}

void write_replicates_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "replicate,method,lambda1,lambda2,varphi,pmse,ise0_beta1,ise1_beta1,ise_beta1,ise_beta2,"
           "sum_ise_null,tnr,zero_coverage_beta1,iterations,converged\n";
    for (const auto& r : report.rows) {
        const auto& m = r.metrics;
        out << r.replicate << ',' << to_string(r.mode) << ',' << format_double(r.lambda1) << ','
            << format_double(r.lambda2) << ',' << format_double(r.varphi) << ',' << format_double(m.pmse) << ','
            << format_double(m.ise0_beta1) << ',' << format_double(m.ise1_beta1) << ','
            << format_double(m.ise.at(0)) << ',' << format_double(m.ise.size() > 1 ? m.ise[1] : 0.0) << ','
            << format_double(m.sum_ise_null) << ',' << format_double(m.tnr) << ','
            << format_double(m.zero_coverage_beta1) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "label,replicates,pmse_mean,pmse_sd,ise0_beta1_mean,ise0_beta1_sd,ise1_beta1_mean,ise1_beta1_sd,"
           "ise_beta1_mean,ise_beta1_sd,ise_beta2_mean,ise_beta2_sd,sum_ise_null_mean,sum_ise_null_sd,"
           "tnr_mean,tnr_sd,zero_coverage_beta1_mean,zero_coverage_beta1_sd,convergence_rate\n";
    for (const auto& a : report.aggregate) {
        out << a.label << ',' << a.count;
        for (const MetricSummary* s : {&a.pmse, &a.ise0_beta1, &a.ise1_beta1, &a.ise_beta1, &a.ise_beta2,
                                       &a.sum_ise_null, &a.tnr, &a.zero_coverage_beta1}) {
            out << ',' << format_double(s->mean) << ',' << format_double(s->sd);
        }
        out << ',' << format_double(a.convergence_rate) << '\n';
    }
}

void write_coefficient_samples_csv(std::ostream& out, const FitResult& fit, std::size_t points, bool with_truth) {
    const EvalGrid grid = EvalGrid::uniform(fit.basis.domain().start, fit.basis.domain().end, points);
    out << (with_truth ? "covariate,t,estimate,truth\n" : "covariate,t,estimate\n");
    for (std::size_t j = 0; j < fit.J(); ++j) {
        const std::string name = j < fit.covariate_ids.size() ? fit.covariate_ids[j] : "X" + std::to_string(j + 1);
        for (std::size_t r = 0; r < grid.size(); ++r) {
            out << name << ',' << format_double(grid[r]) << ',' << format_double(reconstruct_coefficient(fit, j, grid[r]));
            if (with_truth) {
                out << ',' << format_double(j < 10 ? true_beta(static_cast<int>(j) + 1, grid[r]) : 0.0);
            }
            out << '\n';
        }
    }
}

} // namespace fdos
