#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdos/design.hpp"
#include "fdos/model.hpp"
#include "fdos/tuning.hpp"

namespace fdos {

/// Synthetic scenario with J = 10 covariates: beta_1 vanishes on
/// (1/3, 2/3), beta_2 has two zero crossings, beta_3..beta_10 are null.
/// Covariates are random combinations of a cubic B-spline basis with
/// `x_knots` equally spaced knots.
struct SimulationSpec {
    std::size_t n_train = 200;
    std::size_t n_test = 1000;
    std::size_t n_replicates = 20;
    std::uint64_t seed = 1;
    double noise_sd = 1.0;
    std::size_t J = 10;
    int x_knots = 50;
    int x_degree = 3;
    std::size_t grid_points = 201;        // observation grid on [0, 1]
    std::size_t signal_grid_points = 2000; // quadrature grid for the true integrals
    bool null_signal = false;              // every beta forced to 0

    void validate() const;
};

/// Closed-form coefficient functions, j = 1..10, t in [0, 1].
double true_beta(int j, double t);

struct SimulatedData {
    FunctionalDataset train;
    FunctionalDataset test;
    Eigen::VectorXd signal_train; // noiseless responses
    Eigen::VectorXd signal_test;
};

/// Replicate `replicate` of the scenario; its generator is seeded from
/// (spec.seed, replicate), so replicates are independent and reproducible.
SimulatedData simulate_dataset(const SimulationSpec& spec, std::uint64_t replicate = 0);

enum class Region {
    all,     ///< [0, 1]
    zero,    ///< the true zero subregion (1/3, 2/3) of beta_1
    nonzero, ///< its complement
};

/// (1/|region|) int_region (beta_hat - beta_j)^2, composite trapezoid with
/// `points` nodes per unit length. Region::zero / nonzero are defined for
/// j = 1 only.
double ise(const std::function<double(double)>& beta_hat, int j, Region region, std::size_t points = 2000);

/// Share of true nulls left out of `selected`.
double tnr(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& true_nulls);

/// Mean squared prediction error on `test`.
double pmse(const FitResult& fit, const FunctionalDataset& test);

/// Fraction of `target` covered by the estimated zero subregions of covariate j.
double zero_region_coverage(const FitResult& fit, std::size_t j, Interval target);

struct ReplicateMetrics {
    double pmse = 0.0;
    std::vector<double> ise; // per covariate
    double ise0_beta1 = 0.0;
    double ise1_beta1 = 0.0;
    double sum_ise_null = 0.0; // covariates 3..10
    double tnr = 0.0;
    double zero_coverage_beta1 = 0.0;
};

ReplicateMetrics evaluate_fit(const FitResult& fit, const FunctionalDataset& test);

struct BenchmarkOptions {
    int n_intervals = 20; // estimation basis
    int degree = 3;
    FitOptions base;      // solver settings, a, weight floor
};

struct BenchmarkRow {
    std::size_t replicate = 0;
    Mode mode = Mode::faddos;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double varphi = 0.0;
    ReplicateMetrics metrics;
    int iterations = 0;
    bool converged = false;
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct AggregateRow {
    std::string label;
    std::size_t count = 0;
    MetricSummary pmse, ise0_beta1, ise1_beta1, ise_beta1, ise_beta2, sum_ise_null, tnr, zero_coverage_beta1;
    double convergence_rate = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    std::vector<AggregateRow> aggregate;
};

/// Per replicate and method: k-fold CV over `grid`, refit at the chosen
/// cell on the full training set, evaluate on the test set.
BenchmarkReport run_benchmark(const SimulationSpec& spec, const std::vector<Mode>& methods, const TuningGrid& grid,
                              const BenchmarkOptions& options);

/// Fixed (lambda1, lambda2, varphi) cells, no CV: every replicate is fitted
/// at every cell with the mode's weights. One aggregate row per cell.
BenchmarkReport run_fixed_cells(const SimulationSpec& spec, Mode mode, const std::vector<CVCell>& cells,
                                const BenchmarkOptions& options);

AggregateRow summarize(const std::string& label, const std::vector<const BenchmarkRow*>& rows);

void write_replicates_csv(std::ostream& out, const BenchmarkReport& report);
void write_aggregate_csv(std::ostream& out, const BenchmarkReport& report);

/// covariate,t,estimate[,truth] on `points` equally spaced t per covariate.
void write_coefficient_samples_csv(std::ostream& out, const FitResult& fit, std::size_t points,
                                   bool with_truth);

} // namespace fdos
