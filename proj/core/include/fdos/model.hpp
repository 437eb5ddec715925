#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdos/basis.hpp"
#include "fdos/design.hpp"
#include "fdos/solver.hpp"

namespace fdos {

enum class Mode {
    fdos,   ///< unit weights
    faddos, ///< adaptive weights from a ridge-type initial estimate
};

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Everything about a dataset that does not depend on the tuning
/// parameters: the basis on the grid and U_j for each covariate.
struct DesignContext {
    BasisSystem basis;
    EvalGrid grid;
    BasisOnGrid projected;
    std::vector<Eigen::MatrixXd> U; // J matrices, n x K
    Eigen::VectorXd Y;

    static DesignContext build(const FunctionalDataset& data, const BasisSystem& basis);

    std::size_t n() const { return static_cast<std::size_t>(Y.size()); }
    std::size_t J() const { return U.size(); }

    /// Rows of U and Y; the basis quantities are shared.
    DesignContext subset(std::span<const std::size_t> rows) const;

    /// One design block per covariate for the given roughness weight.
    std::vector<DesignBlock> blocks(double varphi) const;
};

/// Smoothing-spline type estimate: minimizes
/// 1/2 |Y - mu - sum U_j b_j|^2 + ridge_lambda sum b_j' Omega b_j.
struct InitialEstimate {
    std::vector<Eigen::VectorXd> coefficients;
    double mu = 0.0;
    double ridge_lambda = 0.0;
    Eigen::VectorXd norms_l1; // grid L1 norm of each beta_j
    Eigen::VectorXd norms_l2; // grid L2 norm of each beta_j
};

InitialEstimate initial_estimator(const DesignContext& ctx, double ridge_lambda);
InitialEstimate initial_estimator(const FunctionalDataset& data, const BasisSystem& basis, double ridge_lambda);

/// GCV choice over 10 log-spaced values 10^-6 .. 10^3 times
/// tr(Uc'Uc) / tr(blockdiag Omega), Uc being the centered design.
double select_ridge_lambda(const DesignContext& ctx);

struct AdaptiveWeights {
    Eigen::VectorXd w1;
    Eigen::VectorXd w2;
};

/// w = max(norm, floor)^-a for both norms.
AdaptiveWeights adaptive_weights(const InitialEstimate& init, double a = 1.0, double floor = 1e-8);

struct FitOptions {
    Mode mode = Mode::faddos;
    double varphi = 0.0;
    SolverConfig solver; // its weights are ignored; see `weights`
    double a = 1.0;
    double weight_floor = 1e-8;
    std::optional<double> ridge_lambda;    // GCV when unset
    std::optional<AdaptiveWeights> weights; // overrides the mode's weights
};

struct FitDiagnostics {
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
};

struct FitResult {
    FitResult(BasisSystem basis_in, EvalGrid grid_in) : basis(std::move(basis_in)), grid(std::move(grid_in)) {}

    BasisSystem basis;
    EvalGrid grid;
    Mode mode = Mode::faddos;
    double varphi = 0.0;
    SolverConfig config_used; // weights filled in
    AdaptiveWeights weights_used;
    std::vector<Eigen::VectorXd> b_star; // per covariate, in the original B-spline basis
    double mu_hat = 0.0;
    std::vector<std::size_t> selected;   // 0-based covariate indices with a nonzero block
    std::vector<std::vector<Interval>> zero_subregions; // per covariate
    FitDiagnostics diagnostics;
    Eigen::VectorXd fitted; // training predictions
    std::vector<std::string> covariate_ids;
    std::vector<std::pair<std::string, std::string>> metadata; // free-form notes carried into result files

    std::size_t J() const { return b_star.size(); }
};

/// Weights for `options.mode` computed from the context's training data.
AdaptiveWeights resolve_weights(const DesignContext& ctx, const FitOptions& options);

FitResult fit(const FunctionalDataset& data, const BasisSystem& basis, const FitOptions& options);
FitResult fit(const DesignContext& ctx, const FitOptions& options);

/// Fit with prebuilt blocks (for `options.varphi`) and resolved weights.
/// Used by the tuning loops to share blocks and warm starts.
FitResult fit_with_blocks(const DesignContext& ctx, std::span<const DesignBlock> blocks, const FitOptions& options,
                          const AdaptiveWeights& weights, const SolverState* warm_start = nullptr,
                          SolverState* final_state = nullptr);

/// beta_j(t) = B(t)' b_j.
double reconstruct_coefficient(const FitResult& fit, std::size_t j, double t);

/// Union of knot subintervals on which every supported coefficient is
/// exactly zero, adjacent pieces merged.
std::vector<Interval> zero_subregions(const BasisSystem& basis, const Eigen::VectorXd& coefficients);
std::vector<Interval> zero_subregions(const FitResult& fit, std::size_t j);

/// mu + sum_j int X_ij beta_j on the fit's grid.
Eigen::VectorXd predict(const FitResult& fit, const FunctionalDataset& data);

} // namespace fdos
