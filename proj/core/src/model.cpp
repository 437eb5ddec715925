#include "fdos/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "fdos/error.hpp"

namespace fdos {

std::string to_string(Mode mode) {
    return mode == Mode::fdos ? "fdos" : "faddos";
}

Mode parse_mode(std::string_view text) {
    if (text == "fdos" || text == "FDoS") {
        return Mode::fdos;
    }
    if (text == "faddos" || text == "FadDoS") {
        return Mode::faddos;
    }
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected fdos or faddos)");
}

DesignContext DesignContext::build(const FunctionalDataset& data, const BasisSystem& basis) {
    data.validate();
    DesignContext ctx{basis, data.grid, project(basis, data.grid), {}, data.Y};
    ctx.U.reserve(data.J());
    for (const auto& X : data.X) {
        ctx.U.push_back(compute_U(X, ctx.projected));
    }
    return ctx;
}

DesignContext DesignContext::subset(std::span<const std::size_t> rows) const {
    DesignContext out{basis, grid, projected, {}, Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
    out.U.assign(U.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), basis.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(rows[i]);
        const auto dst = static_cast<Eigen::Index>(i);
        out.Y(dst) = Y(src);
        for (std::size_t j = 0; j < U.size(); ++j) {
            out.U[j].row(dst) = U[j].row(src);
        }
    }
    return out;
}

std::vector<DesignBlock> DesignContext::blocks(double varphi) const {
    if (varphi > 0.0 && projected.roughness.size() == 0) {
        throw ConfigError("a roughness penalty needs degree >= 2");
    }
    std::vector<DesignBlock> out;
    out.reserve(U.size());
    for (const auto& Uj : U) {
        out.push_back(build_block_from_parts(Uj, projected.gram, projected.roughness, varphi, basis.delta_n()));
    }
    return out;
}

namespace {

struct RidgeSystem {
    Eigen::MatrixXd A_centered; // n x JK
    Eigen::VectorXd y_centered;
    Eigen::RowVectorXd column_means;
    Eigen::MatrixXd penalty;    // blockdiag(Omega)
    Eigen::MatrixXd gram;       // Ac' Ac
    Eigen::VectorXd cross;      // Ac' yc
};

RidgeSystem ridge_system(const DesignContext& ctx) {
    if (ctx.projected.roughness.size() == 0) {
        throw ConfigError("initial estimator needs degree >= 2 for its roughness penalty");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(ctx.n());
    const Eigen::Index K = ctx.basis.size();
    const Eigen::Index J = static_cast<Eigen::Index>(ctx.J());
    RidgeSystem s;
    Eigen::MatrixXd A(n, J * K);
    s.penalty = Eigen::MatrixXd::Zero(J * K, J * K);
    for (Eigen::Index j = 0; j < J; ++j) {
        A.middleCols(j * K, K) = ctx.U[static_cast<std::size_t>(j)];
        s.penalty.block(j * K, j * K, K, K) = ctx.projected.roughness;
    }
    s.column_means = A.colwise().mean();
    s.A_centered = A.rowwise() - s.column_means;
    s.y_centered = ctx.Y.array() - ctx.Y.mean();
    s.gram = s.A_centered.transpose() * s.A_centered;
    s.cross = s.A_centered.transpose() * s.y_centered;
    return s;
}

/// LLT of gram + 2 lambda penalty, with the same jitter ladder as the design blocks.
Eigen::LLT<Eigen::MatrixXd> ridge_factor(const RidgeSystem& s, double ridge_lambda) {
    Eigen::MatrixXd M = s.gram + 2.0 * ridge_lambda * s.penalty;
    const double mean_diag = std::max(M.trace() / static_cast<double>(M.rows()), 1e-300);
    for (const double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
        Eigen::MatrixXd shifted = M;
        shifted.diagonal().array() += rel * mean_diag;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            return llt;
        }
    }
    throw NumericalError("initial estimator: ridge system is singular even with jitter");
}

InitialEstimate solve_ridge(const DesignContext& ctx, const RidgeSystem& s, double ridge_lambda) {
    if (!(ridge_lambda > 0.0)) {
        throw ConfigError("ridge_lambda must be > 0");
    }
    const Eigen::VectorXd b = ridge_factor(s, ridge_lambda).solve(s.cross);
    const Eigen::Index K = ctx.basis.size();
    const Eigen::Index J = static_cast<Eigen::Index>(ctx.J());

    InitialEstimate est;
    est.ridge_lambda = ridge_lambda;
    est.mu = ctx.Y.mean() - s.column_means.dot(b);
    est.norms_l1.resize(J);
    est.norms_l2.resize(J);
    const Eigen::ArrayXd w = ctx.projected.weights.array();
    for (Eigen::Index j = 0; j < J; ++j) {
        est.coefficients.push_back(b.segment(j * K, K));
        const Eigen::ArrayXd values = (ctx.projected.values * est.coefficients.back()).array();
        est.norms_l1(j) = (w * values.abs()).sum();
        est.norms_l2(j) = std::sqrt((w * values.square()).sum());
    }
    return est;
}

} // namespace

InitialEstimate initial_estimator(const DesignContext& ctx, double ridge_lambda) {
    return solve_ridge(ctx, ridge_system(ctx), ridge_lambda);
}

InitialEstimate initial_estimator(const FunctionalDataset& data, const BasisSystem& basis, double ridge_lambda) {
    return initial_estimator(DesignContext::build(data, basis), ridge_lambda);
}

double select_ridge_lambda(const DesignContext& ctx) {
    const RidgeSystem s = ridge_system(ctx);
    const double n = static_cast<double>(ctx.n());
    const double scale = s.gram.trace() / std::max(s.penalty.trace(), 1e-300);
    double best_lambda = 0.0;
    double best_gcv = std::numeric_limits<double>::infinity();
    for (int e = -6; e <= 3; ++e) {
        const double lambda = scale * std::pow(10.0, e);
        const auto llt = ridge_factor(s, lambda);
        const Eigen::VectorXd b = llt.solve(s.cross);
        const double rss = (s.y_centered - s.A_centered * b).squaredNorm();
        // trace of the hat matrix, +1 for the intercept
        const double df = 1.0 + llt.solve(s.gram).trace();
        const double denom = n - df;
        const double gcv = denom > 0.0 ? n * rss / (denom * denom) : std::numeric_limits<double>::infinity();
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best_lambda = lambda;
        }
    }
    if (!std::isfinite(best_gcv)) {
        // more coefficients than subjects at every level; fall back to the heaviest penalty
        best_lambda = scale * 1e3;
    }
    return best_lambda;
}

AdaptiveWeights adaptive_weights(const InitialEstimate& init, double a, double floor) {
    if (!(a > 0.0)) {
        throw ConfigError("adaptive exponent a must be > 0");
    }
    if (!(floor > 0.0)) {
        throw ConfigError("weight floor must be > 0");
    }
    auto weigh = [&](const Eigen::VectorXd& norms) {
        Eigen::VectorXd w(norms.size());
        for (Eigen::Index j = 0; j < norms.size(); ++j) {
            w(j) = std::pow(std::max(norms(j), floor), -a);
        }
        return w;
    };
    return {weigh(init.norms_l1), weigh(init.norms_l2)};
}

AdaptiveWeights resolve_weights(const DesignContext& ctx, const FitOptions& options) {
    if (options.weights) {
        return *options.weights;
    }
    const auto J = static_cast<Eigen::Index>(ctx.J());
    if (options.mode == Mode::fdos) {
        return {Eigen::VectorXd::Ones(J), Eigen::VectorXd::Ones(J)};
    }
    const double ridge = options.ridge_lambda ? *options.ridge_lambda : select_ridge_lambda(ctx);
    return adaptive_weights(initial_estimator(ctx, ridge), options.a, options.weight_floor);
}

FitResult fit_with_blocks(const DesignContext& ctx, std::span<const DesignBlock> blocks, const FitOptions& options,
                          const AdaptiveWeights& weights, const SolverState* warm_start, SolverState* final_state) {
    SolverConfig config = options.solver;
    config.w1 = weights.w1;
    config.w2 = weights.w2;
    const AdmmSolver solver(blocks, ctx.Y, config);
    SolverSolution sol = solver.run(warm_start);

    FitResult out{ctx.basis, ctx.grid};
    out.mode = options.mode;
    out.varphi = options.varphi;
    out.config_used = config;
    out.weights_used = weights;
    out.b_star = std::move(sol.b_star);
    out.mu_hat = sol.mu_hat;
    out.diagnostics = {sol.iters, sol.converged, sol.objective};
    out.fitted = Eigen::VectorXd::Constant(ctx.Y.size(), out.mu_hat);
    for (std::size_t j = 0; j < out.b_star.size(); ++j) {
        out.fitted.noalias() += ctx.U[j] * out.b_star[j];
        const bool nonzero = (out.b_star[j].array() != 0.0).any();
        if (nonzero) {
            out.selected.push_back(j);
        }
        out.zero_subregions.push_back(zero_subregions(ctx.basis, out.b_star[j]));
    }
    if (final_state != nullptr) {
        *final_state = std::move(sol.final_state);
    }
    return out;
}

FitResult fit(const DesignContext& ctx, const FitOptions& options) {
    const AdaptiveWeights weights = resolve_weights(ctx, options);
    const std::vector<DesignBlock> blocks = ctx.blocks(options.varphi);
    return fit_with_blocks(ctx, blocks, options, weights);
}

FitResult fit(const FunctionalDataset& data, const BasisSystem& basis, const FitOptions& options) {
    FitResult out = fit(DesignContext::build(data, basis), options);
    out.covariate_ids = data.covariate_ids;
    return out;
}

double reconstruct_coefficient(const FitResult& fit, std::size_t j, double t) {
    if (j >= fit.J()) {
        throw DomainError("covariate index " + std::to_string(j) + " out of range");
    }
    const LocalBasis local = fit.basis.eval_local(t, 0);
    return local.values.dot(fit.b_star[j].segment(local.first, fit.basis.degree() + 1));
}

std::vector<Interval> zero_subregions(const BasisSystem& basis, const Eigen::VectorXd& coefficients) {
    if (coefficients.size() != basis.size()) {
        throw ShapeError("zero_subregions: coefficient vector has the wrong length");
    }
    std::vector<Interval> out;
    const int width = basis.degree() + 1;
    for (int r = 0; r < basis.n_intervals(); ++r) {
        // subinterval r carries basis functions r .. r + d
        if ((coefficients.segment(r, width).array() != 0.0).any()) {
            continue;
        }
        const double a = basis.breakpoint(r);
        const double b = basis.breakpoint(r + 1);
        if (!out.empty() && out.back().end == a) {
            out.back().end = b;
        } else {
            out.push_back({a, b});
        }
    }
    return out;
}

std::vector<Interval> zero_subregions(const FitResult& fit, std::size_t j) {
    if (j >= fit.J()) {
        throw DomainError("covariate index " + std::to_string(j) + " out of range");
    }
    return zero_subregions(fit.basis, fit.b_star[j]);
}

Eigen::VectorXd predict(const FitResult& fit, const FunctionalDataset& data) {
    if (data.J() != fit.J()) {
        throw ShapeError("predict: model has " + std::to_string(fit.J()) + " covariates, data has " +
                         std::to_string(data.J()));
    }
    if (!data.grid.compatible_with(fit.grid)) {
        throw DomainError("predict: data grid does not match the grid the model was fitted on");
    }
    const BasisOnGrid projected = project(fit.basis, data.grid);
    Eigen::VectorXd out = Eigen::VectorXd::Constant(data.X.front().rows(), fit.mu_hat);
    for (std::size_t j = 0; j < fit.J(); ++j) {
        out.noalias() += compute_U(data.X[j], projected) * fit.b_star[j];
    }
    return out;
}

} // namespace fdos
