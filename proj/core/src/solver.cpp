#include "fdos/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fdos/error.hpp"

namespace fdos {

void SolverConfig::validate(std::size_t J) const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(lambda1) || !finite_nonneg(lambda2)) {
        throw ConfigError("penalties lambda1, lambda2 must be finite and >= 0");
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw ConfigError("rho must be > 0");
    }
    if (!(eps_tol > 0.0)) {
        throw ConfigError("eps_tol must be > 0");
    }
    if (max_iter < 1) {
        throw ConfigError("max_iter must be >= 1");
    }
    if (!(nu_factor >= 1.0)) {
        throw ConfigError("nu_factor must be >= 1");
    }
    for (const auto* w : {&w1, &w2}) {
        if (w->size() == 0) {
            continue;
        }
        if (static_cast<std::size_t>(w->size()) != J) {
            throw ConfigError("adaptive weights have length " + std::to_string(w->size()) + ", expected " +
                              std::to_string(J));
        }
        if (!w->allFinite() || (w->array() < 0.0).any()) {
            throw ConfigError("adaptive weights must be finite and >= 0");
        }
    }
}

Eigen::VectorXd soft_threshold_scalarwise(const Eigen::VectorXd& y, double tau) {
    if (!(tau >= 0.0)) {
        throw ConfigError("soft threshold must be >= 0");
    }
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double a = std::abs(y(i));
        out(i) = a <= tau ? 0.0 : std::copysign(a - tau, y(i));
    }
    return out;
}

Eigen::VectorXd soft_threshold_group(const Eigen::VectorXd& y, double tau) {
    if (!(tau >= 0.0)) {
        throw ConfigError("group soft threshold must be >= 0");
    }
    const double norm = y.norm();
    if (norm <= tau) {
        return Eigen::VectorXd::Zero(y.size());
    }
    return y * ((norm - tau) / norm);
}

double spectral_radius(const Eigen::MatrixXd& M, double tol, int max_iter) {
    if (M.rows() != M.cols()) {
        throw ShapeError("spectral_radius: matrix is " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()));
    }
    if (M.rows() == 0) {
        throw ShapeError("spectral_radius: empty matrix");
    }
    std::mt19937_64 gen(0x5eed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Eigen::VectorXd v(M.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = unif(gen);
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = M * v;
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        if (it > 0 && std::abs(next - estimate) <= tol * std::abs(next)) {
            return next;
        }
        estimate = next;
    }
    return estimate;
}

double objective_value(const Eigen::VectorXd& b_tilde, double mu, std::span<const DesignBlock> blocks,
                       const Eigen::VectorXd& Y, const SolverConfig& config) {
    if (blocks.empty()) {
        throw ShapeError("objective_value: no blocks");
    }
    const Eigen::Index K = blocks.front().size();
    if (b_tilde.size() != K * static_cast<Eigen::Index>(blocks.size())) {
        throw ShapeError("objective_value: coefficient vector has the wrong length");
    }
    Eigen::VectorXd r = Y.array() - mu;
    double l1 = 0.0;
    double l2 = 0.0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto bj = b_tilde.segment(static_cast<Eigen::Index>(j) * K, K);
        r.noalias() -= blocks[j].U_tilde * bj;
        l1 += config.weight1(j) * blocks[j].apply_D(bj).lpNorm<1>();
        l2 += config.weight2(j) * bj.norm();
    }
    return 0.5 * r.squaredNorm() + config.lambda1 * l1 + config.lambda2 * l2;
}

AdmmSolver::AdmmSolver(std::span<const DesignBlock> blocks, Eigen::VectorXd Y, SolverConfig config)
    : blocks_(blocks), Y_(std::move(Y)), config_(std::move(config)) {
    if (blocks_.empty()) {
        throw ShapeError("AdmmSolver: no design blocks");
    }
    config_.validate(blocks_.size());
    K_ = blocks_.front().size();
    for (const auto& b : blocks_) {
        if (b.size() != K_) {
            throw ShapeError("AdmmSolver: blocks have different basis sizes");
        }
        if (b.U_tilde.rows() != Y_.size()) {
            throw ShapeError("AdmmSolver: design has " + std::to_string(b.U_tilde.rows()) + " rows but Y has " +
                             std::to_string(Y_.size()));
        }
    }

    // nu_l majorizes the curvature of the stacked design [U~; sqrt(rho) (L')^-1].
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(K_, K_);
    nu_.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        const Eigen::MatrixXd gram = b.U_tilde.transpose() * b.U_tilde;
        const Eigen::MatrixXd Linv = b.L.triangularView<Eigen::Lower>().solve(I);
        const double plain = spectral_radius(gram + config_.rho * I);
        const double stacked = spectral_radius(gram + config_.rho * Linv * Linv.transpose());
        nu_.push_back(config_.nu_factor * std::max(plain, stacked));
    }
}

Eigen::VectorXd AdmmSolver::fitted(const Eigen::VectorXd& b_tilde) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Y_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        out.noalias() += blocks_[j].U_tilde * b_tilde.segment(static_cast<Eigen::Index>(j) * K_, K_);
    }
    return out;
}

SolverState AdmmSolver::initial_state() const {
    const Eigen::Index JK = K_ * static_cast<Eigen::Index>(blocks_.size());
    SolverState s;
    s.b_tilde = Eigen::VectorXd::Zero(JK);
    s.z = Eigen::VectorXd::Zero(JK);
    s.u = Eigen::VectorXd::Zero(JK);
    s.mu_hat = config_.fit_intercept ? Y_.mean() : 0.0;
    return s;
}

Eigen::VectorXd AdmmSolver::residual(const SolverState& state) const {
    return (Y_.array() - state.mu_hat).matrix() - fitted(state.b_tilde);
}

Eigen::VectorXd AdmmSolver::apply_D(const Eigen::VectorXd& b_tilde) const {
    Eigen::VectorXd out(b_tilde.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const Eigen::Index off = static_cast<Eigen::Index>(j) * K_;
        out.segment(off, K_) = blocks_[j].apply_D(b_tilde.segment(off, K_));
    }
    return out;
}

Eigen::VectorXd AdmmSolver::apply_D_inverse(const Eigen::VectorXd& z) const {
    Eigen::VectorXd out(z.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const Eigen::Index off = static_cast<Eigen::Index>(j) * K_;
        out.segment(off, K_) = blocks_[j].apply_D_inverse(z.segment(off, K_));
    }
    return out;
}

Eigen::VectorXd AdmmSolver::b_update(std::size_t l, const SolverState& state,
                                     const Eigen::VectorXd& residual) const {
    const DesignBlock& block = blocks_[l];
    const Eigen::Index off = static_cast<Eigen::Index>(l) * K_;
    const Eigen::VectorXd b = state.b_tilde.segment(off, K_);
    const double rho = config_.rho;

    // Gradient of 1/2 |r_(-l) - U~ b|^2 + rho/2 |(L')^-1 b - z_l + u_l/rho|^2 at b;
    // U~ b - r_(-l) is minus the full residual.
    Eigen::VectorXd gap = block.apply_D(b) - state.z.segment(off, K_) + state.u.segment(off, K_) / rho;
    Eigen::VectorXd grad = -(block.U_tilde.transpose() * residual) + rho * block.apply_D_transpose(gap);

    const double step = nu_[l];
    return soft_threshold_group(b - grad / step, config_.lambda2 * config_.weight2(l) / step);
}

Eigen::VectorXd AdmmSolver::z_update(const SolverState& state) const {
    const Eigen::VectorXd target = apply_D(state.b_tilde) + state.u / config_.rho;
    Eigen::VectorXd z(target.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const Eigen::Index off = static_cast<Eigen::Index>(j) * K_;
        z.segment(off, K_) =
            soft_threshold_scalarwise(target.segment(off, K_), config_.lambda1 * config_.weight1(j) / config_.rho);
    }
    return z;
}

Eigen::VectorXd AdmmSolver::dual_update(const SolverState& state) const {
    return state.u + config_.rho * (apply_D(state.b_tilde) - state.z);
}

double AdmmSolver::intercept_update(const SolverState& state) const {
    return (Y_ - fitted(apply_D_inverse(state.z))).mean();
}

SolverSolution AdmmSolver::run(const SolverState* warm_start) const {
    SolverState state = initial_state();
    if (warm_start != nullptr) {
        if (warm_start->b_tilde.size() != state.b_tilde.size() || warm_start->z.size() != state.z.size() ||
            warm_start->u.size() != state.u.size()) {
            throw ShapeError("AdmmSolver: warm start has the wrong dimensions");
        }
        state.b_tilde = warm_start->b_tilde;
        state.z = warm_start->z;
        state.u = warm_start->u;
        if (config_.fit_intercept) {
            state.mu_hat = warm_start->mu_hat;
        }
    }
    state.iter = 0;

    Eigen::VectorXd r = residual(state);
    bool converged = false;
    const std::size_t J = blocks_.size();
    std::vector<Eigen::VectorXd> pending(J);

    for (int k = 1; k <= config_.max_iter; ++k) {
        const Eigen::VectorXd previous = state.b_tilde;

        if (config_.sweep == Sweep::gauss_seidel) {
            for (std::size_t l = 0; l < J; ++l) {
                const Eigen::Index off = static_cast<Eigen::Index>(l) * K_;
                Eigen::VectorXd next = b_update(l, state, r);
                const Eigen::VectorXd delta = next - state.b_tilde.segment(off, K_);
                if (delta.squaredNorm() > 0.0) {
                    r.noalias() -= blocks_[l].U_tilde * delta;
                    state.b_tilde.segment(off, K_) = next;
                }
            }
        } else {
            for (std::size_t l = 0; l < J; ++l) {
                pending[l] = b_update(l, state, r);
            }
            for (std::size_t l = 0; l < J; ++l) {
                const Eigen::Index off = static_cast<Eigen::Index>(l) * K_;
                r.noalias() -= blocks_[l].U_tilde * (pending[l] - state.b_tilde.segment(off, K_));
                state.b_tilde.segment(off, K_) = pending[l];
            }
        }

        state.z = z_update(state);
        if (config_.fit_intercept) {
            const double mu = intercept_update(state);
            r.array() -= mu - state.mu_hat;
            state.mu_hat = mu;
        }
        const Eigen::VectorXd Db = apply_D(state.b_tilde);
        state.u += config_.rho * (Db - state.z);

        state.iter = k;
        state.primal_residual = (Db - state.z).norm();
        state.rel_change = (state.b_tilde - previous).norm() / std::max(state.b_tilde.norm(), 1.0);
        if (state.rel_change <= config_.eps_tol) {
            converged = true;
            break;
        }
    }

    SolverSolution sol;
    sol.z_star = state.z;
    sol.b_tilde_star = apply_D_inverse(state.z);
    sol.b_star.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        sol.b_star.push_back(state.z.segment(static_cast<Eigen::Index>(j) * K_, K_) / blocks_[j].delta_n);
    }
    sol.mu_hat = config_.fit_intercept ? (Y_ - fitted(sol.b_tilde_star)).mean() : 0.0;
    sol.iters = state.iter;
    sol.converged = converged;
    sol.objective = objective_value(sol.b_tilde_star, sol.mu_hat, blocks_, Y_, config_);
    sol.final_state = std::move(state);
    return sol;
}

} // namespace fdos
