#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fdos/design.hpp"

namespace fdos {

enum class Sweep {
    gauss_seidel, ///< groups updated in ascending order with the newest iterates
    jacobi,       ///< every group updated from the same residual
};

struct SolverConfig {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double rho = 1.0;
    double eps_tol = 1e-4;
    int max_iter = 5000;
    double nu_factor = 5.0;
    Eigen::VectorXd w1; // per-group l1 weights; empty means all ones
    Eigen::VectorXd w2; // per-group group-norm weights; empty means all ones
    bool fit_intercept = true;
    Sweep sweep = Sweep::gauss_seidel;

    /// Throws ConfigError unless the config is usable for J groups.
    void validate(std::size_t J) const;
    double weight1(std::size_t j) const { return w1.size() == 0 ? 1.0 : w1(static_cast<Eigen::Index>(j)); }
    double weight2(std::size_t j) const { return w2.size() == 0 ? 1.0 : w2(static_cast<Eigen::Index>(j)); }
};

/// ADMM iterates. b_tilde, z and u are stacked group by group (J*K entries).
struct SolverState {
    Eigen::VectorXd b_tilde;
    Eigen::VectorXd z;
    Eigen::VectorXd u;
    double mu_hat = 0.0;
    int iter = 0;
    double rel_change = 0.0;
    double primal_residual = 0.0;
};

struct SolverSolution {
    Eigen::VectorXd z_star;
    Eigen::VectorXd b_tilde_star; // D^-1 z_star
    std::vector<Eigen::VectorXd> b_star; // z_star / dn per group
    double mu_hat = 0.0;
    int iters = 0;
    bool converged = false;
    double objective = 0.0;
    SolverState final_state; // usable as a warm start
};

/// sgn(y) (|y| - tau)_+ elementwise; exactly zero where |y| <= tau.
Eigen::VectorXd soft_threshold_scalarwise(const Eigen::VectorXd& y, double tau);

/// y / |y| (|y| - tau)_+; the zero vector whenever |y| <= tau.
Eigen::VectorXd soft_threshold_group(const Eigen::VectorXd& y, double tau);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double spectral_radius(const Eigen::MatrixXd& M, double tol = 1e-14, int max_iter = 20000);

/// Objective in the transformed parameterization:
/// 1/2 |Y - mu - sum U~_j b~_j|^2 + lambda1 sum w1_j |(L_j')^-1 b~_j|_1
///                                + lambda2 sum w2_j |b~_j|_2.
double objective_value(const Eigen::VectorXd& b_tilde, double mu, std::span<const DesignBlock> blocks,
                       const Eigen::VectorXd& Y, const SolverConfig& config);

/// Linearized ADMM for the functional sparse-group-lasso objective above,
/// splitting z = D b~ so the l1 term acts on z and the group term on b~.
///
/// The solver keeps a view of `blocks`; they must outlive it.
class AdmmSolver {
public:
    AdmmSolver(std::span<const DesignBlock> blocks, Eigen::VectorXd Y, SolverConfig config);

    std::size_t groups() const { return blocks_.size(); }
    Eigen::Index block_size() const { return K_; }
    const SolverConfig& config() const { return config_; }

    /// Proximal parameter of group l (fixed for the whole fit).
    double nu(std::size_t l) const { return nu_[l]; }

    /// b~ = z = u = 0 and mu at its optimum for that point.
    SolverState initial_state() const;

    /// Y - mu - sum_j U~_j b~_j at the given iterate.
    Eigen::VectorXd residual(const SolverState& state) const;

    /// One linearized proximal step on group l. `residual` is the full
    /// residual at `state` (including group l's own contribution).
    Eigen::VectorXd b_update(std::size_t l, const SolverState& state, const Eigen::VectorXd& residual) const;

    /// S1(D b~ + u / rho) with threshold lambda1 w1_j / rho on group j.
    Eigen::VectorXd z_update(const SolverState& state) const;

    /// u + rho (D b~ - z).
    Eigen::VectorXd dual_update(const SolverState& state) const;

    /// mean(Y - U~ D^-1 z).
    double intercept_update(const SolverState& state) const;

    /// D b~, stacked.
    Eigen::VectorXd apply_D(const Eigen::VectorXd& b_tilde) const;
    /// D^-1 z, stacked.
    Eigen::VectorXd apply_D_inverse(const Eigen::VectorXd& z) const;

    /// Iterates until |b~^k - b~^{k-1}| / max(|b~^k|, 1) <= eps_tol or
    /// max_iter is reached; the latter is reported, not thrown.
    SolverSolution run(const SolverState* warm_start = nullptr) const;

private:
    Eigen::VectorXd fitted(const Eigen::VectorXd& b_tilde) const;

    std::span<const DesignBlock> blocks_;
    Eigen::VectorXd Y_;
    SolverConfig config_;
    Eigen::Index K_ = 0;
    std::vector<double> nu_;
};

} // namespace fdos
