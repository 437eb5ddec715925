#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdos/basis.hpp"

namespace fdos {

/// n subjects, J functional covariates sampled on one shared grid, and the
/// scalar responses.
struct FunctionalDataset {
    EvalGrid grid;
    std::vector<Eigen::MatrixXd> X; // J matrices, each n x R
    Eigen::VectorXd Y;              // n
    std::vector<std::string> subject_ids;
    std::vector<std::string> covariate_ids;

    std::size_t n() const { return static_cast<std::size_t>(Y.size()); }
    std::size_t J() const { return X.size(); }
    std::size_t R() const { return grid.size(); }

    /// Throws ShapeError / DomainError when the invariants are broken.
    void validate() const;

    /// Rows `rows` of every covariate and of Y, in the given order.
    FunctionalDataset subset(std::span<const std::size_t> rows) const;
};

/// Per-covariate design quantities. With K = (Phi + varphi Omega) / dn^2 = L L',
/// the transformed coefficients are b~ = dn L' b and U~ = U (L')^-1 / dn, so
/// that U b = U~ b~ and b'(Phi + varphi Omega) b = |b~|^2.
struct DesignBlock {
    Eigen::MatrixXd U;       // n x K
    Eigen::MatrixXd Phi;     // K x K
    Eigen::MatrixXd Omega;   // K x K
    Eigen::MatrixXd K_mat;   // K x K
    Eigen::MatrixXd L;       // lower triangular, K_mat (+ jitter) = L L'
    Eigen::MatrixXd U_tilde; // n x K
    double varphi = 0.0;
    double delta_n = 1.0;
    double jitter_used = 0.0;

    Eigen::Index size() const { return L.rows(); }

    /// (L')^-1 v by back substitution. Maps b~ to z = dn b.
    Eigen::VectorXd apply_D(const Eigen::VectorXd& v) const;
    /// L' v. Maps z back to b~.
    Eigen::VectorXd apply_D_inverse(const Eigen::VectorXd& v) const;
    /// L^-1 v, the transpose of apply_D.
    Eigen::VectorXd apply_D_transpose(const Eigen::VectorXd& v) const;
};

/// U_ip ~ int X_i(t) B_p(t) dt by left-Riemann quadrature on `grid`.
Eigen::MatrixXd compute_U(const Eigen::MatrixXd& X, const BasisSystem& basis, const EvalGrid& grid);
Eigen::MatrixXd compute_U(const Eigen::MatrixXd& X, const BasisOnGrid& projected);

DesignBlock build_block(const Eigen::MatrixXd& X, const BasisSystem& basis, const EvalGrid& grid,
                        double varphi);

/// Same as build_block when U, Phi and Omega are already available.
DesignBlock build_block_from_parts(Eigen::MatrixXd U, const Eigen::MatrixXd& Phi,
                                   const Eigen::MatrixXd& Omega, double varphi, double delta_n);

/// Block diagonal D = diag((L_1')^-1, ..., (L_J')^-1). All blocks must share
/// their size and varphi.
Eigen::MatrixXd assemble_D(std::span<const DesignBlock> blocks);

} // namespace fdos
