#include "fdos/design.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fdos/error.hpp"

namespace fdos {

void FunctionalDataset::validate() const {
    if (X.empty()) {
        throw ShapeError("dataset has no functional covariates");
    }
    for (std::size_t j = 0; j < X.size(); ++j) {
        if (static_cast<std::size_t>(X[j].rows()) != n() ||
            static_cast<std::size_t>(X[j].cols()) != R()) {
            std::ostringstream msg;
            msg << "covariate " << j << " has shape " << X[j].rows() << "x" << X[j].cols()
                << ", expected " << n() << "x" << R();
            throw ShapeError(msg.str());
        }
        if (!X[j].allFinite()) {
            throw DomainError("covariate " + std::to_string(j) + " contains non-finite values");
        }
    }
    if (!Y.allFinite()) {
        throw DomainError("responses contain non-finite values");
    }
}

FunctionalDataset FunctionalDataset::subset(std::span<const std::size_t> rows) const {
    FunctionalDataset out;
    out.grid = grid;
    out.covariate_ids = covariate_ids;
    out.Y.resize(static_cast<Eigen::Index>(rows.size()));
    out.X.assign(X.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()),
                                           static_cast<Eigen::Index>(R())));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(rows[i]);
        const auto dst = static_cast<Eigen::Index>(i);
        out.Y(dst) = Y(src);
        for (std::size_t j = 0; j < X.size(); ++j) {
            out.X[j].row(dst) = X[j].row(src);
        }
        if (!subject_ids.empty()) {
            out.subject_ids.push_back(subject_ids[rows[i]]);
        }
    }
    return out;
}

Eigen::VectorXd DesignBlock::apply_D(const Eigen::VectorXd& v) const {
    return L.transpose().triangularView<Eigen::Upper>().solve(v);
}

Eigen::VectorXd DesignBlock::apply_D_inverse(const Eigen::VectorXd& v) const {
    return L.transpose().triangularView<Eigen::Upper>() * v;
}

Eigen::VectorXd DesignBlock::apply_D_transpose(const Eigen::VectorXd& v) const {
    return L.triangularView<Eigen::Lower>().solve(v);
}

Eigen::MatrixXd compute_U(const Eigen::MatrixXd& X, const BasisOnGrid& projected) {
    if (X.cols() != projected.values.rows()) {
        throw ShapeError("compute_U: signal has " + std::to_string(X.cols()) +
                         " samples but the grid has " + std::to_string(projected.values.rows()));
    }
    return X * projected.weights.asDiagonal() * projected.values;
}

Eigen::MatrixXd compute_U(const Eigen::MatrixXd& X, const BasisSystem& basis, const EvalGrid& grid) {
    if (static_cast<std::size_t>(X.cols()) != grid.size()) {
        throw ShapeError("compute_U: signal has " + std::to_string(X.cols()) +
                         " samples but the grid has " + std::to_string(grid.size()));
    }
    const Eigen::MatrixXd B = basis_matrix(basis, grid, 0);
    return X * grid.quadrature_weights().asDiagonal() * B;
}

DesignBlock build_block_from_parts(Eigen::MatrixXd U, const Eigen::MatrixXd& Phi,
                                   const Eigen::MatrixXd& Omega, double varphi, double delta_n) {
    if (!(varphi >= 0.0) || !std::isfinite(varphi)) {
        throw ConfigError("varphi must be finite and >= 0");
    }
    if (!(delta_n > 0.0)) {
        throw ConfigError("knot spacing must be > 0");
    }
    const Eigen::Index K = Phi.rows();
    if (Phi.cols() != K || U.cols() != K || (varphi > 0.0 && (Omega.rows() != K || Omega.cols() != K))) {
        throw ShapeError("build_block: inconsistent basis dimensions");
    }

    DesignBlock block;
    block.varphi = varphi;
    block.delta_n = delta_n;
    block.Phi = Phi;
    block.Omega = Omega.size() == 0 ? Eigen::MatrixXd::Zero(K, K) : Omega;
    block.K_mat = (block.Phi + varphi * block.Omega) / (delta_n * delta_n);

    // Jitter ladder: plain factorization first, then eps * mean diagonal.
    const double mean_diag = block.K_mat.trace() / static_cast<double>(K);
    constexpr std::array<double, 4> ladder{0.0, 1e-12, 1e-10, 1e-8};
    bool ok = false;
    for (const double rel : ladder) {
        const double eps = rel * mean_diag;
        Eigen::MatrixXd shifted = block.K_mat;
        shifted.diagonal().array() += eps;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
            block.L = llt.matrixL();
            block.jitter_used = eps;
            ok = true;
            break;
        }
    }
    if (!ok) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block.K_mat, Eigen::EigenvaluesOnly);
        std::ostringstream msg;
        msg << "build_block: Cholesky failed after maximum jitter; smallest eigenvalue "
            << eig.eigenvalues().minCoeff();
        throw NumericalError(msg.str());
    }

    // U~ = U (L')^-1 / dn, i.e. U~' = L^-1 U' / dn.
    block.U_tilde = block.L.triangularView<Eigen::Lower>().solve(U.transpose()).transpose() / delta_n;
    block.U = std::move(U);
    return block;
}

DesignBlock build_block(const Eigen::MatrixXd& X, const BasisSystem& basis, const EvalGrid& grid,
                        double varphi) {
    const BasisOnGrid projected = project(basis, grid);
    if (varphi > 0.0 && projected.roughness.size() == 0) {
        throw ConfigError("build_block: a roughness penalty needs degree >= 2");
    }
    return build_block_from_parts(compute_U(X, projected), projected.gram, projected.roughness, varphi,
                                  basis.delta_n());
}

Eigen::MatrixXd assemble_D(std::span<const DesignBlock> blocks) {
    if (blocks.empty()) {
        throw ShapeError("assemble_D: no blocks");
    }
    const Eigen::Index K = blocks.front().size();
    const double varphi = blocks.front().varphi;
    for (const auto& b : blocks) {
        if (b.size() != K) {
            throw ShapeError("assemble_D: blocks have different basis sizes");
        }
        if (b.varphi != varphi) {
            throw ConfigError("assemble_D: all covariates must share one varphi");
        }
    }
    const auto J = static_cast<Eigen::Index>(blocks.size());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(J * K, J * K);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(K, K);
    for (Eigen::Index j = 0; j < J; ++j) {
        D.block(j * K, j * K, K, K) =
            blocks[static_cast<std::size_t>(j)].L.transpose().triangularView<Eigen::Upper>().solve(I);
    }
    return D;
}

} // namespace fdos
