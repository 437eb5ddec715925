#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fdos/error.hpp"
#include "fdos/solver.hpp"
#include "oracles.hpp"

using namespace fdos;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(gen);
    return v;
}

SolverState random_state(std::mt19937_64& gen, Eigen::Index JK) {
    SolverState s;
    s.b_tilde = random_vector(gen, JK);
    s.z = random_vector(gen, JK);
    s.u = random_vector(gen, JK);
    s.mu_hat = 0.4;
    return s;
}

} // namespace

TEST(SoftThreshold, ScalarwiseExamples) {
    EXPECT_EQ(soft_threshold_scalarwise(vec({2.0, -0.3, 0.5}), 0.5), vec({1.5, 0.0, 0.0}));
    const Eigen::VectorXd y = vec({1.0, -2.0, 0.0, 3.5});
    EXPECT_EQ(soft_threshold_scalarwise(y, 0.0), y);
    EXPECT_EQ(soft_threshold_scalarwise(vec({-3.2}), 1.2)(0), -3.2 + 1.2);
    EXPECT_THROW(soft_threshold_scalarwise(y, -0.1), ConfigError);
}

TEST(SoftThreshold, GroupExamples) {
    const Eigen::VectorXd out = soft_threshold_group(vec({3.0, 4.0}), 1.0);
    EXPECT_NEAR(out(0), 2.4, 1e-15);
    EXPECT_NEAR(out(1), 3.2, 1e-15);
    EXPECT_TRUE(soft_threshold_group(vec({3.0, 4.0}), 5.0).isZero(0.0));
    EXPECT_EQ(soft_threshold_group(vec({3.0, 4.0}), 0.0), vec({3.0, 4.0}));
    EXPECT_TRUE(soft_threshold_group(Eigen::VectorXd::Zero(3), 0.0).isZero(0.0));
    EXPECT_THROW(soft_threshold_group(vec({1.0}), -1.0), ConfigError);
}

TEST(SoftThreshold, ZeroSetMonotoneInThreshold) {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd y = random_vector(gen, 20);
        const double tau = std::abs(random_vector(gen, 1)(0));
        const auto zeros = [](const Eigen::VectorXd& v) { return (v.array() == 0.0).count(); };
        EXPECT_LE(zeros(soft_threshold_scalarwise(y, tau)), zeros(soft_threshold_scalarwise(y, 2 * tau)));
    }
}

TEST(SpectralRadius, KnownMatrices) {
    EXPECT_NEAR(spectral_radius(Eigen::MatrixXd::Identity(5, 5)), 1.0, 1e-12);
    EXPECT_NEAR(spectral_radius(vec({1.0, 2.0, 7.0}).asDiagonal().toDenseMatrix()), 7.0, 1e-10);
    EXPECT_THROW(spectral_radius(Eigen::MatrixXd::Ones(2, 3)), ShapeError);
}

TEST(SpectralRadius, MatchesEigensolver) {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd A(12, 10);
        for (Eigen::Index c = 0; c < 10; ++c) A.col(c) = random_vector(gen, 12);
        const Eigen::MatrixXd G = A.transpose() * A;
        const double oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().maxCoeff();
        EXPECT_LE(std::abs(spectral_radius(G) - oracle) / oracle, 1e-6);
    }
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate(3));
    c.rho = 0.0;
    EXPECT_THROW(c.validate(3), ConfigError);
    c.rho = 1.0;
    c.lambda1 = -1.0;
    EXPECT_THROW(c.validate(3), ConfigError);
    c.lambda1 = 0.0;
    c.w1 = Eigen::VectorXd::Ones(2);
    EXPECT_THROW(c.validate(3), ConfigError);
    c.w1 = vec({1.0, -1.0, 1.0});
    EXPECT_THROW(c.validate(3), ConfigError);
}

class SolverSteps : public ::testing::Test {
protected:
    void SetUp() override {
        problem = std::make_unique<fdos::testing::TinyProblem>(fdos::testing::make_tiny_problem(21, 30, 2, 5, 1e-4));
        K = problem->basis.size();
    }
    std::unique_ptr<fdos::testing::TinyProblem> problem;
    Eigen::Index K = 0;
};

TEST_F(SolverSteps, ZUpdate) {
    std::mt19937_64 gen(8);
    SolverConfig c;
    c.rho = 1.7;
    c.lambda1 = 0.0;
    const AdmmSolver plain(problem->blocks, problem->data.Y, c);
    const SolverState s = random_state(gen, 2 * K);
    const Eigen::VectorXd target = plain.apply_D(s.b_tilde) + s.u / c.rho;
    EXPECT_LE((plain.z_update(s) - target).cwiseAbs().maxCoeff(), 0.0);

    c.lambda1 = 0.9;
    c.w1 = vec({1.0, 3.0});
    const AdmmSolver weighted(problem->blocks, problem->data.Y, c);
    const Eigen::VectorXd z = weighted.z_update(s);
    for (Eigen::Index r = 0; r < z.size(); ++r) {
        const double w = r < K ? 1.0 : 3.0;
        // zero exactly when lambda1 w >= |rho (D b~)_r + u_r|
        const double stat = std::abs(c.rho * weighted.apply_D(s.b_tilde)(r) + s.u(r));
        if (c.lambda1 * w >= stat) {
            EXPECT_EQ(z(r), 0.0);
        } else {
            EXPECT_NE(z(r), 0.0);
            EXPECT_NEAR(std::abs(z(r)), std::abs(target(r)) - c.lambda1 * w / c.rho, 1e-12);
        }
    }
}

TEST_F(SolverSteps, DualAndInterceptUpdates) {
    std::mt19937_64 gen(3);
    SolverConfig c;
    c.rho = 0.6;
    const AdmmSolver solver(problem->blocks, problem->data.Y, c);
    SolverState s = random_state(gen, 2 * K);

    const Eigen::MatrixXd D = assemble_D(problem->blocks);
    const Eigen::VectorXd expected = s.u + c.rho * (D * s.b_tilde - s.z);
    EXPECT_LE((solver.dual_update(s) - expected).norm(), 1e-10 * expected.norm());

    SolverState consistent = s;
    consistent.z = D * s.b_tilde;
    EXPECT_LE((solver.dual_update(consistent) - s.u).norm(), 1e-12 * s.u.norm());

    Eigen::MatrixXd Ut(problem->data.n(), 2 * K);
    Ut << problem->blocks[0].U_tilde, problem->blocks[1].U_tilde;
    const double mu_explicit = (problem->data.Y - Ut * D.inverse() * s.z).mean();
    EXPECT_NEAR(solver.intercept_update(s), mu_explicit, 1e-10);

    SolverState zero = s;
    zero.z.setZero();
    EXPECT_NEAR(solver.intercept_update(zero), problem->data.Y.mean(), 1e-12);

    const Eigen::VectorXd shifted = problem->data.Y.array() + 2.5;
    const AdmmSolver shifted_solver(problem->blocks, shifted, c);
    EXPECT_NEAR(shifted_solver.intercept_update(s), solver.intercept_update(s) + 2.5, 1e-10);
}

TEST_F(SolverSteps, BUpdateMatchesTranscription) {
    std::mt19937_64 gen(17);
    SolverConfig c;
    c.rho = 1.3;
    c.lambda2 = 0.4;
    c.w2 = vec({0.5, 2.0});
    const AdmmSolver solver(problem->blocks, problem->data.Y, c);
    const SolverState s = random_state(gen, 2 * K);
    const Eigen::VectorXd r = solver.residual(s);

    for (std::size_t l = 0; l < 2; ++l) {
        const DesignBlock& blk = problem->blocks[l];
        const Eigen::Index off = static_cast<Eigen::Index>(l) * K;
        const Eigen::VectorXd b = s.b_tilde.segment(off, K);
        // stacked design [U~; sqrt(rho) (L')^-1] and response [r_(-l); sqrt(rho) (z - u / rho)]
        const Eigen::MatrixXd LtInv = blk.L.transpose().inverse();
        Eigen::MatrixXd Uhat(blk.U_tilde.rows() + K, K);
        Uhat << blk.U_tilde, std::sqrt(c.rho) * LtInv;
        Eigen::VectorXd rhat(blk.U_tilde.rows() + K);
        rhat << r + blk.U_tilde * b,
            std::sqrt(c.rho) * (s.z.segment(off, K) - s.u.segment(off, K) / c.rho);
        const Eigen::VectorXd point = b - Uhat.transpose() * (Uhat * b - rhat) / solver.nu(l);
        const double tau = c.lambda2 * c.w2(static_cast<Eigen::Index>(l)) / solver.nu(l);
        const Eigen::VectorXd expected = soft_threshold_group(point, tau);
        const Eigen::VectorXd got = solver.b_update(l, s, r);
        EXPECT_LE((got - expected).norm(), 1e-10 * std::max(1.0, expected.norm()));

        // nu majorizes the stacked curvature
        const double curvature =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Uhat.transpose() * Uhat).eigenvalues().maxCoeff();
        EXPECT_GE(solver.nu(l), c.nu_factor * curvature * (1 - 1e-6));
    }
}

TEST_F(SolverSteps, HugeGroupPenaltyZeroesBlock) {
    std::mt19937_64 gen(5);
    SolverConfig c;
    c.lambda2 = 1e12;
    const AdmmSolver solver(problem->blocks, problem->data.Y, c);
    const SolverState s = random_state(gen, 2 * K);
    EXPECT_TRUE(solver.b_update(0, s, solver.residual(s)).isZero(0.0));
}

TEST_F(SolverSteps, ObjectiveValueExamples) {
    SolverConfig c;
    c.lambda1 = 0.7;
    c.lambda2 = 1.1;
    const Eigen::VectorXd& Y = problem->data.Y;
    EXPECT_NEAR(objective_value(Eigen::VectorXd::Zero(2 * K), 0.0, problem->blocks, Y, c), 0.5 * Y.squaredNorm(),
                1e-12 * Y.squaredNorm());
    std::mt19937_64 gen(6);
    const Eigen::VectorXd bt = random_vector(gen, 2 * K);
    SolverConfig none;
    Eigen::VectorXd r = Y.array() - 0.2;
    r -= problem->blocks[0].U_tilde * bt.head(K) + problem->blocks[1].U_tilde * bt.tail(K);
    EXPECT_NEAR(objective_value(bt, 0.2, problem->blocks, Y, none), 0.5 * r.squaredNorm(), 1e-10 * r.squaredNorm());
}

TEST_F(SolverSteps, EnormousPenaltiesGiveConstantFit) {
    SolverConfig c;
    c.lambda1 = 1e9;
    c.lambda2 = 1e9;
    const AdmmSolver solver(problem->blocks, problem->data.Y, c);
    const SolverSolution sol = solver.run();
    EXPECT_TRUE(sol.converged);
    EXPECT_TRUE(sol.z_star.isZero(0.0));
    EXPECT_NEAR(sol.mu_hat, problem->data.Y.mean(), 1e-12);
}

TEST(Solver, UnpenalizedMatchesLeastSquares) {
    const auto p = fdos::testing::make_tiny_problem(31, 80, 2, 4, 1e-4);
    SolverConfig c;
    c.eps_tol = 1e-12;
    c.max_iter = 200000;
    const AdmmSolver solver(p.blocks, p.data.Y, c);
    const SolverSolution sol = solver.run();
    ASSERT_TRUE(sol.converged);

    const Eigen::Index K = p.basis.size();
    Eigen::MatrixXd A(p.data.n(), 2 * K + 1);
    A << Eigen::VectorXd::Ones(p.data.n()), p.blocks[0].U_tilde, p.blocks[1].U_tilde;
    const Eigen::VectorXd coef = A.completeOrthogonalDecomposition().solve(p.data.Y);
    const double rss = 0.5 * (p.data.Y - A * coef).squaredNorm();
    EXPECT_LE(std::abs(sol.objective - rss) / rss, 1e-6);

    // normal equations in the transformed coordinates
    const Eigen::VectorXd resid = p.data.Y.array() - sol.mu_hat - (A.rightCols(2 * K) * sol.b_tilde_star).array();
    const Eigen::VectorXd grad = A.rightCols(2 * K).transpose() * resid;
    EXPECT_LE(grad.norm() / (A.rightCols(2 * K).transpose() * p.data.Y).norm(), 1e-6);
}

TEST(Solver, FixedPointCertificateAndSparsityPattern) {
    const auto p = fdos::testing::make_tiny_problem(41, 30, 2, 5, 1e-4);
    SolverConfig c;
    c.lambda1 = 0.5;
    c.lambda2 = 0.3;
    const AdmmSolver solver(p.blocks, p.data.Y, c);
    const SolverSolution sol = solver.run();
    ASSERT_TRUE(sol.converged);
    const SolverState& s = sol.final_state;
    EXPECT_LE((solver.apply_D(s.b_tilde) - s.z).norm() / std::max(s.z.norm(), 1.0), 10 * c.eps_tol);
    const Eigen::Index K = p.basis.size();
    for (std::size_t j = 0; j < 2; ++j) {
        const auto zj = sol.z_star.segment(static_cast<Eigen::Index>(j) * K, K);
        EXPECT_LE((sol.b_star[j] * p.blocks[j].delta_n - zj).norm(), 1e-14 * std::max(1.0, zj.norm()));
        for (Eigen::Index k = 0; k < K; ++k) {
            EXPECT_EQ(sol.b_star[j](k) == 0.0, zj(k) == 0.0);
        }
    }
    EXPECT_LE((solver.apply_D_inverse(sol.z_star) - sol.b_tilde_star).norm(), 0.0);
}

TEST(Solver, MatchesProximalGradientReference) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    for (int trial = 0; trial < 4; ++trial) {
        const auto p = fdos::testing::make_tiny_problem(100 + trial, 30, 2, 5, 1e-4);
        SolverConfig c;
        c.lambda1 = unif(gen);
        c.lambda2 = unif(gen);
        c.eps_tol = 1e-10;
        c.max_iter = 500000;
        const SolverSolution sol = AdmmSolver(p.blocks, p.data.Y, c).run();
        const auto ref = fdos::testing::proximal_gradient_reference(p.blocks, p.data.Y, c);
        EXPECT_LE(std::abs(sol.objective - ref.objective) / ref.objective, 1e-4)
            << "admm " << sol.objective << " reference " << ref.objective;
    }
}

TEST(Solver, JacobiAndGaussSeidelAgree) {
    const auto p = fdos::testing::make_tiny_problem(55, 40, 3, 5, 1e-4);
    SolverConfig c;
    c.lambda1 = 0.3;
    c.lambda2 = 0.2;
    c.eps_tol = 1e-9;
    c.max_iter = 200000;
    const SolverSolution gs = AdmmSolver(p.blocks, p.data.Y, c).run();
    c.sweep = Sweep::jacobi;
    const SolverSolution jac = AdmmSolver(p.blocks, p.data.Y, c).run();
    EXPECT_TRUE(gs.converged);
    EXPECT_TRUE(jac.converged);
    EXPECT_LE(std::abs(gs.objective - jac.objective) / gs.objective, 1e-6);
}

TEST(Solver, WarmStartShapeChecked) {
    const auto p = fdos::testing::make_tiny_problem(8, 20, 2, 4, 1e-4);
    const AdmmSolver solver(p.blocks, p.data.Y, SolverConfig{});
    SolverState bad;
    bad.b_tilde = Eigen::VectorXd::Zero(3);
    bad.z = Eigen::VectorXd::Zero(3);
    bad.u = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(solver.run(&bad), ShapeError);
}

TEST(Solver, MaxIterReportedNotThrown) {
    const auto p = fdos::testing::make_tiny_problem(9, 30, 2, 5, 1e-4);
    SolverConfig c;
    c.lambda1 = 0.2;
    c.max_iter = 3;
    c.eps_tol = 1e-14;
    const SolverSolution sol = AdmmSolver(p.blocks, p.data.Y, c).run();
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.iters, 3);
}
