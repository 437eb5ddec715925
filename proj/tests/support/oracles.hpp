#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fdos/basis.hpp"
#include "fdos/design.hpp"
#include "fdos/solver.hpp"

namespace fdos::testing {

/// Textbook recursive Cox-de Boor evaluation of basis function k of the given
/// degree on a clamped knot vector. The last nonempty knot interval is
/// treated as closed on the right.
double cox_de_boor(const std::vector<double>& knots, int k, int degree, double t);

/// Small random problem: J covariates built from random smooth curves on a
/// uniform grid, responses from random coefficient functions plus noise.
struct TinyProblem {
    FunctionalDataset data;
    BasisSystem basis;
    std::vector<DesignBlock> blocks;
};

TinyProblem make_tiny_problem(std::uint64_t seed, std::size_t n, std::size_t J, int n_intervals, double varphi,
                              std::size_t grid_points = 101, double noise_sd = 0.5);

/// Objective in the original coefficients b_j (one vector per covariate):
/// 1/2 |Y - mu - sum U_j b_j|^2 + lambda1 sum w1_j dn |b_j|_1
///   + lambda2 sum w2_j sqrt(b_j' (Phi + varphi Omega) b_j).
double original_objective(const std::vector<Eigen::VectorXd>& b, double mu, const std::vector<DesignBlock>& blocks,
                          const Eigen::VectorXd& Y, const SolverConfig& config);

struct ReferenceSolution {
    std::vector<Eigen::VectorXd> z; // dn * b per covariate
    double mu = 0.0;
    double objective = 0.0;
    int iterations = 0;
};

/// Accelerated proximal gradient on z = dn * b with the intercept profiled
/// out. The prox of lambda1 |z|_1 + lambda2 |L' z|_2 is evaluated by
/// projected gradient ascent on its dual. Uses its own Cholesky factor of
/// (Phi + varphi Omega) / dn^2.
ReferenceSolution proximal_gradient_reference(const std::vector<DesignBlock>& blocks, const Eigen::VectorXd& Y,
                                              const SolverConfig& config, int max_iter = 20000);

} // namespace fdos::testing
