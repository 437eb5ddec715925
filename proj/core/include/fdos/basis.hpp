#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fdos {

struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    bool operator==(const Interval&) const = default;
};

/// Uniform observation grid t_0 < ... < t_{R-1} spanning a closed interval.
class EvalGrid {
public:
    EvalGrid() = default;

    /// `points` equally spaced values from `start` to `end` inclusive.
    static EvalGrid uniform(double start, double end, std::size_t points);

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double spacing() const { return spacing_; }
    double start() const { return points_.front(); }
    double end() const { return points_.back(); }
    double operator[](std::size_t r) const { return points_[r]; }

    /// Left-endpoint Riemann weights: `spacing` everywhere except the last
    /// point, which gets 0. The weights sum to end - start.
    Eigen::VectorXd quadrature_weights() const;

    /// Same length and end points (to 1e-9 relative) as `other`.
    bool compatible_with(const EvalGrid& other) const;

private:
    std::vector<double> points_;
    double spacing_ = 0.0;
};

/// Nonzero B-spline values at one point: entries for basis indices
/// first, first+1, ..., first+degree.
struct LocalBasis {
    int first = 0;
    Eigen::VectorXd values;
};

/// Clamped B-spline basis of degree d on M_n equal subintervals.
///
/// The knot vector repeats each boundary knot d extra times, so there are
/// K = M_n + d basis functions. Basis function k is supported on the knot
/// subintervals k-d, ..., k (clipped to [0, M_n)), and the last subinterval
/// is closed on the right so that t = domain end is valid.
class BasisSystem {
public:
    BasisSystem(Interval domain, int n_intervals, int degree = 3);

    int size() const { return n_intervals_ + degree_; }
    int degree() const { return degree_; }
    int n_intervals() const { return n_intervals_; }
    double delta_n() const { return delta_n_; }
    const Interval& domain() const { return domain_; }

    /// Full padded knot vector, length M_n + 2d + 1.
    const std::vector<double>& knots() const { return knots_; }
    /// Breakpoint r = 0..M_n (domain start ... domain end).
    double breakpoint(int r) const { return knots_[static_cast<std::size_t>(r + degree_)]; }

    /// Index of the knot subinterval containing t (0..M_n-1).
    int span(double t) const;

    /// All K basis values at t; throws DomainError outside the domain.
    Eigen::VectorXd eval(double t) const;
    /// All K second derivatives at t; requires degree >= 2.
    Eigen::VectorXd eval_d2(double t) const;

    /// The d+1 possibly nonzero values (deriv = 0) or second
    /// derivatives (deriv = 2) at t.
    LocalBasis eval_local(double t, int deriv = 0) const;

private:
    double clamp_to_domain(double t) const;

    Interval domain_;
    int n_intervals_;
    int degree_;
    double delta_n_;
    std::vector<double> knots_;
};

BasisSystem make_basis(Interval domain, int n_intervals, int degree = 3);

/// R x K matrix of basis values (deriv 0) or second derivatives (deriv 2)
/// at every grid point.
Eigen::MatrixXd basis_matrix(const BasisSystem& basis, const EvalGrid& grid, int deriv = 0);

/// Phi_pq ~ int B_p B_q, by left-Riemann quadrature on `grid`.
Eigen::MatrixXd gram_matrix(const BasisSystem& basis, const EvalGrid& grid);

/// Omega_pq ~ int B''_p B''_q, by left-Riemann quadrature on `grid`.
Eigen::MatrixXd roughness_matrix(const BasisSystem& basis, const EvalGrid& grid);

/// Basis quantities that depend only on (basis, grid), computed once and
/// shared by every covariate and every fit on that grid.
struct BasisOnGrid {
    Eigen::MatrixXd values;    // R x K
    Eigen::VectorXd weights;   // R quadrature weights
    Eigen::MatrixXd gram;      // K x K
    Eigen::MatrixXd roughness; // K x K, empty when degree < 2
};

BasisOnGrid project(const BasisSystem& basis, const EvalGrid& grid);

} // namespace fdos
