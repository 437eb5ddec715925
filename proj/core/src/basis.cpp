#include "fdos/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fdos/error.hpp"

namespace fdos {

EvalGrid EvalGrid::uniform(double start, double end, std::size_t points) {
    if (!(end > start)) {
        throw DomainError("EvalGrid: empty interval [" + std::to_string(start) + ", " +
                          std::to_string(end) + "]");
    }
    if (points < 2) {
        throw ConfigError("EvalGrid: need at least 2 points, got " + std::to_string(points));
    }
    EvalGrid grid;
    grid.spacing_ = (end - start) / static_cast<double>(points - 1);
    grid.points_.resize(points);
    for (std::size_t r = 0; r < points; ++r) {
        grid.points_[r] = start + static_cast<double>(r) * grid.spacing_;
    }
    grid.points_.back() = end;
    return grid;
}

Eigen::VectorXd EvalGrid::quadrature_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size()), spacing_);
    w(w.size() - 1) = 0.0;
    return w;
}

bool EvalGrid::compatible_with(const EvalGrid& other) const {
    if (size() != other.size() || size() == 0) {
        return false;
    }
    const double scale = std::max(std::abs(end() - start()), 1e-300);
    return std::abs(start() - other.start()) <= 1e-9 * scale &&
           std::abs(end() - other.end()) <= 1e-9 * scale;
}

BasisSystem::BasisSystem(Interval domain, int n_intervals, int degree)
    : domain_(domain), n_intervals_(n_intervals), degree_(degree) {
    if (n_intervals < 1) {
        throw ConfigError("BasisSystem: number of subintervals must be >= 1, got " +
                          std::to_string(n_intervals));
    }
    if (degree < 1) {
        throw ConfigError("BasisSystem: degree must be >= 1, got " + std::to_string(degree));
    }
    if (!(domain.end > domain.start) || !std::isfinite(domain.start) || !std::isfinite(domain.end)) {
        throw DomainError("BasisSystem: degenerate domain");
    }
    delta_n_ = domain.length() / n_intervals;
    knots_.reserve(static_cast<std::size_t>(n_intervals + 2 * degree + 1));
    for (int i = 0; i < degree; ++i) {
        knots_.push_back(domain.start);
    }
    for (int r = 0; r <= n_intervals; ++r) {
        knots_.push_back(r == n_intervals ? domain.end : domain.start + r * delta_n_);
    }
    for (int i = 0; i < degree; ++i) {
        knots_.push_back(domain.end);
    }
}

double BasisSystem::clamp_to_domain(double t) const {
    const double tol = 1e-12 * domain_.length();
    if (!(t >= domain_.start - tol && t <= domain_.end + tol)) {
        throw DomainError("BasisSystem: t = " + std::to_string(t) + " outside [" +
                          std::to_string(domain_.start) + ", " + std::to_string(domain_.end) + "]");
    }
    return std::clamp(t, domain_.start, domain_.end);
}

int BasisSystem::span(double t) const {
    t = clamp_to_domain(t);
    int r = static_cast<int>(std::floor((t - domain_.start) / delta_n_));
    r = std::clamp(r, 0, n_intervals_ - 1);
    // floor() can land one interval off near a breakpoint
    if (r > 0 && t < breakpoint(r)) {
        --r;
    } else if (r < n_intervals_ - 1 && t >= breakpoint(r + 1)) {
        ++r;
    }
    return r;
}

LocalBasis BasisSystem::eval_local(double t, int deriv) const {
    if (deriv != 0 && deriv != 2) {
        throw ConfigError("BasisSystem: only derivative orders 0 and 2 are supported");
    }
    if (deriv == 2 && degree_ < 2) {
        throw ConfigError("BasisSystem: second derivatives need degree >= 2, got " +
                          std::to_string(degree_));
    }
    t = clamp_to_domain(t);
    const int p = degree_;
    const int r_span = span(t);
    const auto i = static_cast<std::size_t>(r_span + p);
    const auto& U = knots_;

    // Triangular table of basis values (upper part) and knot differences
    // (lower part), de Boor / Piegl-Tiller layout.
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - U[i + 1 - j];
        right[j] = U[i + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    LocalBasis out;
    out.first = r_span;
    out.values.resize(p + 1);
    if (deriv == 0) {
        for (int j = 0; j <= p; ++j) {
            out.values(j) = ndu(j, p);
        }
        return out;
    }

    const int n = deriv;
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a.setZero();
        a(0, 0) = 1.0;
        double value = 0.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            value = d;
            std::swap(s1, s2);
        }
        out.values(r) = value;
    }
    // p! / (p - n)!
    double factor = 1.0;
    for (int k = 0; k < n; ++k) {
        factor *= (p - k);
    }
    out.values *= factor;
    return out;
}

Eigen::VectorXd BasisSystem::eval(double t) const {
    const LocalBasis local = eval_local(t, 0);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    out.segment(local.first, degree_ + 1) = local.values;
    return out;
}

Eigen::VectorXd BasisSystem::eval_d2(double t) const {
    const LocalBasis local = eval_local(t, 2);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    out.segment(local.first, degree_ + 1) = local.values;
    return out;
}

BasisSystem make_basis(Interval domain, int n_intervals, int degree) {
    return BasisSystem(domain, n_intervals, degree);
}

namespace {

void check_grid(const BasisSystem& basis, const EvalGrid& grid) {
    if (grid.size() < static_cast<std::size_t>(basis.size())) {
        throw ConfigError("grid too coarse: " + std::to_string(grid.size()) + " points for " +
                          std::to_string(basis.size()) + " basis functions");
    }
    const Interval& dom = basis.domain();
    const double tol = 1e-9 * dom.length();
    if (std::abs(grid.start() - dom.start) > tol || std::abs(grid.end() - dom.end) > tol) {
        throw DomainError("grid [" + std::to_string(grid.start()) + ", " + std::to_string(grid.end()) +
                          "] does not cover the basis domain [" + std::to_string(dom.start) + ", " +
                          std::to_string(dom.end) + "]");
    }
}

Eigen::MatrixXd weighted_cross_product(const BasisSystem& basis, const EvalGrid& grid, int deriv) {
    check_grid(basis, grid);
    const int K = basis.size();
    const int width = basis.degree() + 1;
    const Eigen::VectorXd w = grid.quadrature_weights();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    for (std::size_t r = 0; r < grid.size(); ++r) {
        if (w(static_cast<Eigen::Index>(r)) == 0.0) {
            continue;
        }
        const LocalBasis local = basis.eval_local(grid[r], deriv);
        out.block(local.first, local.first, width, width).noalias() +=
            w(static_cast<Eigen::Index>(r)) * local.values * local.values.transpose();
    }
    const Eigen::MatrixXd upper = out;
    out.triangularView<Eigen::StrictlyLower>() = upper.transpose();
    return out;
}

} // namespace

Eigen::MatrixXd basis_matrix(const BasisSystem& basis, const EvalGrid& grid, int deriv) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), basis.size());
    for (std::size_t r = 0; r < grid.size(); ++r) {
        const LocalBasis local = basis.eval_local(grid[r], deriv);
        out.row(static_cast<Eigen::Index>(r)).segment(local.first, basis.degree() + 1) =
            local.values.transpose();
    }
    return out;
}

Eigen::MatrixXd gram_matrix(const BasisSystem& basis, const EvalGrid& grid) {
    return weighted_cross_product(basis, grid, 0);
}

Eigen::MatrixXd roughness_matrix(const BasisSystem& basis, const EvalGrid& grid) {
    if (basis.degree() < 2) {
        throw ConfigError("roughness_matrix: second derivatives need degree >= 2, got " +
                          std::to_string(basis.degree()));
    }
    return weighted_cross_product(basis, grid, 2);
}

BasisOnGrid project(const BasisSystem& basis, const EvalGrid& grid) {
    check_grid(basis, grid);
    BasisOnGrid out;
    out.values = basis_matrix(basis, grid, 0);
    out.weights = grid.quadrature_weights();
    out.gram = gram_matrix(basis, grid);
    if (basis.degree() >= 2) {
        out.roughness = roughness_matrix(basis, grid);
    }
    return out;
}

} // namespace fdos
