#include "fdos/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "fdos/error.hpp"
#include "fdos/parallel.hpp"

namespace fdos {

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (count == 0 || !(lo > 0.0) || !(hi >= lo)) {
        throw ConfigError("log_space: need 0 < lo <= hi and count >= 1");
    }
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double step = (std::log10(hi) - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::pow(10.0, a + step * static_cast<double>(i));
    }
    out.back() = hi;
    return out;
}

TuningGrid TuningGrid::defaults() {
    TuningGrid g;
    g.lambda1_values = log_space(1e-1, 1e4, 7);
    g.lambda2_values = log_space(1e-2, 1e2, 7);
    g.varphi_values = {3e-6, 7e-6, 5e-5, 2e-4};
    return g;
}

void TuningGrid::validate(std::size_t n) const {
    if (lambda1_values.empty() || lambda2_values.empty() || varphi_values.empty()) {
        throw ConfigError("tuning grid has an empty axis");
    }
    for (const auto* axis : {&lambda1_values, &lambda2_values, &varphi_values}) {
        for (const double v : *axis) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ConfigError("tuning grid values must be finite and >= 0");
            }
        }
    }
    if (k_folds < 2 || k_folds > n) {
        throw ConfigError("k_folds must lie in [2, n]; got " + std::to_string(k_folds) + " for n = " +
                          std::to_string(n));
    }
}

std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) {
        throw ConfigError("kfold_split: need 2 <= k <= n; got k = " + std::to_string(k) + ", n = " +
                          std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 gen(seed);
    // Fisher-Yates with an explicit modulus so the permutation depends only
    // on the mt19937_64 stream.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        fold[order[pos]] = pos % k;
    }
    return fold;
}

FitOptions with_cell(FitOptions base, const CVCell& cell) {
    base.solver.lambda1 = cell.lambda1;
    base.solver.lambda2 = cell.lambda2;
    base.varphi = cell.varphi;
    return base;
}

CVResult cross_validate(const FunctionalDataset& data, const BasisSystem& basis, const TuningGrid& grid,
                        const FitOptions& base) {
    return cross_validate(DesignContext::build(data, basis), grid, base);
}

CVResult cross_validate(const DesignContext& ctx, const TuningGrid& grid, const FitOptions& base) {
    grid.validate(ctx.n());
    const std::size_t k = grid.k_folds;
    const std::size_t n1 = grid.lambda1_values.size();
    const std::size_t n2 = grid.lambda2_values.size();
    const std::size_t nphi = grid.varphi_values.size();
    const std::size_t cells = n1 * n2 * nphi;
    const auto cell_index = [&](std::size_t ip, std::size_t i2, std::size_t i1) { return (ip * n2 + i2) * n1 + i1; };

    const std::vector<std::size_t> fold = kfold_split(ctx.n(), k, grid.seed);
    std::vector<DesignContext> train;
    std::vector<DesignContext> test;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> tr;
        std::vector<std::size_t> te;
        for (std::size_t i = 0; i < ctx.n(); ++i) {
            (fold[i] == f ? te : tr).push_back(i);
        }
        train.push_back(ctx.subset(tr));
        test.push_back(ctx.subset(te));
    }
    std::vector<AdaptiveWeights> weights(k);
    parallel_for(k, [&](std::size_t f) { weights[f] = resolve_weights(train[f], base); });

    // Descending lambda1 within each (varphi, lambda2) slice so each fit
    // warm-starts from a sparser neighbour.
    std::vector<std::size_t> lambda1_order(n1);
    std::iota(lambda1_order.begin(), lambda1_order.end(), std::size_t{0});
    std::sort(lambda1_order.begin(), lambda1_order.end(),
              [&](std::size_t a, std::size_t b) { return grid.lambda1_values[a] > grid.lambda1_values[b]; });

    std::vector<double> pmse(cells * k, 0.0);
    std::vector<char> converged(cells * k, 0);
    parallel_for(k * nphi, [&](std::size_t task) {
        const std::size_t f = task / nphi;
        const std::size_t ip = task % nphi;
        FitOptions opts = base;
        opts.varphi = grid.varphi_values[ip];
        const std::vector<DesignBlock> blocks = train[f].blocks(opts.varphi);
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            SolverState state;
            bool have_state = false;
            for (const std::size_t i1 : lambda1_order) {
                opts.solver.lambda1 = grid.lambda1_values[i1];
                opts.solver.lambda2 = grid.lambda2_values[i2];
                SolverState next;
                const FitResult result =
                    fit_with_blocks(train[f], blocks, opts, weights[f], have_state ? &state : nullptr, &next);
                state = std::move(next);
                have_state = true;

                Eigen::VectorXd pred = Eigen::VectorXd::Constant(test[f].Y.size(), result.mu_hat);
                for (std::size_t j = 0; j < result.J(); ++j) {
                    pred.noalias() += test[f].U[j] * result.b_star[j];
                }
                const std::size_t c = cell_index(ip, i2, i1);
                pmse[c * k + f] = (test[f].Y - pred).squaredNorm() / static_cast<double>(test[f].Y.size());
                converged[c * k + f] = result.diagnostics.converged ? 1 : 0;
            }
        }
    });

    CVResult out;
    out.cells.reserve(cells);
    bool any_converged = false;
    for (std::size_t ip = 0; ip < nphi; ++ip) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            for (std::size_t i1 = 0; i1 < n1; ++i1) {
                const std::size_t c = cell_index(ip, i2, i1);
                CVCell cell{grid.lambda1_values[i1], grid.lambda2_values[i2], grid.varphi_values[ip]};
                double sum = 0.0;
                double conv = 0.0;
                for (std::size_t f = 0; f < k; ++f) {
                    sum += pmse[c * k + f];
                    conv += converged[c * k + f];
                }
                cell.mean_pmse = sum / static_cast<double>(k);
                double ss = 0.0;
                for (std::size_t f = 0; f < k; ++f) {
                    ss += (pmse[c * k + f] - cell.mean_pmse) * (pmse[c * k + f] - cell.mean_pmse);
                }
                cell.sd_pmse = std::sqrt(ss / static_cast<double>(k - 1));
                cell.convergence_rate = conv / static_cast<double>(k);
                any_converged = any_converged || conv > 0.0;
                out.cells.push_back(cell);
            }
        }
    }
    if (!any_converged) {
        std::ostringstream msg;
        msg << "cross_validate: no cell converged in any fold (max_iter = " << base.solver.max_iter
            << ", eps_tol = " << base.solver.eps_tol << ")";
        throw NumericalError(msg.str());
    }
    out.best = select_best(out);
    return out;
}

std::size_t select_best(const CVResult& cv) {
    if (cv.cells.empty()) {
        throw ConfigError("select_best: empty CV result");
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < cv.cells.size(); ++c) {
        const CVCell& a = cv.cells[c];
        const CVCell& b = cv.cells[best];
        const double tol = 1e-12 * std::max(1.0, std::abs(b.mean_pmse));
        if (a.mean_pmse < b.mean_pmse - tol) {
            best = c;
        } else if (std::abs(a.mean_pmse - b.mean_pmse) <= tol) {
            const double sa = a.lambda1 + a.lambda2;
            const double sb = b.lambda1 + b.lambda2;
            if (sa > sb || (sa == sb && a.varphi > b.varphi)) {
                best = c;
            }
        }
    }
    return best;
}

} // namespace fdos
