#pragma once

#include <cstdint>
#include <vector>

#include "fdos/basis.hpp"
#include "fdos/design.hpp"
#include "fdos/model.hpp"

namespace fdos {

struct TuningGrid {
    std::vector<double> lambda1_values;
    std::vector<double> lambda2_values;
    std::vector<double> varphi_values;
    std::size_t k_folds = 5;
    std::uint64_t seed = 0;

    /// lambda1: 7 log-spaced values on [1e-1, 1e4]; lambda2: 7 on
    /// [1e-2, 1e2]; varphi in {3e-6, 7e-6, 5e-5, 2e-4}.
    static TuningGrid defaults();

    std::size_t cell_count() const {
        return lambda1_values.size() * lambda2_values.size() * varphi_values.size();
    }
    void validate(std::size_t n) const;
};

/// `count` values log-spaced from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t count);

struct CVCell {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double varphi = 0.0;
    double mean_pmse = 0.0;
    double sd_pmse = 0.0;
    double convergence_rate = 0.0;
};

struct CVResult {
    std::vector<CVCell> cells; // varphi-major, then lambda2, then lambda1
    std::size_t best = 0;
};

/// Fold index (0..k-1) of every subject. Deterministic in `seed`; fold
/// sizes differ by at most one.
std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// k-fold CV of every (lambda1, lambda2, varphi) cell. Blocks are built
/// once per (fold, varphi); adaptive weights come from the training folds
/// only. `base` supplies mode, solver settings and weight options.
CVResult cross_validate(const FunctionalDataset& data, const BasisSystem& basis, const TuningGrid& grid,
                        const FitOptions& base);
CVResult cross_validate(const DesignContext& ctx, const TuningGrid& grid, const FitOptions& base);

/// Index of the lowest mean PMSE; ties (within 1e-12) go to the larger
/// lambda1 + lambda2, then to the larger varphi.
std::size_t select_best(const CVResult& cv);

/// `base` with lambda1, lambda2 and varphi taken from `cell`.
FitOptions with_cell(FitOptions base, const CVCell& cell);

} // namespace fdos
