// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, e.g. `fdos_acceptance 1 2 3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <Eigen/Dense>

#include "fdos/basis.hpp"
#include "fdos/design.hpp"
#include "fdos/model.hpp"
#include "fdos/simbench.hpp"
#include "fdos/solver.hpp"
#include "fdos/tuning.hpp"
#include "oracles.hpp"

using namespace fdos;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(gen);
    return v;
}

// ---------------------------------------------------------------- 1
Outcome operator_laws() {
    const auto start = Clock::now();
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<int> dim(1, 12);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    std::uniform_real_distribution<double> sign(-1.0, 1.0);
    std::size_t failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index m = dim(gen);
        const double tau = unif(gen);
        Eigen::VectorXd y = random_vector(gen, m, 2.0);
        // put some entries exactly on or just across the threshold
        if (trial % 3 == 0) y(0) = (sign(gen) < 0 ? -1.0 : 1.0) * tau;
        if (trial % 5 == 0 && m > 1) y(1) = tau * (1.0 + 1e-12);
        const Eigen::VectorXd y2 = random_vector(gen, m, 2.0);

        const Eigen::VectorXd s = soft_threshold_scalarwise(y, tau);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (std::abs(y(i)) <= tau) {
                failures += s(i) != 0.0;
            } else {
                failures += s(i) == 0.0 || std::abs(s(i) - (y(i) - std::copysign(tau, y(i)))) > 1e-12 * std::abs(y(i)) ||
                            std::signbit(s(i)) != std::signbit(y(i));
            }
        }
        failures += (soft_threshold_scalarwise(y2, tau) - s).norm() > (y2 - y).norm() * (1.0 + 1e-12) + 1e-15;

        Eigen::VectorXd g_in = y;
        if (trial % 4 == 0) g_in *= tau / std::max(g_in.norm(), 1e-300);
        const Eigen::VectorXd g = soft_threshold_group(g_in, tau);
        const double norm_in = g_in.norm();
        if (norm_in <= tau) {
            failures += !g.isZero(0.0);
        } else {
            failures += std::abs(g.norm() - (norm_in - tau)) > 1e-12 * norm_in;
            failures += std::abs(g.dot(g_in) - g.norm() * norm_in) > 1e-12 * norm_in * norm_in;
        }
        failures += (soft_threshold_group(y2, tau) - soft_threshold_group(y, tau)).norm() >
                    (y2 - y).norm() * (1.0 + 1e-12) + 1e-15;
    }
    const double t = seconds_since(start);
    return {failures == 0 && t < 5.0, "failures=" + std::to_string(failures) + " time=" + fmt(t) + "s"};
}

// ---------------------------------------------------------------- 2
Outcome oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937_64 gen(202);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const auto p = fdos::testing::make_tiny_problem(1000 + static_cast<std::uint64_t>(trial), 30, 2, 5, 1e-4);
        SolverConfig c;
        c.lambda1 = unif(gen);
        c.lambda2 = unif(gen);
        c.eps_tol = 1e-10;
        c.max_iter = 500000;
        const SolverSolution sol = AdmmSolver(p.blocks, p.data.Y, c).run();
        const auto ref = fdos::testing::proximal_gradient_reference(p.blocks, p.data.Y, c);
        worst = std::max(worst, rel(sol.objective, ref.objective));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-4 && t < 60.0, "max_rel_gap=" + fmt(worst) + " time=" + fmt(t) + "s"};
}

// ---------------------------------------------------------------- 3
Outcome transform_identities() {
    const auto start = Clock::now();
    const auto p = fdos::testing::make_tiny_problem(303, 40, 1, 8, 7e-6);
    const DesignBlock& blk = p.blocks[0];
    const double dn = blk.delta_n;
    const Eigen::MatrixXd pen = blk.Phi + blk.varphi * blk.Omega;
    std::mt19937_64 gen(304);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd b = random_vector(gen, blk.size(), 1.0 + trial % 7);
        const Eigen::VectorXd bt = dn * blk.L.transpose() * b;
        worst = std::max(worst, (blk.U * b - blk.U_tilde * bt).norm() / (blk.U * b).norm());
        worst = std::max(worst, rel(dn * b.lpNorm<1>(), blk.apply_D(bt).lpNorm<1>()));
        worst = std::max(worst, rel(std::sqrt(b.dot(pen * b)), bt.norm()));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-10 && t < 5.0, "max_rel_err=" + fmt(worst) + " time=" + fmt(t) + "s"};
}

// ---------------------------------------------------------------- 4
Outcome gradient_check() {
    const auto start = Clock::now();
    const auto p = fdos::testing::make_tiny_problem(404, 30, 2, 5, 1e-4);
    SolverConfig c; // lambda2 = 0 turns the b-step into a plain gradient step
    c.rho = 1.3;
    const AdmmSolver solver(p.blocks, p.data.Y, c);
    const Eigen::Index K = solver.block_size();
    std::mt19937_64 gen(405);
    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
        SolverState s;
        s.b_tilde = random_vector(gen, 2 * K, 1.0);
        s.z = random_vector(gen, 2 * K, 1.0);
        s.u = random_vector(gen, 2 * K, 1.0);
        s.mu_hat = 0.2;
        const std::size_t l = static_cast<std::size_t>(point % 2);
        const Eigen::Index off = static_cast<Eigen::Index>(l) * K;
        const Eigen::VectorXd grad =
            solver.nu(l) * (s.b_tilde.segment(off, K) - solver.b_update(l, s, solver.residual(s)));

        const auto smooth = [&](const Eigen::VectorXd& bl) {
            SolverState q = s;
            q.b_tilde.segment(off, K) = bl;
            const Eigen::VectorXd gap =
                p.blocks[l].apply_D(bl) - s.z.segment(off, K) + s.u.segment(off, K) / c.rho;
            return 0.5 * solver.residual(q).squaredNorm() + 0.5 * c.rho * gap.squaredNorm();
        };
        Eigen::VectorXd fd(K);
        const Eigen::VectorXd b0 = s.b_tilde.segment(off, K);
        for (Eigen::Index k = 0; k < K; ++k) {
            const double h = 1e-5 * std::max(1.0, std::abs(b0(k)));
            Eigen::VectorXd bp = b0, bm = b0;
            bp(k) += h;
            bm(k) -= h;
            fd(k) = (smooth(bp) - smooth(bm)) / (2.0 * h);
        }
        worst = std::max(worst, (fd - grad).norm() / grad.norm());
    }
    const double t = seconds_since(start);
    return {worst <= 1e-5 && t < 5.0, "max_rel_err=" + fmt(worst) + " time=" + fmt(t) + "s"};
}

// ---------------------------------------------------------------- 5, 6
struct StudyResult {
    BenchmarkReport report;
    double seconds = 0.0;
};

const StudyResult& cv_study() {
    static const StudyResult study = [] {
        SimulationSpec spec; // n = 200, 20 replicates
        BenchmarkOptions opts;
        const auto start = Clock::now();
        StudyResult s;
        s.report = run_benchmark(spec, {Mode::fdos, Mode::faddos}, TuningGrid::defaults(), opts);
        s.seconds = seconds_since(start);
        return s;
    }();
    return study;
}

const AggregateRow& aggregate_for(const BenchmarkReport& r, Mode m) {
    for (const auto& a : r.aggregate) {
        if (a.label == to_string(m)) return a;
    }
    throw std::runtime_error("no aggregate row for " + to_string(m));
}

Outcome double_sparsity_recovery() {
    const StudyResult& s = cv_study();
    const AggregateRow& ad = aggregate_for(s.report, Mode::faddos);
    std::size_t exact_null = 0, count = 0;
    for (const auto& row : s.report.rows) {
        if (row.mode != Mode::faddos) continue;
        ++count;
        exact_null += row.metrics.sum_ise_null <= 1e-6;
    }
    const double share = static_cast<double>(exact_null) / static_cast<double>(count);
    const bool a = ad.tnr.mean >= 0.95;
    const bool b = share >= 0.9;
    const bool c = ad.zero_coverage_beta1.mean >= 0.6;
    const bool time_ok = s.seconds <= 1800.0;
    return {a && b && c && time_ok,
            "(a) tnr=" + fmt(ad.tnr.mean) + (a ? " ok" : " low") + " (b) null_ise_zero_share=" + fmt(share) +
                (b ? " ok" : " low") + " (c) zero_coverage=" + fmt(ad.zero_coverage_beta1.mean) +
                (c ? " ok" : " low") + " study_time=" + fmt(s.seconds) + "s"};
}

Outcome adaptive_advantage() {
    const StudyResult& s = cv_study();
    const AggregateRow& ad = aggregate_for(s.report, Mode::faddos);
    const AggregateRow& un = aggregate_for(s.report, Mode::fdos);
    const bool tnr_ok = ad.tnr.mean >= un.tnr.mean;
    const bool pmse_ok = ad.pmse.mean <= 1.05 * un.pmse.mean;
    const bool band_ok = ad.pmse.mean >= 0.018 && ad.pmse.mean <= 0.032;
    return {tnr_ok && pmse_ok && band_ok,
            "tnr faddos=" + fmt(ad.tnr.mean) + " fdos=" + fmt(un.tnr.mean) + (tnr_ok ? " ok" : " violated") +
                "; pmse faddos=" + fmt(ad.pmse.mean) + " fdos=" + fmt(un.pmse.mean) +
                (pmse_ok ? " ok" : " violated") + "; pmse band [0.018, 0.032]" + (band_ok ? " ok" : " missed")};
}

// ---------------------------------------------------------------- 7
Outcome tuning_trends() {
    SimulationSpec spec;
    spec.n_replicates = 10;
    BenchmarkOptions opts;
    const std::vector<CVCell> cells{{1000.0, 0.5, 7e-6, 0, 0, 0},  {1000.0, 5.0, 7e-6, 0, 0, 0},
                                    {1000.0, 20.0, 7e-6, 0, 0, 0}, {500.0, 5.0, 7e-6, 0, 0, 0},
                                    {2500.0, 5.0, 7e-6, 0, 0, 0}};
    const BenchmarkReport r = run_fixed_cells(spec, Mode::faddos, cells, opts);
    const auto& a = r.aggregate;
    const double n05 = a[0].sum_ise_null.mean, n5 = a[1].sum_ise_null.mean, n20 = a[2].sum_ise_null.mean;
    const double z500 = a[3].ise0_beta1.mean, z1000 = a[1].ise0_beta1.mean, z2500 = a[4].ise0_beta1.mean;
    const bool l2_trend = n05 > n5 && n5 > n20;
    const bool l1_trend = z500 > z1000 && z1000 > z2500;
    return {l2_trend && l1_trend,
            "null ise over lambda2 {0.5,5,20}: " + fmt(n05) + ", " + fmt(n5) + ", " + fmt(n20) +
                (l2_trend ? " decreasing" : " not strictly decreasing") + "; ise0(beta1) over lambda1 {500,1000,2500}: " +
                fmt(z500) + ", " + fmt(z1000) + ", " + fmt(z2500) +
                (l1_trend ? " decreasing" : " not strictly decreasing")};
}

// ---------------------------------------------------------------- 8
Outcome numerical_hygiene() {
    double unity = 0.0;
    double min_eig = INFINITY;     // bases with up to 20 intervals
    double min_eig_rel = INFINITY; // smallest eigenvalue over largest, every basis
    double chol = 0.0;
    const EvalGrid grid = EvalGrid::uniform(0.0, 1.0, 201);
    for (int degree : {2, 3, 4}) {
        for (int m : {1, 5, 10, 20, 40}) {
            const BasisSystem basis({0.0, 1.0}, m, degree);
            for (int i = 0; i <= 5000; ++i) {
                unity = std::max(unity, std::abs(basis.eval(i / 5000.0).sum() - 1.0));
            }
            const BasisOnGrid pg = project(basis, grid);
            for (const Eigen::MatrixXd* M : {&pg.gram, &pg.roughness}) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*M);
                const double lo = es.eigenvalues().minCoeff();
                if (m <= 20) min_eig = std::min(min_eig, lo);
                min_eig_rel = std::min(min_eig_rel, lo / es.eigenvalues().maxCoeff());
            }
            Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 201);
            for (double varphi : {0.0, 3e-6, 7e-6, 5e-5, 2e-4}) {
                const DesignBlock blk = build_block(X, basis, grid, varphi);
                const Eigen::MatrixXd LLt = blk.L * blk.L.transpose();
                chol = std::max(chol, (LLt - blk.K_mat).norm() / blk.K_mat.norm());
            }
        }
    }
    // ISE quadrature refinement on an actual fitted coefficient
    SimulationSpec spec;
    spec.n_train = 100;
    spec.n_test = 10;
    const SimulatedData d = simulate_dataset(spec, 0);
    FitOptions o;
    o.varphi = 7e-6;
    o.solver.lambda1 = 1.0;
    o.solver.lambda2 = 1.0;
    const FitResult f = fit(d.train, BasisSystem({0.0, 1.0}, 20, 3), o);
    double refine = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto beta = [&](double t) { return reconstruct_coefficient(f, j, t); };
        const int jj = static_cast<int>(j) + 1;
        const double coarse = ise(beta, jj, Region::all, 2000);
        const double fine = ise(beta, jj, Region::all, 20000);
        if (fine > 0.0) refine = std::max(refine, std::abs(coarse - fine) / fine);
    }
    const bool ok = unity <= 1e-12 && min_eig >= -1e-10 && min_eig_rel >= -1e-14 && chol <= 1e-8 && refine <= 0.005;
    return {ok, "partition_of_unity_err=" + fmt(unity) + " min_eigenvalue=" + fmt(min_eig) +
                    " min_relative_eigenvalue=" + fmt(min_eig_rel) +
                    " cholesky_rel_err=" + fmt(chol) + " ise_refinement=" + fmt(refine)};
}

// ---------------------------------------------------------------- 9
Outcome pipeline_determinism() {
#ifndef FDOS_CLI_PATH
    return {false, "command-line tool not built"};
#else
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("fdos_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const auto run = [&](const std::string& args) {
        const std::string cmd = std::string("\"") + FDOS_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    bool ok = true;
    for (const char* tag : {"a", "b"}) {
        const fs::path d = root / tag;
        fs::create_directories(d);
        const std::string ds = d.string();
        ok &= run("simulate --n 40 --n-test 30 --seed 9 --out " + ds);
        ok &= run("fit --signals " + ds + "/train_signals.csv --response " + ds + "/train_response.csv --out " + ds +
                  " --knots 8 --lambda1 0.5 --lambda2 0.5 --varphi 7e-6");
        ok &= run("predict --result " + ds + "/result.json --signals " + ds + "/test_signals.csv --response " + ds +
                  "/test_response.csv --out " + ds + "/pred.csv");
        ok &= run("cv --signals " + ds + "/train_signals.csv --response " + ds + "/train_response.csv --out " + ds +
                  " --knots 8 --folds 3 --lambda1-values 0.1,1 --lambda2-values 0.1,1 --varphi-values 7e-6");
        ok &= run("benchmark --n 40 --n-test 30 --replicates 2 --knots 8 --folds 3 --lambda1-values 0.3,3 "
                  "--lambda2-values 0.3 --varphi-values 7e-6 --out " + ds);
    }
    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++compared;
        differing += slurp(entry.path()) != slurp(root / "b" / entry.path().filename());
    }
    fs::remove_all(root);
    return {ok && differing == 0 && compared >= 11,
            std::string("commands_ok=") + (ok ? "yes" : "no") + " files_compared=" + std::to_string(compared) +
                " differing=" + std::to_string(differing)};
#endif
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::pair<const char*, std::function<Outcome()>>>> criteria{
        {1, {"proximal operator laws", operator_laws}},
        {2, {"agreement with proximal-gradient minimizer", oracle_equivalence}},
        {3, {"transform identities", transform_identities}},
        {4, {"smooth-term gradient", gradient_check}},
        {5, {"double-sparsity recovery (CV-tuned adaptive fit)", double_sparsity_recovery}},
        {6, {"adaptive advantage and prediction error", adaptive_advantage}},
        {7, {"tuning parameter trends", tuning_trends}},
        {8, {"numerical hygiene", numerical_hygiene}},
        {9, {"pipeline determinism", pipeline_determinism}},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& [id, entry] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = entry.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << entry.first << ": " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
