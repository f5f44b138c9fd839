// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference envelopes come from the published benchmark tables.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cauchyreg/experiments.hpp"

using namespace cauchyreg;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << idx << ": " << name;
    if (!detail.empty())
        std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok)
        ++g_failures;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// --- 1: regularized kernels approach cosh/sinh as beta -> 0 ----------------

void criterion1() {
    double worst = 0.0;
    bool monotone = true;
    for (double lam : {1.0, 4.0, 9.0})
        for (double t : {0.25, 0.5, 0.75, 1.0}) {
            auto [ch, sh] = exact_kernels(t, lam);
            double prev_q = 1e300, prev_r = 1e300;
            for (int k = 1; k <= 8; ++k) {
                RegParams p = RegParams::with_beta(std::pow(10.0, -k), 1.0);
                double dq = std::abs(kernel_Q(NewLinear{}, t, lam, p) - ch);
                double dr = std::abs(kernel_R(NewLinear{}, t, lam, p) - sh);
                monotone = monotone && dq <= prev_q + 1e-15 && dr <= prev_r + 1e-15;
                prev_q = dq;
                prev_r = dr;
            }
            worst = std::max(worst, std::max(prev_q, prev_r));
        }
    report(1, "kernel limits at beta = 1e-8, monotone in beta", worst < 1e-4 && monotone,
           "max gap " + fmt(worst));
}

// --- 2: Phi/Psi dominated by their stated bounds ----------------------------

void criterion2() {
    double min_margin = 1e300;
    for (double beta : {1e-2, 1e-4}) {
        RegParams p = RegParams::with_beta(beta, 1.0);
        for (int it = 1; it <= 10; ++it) {
            double t = it / 10.0;
            for (int il = 0; il < 10; ++il) {
                double lam = std::pow(4.0, il);
                min_margin = std::min(min_margin, phi_bound(t, p) - kernel_Phi(t, lam, p));
                for (int is = 0; is <= 10; ++is) {
                    double s = t * is / 10.0;
                    min_margin = std::min(min_margin,
                                          psi_bound(t, s, 1.0, p) - kernel_Psi(t, s, lam, p));
                }
            }
        }
    }
    report(2, "Phi/Psi kernel bounds on the (t, s, lambda) grid", min_margin >= 0.0,
           "min margin " + fmt(min_margin));
}

// --- 3: noisy-vs-clean stability over 100 seeds ------------------------------

void criterion3() {
    EigenSystem sys{BasisKind::DirichletSine, M_PI, 3};
    CauchyData data(SpectralVector(sys, {1.0, 0.4, 0.1}),
                    SpectralVector(sys, {0.2, -0.3, 0.05}));
    const double eps = 1e-2;
    RegParams params(eps, 0.99, 1.0);
    const double cap = stability_constant(sys) * eps / params.beta();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CauchyData noisy = add_noise(data, eps, seed);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            SpectralVector v = regularized_solution(data, t, params, NewLinear{});
            SpectralVector ve = regularized_solution(noisy, t, params, NewLinear{});
            worst = std::max(worst, (v - ve).norm());
        }
    }
    report(3, "stability gap <= sqrt(2(1+1/lambda1)) eps/beta over 100 seeds", worst <= cap,
           "worst " + fmt(worst) + " vs cap " + fmt(cap));
}

// --- 4: linear convergence theorem, all cases --------------------------------

void criterion4() {
    EigenSystem sys{BasisKind::DirichletSine, M_PI, 3};
    CauchyData data(SpectralVector(sys, {1.0, 0.4, 0.1}),
                    SpectralVector(sys, {0.2, -0.3, 0.05}));
    std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    bool all = true;
    double min_margin = 1e300;
    for (Theorem2Case c : {Theorem2Case::I, Theorem2Case::II, Theorem2Case::III})
        for (double eps : {1e-2, 1e-3, 1e-4})
            for (double m : {0.5, 0.99}) {
                RegParams params(eps, m, 1.0);
                Theorem2Report rep = verify_theorem2(data, params, c, ts, seeds);
                all = all && rep.all_hold;
                min_margin = std::min(min_margin, rep.min_margin);
            }
    report(4, "linear error bounds hold (3 cases x 3 eps x 2 m)", all,
           "min margin " + fmt(min_margin));
}

// --- helpers for the benchmark envelopes --------------------------------------

double median_E(const ManufacturedProblem& prob, double eps, double t,
                const MarchingConfig& cfg, const GridSolution& exact) {
    std::vector<double> vals;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RegParams params(eps, 0.99, prob.horizon);
        CauchyData noisy = add_noise(prob.data, eps, seed);
        GridSolution approx = solve_problem(prob, noisy, params, cfg);
        ErrorReport rep = error_metrics(exact, approx);
        for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
            if (std::abs(rep.t_grid[i] - t) < 1e-12)
                vals.push_back(rep.midpoint_errors[i]);
    }
    std::sort(vals.begin(), vals.end());
    return 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
}

// --- 5: sine-Gordon benchmark envelope at t = 1/2 ----------------------------

void criterion5() {
    ManufacturedProblem prob = example2_problem(3);
    MarchingConfig cfg;
    cfg.m_steps = cfg.k_steps = 60;
    GridSolution exact = prob.exact_grid(cfg);

    std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> med;
    for (double e : eps)
        med.push_back(median_E(prob, e, 0.5, cfg, exact));

    bool envelope = med[1] > 0.015183 / 3.0 && med[1] < 0.015183 * 3.0 &&
                    med[3] > 0.000818 / 3.0 && med[3] < 0.000818 * 3.0;
    bool monotone = true;
    for (std::size_t i = 1; i < med.size(); ++i)
        monotone = monotone && med[i] <= med[i - 1] * 1.05;
    report(5, "sine-Gordon midpoint error envelope and monotone decay to the plateau",
           envelope && monotone,
           "E(1/2): 1e-2 -> " + fmt(med[1]) + ", 1e-4 -> " + fmt(med[3]) + ", 1e-6 -> " +
               fmt(med[5]));
}

// --- 6: Helmholtz benchmark envelope at t = 1 --------------------------------

void criterion6() {
    ManufacturedProblem prob = example1_problem(Example1Test::Poly, 3);
    MarchingConfig cfg;
    cfg.m_steps = cfg.k_steps = 20;
    GridSolution exact = prob.exact_grid(cfg);

    std::vector<double> eps{1e-2, 1e-4, 1e-6, 1e-8};
    std::vector<double> med;
    for (double e : eps)
        med.push_back(median_E(prob, e, 1.0, cfg, exact));

    bool envelope = med[0] > 0.372169 / 3.0 && med[0] < 0.372169 * 3.0 &&
                    med[1] > 0.023605 / 3.0 && med[1] < 0.023605 * 3.0;
    bool monotone = true;
    for (std::size_t i = 1; i < med.size(); ++i)
        monotone = monotone && med[i] <= med[i - 1] * 1.05;
    report(6, "Helmholtz terminal error envelope and monotone decay", envelope && monotone,
           "E(1): 1e-2 -> " + fmt(med[0]) + ", 1e-4 -> " + fmt(med[1]));
}

// --- 7: semilinear rate and bound ---------------------------------------------

void criterion7() {
    ManufacturedProblem prob = example2_problem(3);
    MarchingConfig cfg;
    cfg.m_steps = cfg.k_steps = 60;
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    Theorem8Report rep = verify_theorem8(prob, eps, 0.99, seeds, 0.5, cfg);
    double dev = std::abs(rep.empirical_slope - 0.495);
    report(7, "semilinear rate 0.495 +/- 0.15 and bound never violated",
           rep.bounds_hold && dev <= 0.15,
           "slope " + fmt(rep.empirical_slope) + ", bounds " +
               (rep.bounds_hold ? "hold" : "violated"));
}

// --- 8: cross-solver agreement -------------------------------------------------

void criterion8() {
    ManufacturedProblem prob = example2_problem(3);
    RegParams params(1e-4, 0.99, 1.0);
    CauchyData noisy = add_noise(prob.data, 1e-4, 3);
    MarchingConfig cfg;
    cfg.m_steps = cfg.k_steps = 60;
    GridSolution marched = march_solve(noisy, prob.f, params, cfg);
    cfg.mode = SolveMode::GlobalPicard;
    GridSolution picard = picard_solve(noisy, prob.f, params, cfg).grid;
    double diff = marched.max_abs_diff(picard);
    double cap = 5.0 / 60.0; // 5 * Delta t
    report(8, "time-marching agrees with global fixed-point within 5 dt", diff < cap,
           "max diff " + fmt(diff) + " vs cap " + fmt(cap));
}

// --- 9: discretization floor with zero noise ------------------------------------

void criterion9() {
    ManufacturedProblem prob = example2_problem(3);
    RegParams params = RegParams::with_beta(1e-12, 1.0);
    MarchingConfig cfg;
    cfg.m_steps = cfg.k_steps = 60;
    cfg.mode = SolveMode::GlobalPicard;
    GridSolution approx = picard_solve(prob.data, prob.f, params, cfg).grid;
    GridSolution exact = prob.exact_grid(cfg);
    ErrorReport rep = error_metrics(exact, approx);
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        if (!rep.rrms_absolute[i])
            worst = std::max(worst, rep.rrms_errors[i]);
    report(9, "zero-noise discretization floor: max relative RMS < 1e-3", worst < 1e-3,
           "max R " + fmt(worst));
}

// --- 10: manifest rerun reproducibility ------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void criterion10() {
    fs::path dir = fs::temp_directory_path() / "cauchyreg_acceptance_rerun";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string base = std::string(CAUCHYREG_CLI_PATH);
    std::string first = base + " solve --problem example2 --eps 1e-3 --seed 4 --grid-m 20"
                               " --grid-k 20 --out " +
                        dir.string() + " >/dev/null 2>&1";
    bool ok = std::system(first.c_str()) == 0;
    std::string sol = slurp(dir / "solution.csv");
    std::string err = slurp(dir / "errors.csv");
    std::string man = slurp(dir / "manifest.json");
    std::string rerun =
        base + " solve --config " + (dir / "manifest.json").string() + " >/dev/null 2>&1";
    ok = ok && std::system(rerun.c_str()) == 0;
    ok = ok && !sol.empty() && slurp(dir / "solution.csv") == sol &&
         slurp(dir / "errors.csv") == err && slurp(dir / "manifest.json") == man;
    report(10, "CLI rerun from the manifest is byte-identical", ok);
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
