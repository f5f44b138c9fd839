#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cauchyreg/semilinear.hpp"

namespace cauchyreg {

/// A problem with a known exact solution, its Cauchy data, and the
/// right-hand-side nonlinearity the solvers see.
struct ManufacturedProblem {
    std::string id;
    EigenSystem sys;
    double horizon = 1.0;
    CauchyData data;
    Nonlinearity f;
    std::function<SpectralVector(double)> exact_coeffs;
    std::function<SpectralVector(double)> exact_dt_coeffs;

    GridSolution exact_grid(const MarchingConfig& cfg) const {
        detail::SolveWorkspace ws(sys, RegParams(0.0, 0.99, horizon), cfg);
        std::vector<SpectralVector> rows;
        rows.reserve(cfg.m_steps + 1);
        for (double t : ws.t_grid)
            rows.push_back(exact_coeffs(t));
        return ws.make_grid(rows);
    }
};

enum class Example1Test { Poly, CosSum };

/// Modified Helmholtz problem on the mixed cosine basis. The Helmholtz term
/// is moved to the right-hand side as f(u) = u; the exact solution carries
/// the shifted frequencies sqrt((p-1/2)^2 + 1).
inline ManufacturedProblem example1_problem(Example1Test h_choice, std::size_t n_modes = 3) {
    ManufacturedProblem prob;
    prob.id = h_choice == Example1Test::Poly ? "example1-poly" : "example1-cossum";
    prob.sys = EigenSystem{BasisKind::MixedCosine, M_PI, n_modes};
    prob.horizon = 1.0;

    std::function<double(double)> h;
    if (h_choice == Example1Test::Poly)
        h = [](double x) { return x * x * (M_PI - x); };
    else
        h = [](double x) {
            return std::cos(x) + std::cos(2.0 * x) / 2.0 + std::cos(3.0 * x) / 3.0;
        };

    QuadratureRule quad = default_space_rule(prob.sys, 64);
    SpectralVector h_coeffs = project(prob.sys, h, quad);

    EigenSystem sys = prob.sys;
    std::vector<double> omega(n_modes); // shifted frequency sqrt(lambda_p + 1)
    for (std::size_t p = 1; p <= n_modes; ++p)
        omega[p - 1] = std::sqrt(eigenvalue(sys, p) + 1.0);

    auto exact = [sys, h_coeffs, omega](double t) {
        SpectralVector u(sys);
        for (std::size_t p = 0; p < sys.n_modes; ++p)
            u.coeffs[p] = h_coeffs.coeffs[p] * std::cosh(t * omega[p]) / std::cosh(omega[p]);
        return u;
    };
    auto exact_dt = [sys, h_coeffs, omega](double t) {
        SpectralVector du(sys);
        for (std::size_t p = 0; p < sys.n_modes; ++p)
            du.coeffs[p] =
                h_coeffs.coeffs[p] * omega[p] * std::sinh(t * omega[p]) / std::cosh(omega[p]);
        return du;
    };
    prob.exact_coeffs = exact;
    prob.exact_dt_coeffs = exact_dt;
    prob.data = CauchyData(exact(0.0), SpectralVector(prob.sys));

    prob.f.eval = [](double, double, double u) { return u; };
    prob.f.state_part = [](double u) { return u; };
    prob.f.lipschitz_k = 1.0;
    return prob;
}

/// Elliptic sine-Gordon problem on the Dirichlet sine basis with the
/// manufactured exact solution u(x,t) = t sin x.
inline ManufacturedProblem example2_problem(std::size_t n_modes = 3) {
    ManufacturedProblem prob;
    prob.id = "example2";
    prob.sys = EigenSystem{BasisKind::DirichletSine, M_PI, n_modes};
    prob.horizon = 1.0;

    EigenSystem sys = prob.sys;
    const double g1 = std::sqrt(M_PI / 2.0); // <sin x, phi_1>

    auto exact = [sys, g1](double t) {
        SpectralVector u(sys);
        u.coeffs[0] = t * g1;
        return u;
    };
    auto exact_dt = [sys, g1](double) {
        SpectralVector du(sys);
        du.coeffs[0] = g1;
        return du;
    };
    prob.exact_coeffs = exact;
    prob.exact_dt_coeffs = exact_dt;

    SpectralVector g(prob.sys);
    g.coeffs[0] = g1;
    prob.data = CauchyData(SpectralVector(prob.sys), g);

    prob.f.eval = [](double x, double t, double u) {
        return std::sin(u) - std::sin(t * std::sin(x)) - t * std::sin(x);
    };
    prob.f.state_part = [](double u) { return std::sin(u); };
    prob.f.forcing = [](double x, double t) {
        return -std::sin(t * std::sin(x)) - t * std::sin(x);
    };
    prob.f.lipschitz_k = 1.0;
    return prob;
}

/// Per-time-slice midpoint error E(t_i) and RRMS error R(t_i).
struct ErrorReport {
    std::vector<double> t_grid;
    std::vector<double> midpoint_errors; // E(t_i), at x = pi/2 by series synthesis
    std::vector<double> rrms_errors;     // R(t_i)
    std::vector<bool> rrms_absolute;     // flagged where the exact row vanished
};

inline ErrorReport error_metrics(const GridSolution& exact, const GridSolution& approx) {
    if (exact.t_grid.size() != approx.t_grid.size() ||
        exact.x_grid.size() != approx.x_grid.size())
        throw std::invalid_argument("error_metrics: grids differ");

    ErrorReport rep;
    rep.t_grid = exact.t_grid;
    const double mid = M_PI / 2.0;
    for (std::size_t i = 0; i < exact.t_grid.size(); ++i) {
        double ue = synthesize_at(exact.coeff_rows[i], mid);
        double va = synthesize_at(approx.coeff_rows[i], mid);
        rep.midpoint_errors.push_back(std::abs(ue - va));

        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < exact.x_grid.size(); ++j) {
            double d = exact.values[i][j] - approx.values[i][j];
            num += d * d;
            den += exact.values[i][j] * exact.values[i][j];
        }
        if (den > 0.0) {
            rep.rrms_errors.push_back(std::sqrt(num / den));
            rep.rrms_absolute.push_back(false);
        } else {
            // exact row vanished; report absolute RMS with a flag
            rep.rrms_errors.push_back(std::sqrt(num / double(exact.x_grid.size())));
            rep.rrms_absolute.push_back(true);
        }
    }
    return rep;
}

struct StudyRow {
    double epsilon = 0.0;
    double m = 0.0;
    std::uint64_t seed = 0;
    double t = 0.0;
    double E = 0.0;
    double R = 0.0;
};

struct StudyDataset {
    std::vector<StudyRow> rows;
    std::vector<std::string> failures; // per-cell diagnostics; study continues

    /// Median of the named metric at fixed (epsilon, t) across seeds.
    double median(double epsilon, double t, bool rrms) const {
        std::vector<double> vals;
        for (const auto& r : rows)
            if (r.epsilon == epsilon && std::abs(r.t - t) < 1e-12)
                vals.push_back(rrms ? r.R : r.E);
        if (vals.empty())
            throw std::invalid_argument("StudyDataset::median: no rows at (eps, t)");
        std::sort(vals.begin(), vals.end());
        std::size_t n = vals.size();
        return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    }
};

inline GridSolution solve_problem(const ManufacturedProblem& prob, const CauchyData& noisy,
                                  const RegParams& params, const MarchingConfig& cfg) {
    if (cfg.mode == SolveMode::GlobalPicard)
        return picard_solve(noisy, prob.f, params, cfg).grid;
    return march_solve(noisy, prob.f, params, cfg);
}

/// One (epsilon, seed) grid: noisy data, solve, error metrics vs exact.
inline ErrorReport run_single(const ManufacturedProblem& prob, double epsilon, double m,
                              std::uint64_t seed, const MarchingConfig& cfg,
                              NoiseModel model = NoiseModel::ScalarRand) {
    RegParams params(epsilon, m, prob.horizon);
    CauchyData noisy = add_noise(prob.data, epsilon, seed, model);
    GridSolution approx = solve_problem(prob, noisy, params, cfg);
    GridSolution exact = prob.exact_grid(cfg);
    return error_metrics(exact, approx);
}

inline StudyDataset run_convergence_study(const ManufacturedProblem& prob,
                                          const std::vector<double>& eps_list, double m,
                                          const std::vector<std::uint64_t>& seeds,
                                          const MarchingConfig& cfg,
                                          NoiseModel model = NoiseModel::ScalarRand) {
    StudyDataset ds;
    GridSolution exact = prob.exact_grid(cfg);
    for (double eps : eps_list) {
        for (std::uint64_t seed : seeds) {
            try {
                RegParams params(eps, m, prob.horizon);
                CauchyData noisy = add_noise(prob.data, eps, seed, model);
                GridSolution approx = solve_problem(prob, noisy, params, cfg);
                ErrorReport rep = error_metrics(exact, approx);
                for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
                    ds.rows.push_back({eps, m, seed, rep.t_grid[i], rep.midpoint_errors[i],
                                       rep.rrms_errors[i]});
            } catch (const std::exception& e) {
                ds.failures.push_back(prob.id + " eps=" + std::to_string(eps) +
                                      " seed=" + std::to_string(seed) + ": " + e.what());
            }
        }
    }
    return ds;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double n = double(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Theorem8Sample {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double error = 0.0; // ||u(t) - v^eps(t)|| in the truncated H-norm
    double bound = 0.0;
};

struct Theorem8Report {
    double t = 0.0;
    double P = 0.0;
    std::vector<Theorem8Sample> samples;
    double empirical_slope = 0.0;
    double theoretical_exponent = 0.0;
    bool bounds_hold = true;
};

/// Rate check at one interior time: solves over the eps sweep, compares the
/// H-norm error with the Hoelder-logarithmic bound, and fits the empirical
/// log-log slope of the per-eps medians.
inline Theorem8Report verify_theorem8(const ManufacturedProblem& prob,
                                      const std::vector<double>& eps_list, double m,
                                      const std::vector<std::uint64_t>& seeds, double t,
                                      const MarchingConfig& cfg) {
    Theorem8Report rep;
    rep.t = t;
    rep.theoretical_exponent = m * (prob.horizon - t) / prob.horizon;
    RegParams p0(0.0, m, prob.horizon);
    rep.P = compute_P_constant(prob.exact_coeffs, prob.exact_dt_coeffs, p0);
    const double lam1 = eigenvalue(prob.sys, 1);

    // nearest grid index to the requested t
    std::vector<double> medians;
    for (double eps : eps_list) {
        RegParams params(eps, m, prob.horizon);
        std::vector<double> errs;
        for (std::uint64_t seed : seeds) {
            CauchyData noisy = add_noise(prob.data, eps, seed);
            GridSolution approx = solve_problem(prob, noisy, params, cfg);
            std::size_t idx = 0;
            double best = std::abs(approx.t_grid[0] - t);
            for (std::size_t i = 1; i < approx.t_grid.size(); ++i)
                if (std::abs(approx.t_grid[i] - t) < best) {
                    best = std::abs(approx.t_grid[i] - t);
                    idx = i;
                }
            double ti = approx.t_grid[idx];
            double err = (prob.exact_coeffs(ti) - approx.coeff_rows[idx]).norm();
            double bound = theorem8_bound(ti, params, lam1, prob.f.lipschitz_k, rep.P);
            rep.samples.push_back({eps, seed, err, bound});
            if (err > bound)
                rep.bounds_hold = false;
            errs.push_back(err);
        }
        std::sort(errs.begin(), errs.end());
        std::size_t n = errs.size();
        medians.push_back(n % 2 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]));
    }
    rep.empirical_slope = loglog_slope(eps_list, medians);
    return rep;
}

} // namespace cauchyreg
