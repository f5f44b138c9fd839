#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cauchyreg/kernels.hpp"
#include "cauchyreg/linear.hpp"

namespace cauchyreg {

/// Pointwise nonlinearity f(x, t, u) with Lipschitz constant K in u.
///
/// When the optional split f = state(u) + forcing(x, t) is supplied, the
/// marching scheme integrates the frozen state part in s by the closed-form
/// exponential antiderivatives and only the forcing by Gauss-Legendre.
struct Nonlinearity {
    std::function<double(double x, double t, double u)> eval;
    double lipschitz_k = 0.0;

    std::function<double(double u)> state_part;         // optional
    std::function<double(double x, double t)> forcing;  // optional

    bool has_split() const { return bool(state_part); }
    bool is_zero() const { return !eval; }

    double operator()(double x, double t, double u) const {
        if (!eval)
            return 0.0;
        return eval(x, t, u);
    }
};

enum class SolveMode { TimeMarching, GlobalPicard };

struct MarchingConfig {
    std::size_t m_steps = 60;       // time grid M
    std::size_t k_steps = 60;       // space grid K
    std::size_t quad_time_order = 16;
    std::size_t quad_space_order = 32;
    std::size_t picard_max_iter = 200;
    double picard_tol = 1e-10;
    SolveMode mode = SolveMode::TimeMarching;
};

/// (M+1) x (K+1) space-time samples plus the per-slice spectral coefficients,
/// so values off the grid (e.g. x = pi/2) can be synthesized exactly.
struct GridSolution {
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    std::vector<std::vector<double>> values; // row i = time t_i
    std::vector<SpectralVector> coeff_rows;

    double max_abs_diff(const GridSolution& other) const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t j = 0; j < values[i].size(); ++j)
                m = std::max(m, std::abs(values[i][j] - other.values[i][j]));
        return m;
    }
};

struct PicardResult {
    GridSolution grid;
    std::vector<double> iterate_diffs; // sup_t ||v^{k+1} - v^k|| per iteration
    bool converged = false;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_ratio)
        : std::runtime_error(what), last_ratio_(last_ratio) {}
    double last_ratio() const { return last_ratio_; }

private:
    double last_ratio_;
};

/// M_p(w1, w2) = <w1, phi_p> + <w2, phi_p> / sqrt(lambda_p).
inline double mp_functional(const SpectralVector& w1, const SpectralVector& w2, std::size_t p) {
    if (!(w1.sys == w2.sys))
        throw std::invalid_argument("mp_functional: vectors in different eigensystems");
    if (p < 1 || p > w1.sys.n_modes)
        throw std::out_of_range("mp_functional: mode index out of range");
    return w1.coeffs[p - 1] + w2.coeffs[p - 1] / std::sqrt(eigenvalue(w1.sys, p));
}

namespace detail {

struct SolveWorkspace {
    EigenSystem sys;
    RegParams params;
    MarchingConfig cfg;
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    QuadratureRule space_rule;
    std::vector<std::vector<double>> basis_at_nodes; // [p-1][r]
    std::vector<double> sqrt_lambda;

    SolveWorkspace(const EigenSystem& s, const RegParams& pr, const MarchingConfig& c)
        : sys(s), params(pr), cfg(c) {
        const double T = params.horizon;
        const double L = sys.domain_length;
        t_grid.resize(cfg.m_steps + 1);
        for (std::size_t i = 0; i <= cfg.m_steps; ++i)
            t_grid[i] = T * double(i) / double(cfg.m_steps);
        x_grid.resize(cfg.k_steps + 1);
        for (std::size_t j = 0; j <= cfg.k_steps; ++j)
            x_grid[j] = L * double(j) / double(cfg.k_steps);
        space_rule = gauss_legendre(cfg.quad_space_order, 0.0, L);
        basis_at_nodes.resize(sys.n_modes);
        sqrt_lambda.resize(sys.n_modes);
        for (std::size_t p = 1; p <= sys.n_modes; ++p) {
            sqrt_lambda[p - 1] = std::sqrt(eigenvalue(sys, p));
            basis_at_nodes[p - 1].resize(space_rule.nodes.size());
            for (std::size_t r = 0; r < space_rule.nodes.size(); ++r)
                basis_at_nodes[p - 1][r] = eval_basis(sys, p, space_rule.nodes[r]);
        }
    }

    std::vector<double> synthesize_at_nodes(const SpectralVector& v) const {
        std::vector<double> out(space_rule.nodes.size(), 0.0);
        for (std::size_t p = 0; p < sys.n_modes; ++p)
            for (std::size_t r = 0; r < out.size(); ++r)
                out[r] += v.coeffs[p] * basis_at_nodes[p][r];
        return out;
    }

    /// <w, phi_p> for node samples w(x_r), all p at once.
    std::vector<double> project_nodes(const std::vector<double>& samples) const {
        std::vector<double> c(sys.n_modes, 0.0);
        for (std::size_t p = 0; p < sys.n_modes; ++p) {
            double acc = 0.0;
            for (std::size_t r = 0; r < samples.size(); ++r)
                acc += space_rule.weights[r] * samples[r] * basis_at_nodes[p][r];
            c[p] = acc;
        }
        return c;
    }

    GridSolution make_grid(const std::vector<SpectralVector>& rows) const {
        GridSolution g;
        g.t_grid = t_grid;
        g.x_grid = x_grid;
        g.coeff_rows = rows;
        g.values.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            g.values[i] = synthesize(rows[i], x_grid);
        return g;
    }

    /// Data-only part of the regularized representation:
    /// Phi(t) M_p(phi,g) + e^{-sqrt(lambda) t}/2 M_p(phi,-g).
    double data_term(const CauchyData& data, double t, std::size_t p) const {
        double lam = eigenvalue(sys, p);
        SpectralVector neg_g = data.g;
        for (auto& c : neg_g.coeffs)
            c = -c;
        return kernel_Phi(t, lam, params) * mp_functional(data.phi, data.g, p) +
               0.5 * std::exp(-sqrt_lambda[p - 1] * t) * mp_functional(data.phi, neg_g, p);
    }
};

} // namespace detail

/// Global Picard iteration on the regularized integral equation: iterates
/// v <- F(v) with time integrals by composite Gauss-Legendre over [0, t_i]
/// and v(s) linearly interpolated between time-grid slices.
inline PicardResult picard_solve(const CauchyData& data, const Nonlinearity& f,
                                 const RegParams& params, const MarchingConfig& cfg) {
    detail::SolveWorkspace ws(data.sys(), params, cfg);
    const std::size_t M = cfg.m_steps;
    const std::size_t N = ws.sys.n_modes;

    std::vector<double> data_terms((M + 1) * N);
    for (std::size_t i = 0; i <= M; ++i)
        for (std::size_t p = 1; p <= N; ++p)
            data_terms[i * N + p - 1] = ws.data_term(data, ws.t_grid[i], p);

    std::vector<SpectralVector> v(M + 1, SpectralVector(ws.sys));
    for (std::size_t i = 0; i <= M; ++i)
        for (std::size_t p = 0; p < N; ++p)
            v[i].coeffs[p] = data_terms[i * N + p];

    PicardResult result;
    if (f.is_zero()) {
        result.grid = ws.make_grid(v);
        result.converged = true;
        return result;
    }

    // Quadrature nodes in s per subinterval, fixed across iterations.
    std::vector<QuadratureRule> s_rules(M);
    for (std::size_t j = 1; j <= M; ++j)
        s_rules[j - 1] = gauss_legendre(cfg.quad_time_order, ws.t_grid[j - 1], ws.t_grid[j]);

    auto f_coeffs_at = [&](double s, const SpectralVector& vs) {
        std::vector<double> u = ws.synthesize_at_nodes(vs);
        std::vector<double> fv(u.size());
        for (std::size_t r = 0; r < u.size(); ++r)
            fv[r] = f(ws.space_rule.nodes[r], s, u[r]);
        return ws.project_nodes(fv);
    };

    std::vector<SpectralVector> next(M + 1, SpectralVector(ws.sys));
    double prev_diff = -1.0;
    for (std::size_t iter = 0; iter < cfg.picard_max_iter; ++iter) {
        // Per-subinterval projected f values at the s-nodes for the current iterate.
        std::vector<std::vector<std::vector<double>>> fproj(M);
        for (std::size_t j = 1; j <= M; ++j) {
            const auto& rule = s_rules[j - 1];
            fproj[j - 1].resize(rule.nodes.size());
            for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
                double s = rule.nodes[l];
                double w = (s - ws.t_grid[j - 1]) / (ws.t_grid[j] - ws.t_grid[j - 1]);
                SpectralVector vs(ws.sys);
                for (std::size_t p = 0; p < N; ++p)
                    vs.coeffs[p] = (1.0 - w) * v[j - 1].coeffs[p] + w * v[j].coeffs[p];
                fproj[j - 1][l] = f_coeffs_at(s, vs);
            }
        }

        for (std::size_t i = 0; i <= M; ++i) {
            double t = ws.t_grid[i];
            for (std::size_t p = 0; p < N; ++p) {
                double lam = ws.sqrt_lambda[p] * ws.sqrt_lambda[p];
                double integral = 0.0;
                for (std::size_t j = 1; j <= i; ++j) {
                    const auto& rule = s_rules[j - 1];
                    for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
                        double s = rule.nodes[l];
                        double kern = kernel_Psi(t, s, lam, params) -
                                      std::exp(ws.sqrt_lambda[p] * (s - t)) /
                                          (2.0 * ws.sqrt_lambda[p]);
                        integral += rule.weights[l] * kern * fproj[j - 1][l][p];
                    }
                }
                next[i].coeffs[p] = data_terms[i * N + p] + integral;
            }
        }

        double diff = 0.0;
        for (std::size_t i = 0; i <= M; ++i)
            diff = std::max(diff, (next[i] - v[i]).norm());
        result.iterate_diffs.push_back(diff);
        v.swap(next);
        if (diff < cfg.picard_tol) {
            result.converged = true;
            break;
        }
        prev_diff = diff;
    }

    if (!result.converged) {
        double ratio = (result.iterate_diffs.size() >= 2 && prev_diff > 0.0)
                           ? result.iterate_diffs.back() /
                                 result.iterate_diffs[result.iterate_diffs.size() - 2]
                           : std::numeric_limits<double>::quiet_NaN();
        throw ConvergenceError("picard_solve: no convergence within max_iter", ratio);
    }

    result.grid = ws.make_grid(v);
    return result;
}

/// Time-marching scheme: v_0 = phi^eps and, for i = 1..M, the nonlinearity is
/// frozen at the previous slice v_{j-1} on each subinterval. Frozen state
/// contributions use the closed-form s-antiderivatives; explicit s-dependence
/// (the forcing) is integrated by Gauss-Legendre in s.
inline GridSolution march_solve(const CauchyData& data, const Nonlinearity& f,
                                const RegParams& params, const MarchingConfig& cfg) {
    detail::SolveWorkspace ws(data.sys(), params, cfg);
    const std::size_t M = cfg.m_steps;
    const std::size_t N = ws.sys.n_modes;
    const double beta = params.beta();
    const double T = params.horizon;

    std::vector<SpectralVector> v(M + 1, SpectralVector(ws.sys));
    v[0] = data.phi;

    std::vector<QuadratureRule> s_rules(M);
    for (std::size_t j = 1; j <= M; ++j)
        s_rules[j - 1] = gauss_legendre(cfg.quad_time_order, ws.t_grid[j - 1], ws.t_grid[j]);

    // Forcing projections at the s-nodes depend only on the subinterval.
    std::vector<std::vector<std::vector<double>>> forcing_proj;
    if (!f.is_zero() && f.has_split() && f.forcing) {
        forcing_proj.resize(M);
        for (std::size_t j = 1; j <= M; ++j) {
            const auto& rule = s_rules[j - 1];
            forcing_proj[j - 1].resize(rule.nodes.size());
            for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
                double s = rule.nodes[l];
                std::vector<double> fv(ws.space_rule.nodes.size());
                for (std::size_t r = 0; r < fv.size(); ++r)
                    fv[r] = f.forcing(ws.space_rule.nodes[r], s);
                forcing_proj[j - 1][l] = ws.project_nodes(fv);
            }
        }
    }

    // <state(v_{j-1}), phi_p>, filled as slices become available.
    std::vector<std::vector<double>> state_proj(M);

    for (std::size_t i = 1; i <= M; ++i) {
        double ti = ws.t_grid[i];

        if (!f.is_zero() && f.has_split()) {
            std::vector<double> u = ws.synthesize_at_nodes(v[i - 1]);
            std::vector<double> sv(u.size());
            for (std::size_t r = 0; r < u.size(); ++r)
                sv[r] = f.state_part(u[r]);
            state_proj[i - 1] = ws.project_nodes(sv);
        }

        for (std::size_t p = 0; p < N; ++p) {
            double sl = ws.sqrt_lambda[p];
            double lam = sl * sl;
            double psi_den = 2.0 * beta * lam + 2.0 * sl * std::exp(-sl * T);
            double coeff = ws.data_term(data, ti, p + 1);

            for (std::size_t j = 1; j <= i; ++j) {
                double tj0 = ws.t_grid[j - 1], tj1 = ws.t_grid[j];
                if (f.is_zero())
                    continue;

                if (f.has_split()) {
                    // Closed forms for the frozen state part:
                    //   int Psi ds   = (e^{-sl(T+t_{j-1}-t_i)} - e^{-sl(T+t_j-t_i)}) / (sl * psi_den)
                    //   int e^{sl(s-t_i)}/(2 sl) ds = (e^{sl(t_j-t_i)} - e^{sl(t_{j-1}-t_i)}) / (2 lam)
                    double int_psi = (std::exp(-sl * (T + tj0 - ti)) -
                                      std::exp(-sl * (T + tj1 - ti))) /
                                     (sl * psi_den);
                    double int_w = (std::exp(sl * (tj1 - ti)) - std::exp(sl * (tj0 - ti))) /
                                   (2.0 * lam);
                    coeff += (int_psi - int_w) * state_proj[j - 1][p];

                    if (f.forcing) {
                        const auto& rule = s_rules[j - 1];
                        for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
                            double s = rule.nodes[l];
                            double kern = kernel_Psi(ti, s, lam, params) -
                                          std::exp(sl * (s - ti)) / (2.0 * sl);
                            coeff += rule.weights[l] * kern * forcing_proj[j - 1][l][p];
                        }
                    }
                } else {
                    // No split supplied: Gauss-Legendre in s with u frozen at v_{j-1}.
                    const auto& rule = s_rules[j - 1];
                    std::vector<double> u = ws.synthesize_at_nodes(v[j - 1]);
                    for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
                        double s = rule.nodes[l];
                        std::vector<double> fv(u.size());
                        for (std::size_t r = 0; r < u.size(); ++r)
                            fv[r] = f(ws.space_rule.nodes[r], s, u[r]);
                        std::vector<double> fp = ws.project_nodes(fv);
                        double kern = kernel_Psi(ti, s, lam, params) -
                                      std::exp(sl * (s - ti)) / (2.0 * sl);
                        coeff += rule.weights[l] * kern * fp[p];
                    }
                }
            }
            v[i].coeffs[p] = coeff;
        }
    }

    return ws.make_grid(v);
}

struct ContractionReport {
    std::vector<double> observed_ratios;
    std::vector<double> factor_sequence; // sqrt((T^3 K^2 beta^-2 / lambda_1)^m T^m / m!)
    std::size_t m0 = 0;                  // smallest m with factor < 1
};

/// Observed Picard ratios plus the theoretical m-fold contraction factors.
inline ContractionReport contraction_diagnostics(const std::vector<double>& iterate_diffs,
                                                 const RegParams& params, const Nonlinearity& f,
                                                 double lambda_1) {
    ContractionReport rep;
    for (std::size_t k = 1; k < iterate_diffs.size(); ++k)
        if (iterate_diffs[k - 1] > 0.0)
            rep.observed_ratios.push_back(iterate_diffs[k] / iterate_diffs[k - 1]);

    const double T = params.horizon;
    const double K = f.lipschitz_k;
    const double beta = params.beta();
    if (K == 0.0 || iterate_diffs.size() <= 1) {
        rep.m0 = 1;
        return rep;
    }
    // log of base factor per power, evaluated at t = T.
    double log_base = std::log(T * T * T * K * K / (beta * beta * lambda_1)) + std::log(T);
    double log_factor = 0.0;
    for (std::size_t m = 1; m <= 100000; ++m) {
        log_factor += log_base - std::log(double(m));
        if (m <= 50)
            rep.factor_sequence.push_back(std::exp(0.5 * log_factor));
        if (0.5 * log_factor < 0.0) {
            rep.m0 = m;
            break;
        }
    }
    return rep;
}

/// P constant: 4 sup_t sum_p e^{sqrt(lambda)(T-t)} (sqrt(lambda) u_p + u_p')^2,
/// the sup taken over a 101-point t-grid.
inline double compute_P_constant(const std::function<SpectralVector(double)>& u_exact,
                                 const std::function<SpectralVector(double)>& du_exact,
                                 const RegParams& params) {
    const double T = params.horizon;
    double sup = 0.0;
    for (int k = 0; k <= 100; ++k) {
        double t = T * k / 100.0;
        SpectralVector u = u_exact(t);
        SpectralVector du = du_exact(t);
        double acc = 0.0;
        for (std::size_t p = 1; p <= u.sys.n_modes; ++p) {
            double sl = std::sqrt(eigenvalue(u.sys, p));
            if (sl * (T - t) > 700.0)
                throw std::range_error("compute_P_constant: overflow guard");
            double term = sl * u.coeffs[p - 1] + du.coeffs[p - 1];
            acc += std::exp(sl * (T - t)) * term * term;
        }
        sup = std::max(sup, acc);
    }
    return 4.0 * sup + 1e-12;
}

/// Theorem bound ||u(t) - v^eps(t)|| <= Q eps^{m(T-t)/T} T^{t/T} (ln(T/eps^m))^{-t/T}
/// with Q = sqrt((3 lambda_1 + 3)/lambda_1) e^{3K^2T^2t/(2 lambda_1)}
///        + e^{K^2T^2t/(2 lambda_1)} sqrt(P), evaluated at the tested t.
inline double theorem8_bound(double t, const RegParams& params, double lambda_1, double K,
                             double P) {
    const double T = params.horizon;
    const double eps = params.epsilon;
    const double m = params.m;
    double Qc = std::sqrt((3.0 * lambda_1 + 3.0) / lambda_1) *
                    std::exp(3.0 * K * K * T * T * t / (2.0 * lambda_1)) +
                std::exp(K * K * T * T * t / (2.0 * lambda_1)) * std::sqrt(P);
    return Qc * std::pow(eps, m * (T - t) / T) * std::pow(T, t / T) *
           std::pow(std::log(T / std::pow(eps, m)), -t / T);
}

} // namespace cauchyreg
