#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace cauchyreg {

/// Regularization parameters: noise level eps, exponent m, beta = eps^m, horizon T.
struct RegParams {
    double epsilon = 0.0;
    double m = 0.99;
    double horizon = 1.0;

    RegParams() = default;
    RegParams(double eps, double m_exp, double T) : epsilon(eps), m(m_exp), horizon(T) {}

    /// beta is always recomputed from (epsilon, m), never stored separately.
    double beta() const { return std::pow(epsilon, m); }

    static RegParams with_beta(double beta_value, double T) {
        RegParams p;
        p.epsilon = beta_value; // beta = eps^1
        p.m = 1.0;
        p.horizon = T;
        return p;
    }
};

struct QuasiReversibility {};
struct QuasiBoundary {
    double a = 1.0; // requires a >= 1
};
struct Truncation {
    // Threshold m_beta; modes with lambda_p > m_beta^2 are zeroed.
    // Default mapping sqrt(ln(1/beta)) diverges as beta -> 0.
    std::optional<double> m_beta;
    double threshold(double beta) const {
        return m_beta ? *m_beta : std::sqrt(std::log(1.0 / beta));
    }
};
struct NewLinear {};
struct SemilinearPhiPsi {};

using KernelFamily =
    std::variant<QuasiReversibility, QuasiBoundary, Truncation, NewLinear, SemilinearPhiPsi>;

namespace detail {

inline void check_time(double t, const RegParams& params) {
    if (t < 0.0 || t > params.horizon)
        throw std::domain_error("kernel: t outside [0, T]");
}

// cosh(x)/(1 + beta*cosh(y)) and sinh(x)/(1 + beta*cosh(y)) for 0 <= x <= y,
// computed with non-positive exponents only.
inline double quasi_boundary_ratio(double x, double y, double beta, bool use_sinh) {
    double num = std::exp(x - y) + (use_sinh ? -1.0 : 1.0) * std::exp(-x - y);
    double den = 2.0 * std::exp(-y) + beta * (1.0 + std::exp(-2.0 * y));
    return num / den;
}

} // namespace detail

/// Unregularized kernels (cosh, sinh) used for exact solutions and oracles.
inline std::pair<double, double> exact_kernels(double t, double lambda_p) {
    double arg = std::sqrt(lambda_p) * t;
    if (arg > 700.0)
        throw std::range_error("exact_kernels: sqrt(lambda)*t = " + std::to_string(arg) +
                               " exceeds overflow guard for lambda = " + std::to_string(lambda_p));
    return {std::cosh(arg), std::sinh(arg)};
}

/// The cosh-replacement kernel Q for each family.
inline double kernel_Q(const KernelFamily& fam, double t, double lambda_p,
                       const RegParams& params) {
    detail::check_time(t, params);
    const double beta = params.beta();
    const double sl = std::sqrt(lambda_p);
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, NewLinear>) {
                return 1.0 / (2.0 * beta + 2.0 * std::exp(-sl * t)) + 0.5 * std::exp(-sl * t);
            } else if constexpr (std::is_same_v<F, QuasiReversibility>) {
                return std::cosh(sl * t / std::sqrt(1.0 + beta * beta * lambda_p));
            } else if constexpr (std::is_same_v<F, QuasiBoundary>) {
                if (f.a < 1.0)
                    throw std::invalid_argument("QuasiBoundary: requires a >= 1");
                return detail::quasi_boundary_ratio(sl * t, f.a * sl * params.horizon, beta,
                                                    false);
            } else if constexpr (std::is_same_v<F, Truncation>) {
                double mb = f.threshold(beta);
                return lambda_p <= mb * mb ? std::cosh(sl * t) : 0.0;
            } else {
                // Semilinear P kernel: Phi + e^{-sqrt(lambda) t}/2.
                return std::exp(-sl * (params.horizon - t)) /
                           (2.0 * beta * sl + 2.0 * std::exp(-sl * params.horizon)) +
                       0.5 * std::exp(-sl * t);
            }
        },
        fam);
}

/// The sinh-replacement kernel R for each family.
///
/// R is canonical only for the truncation filter and the new linear kernel;
/// for QR and quasi-boundary we apply the identical damping to sinh. Those
/// two variants are comparative extensions, not used in bound checks.
inline double kernel_R(const KernelFamily& fam, double t, double lambda_p,
                       const RegParams& params) {
    detail::check_time(t, params);
    const double beta = params.beta();
    const double sl = std::sqrt(lambda_p);
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, NewLinear>) {
                return 1.0 / (2.0 * beta + 2.0 * std::exp(-sl * t)) - 0.5 * std::exp(-sl * t);
            } else if constexpr (std::is_same_v<F, QuasiReversibility>) {
                return std::sinh(sl * t / std::sqrt(1.0 + beta * beta * lambda_p));
            } else if constexpr (std::is_same_v<F, QuasiBoundary>) {
                if (f.a < 1.0)
                    throw std::invalid_argument("QuasiBoundary: requires a >= 1");
                return detail::quasi_boundary_ratio(sl * t, f.a * sl * params.horizon, beta, true);
            } else if constexpr (std::is_same_v<F, Truncation>) {
                double mb = f.threshold(beta);
                return lambda_p <= mb * mb ? std::sinh(sl * t) : 0.0;
            } else {
                // Semilinear Q kernel: Phi - e^{-sqrt(lambda) t}/2.
                return std::exp(-sl * (params.horizon - t)) /
                           (2.0 * beta * sl + 2.0 * std::exp(-sl * params.horizon)) -
                       0.5 * std::exp(-sl * t);
            }
        },
        fam);
}

/// Phi(beta, lambda_p, t) = e^{-sqrt(lambda)(T-t)} / (2 beta sqrt(lambda) + 2 e^{-sqrt(lambda) T}).
/// Only non-positive exponents are ever formed.
inline double kernel_Phi(double t, double lambda_p, const RegParams& params) {
    detail::check_time(t, params);
    const double beta = params.beta();
    const double sl = std::sqrt(lambda_p);
    const double T = params.horizon;
    return std::exp(-sl * (T - t)) / (2.0 * beta * sl + 2.0 * std::exp(-sl * T));
}

/// Psi(beta, lambda_p, s, t) = e^{-sqrt(lambda)(T+s-t)} / (2 beta lambda + 2 sqrt(lambda) e^{-sqrt(lambda) T}).
inline double kernel_Psi(double t, double s, double lambda_p, const RegParams& params) {
    detail::check_time(t, params);
    if (s > t || s < 0.0)
        throw std::invalid_argument("kernel_Psi: requires 0 <= s <= t");
    const double beta = params.beta();
    const double sl = std::sqrt(lambda_p);
    const double T = params.horizon;
    return std::exp(-sl * (T + s - t)) /
           (2.0 * beta * lambda_p + 2.0 * sl * std::exp(-sl * T));
}

struct SemilinearKernels {
    double P = 0.0;
    double Q = 0.0;
    double R = 0.0; // only meaningful when s was supplied
};

/// P = Phi + e^{-sqrt(lambda) t}/2, Q = Phi - e^{-sqrt(lambda) t}/2, and, when s
/// is given, R = sqrt(lambda) Psi - e^{-sqrt(lambda)(t-s)}/2.
inline SemilinearKernels semilinear_P_Q_R(double t, std::optional<double> s, double lambda_p,
                                          const RegParams& params) {
    const double phi = kernel_Phi(t, lambda_p, params);
    const double sl = std::sqrt(lambda_p);
    SemilinearKernels k;
    k.P = phi + 0.5 * std::exp(-sl * t);
    k.Q = phi - 0.5 * std::exp(-sl * t);
    if (s) {
        if (*s > t || *s < 0.0)
            throw std::invalid_argument("semilinear_P_Q_R: requires 0 <= s <= t");
        const double beta = params.beta();
        const double T = params.horizon;
        k.R = std::exp(-sl * (T + *s - t)) / (2.0 * beta * sl + 2.0 * std::exp(-sl * T)) -
              0.5 * std::exp(-sl * (t - *s));
    }
    return k;
}

/// Lemma bound for Phi: (1/2) (beta/T)^{-t/T} (ln(T/beta))^{-t/T}.
inline double phi_bound(double t, const RegParams& params) {
    const double beta = params.beta();
    const double T = params.horizon;
    return 0.5 * std::pow(beta / T, -t / T) * std::pow(std::log(T / beta), -t / T);
}

/// Lemma bound for Psi: (1/(2 sqrt(lambda_1))) (beta/T)^{(s-t)/T} (ln(T/beta))^{(s-t)/T}.
inline double psi_bound(double t, double s, double lambda_1, const RegParams& params) {
    const double beta = params.beta();
    const double T = params.horizon;
    return 0.5 / std::sqrt(lambda_1) * std::pow(beta / T, (s - t) / T) *
           std::pow(std::log(T / beta), (s - t) / T);
}

} // namespace cauchyreg
