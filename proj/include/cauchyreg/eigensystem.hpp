#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cauchyreg/quadrature.hpp"

namespace cauchyreg {

/// The two explicit 1-D eigensystems of A = -d2/dx2 used throughout:
///   DirichletSine:  lambda_p = p^2,         phi_p(x) = sqrt(2/pi) sin(p x)
///   MixedCosine:    lambda_p = (p - 1/2)^2, phi_p(x) = sqrt(2/pi) cos((p - 1/2) x)
enum class BasisKind { DirichletSine, MixedCosine };

struct EigenSystem {
    BasisKind kind = BasisKind::DirichletSine;
    double domain_length = M_PI;
    std::size_t n_modes = 3;

    bool operator==(const EigenSystem&) const = default;
};

/// Frequency sqrt(lambda_p): p for DirichletSine, p - 1/2 for MixedCosine.
inline double frequency(const EigenSystem& sys, std::size_t p) {
    if (p < 1 || p > sys.n_modes)
        throw std::out_of_range("eigenvalue: mode index out of range");
    return sys.kind == BasisKind::DirichletSine ? double(p) : double(p) - 0.5;
}

inline double eigenvalue(const EigenSystem& sys, std::size_t p) {
    double w = frequency(sys, p);
    return w * w;
}

inline double eval_basis(const EigenSystem& sys, std::size_t p, double x) {
    if (x < 0.0 || x > sys.domain_length)
        throw std::domain_error("eval_basis: x outside spatial domain");
    double w = frequency(sys, p);
    double scale = std::sqrt(2.0 / sys.domain_length);
    return sys.kind == BasisKind::DirichletSine ? scale * std::sin(w * x)
                                                : scale * std::cos(w * x);
}

/// Truncated coefficient sequence <w, phi_p>, p = 1..N, in a fixed eigensystem.
struct SpectralVector {
    EigenSystem sys;
    std::vector<double> coeffs;

    SpectralVector() = default;
    explicit SpectralVector(const EigenSystem& s) : sys(s), coeffs(s.n_modes, 0.0) {}
    SpectralVector(const EigenSystem& s, std::vector<double> c) : sys(s), coeffs(std::move(c)) {
        if (coeffs.size() != sys.n_modes)
            throw std::invalid_argument("SpectralVector: coefficient count != n_modes");
    }

    double norm() const {
        double s = 0.0;
        for (double c : coeffs)
            s += c * c;
        return std::sqrt(s);
    }
};

inline SpectralVector operator-(const SpectralVector& u, const SpectralVector& v) {
    if (!(u.sys == v.sys))
        throw std::invalid_argument("SpectralVector: operands live in different eigensystems");
    SpectralVector d(u.sys);
    for (std::size_t p = 0; p < d.coeffs.size(); ++p)
        d.coeffs[p] = u.coeffs[p] - v.coeffs[p];
    return d;
}

inline SpectralVector operator+(const SpectralVector& u, const SpectralVector& v) {
    if (!(u.sys == v.sys))
        throw std::invalid_argument("SpectralVector: operands live in different eigensystems");
    SpectralVector s(u.sys);
    for (std::size_t p = 0; p < s.coeffs.size(); ++p)
        s.coeffs[p] = u.coeffs[p] + v.coeffs[p];
    return s;
}

inline constexpr std::size_t kDefaultSpaceQuadOrder = 32;

inline QuadratureRule default_space_rule(const EigenSystem& sys,
                                         std::size_t order = kDefaultSpaceQuadOrder) {
    return gauss_legendre(order, 0.0, sys.domain_length);
}

/// coeffs_p = sum_r gamma_r w(x_r) phi_p(x_r), ascending p then ascending node.
inline SpectralVector project(const EigenSystem& sys, const std::function<double(double)>& w,
                              const QuadratureRule& quad) {
    SpectralVector v(sys);
    std::vector<double> samples(quad.nodes.size());
    for (std::size_t r = 0; r < quad.nodes.size(); ++r)
        samples[r] = w(quad.nodes[r]);
    for (std::size_t p = 1; p <= sys.n_modes; ++p) {
        double acc = 0.0;
        for (std::size_t r = 0; r < quad.nodes.size(); ++r)
            acc += quad.weights[r] * samples[r] * eval_basis(sys, p, quad.nodes[r]);
        v.coeffs[p - 1] = acc;
    }
    return v;
}

/// Pointwise series sum sum_p coeffs_p phi_p(x) at each x.
inline std::vector<double> synthesize(const SpectralVector& v, const std::vector<double>& xs) {
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double acc = 0.0;
        for (std::size_t p = 1; p <= v.sys.n_modes; ++p)
            acc += v.coeffs[p - 1] * eval_basis(v.sys, p, xs[i]);
        out[i] = acc;
    }
    return out;
}

inline double synthesize_at(const SpectralVector& v, double x) {
    double acc = 0.0;
    for (std::size_t p = 1; p <= v.sys.n_modes; ++p)
        acc += v.coeffs[p - 1] * eval_basis(v.sys, p, x);
    return acc;
}

} // namespace cauchyreg
