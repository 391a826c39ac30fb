#pragma once

// Pointwise finite-difference verification of the operator identities the
// inequalities rest on: conjugation of the weighted half-space operator by
// x_n^l, conjugation of the Laplacian by the orthant monomial, harmonicity
// of that monomial, and a spherical Laplacian applied through the
// homogeneous extension. All stencils are centered 3-point per axis, O(h²).

#include "cone.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hardylab {

using ScalarField = std::function<double(const double*)>;

struct ResidualSample {
    std::vector<double> point;
    double h = 0.0;
    double residual = 0.0;
    double order_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct ResidualSweep {
    std::vector<double> steps;
    std::vector<double> residuals;
    double order_estimate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double ipow(double x, long long p) {
    double r = 1.0;
    for (long long i = 0; i < p; ++i) r *= x;
    return r;
}

// x^l, exact repeated product when l is a (small) nonnegative integer so
// integer-weight paths agree bitwise with monomial products.
inline double power_weight(double x, double l) {
    const long long li = static_cast<long long>(l);
    if (l == static_cast<double>(li) && li >= 0 && li <= 64) return ipow(x, li);
    return std::pow(x, l);
}

} // namespace detail

// Centered 3-point-per-axis finite-difference Laplacian.
inline double stencil_laplacian(const ScalarField& f, const double* x, int n, double h) {
    double p[max_dimension];
    for (int d = 0; d < n; ++d) p[d] = x[d];
    const double center = f(p);
    double acc = 0.0;
    for (int d = 0; d < n; ++d) {
        p[d] = x[d] + h;
        const double up = f(p);
        p[d] = x[d] - h;
        const double dn = f(p);
        p[d] = x[d];
        acc += up - 2.0 * center + dn;
    }
    return acc / (h * h);
}

inline double stencil_partial(const ScalarField& f, const double* x, int n, int axis, double h) {
    double p[max_dimension];
    for (int d = 0; d < n; ++d) p[d] = x[d];
    p[axis] = x[axis] + h;
    const double up = f(p);
    p[axis] = x[axis] - h;
    const double dn = f(p);
    return (up - dn) / (2.0 * h);
}

// Residual of the half-space conjugation identity
//   x_n^{-l} (-Δ + l(l-1)/x_n²)(x_n^l g) = -(Δg + (2l/x_n) ∂_n g),
// both sides by centered stencils. The stencil must stay inside x_n > 0.
inline ResidualSample halfspace_conjugation_residual(const ScalarField& g, int n, double l,
                                                     const double* x, double h) {
    if (n < 2 || n > max_dimension) throw std::domain_error("halfspace_conjugation_residual: bad dimension");
    const double xn = x[n - 1];
    if (!(xn - h > 0.0))
        throw std::domain_error("halfspace_conjugation_residual: stencil crosses the boundary x_n = 0");

    ScalarField weighted = [&g, n, l](const double* p) {
        return detail::power_weight(p[n - 1], l) * g(p);
    };
    const double lap_w = stencil_laplacian(weighted, x, n, h);
    double wc[max_dimension];
    for (int d = 0; d < n; ++d) wc[d] = x[d];
    const double w_center = weighted(wc);
    const double lhs = (-lap_w + l * (l - 1.0) * w_center / (xn * xn)) / detail::power_weight(xn, l);

    // Right side at step h/2: a shared step makes the stencils of the two
    // sides cancel algebraically at integer l, leaving nothing to measure.
    const double hr = 0.5 * h;
    const double lap_g = stencil_laplacian(g, x, n, hr);
    const double dng = stencil_partial(g, x, n, n - 1, hr);
    const double rhs = -(lap_g + (2.0 * l / xn) * dng);

    ResidualSample s;
    s.point.assign(x, x + n);
    s.h = h;
    s.residual = std::abs(lhs - rhs);
    return s;
}

// Residual of the cone conjugation identity with m(x) = prod of the last k
// coordinates:
//   m^{-1} (-Δ)(m g) = -(Δg + Σ_{j>n-k} (2/x_j) ∂_j g).
inline ResidualSample monomial_conjugation_residual(const ScalarField& g, const ConeSpec& spec,
                                                    const double* x, double h) {
    spec.validate();
    const int n = spec.n;
    for (int d = n - spec.k; d < n; ++d)
        if (!(x[d] - h > 0.0))
            throw std::domain_error("monomial_conjugation_residual: stencil crosses a cone wall");

    ScalarField weighted = [&g, spec](const double* p) {
        return AngularEigenfunction::monomial(spec, p) * g(p);
    };
    const double lap_w = stencil_laplacian(weighted, x, n, h);
    const double lhs = -lap_w / AngularEigenfunction::monomial(spec, x);

    // The two sides are discretized independently (right side at step h/2):
    // with a shared step the multilinear weight makes the stencils cancel
    // algebraically and the residual degenerates to rounding noise, leaving
    // no convergence order to observe.
    const double hr = 0.5 * h;
    const double lap_g = stencil_laplacian(g, x, n, hr);
    double sum = lap_g;
    for (int j = n - spec.k; j < n; ++j) sum += (2.0 / x[j]) * stencil_partial(g, x, n, j, hr);
    const double rhs = -sum;

    ResidualSample s;
    s.point.assign(x, x + n);
    s.h = h;
    s.residual = std::abs(lhs - rhs);
    return s;
}

// |Δ m| by stencil; zero to rounding because every coordinate appears to
// the first power.
inline ResidualSample monomial_laplacian_residual(const ConeSpec& spec, const double* x, double h) {
    spec.validate();
    ScalarField m = [spec](const double* p) { return AngularEigenfunction::monomial(spec, p); };
    ResidualSample s;
    s.point.assign(x, x + spec.n);
    s.h = h;
    s.residual = std::abs(stencil_laplacian(m, x, spec.n, h));
    return s;
}

// Spherical Laplacian of phi at a unit vector, evaluated as the ambient
// finite-difference Laplacian of the 0-homogeneous extension x -> phi(x/|x|).
inline double laplace_beltrami_apply(const ScalarField& phi, int n, const double* sigma, double h) {
    if (n < 2 || n > max_dimension) throw std::domain_error("laplace_beltrami_apply: bad dimension");
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) r2 += sigma[d] * sigma[d];
    if (std::abs(std::sqrt(r2) - 1.0) > 1e-12)
        throw std::domain_error("laplace_beltrami_apply: input must be a unit vector");
    ScalarField extension = [&phi, n](const double* p) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += p[d] * p[d];
        const double inv = 1.0 / std::sqrt(s);
        double sig[max_dimension];
        for (int d = 0; d < n; ++d) sig[d] = p[d] * inv;
        return phi(sig);
    };
    return stencil_laplacian(extension, sigma, n, h);
}

// Per-point step scaling keeping stencils inside the domain.
inline double scaled_step(double h, double boundary_distance) {
    return h * std::min(1.0, boundary_distance) / 4.0;
}

// Dyadic step sweep; order from the log-log slope of the residual decay,
// reported only when at least 3 steps produced usable residuals.
template <class ResidualAt>
inline ResidualSweep residual_sweep(ResidualAt&& residual_at, const std::vector<double>& steps) {
    ResidualSweep sweep;
    for (double h : steps) {
        sweep.steps.push_back(h);
        sweep.residuals.push_back(residual_at(h));
    }
    if (sweep.steps.size() >= 3) {
        // least-squares slope of log(residual) against log(h)
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        int used = 0;
        for (std::size_t i = 0; i < sweep.steps.size(); ++i) {
            if (!(sweep.residuals[i] > 0.0)) continue;
            const double lx = std::log(sweep.steps[i]);
            const double ly = std::log(sweep.residuals[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++used;
        }
        if (used >= 3) {
            const double denom = used * sxx - sx * sx;
            if (std::abs(denom) > 0.0) sweep.order_estimate = (used * sxy - sx * sy) / denom;
        }
    }
    return sweep;
}

// Five smooth fields used by the identity convergence suites; each is C-inf
// on a neighborhood of the unit ball.
inline std::vector<std::pair<std::string, ScalarField>> smooth_field_suite(int n) {
    if (n < 2 || n > max_dimension) throw std::domain_error("smooth_field_suite: bad dimension");
    std::vector<std::pair<std::string, ScalarField>> suite;
    suite.emplace_back("quadratic", [n](const double* x) {
        double s = 1.0;
        for (int d = 0; d < n; ++d) s += (d + 1) * x[d] + 0.5 * x[d] * x[d];
        return s;
    });
    suite.emplace_back("exp_sin", [n](const double* x) { return std::exp(x[0]) * std::sin(x[n - 1]); });
    suite.emplace_back("gaussian", [n](const double* x) {
        double r2 = 0.0;
        for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
        return std::exp(-r2);
    });
    suite.emplace_back("cos_mix", [n](const double* x) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += (d + 1) * x[d];
        return std::cos(s);
    });
    suite.emplace_back("inverse_quadric", [n](const double* x) {
        double r2 = 0.0;
        for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
        return 1.0 / (1.0 + r2);
    });
    return suite;
}

} // namespace hardylab
