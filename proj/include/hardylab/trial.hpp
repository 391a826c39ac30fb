#pragma once

// Admissible test functions on the cone: separable (radial profile times
// angular eigenfunction), product bumps, seeded random combinations, the
// near-extremal power/log-ramp family, and the odd extension across the
// cone walls. Evaluation is pure; random construction is deterministic in
// the seed.

#include "cone.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hardylab {

struct RadialProfile {
    std::function<double(double)> f;
    std::function<double(double)> f_prime;
    int vanishing_order = 1;
    double support_radius = 1.0;
    std::string name = "profile";

    double value(double r) const { return (r <= 0.0 || r >= support_radius) ? 0.0 : f(r); }
    double derivative(double r) const { return (r <= 0.0 || r >= support_radius) ? 0.0 : f_prime(r); }
};

struct TrialFunction {
    ConeSpec spec;
    double support_radius = 1.0;
    int vanishing_order = 1;
    bool odd_extended = false;  // defined on all of R^n via sign symmetry
    std::string name = "trial";
    std::uint64_t seed = 0;
    int resample_count = 0;
    std::function<double(const double*)> evaluate_fn;
    std::function<void(const double*, double*)> gradient_fn;  // empty: centered differences

    double value(const double* x) const { return evaluate_fn(x); }

    void gradient(const double* x, double* g) const {
        if (gradient_fn) {
            gradient_fn(x, g);
            return;
        }
        double r2 = 0.0;
        for (int d = 0; d < spec.n; ++d) r2 += x[d] * x[d];
        const double base = 1e-6 * std::max(std::sqrt(r2), 1e-2);
        std::vector<double> p(x, x + spec.n);
        for (int d = 0; d < spec.n; ++d) {
            double h = base;
            if (!odd_extended && d >= spec.n - spec.k && x[d] > 0.0) h = std::min(h, 0.5 * x[d]);
            p[d] = x[d] + h;
            const double up = evaluate_fn(p.data());
            p[d] = x[d] - h;
            const double um = evaluate_fn(p.data());
            p[d] = x[d];
            g[d] = (up - um) / (2.0 * h);
        }
    }
};

namespace detail {

inline bool inside_cone(const ConeSpec& spec, const double* x) {
    for (int d = spec.n - spec.k; d < spec.n; ++d)
        if (x[d] <= 0.0) return false;
    return true;
}

inline double radius_sq(int n, const double* x) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += x[d] * x[d];
    return s;
}

} // namespace detail

// u(x) = f(|x|) phi(x/|x|), analytic gradient f' phi x/r + (f/r) grad_sigma phi.
inline TrialFunction separable_trial(const AngularEigenfunction& phi, const RadialProfile& f) {
    phi.spec.validate();
    const ConeSpec spec = phi.spec;
    TrialFunction u;
    u.spec = spec;
    u.support_radius = f.support_radius;
    u.vanishing_order = f.vanishing_order;
    u.name = "separable(" + f.name + ")";
    u.evaluate_fn = [spec, phi, f](const double* x) -> double {
        if (!detail::inside_cone(spec, x)) return 0.0;
        const double r = std::sqrt(detail::radius_sq(spec.n, x));
        if (r <= 0.0 || r >= f.support_radius) return 0.0;
        double sig[max_dimension];
        for (int d = 0; d < spec.n; ++d) sig[d] = x[d] / r;
        return f.f(r) * phi.value(sig);
    };
    u.gradient_fn = [spec, phi, f](const double* x, double* g) {
        const double r = std::sqrt(detail::radius_sq(spec.n, x));
        if (!detail::inside_cone(spec, x) || r <= 0.0 || r >= f.support_radius) {
            for (int d = 0; d < spec.n; ++d) g[d] = 0.0;
            return;
        }
        double sig[max_dimension], tg[max_dimension];
        for (int d = 0; d < spec.n; ++d) sig[d] = x[d] / r;
        const double pv = phi.value(sig);
        phi.tangential_gradient(sig, tg);
        const double fp = f.f_prime(r), fv = f.f(r);
        for (int d = 0; d < spec.n; ++d) g[d] = fp * pv * sig[d] + (fv / r) * tg[d];
    };
    return u;
}

// u = (prod of last k coordinates) * (1 - |x|^2/R^2)^3, vanishing order k.
inline TrialFunction product_bump_trial(const ConeSpec& spec, double R = 1.0) {
    spec.validate();
    if (!(R > 0.0)) throw std::domain_error("product_bump_trial: R must be positive");
    TrialFunction u;
    u.spec = spec;
    u.support_radius = R;
    u.vanishing_order = spec.k;
    u.name = "product_bump";
    u.evaluate_fn = [spec, R](const double* x) -> double {
        if (!detail::inside_cone(spec, x)) return 0.0;
        const double t = detail::radius_sq(spec.n, x) / (R * R);
        if (t >= 1.0) return 0.0;
        const double b = (1.0 - t) * (1.0 - t) * (1.0 - t);
        return AngularEigenfunction::monomial(spec, x) * b;
    };
    u.gradient_fn = [spec, R](const double* x, double* g) {
        if (!detail::inside_cone(spec, x)) {
            for (int d = 0; d < spec.n; ++d) g[d] = 0.0;
            return;
        }
        const double t = detail::radius_sq(spec.n, x) / (R * R);
        if (t >= 1.0) {
            for (int d = 0; d < spec.n; ++d) g[d] = 0.0;
            return;
        }
        const double om = 1.0 - t;
        const double b = om * om * om;
        const double bp = -3.0 * om * om;  // d/dt
        const double m = AngularEigenfunction::monomial(spec, x);
        double mg[max_dimension];
        AngularEigenfunction::monomial_gradient(spec, x, mg);
        for (int d = 0; d < spec.n; ++d)
            g[d] = mg[d] * b + m * bp * 2.0 * x[d] / (R * R);
    };
    return u;
}

// Seeded combination sum_b c_b * m(x) * bump(|x|^2/R^2) * p_b(x/R) with p_b
// running through monomials of degree <= 2, normalized to unit Hardy term.
// Numerically null draws resample with seed+1 (count recorded).
inline TrialFunction random_trial(const ConeSpec& spec, double R, int basis_size, std::uint64_t seed) {
    spec.validate();
    if (basis_size < 1) throw std::domain_error("random_trial: basis_size >= 1 required");
    if (!(R > 0.0)) throw std::domain_error("random_trial: R must be positive");

    // monomial exponents of degree <= 2, deterministic order
    std::vector<std::vector<int>> powers;
    powers.push_back(std::vector<int>(spec.n, 0));
    for (int d = 0; d < spec.n && (int)powers.size() < basis_size; ++d) {
        std::vector<int> e(spec.n, 0);
        e[d] = 1;
        powers.push_back(e);
    }
    for (int d = 0; d < spec.n && (int)powers.size() < basis_size; ++d)
        for (int e2 = d; e2 < spec.n && (int)powers.size() < basis_size; ++e2) {
            std::vector<int> e(spec.n, 0);
            e[d] += 1;
            e[e2] += 1;
            powers.push_back(e);
        }
    powers.resize(std::min<std::size_t>(powers.size(), basis_size));

    int resamples = 0;
    std::uint64_t use_seed = seed;
    for (;;) {
        detail::UniformRng rng(detail::derive_seed(use_seed, 0x7261ULL));
        std::vector<double> coeff(powers.size());
        for (auto& c : coeff) c = rng.uniform(-1.0, 1.0);

        TrialFunction u;
        u.spec = spec;
        u.support_radius = R;
        u.vanishing_order = spec.k;
        u.seed = use_seed;
        u.resample_count = resamples;
        u.name = "random(basis=" + std::to_string(powers.size()) + ")";
        auto poly = [powers, coeff, R, n = spec.n](const double* x, double* grad_or_null) -> double {
            double val = 0.0;
            if (grad_or_null)
                for (int d = 0; d < n; ++d) grad_or_null[d] = 0.0;
            for (std::size_t b = 0; b < powers.size(); ++b) {
                double term = coeff[b];
                for (int d = 0; d < n; ++d)
                    for (int rep = 0; rep < powers[b][d]; ++rep) term *= x[d] / R;
                val += term;
                if (grad_or_null)
                    for (int d = 0; d < n; ++d) {
                        if (powers[b][d] == 0) continue;
                        double dterm = coeff[b] * powers[b][d] / R;
                        for (int e2 = 0; e2 < n; ++e2) {
                            const int rep = powers[b][e2] - (e2 == d ? 1 : 0);
                            for (int rr = 0; rr < rep; ++rr) dterm *= x[e2] / R;
                        }
                        grad_or_null[d] += dterm;
                    }
            }
            return val;
        };
        u.evaluate_fn = [spec, R, poly](const double* x) -> double {
            if (!detail::inside_cone(spec, x)) return 0.0;
            const double t = detail::radius_sq(spec.n, x) / (R * R);
            if (t >= 1.0) return 0.0;
            const double b = (1.0 - t) * (1.0 - t) * (1.0 - t);
            return AngularEigenfunction::monomial(spec, x) * b * poly(x, nullptr);
        };
        u.gradient_fn = [spec, R, poly](const double* x, double* g) {
            if (!detail::inside_cone(spec, x)) {
                for (int d = 0; d < spec.n; ++d) g[d] = 0.0;
                return;
            }
            const double t = detail::radius_sq(spec.n, x) / (R * R);
            if (t >= 1.0) {
                for (int d = 0; d < spec.n; ++d) g[d] = 0.0;
                return;
            }
            const double om = 1.0 - t;
            const double bump = om * om * om;
            const double bp = -3.0 * om * om;
            const double m = AngularEigenfunction::monomial(spec, x);
            double mg[max_dimension], pg[max_dimension];
            AngularEigenfunction::monomial_gradient(spec, x, mg);
            const double q = poly(x, pg);
            for (int d = 0; d < spec.n; ++d)
                g[d] = mg[d] * bump * q + m * bp * (2.0 * x[d] / (R * R)) * q + m * bump * pg[d];
        };

        // normalize to unit Hardy term; rule sized for smooth integrands
        const QuadratureRule rule =
            cone_ball_rule(spec, R, 8, spec.n == 3 ? 16 : 40, RuleKind::automatic,
                           detail::derive_seed(use_seed, 0x6e6fULL), 1.0);
        const IntegralResult h = integrate(rule, [&](const double* x) {
            const double v = u.evaluate_fn(x);
            return v * v / detail::radius_sq(spec.n, x);
        });
        if (h.value > 1e-12) {
            const double s = 1.0 / std::sqrt(h.value);
            auto base_eval = u.evaluate_fn;
            auto base_grad = u.gradient_fn;
            u.evaluate_fn = [base_eval, s](const double* x) { return s * base_eval(x); };
            u.gradient_fn = [base_grad, s, n = spec.n](const double* x, double* g) {
                base_grad(x, g);
                for (int d = 0; d < n; ++d) g[d] *= s;
            };
            return u;
        }
        ++resamples;
        ++use_seed;
        if (resamples > 16) throw std::runtime_error("random_trial: persistent degenerate draws");
    }
}

// Power profile r^{-(n-2)/2+epsilon} on [a, 0.1], linear-in-log ramp from
// zero on [a^2, a], fixed smooth cutoff to zero on [0.1, 1]. The reduced
// quotient converges to the sharp constant at rate O(epsilon).
inline RadialProfile minimizing_profile(const ConeSpec& spec, double epsilon, double inner_cut) {
    spec.validate();
    if (!(epsilon > 0.0) || epsilon > 0.5)
        throw std::domain_error("minimizing_profile: epsilon in (0, 1/2] required");
    if (!(inner_cut > 0.0) || inner_cut >= 0.5)
        throw std::domain_error("minimizing_profile: inner_cut in (0, 1/2) required");

    const double a = inner_cut;
    const double a2 = a * a;
    const double beta = -(spec.n - 2) / 2.0 + epsilon;
    const double inv_log = 1.0 / std::log(1.0 / a);
    const double cut_lo = 0.1, cut_hi = 1.0, cut_w = cut_hi - cut_lo;

    auto ramp = [a, a2, inv_log](double r) -> double {
        if (r <= a2) return 0.0;
        if (r >= a) return 1.0;
        return std::log(r / a2) * inv_log;
    };
    auto ramp_p = [a, a2, inv_log](double r) -> double {
        if (r <= a2 || r >= a) return 0.0;
        return inv_log / r;
    };
    auto outer = [cut_lo, cut_hi, cut_w](double r) -> double {
        if (r <= cut_lo) return 1.0;
        if (r >= cut_hi) return 0.0;
        const double s = (r - cut_lo) / cut_w;
        return 1.0 - s * s * (3.0 - 2.0 * s);
    };
    auto outer_p = [cut_lo, cut_hi, cut_w](double r) -> double {
        if (r <= cut_lo || r >= cut_hi) return 0.0;
        const double s = (r - cut_lo) / cut_w;
        return -6.0 * s * (1.0 - s) / cut_w;
    };

    RadialProfile p;
    p.vanishing_order = spec.k;
    p.support_radius = 1.0;
    p.name = "minimizing(eps=" + std::to_string(epsilon) + ",a=" + std::to_string(inner_cut) + ")";
    p.f = [beta, ramp, outer](double r) -> double {
        const double g = ramp(r) * outer(r);
        return g == 0.0 ? 0.0 : std::pow(r, beta) * g;
    };
    p.f_prime = [beta, ramp, ramp_p, outer, outer_p](double r) -> double {
        const double g = ramp(r) * outer(r);
        const double gp = ramp_p(r) * outer(r) + ramp(r) * outer_p(r);
        if (g == 0.0 && gp == 0.0) return 0.0;
        const double rb = std::pow(r, beta);
        return beta * rb / r * g + rb * gp;
    };
    return p;
}

// Break points of the minimizing profile; integrators should place panel
// edges here.
inline std::vector<double> minimizing_profile_knots(double inner_cut) {
    return {inner_cut * inner_cut, inner_cut, 0.1, 1.0};
}

// u~ odd in each of the last k coordinates, agreeing with u on the cone.
inline TrialFunction odd_extension(const TrialFunction& u) {
    const ConeSpec spec = u.spec;
    TrialFunction v = u;
    v.odd_extended = true;
    v.name = u.name + "+odd";
    auto base_eval = u.evaluate_fn;
    auto base_grad = u.gradient_fn;
    v.evaluate_fn = [spec, base_eval](const double* x) -> double {
        double y[max_dimension];
        for (int d = 0; d < spec.n; ++d) y[d] = x[d];
        double sign = 1.0;
        for (int d = spec.n - spec.k; d < spec.n; ++d) {
            if (y[d] == 0.0) return 0.0;
            if (y[d] < 0.0) {
                y[d] = -y[d];
                sign = -sign;
            }
        }
        return sign * base_eval(y);
    };
    if (base_grad)
        v.gradient_fn = [spec, base_grad](const double* x, double* g) {
            double y[max_dimension];
            for (int d = 0; d < spec.n; ++d) y[d] = x[d];
            double sign = 1.0;
            for (int d = spec.n - spec.k; d < spec.n; ++d)
                if (y[d] < 0.0) {
                    y[d] = -y[d];
                    sign = -sign;
                }
            base_grad(y, g);
            for (int d = 0; d < spec.n; ++d) g[d] *= sign;
            for (int d = spec.n - spec.k; d < spec.n; ++d)
                if (x[d] < 0.0) g[d] = -g[d];
        };
    else
        v.gradient_fn = nullptr;
    return v;
}

// lambda * u, keeping descriptors; margins of quadratic functionals scale by
// lambda^2.
inline TrialFunction scale_trial(const TrialFunction& u, double lambda) {
    TrialFunction v = u;
    auto base_eval = u.evaluate_fn;
    auto base_grad = u.gradient_fn;
    v.evaluate_fn = [base_eval, lambda](const double* x) { return lambda * base_eval(x); };
    if (base_grad)
        v.gradient_fn = [base_grad, lambda, n = u.spec.n](const double* x, double* g) {
            base_grad(x, g);
            for (int d = 0; d < n; ++d) g[d] *= lambda;
        };
    return v;
}

} // namespace hardylab
