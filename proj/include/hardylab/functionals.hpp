#pragma once

// Integral functionals of a trial function (Dirichlet energy, Hardy term,
// singular weight, iterated-log remainder terms) plus inequality checks
// that report margins and verdicts. Each check measures all integrands in a
// single quadrature pass; the margin integrand is accumulated directly so a
// stochastic rule yields an honest standard error for the margin itself.

#include "cone.hpp"
#include "quadrature.hpp"
#include "trial.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardylab {

enum class Verdict { holds, violated, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct FunctionalReport {
    std::string check = "hardy";
    double energy = 0.0;
    double hardy = 0.0;
    std::optional<double> weighted;       // ∫ u²/x_j² when the check uses it
    std::vector<double> remainder_terms;  // iterated-log terms, depth order
    double constant_used = 0.0;
    double margin = 0.0;
    double margin_error = 0.0;  // quadrature error estimate (1 sigma when stochastic)
    double tolerance = 0.0;
    Verdict verdict = Verdict::holds;
    bool stochastic = false;
};

namespace detail {

// Default gate: absolute 1e-8 floor for deterministic rules (their margins
// are exact to quadrature truncation), 3 sigma for stochastic ones.
inline double tolerance_or_default(double tol, double quad_err) {
    if (tol > 0.0) return tol;
    return std::max(1e-8, 3.0 * quad_err);
}

inline Verdict verdict_from_margin(double margin, double tol, double quad_err) {
    if (margin < -tol) return Verdict::violated;
    if (quad_err > 0.0 && std::abs(margin) < quad_err) return Verdict::inconclusive;
    return Verdict::holds;
}

inline double node_radius_max(const QuadratureRule& rule) {
    double worst = 0.0;
    for (std::size_t i = 0; i < rule.count(); ++i) {
        const double* x = rule.node(i);
        double r2 = 0.0;
        for (int d = 0; d < rule.dim; ++d) r2 += x[d] * x[d];
        worst = std::max(worst, r2);
    }
    return std::sqrt(worst);
}

// squared products X_1^2 ... X_i^2 (|x|/R) for i = 1..m, clamped to 0 once
// the running product underflows past 1e-300.
inline void x_square_products(double s, int m, double* out) {
    double x = s;
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
        x = 1.0 / (1.0 - std::log(x));
        prod *= x * x;
        if (prod < 1e-300) prod = 0.0;
        out[i] = prod;
    }
}

} // namespace detail

inline double dirichlet_energy(const TrialFunction& u, const QuadratureRule& rule) {
    const int n = u.spec.n;
    return integrate(rule, [&](const double* x) {
               double g[max_dimension];
               u.gradient(x, g);
               double s = 0.0;
               for (int d = 0; d < n; ++d) s += g[d] * g[d];
               return s;
           })
        .value;
}

inline double hardy_term(const TrialFunction& u, const QuadratureRule& rule) {
    const int n = u.spec.n;
    return integrate(rule, [&](const double* x) {
               const double v = u.value(x);
               double r2 = 0.0;
               for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
               return v * v / r2;
           })
        .value;
}

inline double singular_weight_term(const TrialFunction& u, const QuadratureRule& rule, int axis) {
    if (axis < 0 || axis >= u.spec.n) throw std::domain_error("singular_weight_term: axis out of range");
    return integrate(rule, [&](const double* x) {
               const double v = u.value(x);
               return v * v / (x[axis] * x[axis]);
           })
        .value;
}

// term_i = (1/4) ∫ u²/|x|² · X_1²...X_i²(|x|/R) dx for i = 1..m.
inline std::vector<double> ft_remainder_terms(const TrialFunction& u, const QuadratureRule& rule,
                                              double R, int m) {
    if (m < 1) throw std::domain_error("ft_remainder_terms: depth >= 1 required");
    if (detail::node_radius_max(rule) > R * (1.0 + 1e-12))
        throw std::domain_error("ft_remainder_terms: rule contains nodes outside B_R");
    const int n = u.spec.n;
    auto res = integrate_many(rule, m, [&](const double* x, double* out) {
        const double v = u.value(x);
        double r2 = 0.0;
        for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
        const double base = 0.25 * v * v / r2;
        double xs[64];
        detail::x_square_products(std::min(1.0, std::sqrt(r2) / R), m, xs);
        for (int i = 0; i < m; ++i) out[i] = base * xs[i];
    });
    std::vector<double> terms(m);
    for (int i = 0; i < m; ++i) terms[i] = res[i].value;
    return terms;
}

inline double rayleigh_quotient(const TrialFunction& u, const QuadratureRule& rule) {
    const int n = u.spec.n;
    auto res = integrate_many(rule, 2, [&](const double* x, double* out) {
        double g[max_dimension];
        u.gradient(x, g);
        double e = 0.0, r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            e += g[d] * g[d];
            r2 += x[d] * x[d];
        }
        const double v = u.value(x);
        out[0] = e;
        out[1] = v * v / r2;
    });
    if (!(res[1].value > 0.0)) throw std::runtime_error("rayleigh_quotient: degenerate trial (null Hardy term)");
    return res[0].value / res[1].value;
}

// 1D composite rule whose panel edges include the given break points, each
// inter-knot interval subdivided geometrically with ratio <= 2. Meant for
// profiles supported in [knots.front(), knots.back()] with kinks only at
// knots; reaches arbitrarily small inner radii without the fixed-depth
// ladder of radial_rule.
inline QuadratureRule radial_rule_on_knots(const std::vector<double>& knots, int points = 12) {
    if (knots.size() < 2) throw std::domain_error("radial_rule_on_knots: need at least two break points");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i] > 0.0)) throw std::domain_error("radial_rule_on_knots: break points must be positive");
        if (i > 0 && knots[i] <= knots[i - 1])
            throw std::domain_error("radial_rule_on_knots: break points must be strictly increasing");
    }
    if (points < 2) throw std::domain_error("radial_rule_on_knots: points >= 2 required");

    std::vector<double> edges;
    edges.push_back(knots[0]);
    for (std::size_t j = 1; j < knots.size(); ++j) {
        const double a = knots[j - 1], b = knots[j];
        const int panels = std::max(1, (int)std::ceil(std::log2(b / a)));
        const double ratio = std::pow(b / a, 1.0 / panels);
        double e = a;
        for (int p = 1; p < panels; ++p) {
            e *= ratio;
            edges.push_back(e);
        }
        edges.push_back(b);
    }

    const auto& [gx, gw] = detail::gauss_legendre(points);
    QuadratureRule rule;
    rule.tag = DomainTag::radial;
    rule.dim = 1;
    rule.radius = knots.back();
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double hw = 0.5 * (edges[p + 1] - edges[p]);
        for (int j = 0; j < points; ++j) {
            rule.nodes.push_back(mid + hw * gx[j]);
            rule.weights.push_back(hw * gw[j]);
        }
    }
    return rule;
}

// [∫ (f'² + c f²/r²) r^{n-1} dr] / [∫ f² r^{n-3} dr] over the profile
// support. Supply break points when the profile has kinks or support far
// below the default rule depth.
inline double reduced_radial_quotient(const ConeSpec& spec, const RadialProfile& f, double c,
                                      const std::vector<double>& knots = {}) {
    spec.validate();
    if (c < 0.0) throw std::domain_error("reduced_radial_quotient: angular eigenvalue must be >= 0");
    const QuadratureRule rule =
        knots.empty() ? radial_rule(f.support_radius, 32, 2.0) : radial_rule_on_knots(knots, 12);
    const int n = spec.n;
    auto res = integrate_many(rule, 2, [&](const double* x, double* out) {
        const double r = x[0];
        // group the half weight into each squared factor: near r = 0 the
        // profile family has f' ~ r^(eps - n/2) and f'^2 alone overflows
        const double s = std::pow(r, 0.5 * (n - 1));
        const double fs = f.value(r) * s / r, ps = f.derivative(r) * s;
        out[0] = ps * ps + c * fs * fs;
        out[1] = fs * fs;
    });
    if (!(res[1].value > 0.0))
        throw std::runtime_error("reduced_radial_quotient: degenerate profile (null denominator)");
    return res[0].value / res[1].value;
}

inline FunctionalReport check_hardy(const ConeSpec& spec, const TrialFunction& u,
                                    const QuadratureRule& rule, double tol = 0.0) {
    spec.validate();
    const double C = rational_to_double(hardy_constant(spec));
    const int n = spec.n;
    auto res = integrate_many(rule, 3, [&](const double* x, double* out) {
        double g[max_dimension];
        u.gradient(x, g);
        double e = 0.0, r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            e += g[d] * g[d];
            r2 += x[d] * x[d];
        }
        const double v = u.value(x);
        const double h = v * v / r2;
        out[0] = e;
        out[1] = h;
        out[2] = e - C * h;
    });
    FunctionalReport rep;
    rep.check = "hardy";
    rep.energy = res[0].value;
    rep.hardy = res[1].value;
    rep.constant_used = C;
    rep.margin = res[2].value;
    rep.margin_error = res[2].standard_error;
    rep.stochastic = res[2].stochastic;
    rep.tolerance = detail::tolerance_or_default(tol, rep.margin_error);
    rep.verdict = detail::verdict_from_margin(rep.margin, rep.tolerance, rep.margin_error);
    return rep;
}

// margin = energy + l(l-1)·∫u²/x_n² − (n+2l−2)²/4·∫u²/|x|². The coefficient
// l(l-1) is negative for l = 1/2 and the formula stays signed. At l = 1 the
// weighted term vanishes identically and the check delegates to check_hardy
// with k = 1, so the two margins agree bitwise.
inline FunctionalReport check_weighted_hardy(int n, const rational& l, const TrialFunction& u,
                                             const QuadratureRule& rule, double tol = 0.0) {
    const rational W = weighted_halfspace_constant(n, l);
    if (l == rational(1)) {
        FunctionalReport rep = check_hardy(ConeSpec{n, 1}, u, rule, tol);
        rep.check = "weighted_hardy";
        return rep;
    }
    const double Wd = rational_to_double(W);
    const double coeff = rational_to_double(l * (l - 1));
    const int axis = n - 1;
    auto res = integrate_many(rule, 4, [&](const double* x, double* out) {
        double g[max_dimension];
        u.gradient(x, g);
        double e = 0.0, r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            e += g[d] * g[d];
            r2 += x[d] * x[d];
        }
        const double v = u.value(x);
        const double h = v * v / r2;
        const double w = v * v / (x[axis] * x[axis]);
        out[0] = e;
        out[1] = h;
        out[2] = w;
        out[3] = e + coeff * w - Wd * h;
    });
    FunctionalReport rep;
    rep.check = "weighted_hardy";
    rep.energy = res[0].value;
    rep.hardy = res[1].value;
    rep.weighted = res[2].value;
    rep.constant_used = Wd;
    rep.margin = res[3].value;
    rep.margin_error = res[3].standard_error;
    rep.stochastic = res[3].stochastic;
    rep.tolerance = detail::tolerance_or_default(tol, rep.margin_error);
    rep.verdict = detail::verdict_from_margin(rep.margin, rep.tolerance, rep.margin_error);
    return rep;
}

// margin = energy − C·hardy − Σ_{i<=m} term_i. Terms are nonnegative, so
// the depth-m margin is the binding one; the report carries every term so
// callers can confirm the margins decrease with depth.
inline FunctionalReport check_ft(const ConeSpec& spec, const TrialFunction& u,
                                 const QuadratureRule& rule, double R, int m, double tol = 0.0) {
    spec.validate();
    if (m < 1) throw std::domain_error("check_ft: depth >= 1 required");
    if (m > 60) throw std::domain_error("check_ft: depth above supported maximum of 60");
    if (detail::node_radius_max(rule) > R * (1.0 + 1e-12))
        throw std::domain_error("check_ft: rule contains nodes outside B_R");
    const double C = rational_to_double(hardy_constant(spec));
    const int n = spec.n;
    auto res = integrate_many(rule, m + 3, [&](const double* x, double* out) {
        double g[max_dimension];
        u.gradient(x, g);
        double e = 0.0, r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            e += g[d] * g[d];
            r2 += x[d] * x[d];
        }
        const double v = u.value(x);
        const double h = v * v / r2;
        double xs[64];
        detail::x_square_products(std::min(1.0, std::sqrt(r2) / R), m, xs);
        out[0] = e;
        out[1] = h;
        double terms = 0.0;
        for (int i = 0; i < m; ++i) {
            out[3 + i] = 0.25 * h * xs[i];
            terms += out[3 + i];
        }
        out[2] = e - C * h - terms;
    });
    FunctionalReport rep;
    rep.check = "ft_remainder";
    rep.energy = res[0].value;
    rep.hardy = res[1].value;
    rep.constant_used = C;
    rep.margin = res[2].value;
    rep.margin_error = res[2].standard_error;
    rep.stochastic = res[2].stochastic;
    rep.remainder_terms.resize(m);
    for (int i = 0; i < m; ++i) rep.remainder_terms[i] = res[3 + i].value;
    rep.tolerance = detail::tolerance_or_default(tol, rep.margin_error);
    rep.verdict = detail::verdict_from_margin(rep.margin, rep.tolerance, rep.margin_error);
    return rep;
}

// Radial base inequality behind the remainder series: for f on (0,R],
// ∫ f'² r^{n-1} ≥ (n−2)²/4 ∫ f² r^{n-3} + (1/4) Σ_i ∫ f² X_1²...X_i²(r/R) r^{n-3}.
inline FunctionalReport check_radial_base_ft(int n, const RadialProfile& f, double R, int m,
                                             double tol = 0.0, const std::vector<double>& knots = {}) {
    if (n < 3) throw std::domain_error("check_radial_base_ft: n >= 3 required");
    if (m < 1 || m > 60) throw std::domain_error("check_radial_base_ft: depth in [1, 60] required");
    const double C = (n - 2.0) * (n - 2.0) / 4.0;
    const QuadratureRule rule =
        knots.empty() ? radial_rule(R, 32, 2.0) : radial_rule_on_knots(knots, 12);
    auto res = integrate_many(rule, m + 3, [&](const double* x, double* out) {
        const double r = x[0];
        // same overflow-safe grouping as the reduced quotient
        const double s = std::pow(r, 0.5 * (n - 1));
        const double fs = f.value(r) * s / r, ps = f.derivative(r) * s;
        const double e = ps * ps;
        const double h = fs * fs;
        double xs[64];
        detail::x_square_products(std::min(1.0, r / R), m, xs);
        out[0] = e;
        out[1] = h;
        double terms = 0.0;
        for (int i = 0; i < m; ++i) {
            out[3 + i] = 0.25 * h * xs[i];
            terms += out[3 + i];
        }
        out[2] = e - C * h - terms;
    });
    FunctionalReport rep;
    rep.check = "radial_base_ft";
    rep.energy = res[0].value;
    rep.hardy = res[1].value;
    rep.constant_used = C;
    rep.margin = res[2].value;
    rep.margin_error = res[2].standard_error;
    rep.remainder_terms.resize(m);
    for (int i = 0; i < m; ++i) rep.remainder_terms[i] = res[3 + i].value;
    rep.tolerance = detail::tolerance_or_default(tol, rep.margin_error);
    rep.verdict = detail::verdict_from_margin(rep.margin, rep.tolerance, rep.margin_error);
    return rep;
}

} // namespace hardylab
