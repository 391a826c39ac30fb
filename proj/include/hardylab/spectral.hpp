#pragma once

// Principal Dirichlet eigenvalue of -Laplace-Beltrami on the n = 3 sphere
// sections (hemisphere, quarter sphere, octant) by conservative finite
// differences in (theta, phi) and inverse power iteration, plus the angular
// Rayleigh quotient of phi_k for general n. Axes are permuted per k so each
// Dirichlet edge is a coordinate line of the grid:
//   k=1  theta in (0, pi/2), phi periodic; equator Dirichlet, pole closed
//        by the averaged-neighbor cap.
//   k=2  theta in (0, pi/2), phi in (0, pi); all straight edges Dirichlet,
//        pole lies on the boundary and is excluded.
//   k=3  theta in (0, pi/2), phi in (0, pi/2); as k=2.

#include "cone.hpp"
#include "quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardylab {

struct SphericalGrid {
    int k = 1;
    int n_theta = 32;  // theta subdivisions; boundary row at i = n_theta
    int n_phi = 64;    // phi subdivisions; periodic when k = 1
    double h_theta = 0.0;
    double h_phi = 0.0;
    bool phi_periodic = false;
    bool pole_closure = false;  // pole interior to the section (k = 1 only)

    int rows() const { return n_theta - 1; }
    int cols() const { return phi_periodic ? n_phi : n_phi - 1; }
    long long unknowns() const { return 1LL * rows() * cols(); }
    double theta(int i) const { return i * h_theta; }
    double phi_at(int c) const { return phi_periodic ? c * h_phi : (c + 1) * h_phi; }
    long long index(int i, int c) const { return 1LL * (i - 1) * cols() + c; }

    // unit vector of the grid node, axes permuted so the section equals the
    // positive-coordinate region
    void sigma(int i, int c, double out[3]) const {
        const double t = theta(i), p = phi_at(c);
        out[0] = std::sin(t) * std::cos(p);
        out[1] = std::sin(t) * std::sin(p);
        out[2] = std::cos(t);
    }

    // product of the coordinates that are positive on the section; the
    // principal eigenfunction up to normalization
    double section_eigenfunction(int i, int c) const {
        double s[3];
        sigma(i, c, s);
        if (k == 1) return s[2];
        if (k == 2) return s[1] * s[2];
        return s[0] * s[1] * s[2];
    }
};

inline SphericalGrid build_grid(int k, int n_theta, int n_phi) {
    if (k < 1 || k > 3)
        throw std::runtime_error(
            "build_grid: grid eigensolves cover k in {1,2,3} at n = 3 only; "
            "use angular Rayleigh bounds for other sections");
    if (n_theta < 8 || n_phi < 8) throw std::domain_error("build_grid: resolution >= 8 per direction");
    const double pi = 3.14159265358979323846;
    SphericalGrid g;
    g.k = k;
    g.n_theta = n_theta;
    g.n_phi = n_phi;
    g.h_theta = (pi / 2.0) / n_theta;
    g.phi_periodic = (k == 1);
    g.pole_closure = (k == 1);
    const double phi_max = (k == 1) ? 2.0 * pi : (k == 2 ? pi : pi / 2.0);
    g.h_phi = phi_max / n_phi;
    return g;
}

// scalar resolution: N theta rows and the matching phi count per section
inline SphericalGrid build_grid(int k, int resolution) {
    return build_grid(k, resolution, k == 3 ? resolution : 2 * resolution);
}

// Generalized pencil K x = lambda M x. The mass is diagonal except for the
// k = 1 pole cap, whose averaged-neighbor elimination adds a rank-one block
// on the first ring (stored factored: M += cap * e e^T with e the indicator
// of ring one).
struct SectionOperator {
    SphericalGrid grid;
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd mass_diag;
    double ring_cap = 0.0;  // massP / n_phi^2
    std::vector<long long> ring;

    Eigen::VectorXd apply_mass(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y = mass_diag.cwiseProduct(x);
        if (ring_cap > 0.0) {
            double s = 0.0;
            for (long long a : ring) s += x[a];
            for (long long a : ring) y[a] += ring_cap * s;
        }
        return y;
    }
};

inline SectionOperator assemble_operator(const SphericalGrid& g) {
    const int rows = g.rows(), cols = g.cols();
    const long long nuk = g.unknowns();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nuk) * 6);
    SectionOperator op;
    op.grid = g;
    op.mass_diag = Eigen::VectorXd::Zero(nuk);

    for (int i = 1; i <= rows; ++i) {
        const double ti = g.theta(i);
        const double si = std::sin(ti);
        const double cu = std::sin(ti + 0.5 * g.h_theta) * g.h_phi / g.h_theta;
        const double cd = std::sin(ti - 0.5 * g.h_theta) * g.h_phi / g.h_theta;
        const double ce = g.h_theta / (si * g.h_phi);
        for (int c = 0; c < cols; ++c) {
            const long long a = g.index(i, c);
            op.mass_diag[a] = si * g.h_theta * g.h_phi;

            // edge toward larger theta; row rows+1 is the Dirichlet equator
            trip.emplace_back(a, a, cu);
            if (i + 1 <= rows) trip.emplace_back(a, g.index(i + 1, c), -cu);

            // edge toward the pole; the k = 1 cap contributes through the
            // closure block below instead
            if (i - 1 >= 1) {
                trip.emplace_back(a, a, cd);
                trip.emplace_back(a, g.index(i - 1, c), -cd);
            } else if (!g.pole_closure) {
                trip.emplace_back(a, a, cd);
            }

            // phi edges
            trip.emplace_back(a, a, 2.0 * ce);
            if (g.phi_periodic) {
                trip.emplace_back(a, g.index(i, (c + 1) % cols), -ce);
                trip.emplace_back(a, g.index(i, (c - 1 + cols) % cols), -ce);
            } else {
                if (c + 1 < cols) trip.emplace_back(a, g.index(i, c + 1), -ce);
                if (c - 1 >= 0) trip.emplace_back(a, g.index(i, c - 1), -ce);
            }
        }
    }

    if (g.pole_closure) {
        // eliminate the pole unknown u_P = ring average: the pole-to-ring
        // edges become a diagonal plus rank-one block, the cap mass a pure
        // rank-one block
        const double c_p = std::sin(0.5 * g.h_theta) * g.h_phi / g.h_theta;
        const double mass_p = 2.0 * 3.14159265358979323846 * (1.0 - std::cos(0.5 * g.h_theta));
        op.ring_cap = mass_p / (static_cast<double>(cols) * static_cast<double>(cols));
        for (int c = 0; c < cols; ++c) {
            const long long a = g.index(1, c);
            op.ring.push_back(a);
            trip.emplace_back(a, a, c_p);
            for (int c2 = 0; c2 < cols; ++c2)
                trip.emplace_back(a, g.index(1, c2), -c_p / cols);
        }
    }

    op.stiffness.resize(nuk, nuk);
    op.stiffness.setFromTriplets(trip.begin(), trip.end());
    op.stiffness.makeCompressed();
    return op;
}

struct EigenResult {
    int resolution = 0;
    double eigenvalue = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    bool single_signed = false;
    Eigen::VectorXd eigenvector;
};

inline EigenResult smallest_eigenvalue(const SectionOperator& op, double tol = 1e-12,
                                       const Eigen::VectorXd* start = nullptr, int max_iter = 500) {
    const long long nuk = op.grid.unknowns();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(op.stiffness);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("smallest_eigenvalue: factorization failed");

    Eigen::VectorXd x(nuk);
    if (start) {
        if (start->size() != nuk) throw std::domain_error("smallest_eigenvalue: start vector size mismatch");
        x = *start;
    } else {
        for (int i = 1; i <= op.grid.rows(); ++i)
            for (int c = 0; c < op.grid.cols(); ++c)
                x[op.grid.index(i, c)] = op.grid.section_eigenfunction(i, c);
    }
    double xm = std::sqrt(x.dot(op.apply_mass(x)));
    if (!(xm > 0.0)) throw std::runtime_error("smallest_eigenvalue: null start vector");
    x /= xm;

    double lambda = x.dot(op.stiffness * x);
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd y = solver.solve(op.apply_mass(x));
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("smallest_eigenvalue: inner solve failed");
        const double ym = std::sqrt(y.dot(op.apply_mass(y)));
        if (!(ym > 0.0)) throw std::runtime_error("smallest_eigenvalue: iteration collapsed");
        x = y / ym;
        const double next = x.dot(op.stiffness * x);
        const bool done = std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next));
        lambda = next;
        if (done) break;
    }
    if (it >= max_iter)
        throw std::runtime_error("smallest_eigenvalue: no convergence within " +
                                 std::to_string(max_iter) + " iterations");

    EigenResult res;
    res.resolution = op.grid.n_theta;
    res.eigenvalue = lambda;
    res.iterations = it + 1;
    const Eigen::VectorXd r = op.stiffness * x - lambda * op.apply_mass(x);
    res.residual_norm = r.norm() / x.norm();
    if (x.sum() < 0.0) x = -x;
    res.single_signed = (x.minCoeff() > 0.0);
    res.eigenvector = std::move(x);
    return res;
}

// Richardson extrapolation of a constant-ratio refinement sequence; the
// order is estimated from the last three values.
inline double richardson_extrapolate(const std::vector<int>& resolutions,
                                     const std::vector<double>& values, double* order_out = nullptr) {
    if (values.size() < 3 || resolutions.size() != values.size())
        throw std::domain_error("richardson_extrapolate: need >= 3 aligned values");
    const std::size_t m = values.size();
    const double r1 = double(resolutions[m - 2]) / double(resolutions[m - 3]);
    const double r2 = double(resolutions[m - 1]) / double(resolutions[m - 2]);
    if (std::abs(r1 - r2) > 1e-12 * r2)
        throw std::domain_error("richardson_extrapolate: refinement ratio must be constant");
    const double d1 = values[m - 2] - values[m - 3];
    const double d2 = values[m - 1] - values[m - 2];
    if (!(std::abs(d2) > 0.0) || !(std::abs(d1) > std::abs(d2)))
        throw std::runtime_error("richardson_extrapolate: sequence not contracting");
    const double p = std::log(std::abs(d1 / d2)) / std::log(r2);
    if (order_out) *order_out = p;
    return values[m - 1] + d2 / (std::pow(r2, p) - 1.0);
}

struct SectionEigenReport {
    int k = 1;
    double target = 0.0;  // k(k+1) at n = 3
    std::vector<int> resolutions;
    std::vector<EigenResult> results;
    double observed_order = 0.0;
    double extrapolated = 0.0;
    double relative_error = 0.0;
    bool pass = false;
};

inline SectionEigenReport verify_principal_eigenvalue(int k, const std::vector<int>& resolutions,
                                                      double tol = 1e-3) {
    if (resolutions.size() < 3)
        throw std::domain_error("verify_principal_eigenvalue: need at least 3 resolutions");
    SectionEigenReport rep;
    rep.k = k;
    rep.target = static_cast<double>(degree_eigenvalue(3, k));
    rep.resolutions = resolutions;
    std::vector<double> values;
    for (int N : resolutions) {
        const SectionOperator op = assemble_operator(build_grid(k, N));
        EigenResult r = smallest_eigenvalue(op);
        r.eigenvector.resize(0);  // report stays light
        values.push_back(r.eigenvalue);
        rep.results.push_back(std::move(r));
    }
    rep.extrapolated = richardson_extrapolate(resolutions, values, &rep.observed_order);
    rep.relative_error = std::abs(rep.extrapolated - rep.target) / rep.target;
    rep.pass = rep.relative_error < tol;
    return rep;
}

// Rayleigh quotient of phi_k over the section via a sphere rule:
// numerator |grad_sigma P|^2 - k^2 P^2 (the tangential gradient of the
// homogeneous extension), denominator P^2. Equals k(n+k-2) because phi_k is
// the exact principal eigenfunction.
inline double angular_rayleigh(const ConeSpec& spec, const QuadratureRule& rule) {
    spec.validate();
    AngularEigenfunction phi;
    phi.spec = spec;
    phi.normalization = 1.0;
    auto res = integrate_many(rule, 2, [&](const double* sig, double* out) {
        const double p = AngularEigenfunction::monomial(spec, sig);
        out[0] = phi.tangential_gradient_sq(sig);
        out[1] = p * p;
    });
    if (!(res[1].value > 0.0)) throw std::runtime_error("angular_rayleigh: degenerate angular norm");
    return res[0].value / res[1].value;
}

// margin integrand |grad_sigma phi_k|^2 - lambda_1 phi_k^2 integrated with
// its own standard error; vanishes in the continuum, so the result.value
// should sit within a few standard errors of zero on stochastic rules.
inline IntegralResult angular_rayleigh_margin(const ConeSpec& spec, const QuadratureRule& rule) {
    spec.validate();
    AngularEigenfunction phi;
    phi.spec = spec;
    phi.normalization = 1.0;
    const double lambda = static_cast<double>(principal_eigenvalue(spec));
    return integrate(rule, [&](const double* sig) {
        const double p = AngularEigenfunction::monomial(spec, sig);
        return phi.tangential_gradient_sq(sig) - lambda * p * p;
    });
}

} // namespace hardylab
