#pragma once

// Exact constants of the cone R^{n-k} x (R_+)^k: the sharp Hardy constant,
// the principal angular eigenvalue, degree eigenvalues, the weighted
// half-space constant, the orthant angular eigenfunction, and the iterated
// logarithm family X_i used by the remainder terms.

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hardylab {

using rational = boost::rational<long long>;

inline std::string rational_to_string(const rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

inline double rational_to_double(const rational& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

// Largest ambient dimension the numerical paths support; fixed-size node
// buffers in the integrand hot loops rely on it. Exact-arithmetic constant
// functions have no such cap.
inline constexpr int max_dimension = 16;

// Ambient dimension n and the number k of half-line factors.
struct ConeSpec {
    int n = 3;
    int k = 1;

    void validate() const {
        if (n < 3) throw std::domain_error("ConeSpec: ambient dimension must satisfy n >= 3");
        if (n > max_dimension)
            throw std::domain_error("ConeSpec: ambient dimension above the supported maximum of 16");
        if (k < 1 || k > n) throw std::domain_error("ConeSpec: half-line count must satisfy 1 <= k <= n");
    }
    bool operator==(const ConeSpec& o) const { return n == o.n && k == o.k; }
};

// (n-2+2k)^2 / 4, exact.
inline rational hardy_constant(const ConeSpec& spec) {
    spec.validate();
    const long long b = spec.n - 2 + 2LL * spec.k;
    return rational(b * b, 4);
}

// c_l = l(n+l-2), the eigenvalue of degree-l spherical harmonics on S^{n-1}.
inline long long degree_eigenvalue(int n, long long l) {
    if (n < 3) throw std::domain_error("degree_eigenvalue: n >= 3 required");
    if (l < 0) throw std::domain_error("degree_eigenvalue: degree must be nonnegative");
    return l * (n + l - 2);
}

// lambda_1(S^{n-1} cap R^n_{k+}) = k(n+k-2) = c_k.
inline long long principal_eigenvalue(const ConeSpec& spec) {
    spec.validate();
    return degree_eigenvalue(spec.n, spec.k);
}

// (n+2l-2)^2 / 4 for half-integer l >= 1/2.
inline rational weighted_halfspace_constant(int n, const rational& l) {
    if (n < 3) throw std::domain_error("weighted_halfspace_constant: n >= 3 required");
    const rational twice_l = l * 2;
    if (twice_l.denominator() != 1 || twice_l.numerator() < 1)
        throw std::domain_error("weighted_halfspace_constant: l must be a positive half-integer");
    const rational b = rational(n) + l * 2 - 2;
    return b * b / 4;
}

// |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2), via the stable two-step recurrence.
inline double sphere_volume(int d) {
    if (d < 0) throw std::domain_error("sphere_volume: dimension must be nonnegative");
    const double pi = 3.14159265358979323846;
    double even = 2.0;      // |S^0|
    double odd = 2.0 * pi;  // |S^1|
    if (d == 0) return even;
    if (d == 1) return odd;
    double v = (d % 2 == 0) ? even : odd;
    for (int j = (d % 2 == 0) ? 2 : 3; j <= d; j += 2) v *= 2.0 * pi / (j - 1);
    return v;
}

// X_1(s) = (1 - ln s)^{-1}; X_i = X_1 composed with X_{i-1}. Domain (0,1].
inline double iterated_log(int i, double s) {
    if (i < 1) throw std::domain_error("iterated_log: index must be >= 1");
    if (!(s > 0.0) || s > 1.0) throw std::domain_error("iterated_log: argument must lie in (0,1]");
    double x = s;
    for (int j = 0; j < i; ++j) x = 1.0 / (1.0 - std::log(x));
    return x;
}

// phi_k(sigma) = N * prod_{i=n-k+1}^n sigma_i, the principal Dirichlet
// eigenfunction of the cone section. The normalization N is computed by
// quadrature (see angular_eigenfunction in quadrature.hpp); this type only
// carries the formula. monomial/monomial_gradient expose the unnormalized
// harmonic polynomial P(x) = prod of the last k coordinates.
struct AngularEigenfunction {
    ConeSpec spec;
    double normalization = 1.0;

    static double monomial(const ConeSpec& s, const double* x) {
        double p = 1.0;
        for (int i = s.n - s.k; i < s.n; ++i) p *= x[i];
        return p;
    }
    // dP/dx_j = prod of the other last-k coordinates (0 for leading axes).
    static void monomial_gradient(const ConeSpec& s, const double* x, double* g) {
        for (int j = 0; j < s.n; ++j) g[j] = 0.0;
        for (int j = s.n - s.k; j < s.n; ++j) {
            double p = 1.0;
            for (int i = s.n - s.k; i < s.n; ++i)
                if (i != j) p *= x[i];
            g[j] = p;
        }
    }

    double value(const double* sigma) const { return normalization * monomial(spec, sigma); }

    // Tangential gradient on |sigma| = 1: grad_S = grad P - k P sigma (P is
    // homogeneous of degree k), scaled by the normalization.
    void tangential_gradient(const double* sigma, double* g) const {
        const double p = monomial(spec, sigma);
        monomial_gradient(spec, sigma, g);
        for (int j = 0; j < spec.n; ++j) g[j] = normalization * (g[j] - spec.k * p * sigma[j]);
    }

    // |grad_S phi|^2 = N^2 (|grad P|^2 - k^2 P^2) on the unit sphere.
    double tangential_gradient_sq(const double* sigma) const {
        const double p = monomial(spec, sigma);
        double g[16];
        monomial_gradient(spec, sigma, g);
        double gg = 0.0;
        for (int j = 0; j < spec.n; ++j) gg += g[j] * g[j];
        const double kk = static_cast<double>(spec.k) * spec.k;
        return normalization * normalization * (gg - kk * p * p);
    }
};

namespace detail {

// splitmix64: deterministic seed spreading for derived RNG streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t s = base ^ (0xa0761d6478bd642fULL * (tag + 1));
    return splitmix64(s);
}

} // namespace detail

} // namespace hardylab
