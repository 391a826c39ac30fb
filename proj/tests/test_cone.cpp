#include <doctest.h>

#include <hardylab/cone.hpp>

#include <cmath>
#include <set>

using namespace hardylab;

TEST_SUITE("cone") {

TEST_CASE("hardy constant exact values") {
    CHECK(hardy_constant({3, 1}) == rational(9, 4));
    CHECK(hardy_constant({3, 2}) == rational(25, 4));
    CHECK(hardy_constant({3, 3}) == rational(49, 4));
    CHECK(hardy_constant({4, 2}) == rational(9));
    CHECK(hardy_constant({5, 3}) == rational(81, 4));
    CHECK(rational_to_string(hardy_constant({3, 2})) == "25/4");
    CHECK(rational_to_string(hardy_constant({4, 2})) == "9");
}

TEST_CASE("split identity over the full parameter range") {
    for (int n = 3; n <= 10; ++n)
        for (int k = 1; k <= n; ++k) {
            const ConeSpec spec{n, k};
            const rational flat((long long)(n - 2) * (n - 2), 4);
            CHECK(hardy_constant(spec) == flat + rational(principal_eigenvalue(spec)));
        }
}

TEST_CASE("degree eigenvalues") {
    CHECK(degree_eigenvalue(3, 0) == 0);
    CHECK(degree_eigenvalue(3, 1) == 2);
    CHECK(degree_eigenvalue(3, 2) == 6);
    CHECK(degree_eigenvalue(3, 3) == 12);
    CHECK(degree_eigenvalue(5, 3) == 18);
    // the section eigenvalue is the degree-k eigenvalue of the full sphere
    for (int n = 3; n <= 8; ++n)
        for (int k = 1; k <= n; ++k)
            CHECK(principal_eigenvalue({n, k}) == degree_eigenvalue(n, k));
    CHECK_THROWS_AS(degree_eigenvalue(2, 1), std::domain_error);
    CHECK_THROWS_AS(degree_eigenvalue(3, -1), std::domain_error);
}

TEST_CASE("weighted half-space constant") {
    CHECK(weighted_halfspace_constant(3, rational(1, 2)) == rational(1));
    CHECK(weighted_halfspace_constant(3, rational(1)) == rational(9, 4));
    CHECK(weighted_halfspace_constant(4, rational(3, 2)) == rational(25, 4));
    CHECK(weighted_halfspace_constant(4, rational(2)) == rational(9));
    // l = 1 reproduces the k = 1 cone constant for every n
    for (int n = 3; n <= 10; ++n)
        CHECK(weighted_halfspace_constant(n, rational(1)) == hardy_constant({n, 1}));
    CHECK_THROWS_AS(weighted_halfspace_constant(3, rational(1, 3)), std::domain_error);
    CHECK_THROWS_AS(weighted_halfspace_constant(3, rational(0)), std::domain_error);
    CHECK_THROWS_AS(weighted_halfspace_constant(3, rational(-1, 2)), std::domain_error);
}

TEST_CASE("spec validation bounds") {
    CHECK_THROWS_AS((ConeSpec{2, 1}.validate()), std::domain_error);
    CHECK_THROWS_AS((ConeSpec{3, 0}.validate()), std::domain_error);
    CHECK_THROWS_AS((ConeSpec{3, 4}.validate()), std::domain_error);
    CHECK_THROWS_AS((ConeSpec{17, 1}.validate()), std::domain_error);
    CHECK_NOTHROW((ConeSpec{16, 16}.validate()));
}

TEST_CASE("sphere volumes against the Gamma formula") {
    const double pi = 3.14159265358979323846;
    CHECK(sphere_volume(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sphere_volume(1) == doctest::Approx(2.0 * pi).epsilon(1e-15));
    CHECK(sphere_volume(2) == doctest::Approx(4.0 * pi).epsilon(1e-15));
    CHECK(sphere_volume(3) == doctest::Approx(2.0 * pi * pi).epsilon(1e-15));
    for (int d = 0; d <= 12; ++d) {
        const double gamma_form = 2.0 * std::pow(pi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
        CHECK(sphere_volume(d) == doctest::Approx(gamma_form).epsilon(1e-13));
    }
}

TEST_CASE("iterated logarithm") {
    CHECK(iterated_log(1, 1.0) == doctest::Approx(1.0));
    CHECK(iterated_log(1, std::exp(-1.0)) == doctest::Approx(0.5).epsilon(1e-15));
    // X_2(s) = X_1(X_1(s)) by direct composition
    const double s = 0.037;
    const double x1 = 1.0 / (1.0 - std::log(s));
    CHECK(iterated_log(2, s) == doctest::Approx(1.0 / (1.0 - std::log(x1))).epsilon(1e-15));
    // values stay in (0, 1] and increase with the index on (0, 1)
    for (double v : {1e-12, 1e-3, 0.5, 0.99}) {
        double prev = 0.0;
        for (int i = 1; i <= 6; ++i) {
            const double xi = iterated_log(i, v);
            CHECK(xi > 0.0);
            CHECK(xi <= 1.0);
            CHECK(xi >= prev);
            prev = xi;
        }
    }
    CHECK_THROWS_AS(iterated_log(0, 0.5), std::domain_error);
    CHECK_THROWS_AS(iterated_log(1, 0.0), std::domain_error);
    CHECK_THROWS_AS(iterated_log(1, 1.5), std::domain_error);
}

TEST_CASE("orthant monomial and its gradient") {
    const ConeSpec spec{5, 3};
    const double x[5] = {0.3, -0.2, 0.5, 0.7, 0.4};
    CHECK(AngularEigenfunction::monomial(spec, x) == doctest::Approx(0.5 * 0.7 * 0.4));
    double g[5];
    AngularEigenfunction::monomial_gradient(spec, x, g);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == doctest::Approx(0.7 * 0.4));
    CHECK(g[3] == doctest::Approx(0.5 * 0.4));
    CHECK(g[4] == doctest::Approx(0.5 * 0.7));
    // centered finite differences agree
    for (int d = 0; d < 5; ++d) {
        double xp[5], xm[5];
        for (int j = 0; j < 5; ++j) xp[j] = xm[j] = x[j];
        const double h = 1e-6;
        xp[d] += h;
        xm[d] -= h;
        const double fd = (AngularEigenfunction::monomial(spec, xp) -
                           AngularEigenfunction::monomial(spec, xm)) /
                          (2 * h);
        CHECK(g[d] == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("tangential gradient on the unit sphere") {
    const ConeSpec spec{3, 1};
    AngularEigenfunction phi;
    phi.spec = spec;
    phi.normalization = 2.0;
    // P = sigma_3, |grad P|^2 = 1, so |grad_S phi|^2 = N^2 (1 - sigma_3^2)
    const double north[3] = {0.0, 0.0, 1.0};
    CHECK(phi.tangential_gradient_sq(north) == doctest::Approx(0.0).epsilon(1e-14));
    const double equator[3] = {1.0, 0.0, 0.0};
    CHECK(phi.tangential_gradient_sq(equator) == doctest::Approx(4.0));
    const double mid[3] = {0.6, 0.0, 0.8};
    CHECK(phi.tangential_gradient_sq(mid) == doctest::Approx(4.0 * (1.0 - 0.64)));
    // the tangential gradient is orthogonal to sigma and matches the norm
    double g[3];
    phi.tangential_gradient(mid, g);
    CHECK(g[0] * mid[0] + g[1] * mid[1] + g[2] * mid[2] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] ==
          doctest::Approx(phi.tangential_gradient_sq(mid)).epsilon(1e-13));
}

TEST_CASE("derived seeds are deterministic and spread") {
    CHECK(detail::derive_seed(1, 2) == detail::derive_seed(1, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {1ULL, 2ULL, 99ULL})
        for (std::uint64_t tag = 0; tag < 50; ++tag) seen.insert(detail::derive_seed(base, tag));
    CHECK(seen.size() == 150);
}

} // TEST_SUITE
