#include <doctest.h>

#include <hardylab/operators.hpp>

#include <cmath>

using namespace hardylab;

TEST_SUITE("operators") {

TEST_CASE("stencil Laplacian and partials on polynomials") {
    ScalarField q = [](const double* x) { return x[0] * x[0] + 2.0 * x[1] * x[1] - x[2]; };
    const double p[3] = {0.3, -0.4, 0.9};
    CHECK(stencil_laplacian(q, p, 3, 1e-3) == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(stencil_partial(q, p, 3, 0, 1e-3) == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(stencil_partial(q, p, 3, 2, 1e-3) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("half-space conjugation: order two and boundary guard") {
    ScalarField g = [](const double* x) { return std::exp(x[0]) * std::sin(x[2]) + 2.0; };
    const double x[3] = {0.4, 0.1, 0.7};
    const ResidualSweep sweep = residual_sweep(
        [&](double h) { return halfspace_conjugation_residual(g, 3, 1.5, x, h).residual; },
        {4e-2, 2e-2, 1e-2, 5e-3});
    CHECK(sweep.order_estimate > 1.8);
    CHECK(sweep.order_estimate < 2.2);
    CHECK(sweep.residuals.back() < sweep.residuals.front());

    const double near[3] = {0.4, 0.1, 1e-3};
    CHECK_THROWS_WITH_AS(halfspace_conjugation_residual(g, 3, 1.5, near, 1e-2),
                         doctest::Contains("boundary"), std::domain_error);
}

TEST_CASE("integer powers use the repeated product") {
    CHECK(detail::power_weight(1.7, 2.0) == 1.7 * 1.7);
    CHECK(detail::power_weight(0.3, 3.0) == 0.3 * 0.3 * 0.3);
    CHECK(detail::power_weight(1.7, 1.5) == doctest::Approx(std::pow(1.7, 1.5)).epsilon(1e-15));
}

TEST_CASE("monomial conjugation: genuine order two on non-polynomial fields") {
    const ConeSpec spec{4, 2};
    ScalarField g = [](const double* x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]));
    };
    const double x[4] = {0.2, -0.3, 0.6, 0.8};
    const ResidualSweep sweep = residual_sweep(
        [&](double h) { return monomial_conjugation_residual(g, spec, x, h).residual; },
        {4e-2, 2e-2, 1e-2, 5e-3});
    CHECK(sweep.order_estimate > 1.8);
    CHECK(sweep.order_estimate < 2.2);

    // quadratic fields make every stencil exact: rounding-level residuals
    ScalarField q = [](const double* x4) { return 1.0 + x4[0] + 0.5 * x4[3] * x4[3]; };
    CHECK(monomial_conjugation_residual(q, spec, x, 1e-2).residual < 1e-6);

    const double wall[4] = {0.2, -0.3, 1e-3, 0.8};
    CHECK_THROWS_WITH_AS(monomial_conjugation_residual(g, spec, wall, 1e-2),
                         doctest::Contains("wall"), std::domain_error);
}

TEST_CASE("k = 1 specialization agrees with l = 1 exactly") {
    const ConeSpec spec{5, 1};
    const double x[5] = {0.3, -0.2, 0.5, 0.1, 0.6};
    for (const auto& [name, field] : smooth_field_suite(5)) {
        (void)name;
        const double h = scaled_step(0.05, x[4]);
        const double a = halfspace_conjugation_residual(field, 5, 1.0, x, h).residual;
        const double b = monomial_conjugation_residual(field, spec, x, h).residual;
        CHECK(a == b);  // identical arithmetic path, not merely close
    }
}

TEST_CASE("orthant monomials are discretely harmonic; squares are not") {
    for (const ConeSpec spec : {ConeSpec{3, 1}, ConeSpec{3, 3}, ConeSpec{5, 3}, ConeSpec{6, 4}}) {
        double x[max_dimension];
        for (int d = 0; d < spec.n; ++d) x[d] = 0.2 + 0.11 * d;
        CHECK(monomial_laplacian_residual(spec, x, 1e-2).residual < 1e-9);
    }
    // negative control: Laplacian of x_n^2 is 2, not 0
    ScalarField sq = [](const double* x) { return x[2] * x[2]; };
    const double p[3] = {0.4, 0.1, 0.5};
    CHECK(stencil_laplacian(sq, p, 3, 1e-3) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("spherical Laplacian of the homogeneous extension") {
    // constants are flat: zero to rounding
    ScalarField one = [](const double*) { return 1.0; };
    const double north[3] = {0.0, 0.0, 1.0};
    CHECK(std::abs(laplace_beltrami_apply(one, 3, north, 1e-3)) < 1e-8);

    // degree-1 harmonic: Delta_S sigma_3 = -2 sigma_3 at n = 3
    ScalarField s3 = [](const double* x) { return x[2]; };
    const double sig[3] = {0.48, 0.6, 0.64};  // unit vector
    const double got = laplace_beltrami_apply(s3, 3, sig, 1e-4);
    CHECK(got == doctest::Approx(-2.0 * sig[2]).epsilon(1e-6));

    // eigen-relation for the orthant monomial at (4,2): eigenvalue 8
    const ConeSpec spec{4, 2};
    ScalarField phi = [spec](const double* x) { return AngularEigenfunction::monomial(spec, x); };
    double v[4] = {0.5, 0.5, 0.5, 0.5};
    const double lam = static_cast<double>(principal_eigenvalue(spec));
    CHECK(laplace_beltrami_apply(phi, 4, v, 1e-4) ==
          doctest::Approx(-lam * phi(v)).epsilon(1e-6));

    const double off[3] = {0.5, 0.5, 0.5};
    CHECK_THROWS_WITH_AS(laplace_beltrami_apply(one, 3, off, 1e-3),
                         doctest::Contains("unit"), std::domain_error);
}

TEST_CASE("scaled step obeys the quarter-distance rule") {
    CHECK(scaled_step(0.1, 2.0) == doctest::Approx(0.025));
    CHECK(scaled_step(0.1, 0.4) == doctest::Approx(0.01));
    CHECK(scaled_step(0.08, 1e-3) == doctest::Approx(0.08 * 1e-3 / 4.0));
}

TEST_CASE("residual sweep slope estimation") {
    const ResidualSweep quad = residual_sweep([](double h) { return 3.0 * h * h; },
                                              {1e-1, 5e-2, 2.5e-2, 1.25e-2});
    CHECK(quad.order_estimate == doctest::Approx(2.0).epsilon(1e-9));
    REQUIRE(quad.steps.size() == 4);
    REQUIRE(quad.residuals.size() == 4);

    const ResidualSweep cubic = residual_sweep([](double h) { return h * h * h; }, {1e-1, 5e-2, 2.5e-2});
    CHECK(cubic.order_estimate == doctest::Approx(3.0).epsilon(1e-9));

    // all-zero residuals leave the order undefined
    const ResidualSweep flat = residual_sweep([](double) { return 0.0; }, {1e-1, 5e-2, 2.5e-2});
    CHECK(std::isnan(flat.order_estimate));
}

TEST_CASE("smooth field suite is stable and distinct") {
    const auto suite = smooth_field_suite(4);
    REQUIRE(suite.size() == 5);
    const double x[4] = {0.3, -0.1, 0.2, 0.6};
    for (std::size_t i = 0; i < suite.size(); ++i) {
        CHECK(std::isfinite(suite[i].second(x)));
        for (std::size_t j = i + 1; j < suite.size(); ++j) {
            CHECK(suite[i].first != suite[j].first);
            CHECK(suite[i].second(x) != suite[j].second(x));
        }
    }
    CHECK_THROWS_AS(smooth_field_suite(1), std::domain_error);
}

} // TEST_SUITE
