#include <doctest.h>

#include <hardylab/quadrature.hpp>

#include <cmath>
#include <vector>

using namespace hardylab;

namespace {
const double pi = 3.14159265358979323846;
}

TEST_SUITE("quadrature") {

TEST_CASE("radial rule integrates smooth and endpoint-singular weights") {
    // plain measure: weights must sum to R
    const QuadratureRule plain = radial_rule(2.5, 16, 1.0);
    CHECK(plain.total_weight() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(plain.tag == DomainTag::radial);
    CHECK_FALSE(plain.stochastic);

    // polynomial: integral of r^2 over (0, 1)
    double acc = 0.0;
    for (std::size_t i = 0; i < plain.count(); ++i) {
        const double r = plain.node(i)[0] / 2.5;  // rescale nodes to (0,1)
        acc += plain.weights[i] / 2.5 * r * r;
    }
    CHECK(acc == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // integrable singularity: integral of r^{-1/2} over (0,1) equals 2
    const QuadratureRule graded = radial_rule(1.0, 128, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < graded.count(); ++i)
        s += graded.weights[i] / std::sqrt(graded.node(i)[0]);
    CHECK(s == doctest::Approx(2.0).epsilon(1e-10));

    CHECK_THROWS_AS(radial_rule(0.0, 8), std::domain_error);
    CHECK_THROWS_AS(radial_rule(1.0, 1), std::domain_error);
    CHECK_THROWS_AS(radial_rule(1.0, 8, 0.5), std::domain_error);
}

TEST_CASE("deterministic sphere rule at n = 3") {
    const QuadratureRule full = sphere_rule(3, 24);
    CHECK(full.total_weight() == doctest::Approx(4.0 * pi).epsilon(1e-12));
    CHECK(full.symmetric_last_k);
    CHECK_FALSE(full.stochastic);

    // second moment of one coordinate: |S^2| / 3
    const IntegralResult m2 = integrate(full, [](const double* s) { return s[2] * s[2]; });
    CHECK(m2.value == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
    CHECK(m2.standard_error == 0.0);

    // odd moments cancel by node symmetry
    for (int d = 0; d < 3; ++d) {
        const IntegralResult odd = integrate(full, [d](const double* s) { return s[d]; });
        CHECK(std::abs(odd.value) < 1e-13);
    }
    const IntegralResult mixed = integrate(full, [](const double* s) { return s[0] * s[1]; });
    CHECK(std::abs(mixed.value) < 1e-13);

    // smooth non-polynomial integrand against a 1D reduction oracle:
    // integral of exp(sigma_3) over S^2 = 2 pi integral_{-1}^{1} e^t dt
    const IntegralResult sm = integrate(full, [](const double* s) { return std::exp(s[2]); });
    CHECK(sm.value == doctest::Approx(2.0 * pi * (std::exp(1.0) - std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("restricted sphere rule keeps only cone nodes") {
    for (int k = 1; k <= 3; ++k) {
        const QuadratureRule sect = sphere_rule(3, 24, k);
        CHECK(sect.k == k);
        CHECK(sect.total_weight() == doctest::Approx(4.0 * pi / (1 << k)).epsilon(1e-12));
        for (std::size_t i = 0; i < sect.count(); ++i)
            for (int d = 3 - k; d < 3; ++d) CHECK(sect.node(i)[d] > 0.0);
    }
    // even moments are exactly half the full-sphere value because the node
    // set is flip-symmetric
    const QuadratureRule hemi = sphere_rule(3, 24, 1);
    const IntegralResult m2 = integrate(hemi, [](const double* s) { return s[2] * s[2]; });
    CHECK(m2.value == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-12));

    // odd moments see the equator kink of the filtered integrand, so they
    // converge only algebraically: integral of sigma_3 = pi
    const IntegralResult m1 =
        integrate(sphere_rule(3, 48, 1), [](const double* s) { return s[2]; });
    CHECK(m1.value == doctest::Approx(pi).epsilon(1e-3));
}

TEST_CASE("deterministic rules above n = 3 are refused") {
    CHECK_THROWS_WITH_AS(sphere_rule(4, 8, 0, RuleKind::deterministic),
                         doctest::Contains("stochastic"), std::runtime_error);
    CHECK_THROWS_AS(sphere_rule(2, 8), std::domain_error);
}

TEST_CASE("stochastic sphere rule: measure, moments, and error bars") {
    const QuadratureRule full = sphere_rule(5, 40, 0, RuleKind::stochastic, 1234);
    CHECK(full.stochastic);
    CHECK(full.group_offsets.size() > 1);
    CHECK(full.total_weight() == doctest::Approx(sphere_volume(4)).epsilon(1e-12));

    // an odd coordinate integrates to 0 within sampling error
    const IntegralResult odd = integrate(full, [](const double* s) { return s[4]; });
    CHECK(odd.standard_error > 0.0);
    CHECK(std::abs(odd.value) < 5.0 * odd.standard_error);

    // second moment |S^4|/5 within 5 sigma; the error bar scales as
    // 1/sqrt(samples) with samples = 2 * order^2
    const IntegralResult m2 = integrate(full, [](const double* s) { return s[4] * s[4]; });
    const double oracle = sphere_volume(4) / 5.0;
    CHECK(std::abs(m2.value - oracle) < 5.0 * m2.standard_error);
    CHECK(m2.standard_error < 0.03 * oracle);

    // restriction folds the last k signs: half the measure for k = 1
    const QuadratureRule half = sphere_rule(5, 40, 1, RuleKind::stochastic, 1234);
    CHECK(half.total_weight() == doctest::Approx(sphere_volume(4) / 2.0).epsilon(1e-12));
    for (std::size_t i = 0; i < half.count(); ++i) CHECK(half.node(i)[4] > 0.0);
}

TEST_CASE("stochastic rules are seed-deterministic") {
    const QuadratureRule a = sphere_rule(4, 12, 2, RuleKind::stochastic, 77);
    const QuadratureRule b = sphere_rule(4, 12, 2, RuleKind::stochastic, 77);
    const QuadratureRule c = sphere_rule(4, 12, 2, RuleKind::stochastic, 78);
    REQUIRE(a.count() == b.count());
    bool equal = true, differs = false;
    for (std::size_t i = 0; i < a.count() * 4; ++i) {
        equal = equal && a.nodes[i] == b.nodes[i];
        differs = differs || a.nodes[i] != c.nodes[i];
    }
    CHECK(equal);
    CHECK(differs);
}

TEST_CASE("mirroring the cone restriction restores the full sphere") {
    const QuadratureRule sect = sphere_rule(3, 16, 2);
    const QuadratureRule full = mirror_last_k(sect);
    CHECK(full.count() == sect.count() * 4);
    CHECK(full.total_weight() == doctest::Approx(4.0 * pi).epsilon(1e-12));
    CHECK(full.symmetric_last_k);
    CHECK(full.k == 2);
    // an integrand even in the mirrored coordinates integrates to 2^k times
    // the section value, exactly node for node
    auto f = [](const double* s) { return s[1] * s[1] + 0.3 * s[2] * s[2]; };
    CHECK(integrate(full, f).value == doctest::Approx(4.0 * integrate(sect, f).value).epsilon(1e-14));
    CHECK_THROWS_AS(mirror_last_k(sphere_rule(3, 8)), std::domain_error);
}

TEST_CASE("cone ball rule integrates separable products") {
    const ConeSpec spec{3, 1};
    const QuadratureRule rule = cone_ball_rule(spec, 1.0, 8, 16, RuleKind::automatic, 0, 1.0);
    CHECK(rule.tag == DomainTag::cone_ball);
    CHECK_FALSE(rule.stochastic);
    // volume of the half ball
    CHECK(rule.total_weight() == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-12));
    // separable oracle: integral of r^2 sigma_3^2 over the half ball
    //   = [integral_0^1 r^4 dr] [integral_{half} sigma_3^2 dsigma] = (1/5)(2 pi/3)
    const IntegralResult v = integrate(rule, [](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return x[2] * x[2];
        (void)r2;
    });
    CHECK(v.value == doctest::Approx(2.0 * pi / 15.0).epsilon(1e-12));
}

TEST_CASE("non-finite integrands are reported with the node") {
    const QuadratureRule rule = radial_rule(1.0, 8, 1.0);
    CHECK_THROWS_WITH_AS(integrate(rule, [](const double* x) { return 1.0 / (x[0] - x[0]); }),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("convergence study on synthetic second-order data") {
    auto value_at = [](int res) {
        const double h = 1.0 / res;
        return 7.5 + 3.0 * h * h;
    };
    const ConvergenceTable t = convergence_study(value_at, {16, 32, 64, 128});
    CHECK(t.estimated_order == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(t.extrapolated == doctest::Approx(7.5).epsilon(1e-9));
    CHECK(t.monotone);
    CHECK_FALSE(t.spectral);

    const ConvergenceTable flat = convergence_study([](int) { return 4.25; }, {8, 16, 32});
    CHECK(flat.spectral);
}

TEST_CASE("Neville extrapolation is exact on polynomial data") {
    const std::vector<double> xs = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 + 2.0 * x - 5.0 * x * x + x * x * x);
    CHECK(neville_extrapolate(xs, ys, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(neville_extrapolate({1.0}, {2.0}), std::domain_error);
}

TEST_CASE("angular eigenfunction normalization against closed forms") {
    // (3,1): integral over the hemisphere of sigma_3^2 is 2 pi / 3
    const AngularEigenfunction phi31 = angular_eigenfunction({3, 1});
    CHECK(phi31.normalization == doctest::Approx(std::sqrt(3.0 / (2.0 * pi))).epsilon(1e-10));
    // (3,2): integral over the quarter sphere of sigma_2^2 sigma_3^2 is pi / 15
    const AngularEigenfunction phi32 = angular_eigenfunction({3, 2});
    CHECK(phi32.normalization == doctest::Approx(std::sqrt(15.0 / pi)).epsilon(1e-10));
    // (4,2): quarter-section integral of sigma_3^2 sigma_4^2 is pi^2 / 48
    const AngularEigenfunction phi42 = angular_eigenfunction({4, 2});
    CHECK(phi42.normalization ==
          doctest::Approx(std::sqrt(48.0) / pi).epsilon(2e-2));
}

TEST_CASE("thread cap fans out without changing chunk boundaries") {
    // integrate the same functional twice; the partition is fixed by the
    // rule, so results are identical regardless of pool scheduling
    const QuadratureRule rule = sphere_rule(5, 24, 2, RuleKind::stochastic, 5);
    auto f = [](const double* s) { return std::exp(s[0]) + s[3] * s[4]; };
    const IntegralResult r1 = integrate(rule, f);
    const IntegralResult r2 = integrate(rule, f);
    CHECK(r1.value == r2.value);
    CHECK(r1.standard_error == r2.standard_error);
}

} // TEST_SUITE
