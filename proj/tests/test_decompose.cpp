#include <doctest.h>

#include <hardylab/decompose.hpp>

#include <cmath>
#include <vector>

using namespace hardylab;

namespace {

const double pi = 3.14159265358979323846;

double norm3(const double* x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// cone trial at (3,1) whose odd extension is exactly x3 (1 - r^2)^3 on the
// unit ball: the single harmonic mode l = 1, m = 0
TrialFunction degree_one_trial() {
    TrialFunction u;
    u.spec = {3, 1};
    u.support_radius = 1.0;
    u.name = "degree-one";
    u.evaluate_fn = [](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if (r2 >= 1.0 || x[2] <= 0.0) return 0.0;
        const double q = 1.0 - r2;
        return x[2] * q * q * q;
    };
    return u;
}

} // namespace

TEST_SUITE("decompose") {

TEST_CASE("basis indexing and layout") {
    CHECK(sphere_basis_size(0) == 1);
    CHECK(sphere_basis_size(4) == 25);
    CHECK(sphere_basis_index(0, 0) == 0);
    CHECK(sphere_basis_index(2, -2) == 4);
    CHECK(sphere_basis_index(2, 2) == 8);
    const auto members = sphere_basis_members(3);
    REQUIRE(members.size() == 16);
    for (std::size_t i = 0; i < members.size(); ++i)
        CHECK(sphere_basis_index(members[i].l, members[i].m) == (int)i);

    MultiIndex mi{{1, 0, 2, 3}};
    CHECK(mi.total_degree() == 6);

    double out[9];
    const double sig[3] = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(sphere_basis_evaluate(13, sig, out), std::domain_error);
    CHECK_THROWS_AS(sphere_basis_evaluate(-1, sig, out), std::domain_error);
}

TEST_CASE("low-degree harmonics take their closed-form values") {
    const double s3 = 1.0 / std::sqrt(14.0);
    const double sig[3] = {1.0 * s3, 2.0 * s3, 3.0 * s3};
    double out[9];
    sphere_basis_evaluate(2, sig, out);
    CHECK(out[sphere_basis_index(0, 0)] == doctest::Approx(std::sqrt(1.0 / (4.0 * pi))).epsilon(1e-14));
    CHECK(out[sphere_basis_index(1, 0)] ==
          doctest::Approx(std::sqrt(3.0 / (4.0 * pi)) * sig[2]).epsilon(1e-14));
    // |Y_{1,+-1}| = sqrt(3/4pi) |sigma_{1,2}| regardless of phase convention
    CHECK(std::abs(out[sphere_basis_index(1, 1)]) ==
          doctest::Approx(std::sqrt(3.0 / (4.0 * pi)) * std::abs(sig[0])).epsilon(1e-13));
    CHECK(std::abs(out[sphere_basis_index(1, -1)]) ==
          doctest::Approx(std::sqrt(3.0 / (4.0 * pi)) * std::abs(sig[1])).epsilon(1e-13));

    // north pole: only m = 0 members survive, value sqrt((2l+1)/4pi)
    const double pole[3] = {0.0, 0.0, 1.0};
    sphere_basis_evaluate(2, pole, out);
    CHECK(out[sphere_basis_index(0, 0)] == doctest::Approx(std::sqrt(1.0 / (4.0 * pi))));
    CHECK(out[sphere_basis_index(1, 0)] == doctest::Approx(std::sqrt(3.0 / (4.0 * pi))));
    CHECK(out[sphere_basis_index(2, 0)] == doctest::Approx(std::sqrt(5.0 / (4.0 * pi))));
    CHECK(out[sphere_basis_index(1, 1)] == 0.0);
    CHECK(out[sphere_basis_index(2, -1)] == 0.0);
}

TEST_CASE("basis is orthonormal under a full deterministic sphere rule") {
    const QuadratureRule rule = sphere_rule(3, 32);
    const int lmax = 4;
    const int nb = sphere_basis_size(lmax);
    std::vector<double> gram(nb * nb, 0.0), basis(nb);
    for (std::size_t i = 0; i < rule.count(); ++i) {
        sphere_basis_evaluate(lmax, rule.node(i), basis.data());
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b) gram[a * nb + b] += rule.weights[i] * basis[a] * basis[b];
    }
    double worst = 0.0;
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b)
            worst = std::max(worst, std::abs(gram[a * nb + b] - (a == b ? 1.0 : 0.0)));
    CHECK(worst < 1e-12);
}

TEST_CASE("harmonics flip by parity under a sign change of the last axis") {
    const double s = 1.0 / std::sqrt(0.3 * 0.3 + 0.4 * 0.4 + 0.7 * 0.7);
    const double a[3] = {0.3 * s, -0.4 * s, 0.7 * s};
    const double b[3] = {a[0], a[1], -a[2]};
    double ya[36], yb[36];
    sphere_basis_evaluate(5, a, ya);
    sphere_basis_evaluate(5, b, yb);
    for (int l = 0; l <= 5; ++l)
        for (int m = -l; m <= l; ++m) {
            const int idx = sphere_basis_index(l, m);
            const double sign = ((l + m) % 2 == 0) ? 1.0 : -1.0;
            // the recurrence is sign-symmetric, so equality is bit-exact
            CHECK(yb[idx] == sign * ya[idx]);
        }
}

TEST_CASE("chebyshev radii cluster at both ends") {
    const auto r = chebyshev_radii(2.0, 24);
    REQUIRE(r.size() == 24);
    CHECK(r.front() > 0.0);
    CHECK(r.back() < 2.0);
    for (std::size_t j = 1; j < r.size(); ++j) CHECK(r[j] > r[j - 1]);
    CHECK(r.front() + r.back() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.front() < 0.01);
    CHECK_THROWS_AS(chebyshev_radii(1.0, 3), std::domain_error);
}

TEST_CASE("coefficient extraction isolates the single harmonic mode") {
    const TrialFunction u = degree_one_trial();
    const QuadratureRule rule = sphere_rule(3, 32);
    const auto radii = chebyshev_radii(1.0, 16);
    const HarmonicCoefficients hc = harmonic_coefficients(u, 2, radii, rule);

    CHECK(hc.lmax == 2);
    REQUIRE(hc.values.size() == 9);
    REQUIRE(hc.values[0].size() == radii.size());
    const int live = sphere_basis_index(1, 0);
    for (std::size_t j = 0; j < radii.size(); ++j) {
        const double r = radii[j];
        const double expect = r * std::pow(1.0 - r * r, 3) * std::sqrt(4.0 * pi / 3.0);
        CHECK(hc.values[live][j] == doctest::Approx(expect).epsilon(1e-10));
    }
    for (int b = 0; b < 9; ++b) {
        if (b == live) continue;
        for (double v : hc.values[b]) CHECK(std::abs(v) < 1e-12);
    }
    // sup of |x3| (1-r^2)^3 is at r = 1/sqrt(7) on the polar axis
    const double sup_exact = std::pow(6.0 / 7.0, 3) / std::sqrt(7.0);
    CHECK(hc.sup_norm > 0.8 * sup_exact);
    CHECK(hc.sup_norm < sup_exact + 1e-12);

    CHECK_THROWS_AS(hc.coefficient(1, 0, radii.front() * 0.5), std::domain_error);
    CHECK_THROWS_AS(hc.coefficient(1, 0, 1.0), std::domain_error);

    TrialFunction u4;
    u4.spec = {4, 2};
    u4.evaluate_fn = [](const double*) { return 0.0; };
    CHECK_THROWS_AS(harmonic_coefficients(u4, 1, radii, rule), std::domain_error);
    CHECK_THROWS_AS(harmonic_coefficients(u, 1, radii, radial_rule(1.0, 16)), std::domain_error);
    CHECK_THROWS_AS(harmonic_coefficients(u, 1, {0.25, 0.5, 0.75}, rule), std::domain_error);
}

TEST_CASE("truncated reconstruction matches the extension") {
    const TrialFunction u = degree_one_trial();
    const TrialFunction ext = odd_extension(u);
    const HarmonicCoefficients hc =
        harmonic_coefficients(u, 2, chebyshev_radii(1.0, 64), sphere_rule(3, 32));
    const double pts[3][3] = {{0.1, 0.2, 0.3}, {-0.4, 0.1, -0.5}, {0.0, 0.6, 0.2}};
    for (const auto& x : pts) {
        REQUIRE(norm3(x) < 0.999);
        CHECK(reconstruct(hc, x) == doctest::Approx(ext.value(x)).epsilon(1e-4));
    }
    const double origin[3] = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(reconstruct(hc, origin), std::domain_error);
}

TEST_CASE("low-degree coefficients of the odd extension vanish") {
    const TrialFunction u = product_bump_trial({3, 2}, 1.0);
    const QuadratureRule rule = sphere_rule(3, 48);
    REQUIRE(rule.symmetric_last_k);
    const auto radii = chebyshev_radii(1.0, 12);

    const VanishingReport rep = low_degree_vanishing_check(u, {3, 2}, rule, radii);
    CHECK(rep.max_degree == 1);
    CHECK(rep.symmetric_rule);
    CHECK(rep.warning.empty());
    CHECK(rep.sup_norm > 0.0);
    CHECK(rep.threshold == doctest::Approx(1e-10 * rep.sup_norm));
    CHECK(rep.max_coefficient <= rep.threshold);
    CHECK(rep.pass);

    // same data through an unflagged rule: looser threshold plus a warning
    QuadratureRule unflagged = rule;
    unflagged.symmetric_last_k = false;
    const VanishingReport loose = low_degree_vanishing_check(u, {3, 2}, unflagged, radii);
    CHECK_FALSE(loose.symmetric_rule);
    CHECK_FALSE(loose.warning.empty());
    CHECK(loose.threshold == doctest::Approx(1e-6 * loose.sup_norm));
    CHECK(loose.pass);

    // negative control: an even function mislabeled as an odd extension
    TrialFunction fake;
    fake.spec = {3, 1};
    fake.odd_extended = true;
    fake.evaluate_fn = [](const double* x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return r2 < 1.0 ? std::abs(x[2]) * (1.0 - r2) : 0.0;
    };
    const VanishingReport bad = low_degree_vanishing_check(fake, {3, 1}, rule, radii);
    CHECK(bad.max_coefficient > bad.threshold);
    CHECK_FALSE(bad.pass);

    CHECK_THROWS_AS(low_degree_vanishing_check(u, {4, 2}, rule, radii), std::domain_error);
}

TEST_CASE("monomial moments cancel through degree k-1") {
    const ConeSpec spec{4, 2};
    const TrialFunction u = random_trial(spec, 1.0, 4, 2024);
    const QuadratureRule cone = cone_ball_rule(spec, 1.0, 6, 16);
    const QuadratureRule full = mirror_last_k(cone);
    REQUIRE(full.symmetric_last_k);
    auto w = [](double r) { return std::exp(-r); };

    for (const MultiIndex& alpha :
         {MultiIndex{{0, 0, 0, 0}}, MultiIndex{{1, 0, 0, 0}}, MultiIndex{{0, 0, 1, 0}}}) {
        const MomentResult mr = monomial_moment(u, spec, alpha, w, full);
        CHECK(mr.absolute > 0.0);
        CHECK(std::abs(mr.moment.value) < 1e-12 * mr.absolute);
        CHECK(mr.moment.stochastic);
    }

    // degree k survives when both mirrored powers are odd
    const MomentResult survive = monomial_moment(u, spec, MultiIndex{{0, 0, 1, 1}}, w, full, false);
    CHECK(std::abs(survive.moment.value) > 1e-3 * survive.absolute);

    CHECK_THROWS_WITH_AS(monomial_moment(u, spec, MultiIndex{{0, 0, 1, 1}}, w, full),
                         doctest::Contains("k-1"), std::domain_error);
    CHECK_THROWS_AS(monomial_moment(u, spec, MultiIndex{{0, 0, 0}}, w, full), std::domain_error);
    CHECK_THROWS_AS(monomial_moment(u, spec, MultiIndex{{-1, 0, 0, 2}}, w, full, false),
                    std::domain_error);
}

TEST_CASE("energy and hardy mass double once per mirrored axis") {
    const ConeSpec spec{3, 2};
    const TrialFunction u = product_bump_trial(spec, 1.0);
    const QuadratureRule cone = cone_ball_rule(spec, 1.0, 10, 24);
    const QuadratureRule full = mirror_last_k(cone);

    const DoublingReport rep = energy_doubling_check(u, spec, cone, full);
    CHECK(rep.expected_ratio == 4.0);
    CHECK(rep.cone_energy > 0.0);
    CHECK(rep.cone_hardy > 0.0);
    CHECK(rep.energy_ratio == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.hardy_ratio == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.worst_relative_error <= 1e-10);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.pass);

    TrialFunction z;
    z.spec = spec;
    z.evaluate_fn = [](const double*) { return 0.0; };
    z.gradient_fn = [](const double*, double* g) { g[0] = g[1] = g[2] = 0.0; };
    const DoublingReport zero = energy_doubling_check(z, spec, cone, full);
    CHECK(zero.degenerate);
    CHECK(zero.pass);
}

} // TEST_SUITE
