#include "ddlab/phasefield.hpp"

#include "ddlab/errors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ddlab;

namespace {
const SharpDomain kDisk = SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));

SProfile cube_profile() {
    // S(t) = (t^3 + 0.1 t) / 1.1 on (-1,1): odd with strictly positive
    // derivative, but S' increases on (0,1) (the second derivative 6t/1.1
    // is positive there), so the derivative-monotonicity axiom must fail.
    // Envelope: (1+S(t-1))/2 = t (t^2 - 3t + 3.1) / 2.2 gives alpha = 1 with
    // zeta1 = 0.38, zeta2 = 1.42.
    return SProfile::custom([](double t) { return (t * t * t + 0.1 * t) / 1.1; },
                            [](double t) { return (3.0 * t * t + 0.1) / 1.1; }, 1.0, 0.38,
                            1.42);
}
} // namespace

TEST_CASE("profile values and clamps") {
    const SProfile cubic = SProfile::cubic();
    CHECK(cubic.value(1.0) == 1.0);
    CHECK(cubic.value(2.5) == 1.0);
    CHECK(cubic.value(0.0) == 0.0);
    CHECK(cubic.value(0.5) == doctest::Approx(0.6875).epsilon(1e-15));
    CHECK(cubic.derivative(0.0) == doctest::Approx(1.5));
    CHECK(SProfile::linear().derivative(0.3) == 1.0);
    CHECK(SProfile::quintic().derivative(2.0) == 0.0);
}

TEST_CASE("verify_profile accepts the built-in profiles") {
    for (const char* name : {"linear", "cubic", "quintic"}) {
        const ProfileReport rep = verify_profile(SProfile::by_name(name), 1000);
        CAPTURE(name);
        CHECK(rep.all_pass());
    }
    CHECK_THROWS_AS(verify_profile(SProfile::linear(), 50), ConfigError);
}

TEST_CASE("verify_profile rejects a profile with increasing derivative") {
    const ProfileReport rep = verify_profile(cube_profile(), 1000);
    CHECK(rep.antisymmetric);
    CHECK(rep.monotone);
    CHECK_FALSE(rep.derivative_monotone);
    CHECK(rep.failed_axiom() == "derivative monotonicity");
    CHECK(rep.witness > 0.0);
    CHECK_THROWS_AS(require_valid_profile(cube_profile()), AxiomViolation);
}

TEST_CASE("weight values across the band") {
    const double eps = 0.125;
    const PhaseField lin(SProfile::linear(), eps, kDisk);
    const double R = std::sqrt(0.5);
    // d = 0 on the boundary.
    CHECK(lin.omega({R, 0.0}) == doctest::Approx(0.5).epsilon(1e-14));
    // d = -eps/2.
    CHECK(lin.omega({(R - eps / 2.0), 0.0}) == doctest::Approx(0.75).epsilon(1e-12));
    const PhaseField cub(SProfile::cubic(), eps, kDisk);
    // d = +eps/2: (1 + S(-1/2)) / 2.
    CHECK(cub.omega({(R + eps / 2.0), 0.0}) == doctest::Approx(0.15625).epsilon(1e-12));
    // Saturation.
    CHECK(lin.omega({0.0, 0.0}) == 1.0);
    CHECK(lin.omega({2.0, 0.0}) == 0.0);
}

TEST_CASE("surface density values") {
    const double eps = 0.1;
    const double R = std::sqrt(0.5);
    const PhaseField lin(SProfile::linear(), eps, kDisk);
    CHECK(lin.grad_omega_magnitude({R + eps / 3.0, 0.0}) ==
          doctest::Approx(1.0 / (2.0 * eps)).epsilon(1e-12));
    CHECK(lin.grad_omega_magnitude({R + 2.0 * eps, 0.0}) == 0.0);
    const PhaseField cub(SProfile::cubic(), eps, kDisk);
    CHECK(cub.grad_omega_magnitude({R, 0.0}) == doctest::Approx(0.75 / eps).epsilon(1e-12));
}

TEST_CASE("weight is antisymmetric under radial reflection") {
    const double eps = 0.2;
    const double R = std::sqrt(0.5);
    for (const char* name : {"linear", "cubic", "quintic"}) {
        const PhaseField pf(SProfile::by_name(name), eps, kDisk);
        for (int k = 0; k < 50; ++k) {
            const double d = -eps + 2.0 * eps * (k + 0.5) / 50.0;
            const double th = 0.37 + 0.11 * k;
            const Point2 plus{(R + d) * std::cos(th), (R + d) * std::sin(th)};
            const Point2 minus{(R - d) * std::cos(th), (R - d) * std::sin(th)};
            CHECK(pf.omega(plus) + pf.omega(minus) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("surface density matches the directional finite difference") {
    const double eps = 0.15;
    const double R = std::sqrt(0.5);
    const PhaseField pf(SProfile::cubic(), eps, kDisk);
    const double step = 1e-7 * eps;
    for (int k = 0; k < 40; ++k) {
        const double d = -0.9 * eps + 1.8 * eps * k / 39.0;
        const double th = 0.1 + 0.15 * k;
        const Point2 p{(R + d) * std::cos(th), (R + d) * std::sin(th)};
        const Point2 n = distance_gradient(kDisk, p);
        const Point2 fwd{p.x + step * n.x, p.y + step * n.y};
        const Point2 bwd{p.x - step * n.x, p.y - step * n.y};
        const double fd = std::abs(pf.omega(fwd) - pf.omega(bwd)) / (2.0 * step);
        CHECK(pf.grad_omega_magnitude(p) == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("weight obeys the power-law envelope in the band") {
    const double eps = 0.2;
    const double R = std::sqrt(0.5);
    for (const char* name : {"linear", "cubic", "quintic"}) {
        const SProfile s = SProfile::by_name(name);
        const PhaseField pf(s, eps, kDisk);
        for (int k = 1; k < 60; ++k) {
            const double d = -eps + 2.0 * eps * k / 60.0; // inside the band
            const Point2 p{R + d, 0.0};
            const double t = (eps - d) / eps; // dist(p, outer band edge) / eps
            const double w = pf.omega(p);
            CHECK(w >= s.zeta1() * std::pow(t, s.alpha()) * (1.0 - 1e-9));
            CHECK(w <= s.zeta2() * std::pow(t, s.alpha()) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("phase field validates its interface width") {
    CHECK_THROWS_AS(PhaseField(SProfile::linear(), -0.1, kDisk), ConfigError);
    CHECK_THROWS_AS(PhaseField(SProfile::linear(), 0.7, kDisk), ConfigError);
    CHECK_NOTHROW(PhaseField(SProfile::linear(), 0.5, kDisk));
}
