#include "ddlab/integrals.hpp"

#include "ddlab/errors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace ddlab;

namespace {

constexpr double kPi = std::numbers::pi;
const SharpDomain kDisk = SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));
const double kR = std::sqrt(0.5);

struct Setup {
    TriMesh mesh;
    ElementQuadrature quad;
};

Setup setup_for(const SharpDomain& domain, double eps, double gamma = 0.5) {
    Setup s;
    MeshPolicy policy;
    policy.gamma = gamma;
    s.mesh = mesh_for_eps(default_study_box(domain, eps), eps, policy);
    return s;
}

} // namespace

TEST_CASE("diffuse area of a disk matches the closed form") {
    const double eps = 0.1;
    // Linear: moment 2/3 -> area pi (R^2 + eps^2/3); cubic: 4/5 -> eps^2/5.
    CHECK(testing::profile_moment(SProfile::linear()) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(testing::profile_moment(SProfile::cubic()) == doctest::Approx(4.0 / 5.0).epsilon(1e-8));
    for (const char* name : {"linear", "cubic"}) {
        const SProfile s = SProfile::by_name(name);
        Setup su = setup_for(kDisk, eps);
        const PhaseField pf(s, eps, kDisk);
        const double value =
            diffuse_volume_integral(ScalarField::smooth(constant_fn(1.0)), pf, su.mesh, su.quad);
        const double expected = kPi * (kR * kR + eps * eps * (1.0 - testing::profile_moment(s)));
        CHECK(value == doctest::Approx(expected).epsilon(1e-4));
        CHECK(value == doctest::Approx(testing::radial_diffuse_area(s, kR, eps)).epsilon(1e-4));
    }
}

TEST_CASE("zero integrand gives exactly zero") {
    Setup su = setup_for(kDisk, 0.25);
    const PhaseField pf(SProfile::linear(), 0.25, kDisk);
    CHECK(diffuse_volume_integral(ScalarField::smooth(constant_fn(0.0)), pf, su.mesh, su.quad) ==
          0.0);
    CHECK(diffuse_surface_integral(ScalarField::smooth(constant_fn(0.0)), pf, su.mesh, su.quad) ==
          0.0);
}

TEST_CASE("diffuse perimeter of a circle is exact for every profile") {
    const double eps = 0.125;
    Setup su = setup_for(kDisk, eps);
    for (const char* name : {"linear", "cubic", "quintic"}) {
        const PhaseField pf(SProfile::by_name(name), eps, kDisk);
        const double value =
            diffuse_surface_integral(ScalarField::smooth(constant_fn(1.0)), pf, su.mesh, su.quad);
        CHECK(value == doctest::Approx(2.0 * kPi * kR).epsilon(1e-4));
    }
}

TEST_CASE("diffuse perimeter of the unit square carries an O(eps) corner defect") {
    const SharpDomain square = SharpDomain::rectangle({0.0, 0.0}, {1.0, 1.0});
    const double eps = 1.0 / 16.0;
    Setup su = setup_for(square, eps);
    const PhaseField pf(SProfile::linear(), eps, square);
    const double value =
        diffuse_surface_integral(ScalarField::smooth(constant_fn(1.0)), pf, su.mesh, su.quad);
    // Edge-wise 1D oracle: each unit edge contributes exactly 1. The corner
    // correction is eps (pi/8 - 1/2) per corner, about -0.027 total here.
    CHECK(std::abs(value - 4.0) / 4.0 < 2e-2);
    const double corner = 4.0 * eps * (kPi / 8.0 - 0.5);
    CHECK(value - 4.0 == doctest::Approx(corner).epsilon(0.05));
}

TEST_CASE("sharp volume integrals on the disk") {
    Setup su = setup_for(kDisk, 0.125);
    CHECK(sharp_volume_integral(ScalarField::smooth(constant_fn(1.0)), kDisk, su.mesh, su.quad) ==
          doctest::Approx(kPi / 2.0).epsilon(1e-3));
    CHECK(std::abs(sharp_volume_integral(ScalarField::smooth([](Point2 p) { return p.x; }), kDisk,
                                         su.mesh, su.quad)) < 1e-6);
    CHECK(sharp_volume_integral(
              ScalarField::smooth([](Point2 p) { return p.x * p.x + p.y * p.y; }), kDisk, su.mesh,
              su.quad) == doctest::Approx(kPi * kR * kR * kR * kR / 2.0).epsilon(1e-3));
}

TEST_CASE("eoc reproduces tabulated order ratios") {
    const auto a = eoc({0.199128, 0.049532});
    CHECK(a.size() == 1);
    CHECK(std::abs(a[0] - 2.01) < 0.005);
    const auto b = eoc({0.337471, 0.126688});
    CHECK(std::abs(b[0] - 1.41) < 0.005);
    const auto c = eoc({8.0, 4.0, 2.0});
    CHECK(c[0] == doctest::Approx(1.0));
    CHECK(c[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(eoc({1.0, 0.0}), NonPositiveError);
    CHECK_THROWS_AS(eoc({1.0, -0.5}), NonPositiveError);
}

TEST_CASE("volume study with unit integrand matches the closed-form defect") {
    const std::vector<double> eps = {0.25, 0.125, 0.0625};
    const IntegralStudy study =
        volume_error_study(ScalarField::smooth(constant_fn(1.0)), SProfile::linear(), kDisk, eps);
    REQUIRE(study.rows.size() == 3);
    for (const IntegralErrorRow& row : study.rows) {
        const double expected = kPi * row.eps * row.eps / 3.0;
        CHECK(row.error == doctest::Approx(expected).epsilon(1e-3));
    }
    REQUIRE(study.eocs.size() == 2);
    for (double e : study.eocs)
        CHECK(e == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("volume study with a smooth integrand converges at second order") {
    const ScalarField h = ScalarField::smooth(
        [](Point2 p) { return 10.0 * std::sin(kPi * p.x) - 5.0 * p.y * p.y; });
    MeshPolicy relaxed;
    relaxed.gamma = 1.0;
    const IntegralStudy study =
        volume_error_study(h, SProfile::linear(), kDisk, {0.25, 0.125, 0.0625}, relaxed);
    for (double e : study.eocs)
        CHECK(e == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("volume study of a band-symmetric integrand keeps second order") {
    // Even dependence on the oriented distance: the antisymmetric part of
    // the band averaging cancels, leaving the curvature term.
    const ScalarField h =
        ScalarField::smooth([](Point2 p) { return std::cos(signed_distance(kDisk, p)); });
    MeshPolicy relaxed;
    relaxed.gamma = 1.0;
    const IntegralStudy study =
        volume_error_study(h, SProfile::linear(), kDisk, {0.25, 0.125, 0.0625}, relaxed);
    for (double e : study.eocs)
        CHECK(e >= 1.9);
}

TEST_CASE("volume study with a boundary pole degrades gracefully") {
    const double mu = 0.8;
    const Point2 pole{kR * std::cos(1.0), kR * std::sin(1.0)};
    MeshPolicy relaxed;
    relaxed.gamma = 1.0;
    const IntegralStudy study = volume_error_study(ScalarField::singular_lp(mu, pole),
                                                   SProfile::linear(), kDisk,
                                                   {0.25, 0.125, 0.0625}, relaxed);
    // Lower bound only: 1 - mu/2 - 0.1.
    for (double e : study.eocs)
        CHECK(e >= 1.0 - mu / 2.0 - 0.1);
}

TEST_CASE("surface studies: exactness, smooth data, odd symmetry") {
    const std::vector<double> eps = {0.25, 0.125, 0.0625};

    const IntegralStudy ones =
        surface_error_study(ScalarField::smooth(constant_fn(1.0)), SProfile::linear(), kDisk, eps);
    for (const IntegralErrorRow& row : ones.rows)
        CHECK(row.error / row.sharp_value < 1e-4);

    const IntegralStudy x2 = surface_error_study(
        ScalarField::smooth([](Point2 p) { return p.x * p.x; }), SProfile::linear(), kDisk, eps);
    for (const IntegralErrorRow& row : x2.rows)
        CHECK(row.error == doctest::Approx(kPi * kR * row.eps * row.eps).epsilon(2e-2));
    for (double e : x2.eocs)
        CHECK(e == doctest::Approx(2.0).epsilon(0.1));

    Setup su = setup_for(kDisk, 0.125);
    const PhaseField pf(SProfile::linear(), 0.125, kDisk);
    const ScalarField odd = ScalarField::smooth([](Point2 p) { return p.y; });
    CHECK(std::abs(diffuse_surface_integral(odd, pf, su.mesh, su.quad)) < 1e-8);
    CHECK(std::abs(sharp_boundary_integral(odd, kDisk)) < 1e-8);
}

TEST_CASE("non-finite samples are rejected") {
    Setup su = setup_for(kDisk, 0.25);
    const PhaseField pf(SProfile::linear(), 0.25, kDisk);
    const ScalarField bad =
        ScalarField::smooth([](Point2) { return std::numeric_limits<double>::infinity(); });
    CHECK_THROWS_AS(diffuse_volume_integral(bad, pf, su.mesh, su.quad), NonFiniteSample);
}

TEST_CASE("study preconditions") {
    const ScalarField one = ScalarField::smooth(constant_fn(1.0));
    CHECK_THROWS_AS(volume_error_study(one, SProfile::linear(), kDisk, {0.25, 0.125}),
                    ConfigError);
    CHECK_THROWS_AS(volume_error_study(one, SProfile::linear(), kDisk, {0.125, 0.25, 0.0625}),
                    ConfigError);
    MeshPolicy bad;
    bad.gamma = 1.5;
    CHECK_THROWS_AS(mesh_for_eps({{0.0, 0.0}, {1.0, 1.0}}, 0.25, bad), ConfigError);
    MeshPolicy tiny_cap;
    tiny_cap.vertex_cap = 50;
    CHECK_THROWS_AS(mesh_for_eps({{0.0, 0.0}, {1.0, 1.0}}, 0.1, tiny_cap), ResourceLimit);
}

TEST_CASE("integral csv layout") {
    IntegralStudy study;
    study.rows = {{0.25, 1.1, 1.0, 0.1}, {0.125, 1.025, 1.0, 0.025}};
    study.eocs = {2.0};
    std::ostringstream out;
    write_integral_csv(study, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "eps,diffuse,sharp,error,eoc");
    std::getline(in, line);
    CHECK(line == "0.25,1.1,1,0.1,");
    std::getline(in, line);
    CHECK(line == "0.125,1.025,1,0.025,2.00");
}
