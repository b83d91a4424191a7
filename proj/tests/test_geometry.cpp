#include "ddlab/geometry.hpp"

#include "ddlab/errors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ddlab;

namespace {
const SharpDomain kDisk = SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));
const SharpDomain kUnitSquare = SharpDomain::rectangle({0.0, 0.0}, {1.0, 1.0});
}

TEST_CASE("signed distance on the disk") {
    CHECK(signed_distance(kDisk, {0.0, 0.0}) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-14));
    CHECK(signed_distance(kDisk, {std::sqrt(0.5), 0.0}) == doctest::Approx(0.0).epsilon(1e-14));
    // Radial exactness: d + R = |p - c| to machine precision.
    const auto pts = testing::lattice_points({{-2.0, -2.0}, {2.0, 2.0}}, 100);
    for (const Point2 p : pts) {
        CHECK(signed_distance(kDisk, p) + std::sqrt(0.5) ==
              doctest::Approx(norm(p)).epsilon(1e-14));
    }
}

TEST_CASE("signed distance on the rectangle") {
    CHECK(signed_distance(kUnitSquare, {0.5, 0.2}) == doctest::Approx(-0.2).epsilon(1e-12));
    const auto pts = testing::lattice_points({{-0.8, -0.8}, {1.8, 1.8}}, 40);
    for (const Point2 p : pts) {
        const double ref = testing::brute_force_rectangle_distance(kUnitSquare.as_rectangle(), p);
        CHECK(signed_distance(kUnitSquare, p) == doctest::Approx(ref).epsilon(1e-4));
    }
}

TEST_CASE("distance gradient directions") {
    const Point2 g1 = distance_gradient(kDisk, {1.0, 0.0});
    CHECK(g1.x == doctest::Approx(1.0));
    CHECK(g1.y == doctest::Approx(0.0));
    const Point2 g2 = distance_gradient(kDisk, {0.0, -2.0});
    CHECK(g2.x == doctest::Approx(0.0));
    CHECK(g2.y == doctest::Approx(-1.0));
    const Point2 g3 = distance_gradient(kUnitSquare, {0.5, 2.0});
    CHECK(g3.x == doctest::Approx(0.0));
    CHECK(g3.y == doctest::Approx(1.0));
}

TEST_CASE("distance gradient matches finite differences away from the singular set") {
    for (const SharpDomain& dom : {kDisk, kUnitSquare}) {
        const auto pts = testing::lattice_points({{-1.5, -1.5}, {2.5, 2.5}}, 200);
        int checked = 0;
        for (const Point2 p : pts) {
            Point2 g;
            try {
                g = distance_gradient(dom, p);
            } catch (const SingularPoint&) {
                continue;
            }
            // Skip points whose finite-difference stencil straddles a kink.
            const Point2 fd = testing::fd_distance_gradient(dom, p);
            if (std::abs(norm(fd) - 1.0) > 1e-5)
                continue;
            ++checked;
            CHECK(g.x == doctest::Approx(fd.x).epsilon(1e-5));
            CHECK(g.y == doctest::Approx(fd.y).epsilon(1e-5));
            CHECK(norm(g) == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(checked > 120);
    }
}

TEST_CASE("distance gradient reports singular points") {
    CHECK_THROWS_AS(distance_gradient(kDisk, {0.0, 0.0}), SingularPoint);
    CHECK_THROWS_AS(distance_gradient(kUnitSquare, {0.5, 0.5}), SingularPoint);
    CHECK_THROWS_AS(distance_gradient(kUnitSquare, {0.25, 0.25}), SingularPoint);
    CHECK_THROWS_AS(distance_gradient(kUnitSquare, {1.0, 1.0}), SingularPoint);
}

TEST_CASE("band classification follows the oriented distance") {
    CHECK(band_classify(kDisk, {0.0, 0.0}, 0.25) == BandPosition::Inside);
    CHECK(band_classify(kDisk, {std::sqrt(0.5), 0.0}, 0.25) == BandPosition::Band);
    CHECK(band_classify(kDisk, {2.0, 2.0}, 0.25) == BandPosition::Outside);
    const auto pts = testing::lattice_points({{-1.5, -1.5}, {1.5, 1.5}}, 200);
    for (const Point2 p : pts) {
        const double d = signed_distance(kDisk, p);
        const BandPosition b = band_classify(kDisk, p, 0.2);
        if (d <= -0.2)
            CHECK(b == BandPosition::Inside);
        else if (d >= 0.2)
            CHECK(b == BandPosition::Outside);
        else
            CHECK(b == BandPosition::Band);
    }
}

TEST_CASE("boundary quadrature integrates boundary integrals") {
    constexpr double pi = std::numbers::pi;
    double perimeter = 0.0;
    for (const BoundaryNode& n : boundary_quadrature(kDisk, 1))
        perimeter += n.weight;
    CHECK(perimeter == doctest::Approx(2.0 * pi * std::sqrt(0.5)).epsilon(1e-12));

    double rect_perimeter = 0.0;
    for (const BoundaryNode& n : boundary_quadrature(kUnitSquare, 1))
        rect_perimeter += n.weight;
    CHECK(rect_perimeter == doctest::Approx(4.0).epsilon(1e-12));

    const SharpDomain unit_disk = SharpDomain::disk({0.0, 0.0}, 1.0);
    double x2 = 0.0;
    for (const BoundaryNode& n : boundary_quadrature(unit_disk, 1))
        x2 += n.weight * n.point.x * n.point.x;
    CHECK(std::abs(x2 - pi) < 1e-10);
}

TEST_CASE("boundary projection returns the nearest point and outward normal") {
    const BoundaryPoint bp = boundary_projection(kDisk, {0.2, 0.0});
    CHECK(bp.point.x == doctest::Approx(std::sqrt(0.5)));
    CHECK(bp.normal.x == doctest::Approx(1.0));
    const BoundaryPoint outside = boundary_projection(kUnitSquare, {1.5, 1.5});
    CHECK(outside.point.x == doctest::Approx(1.0));
    CHECK(outside.point.y == doctest::Approx(1.0));
    CHECK(outside.normal.x == doctest::Approx(std::sqrt(0.5)));
    const BoundaryPoint edge = boundary_projection(kUnitSquare, {0.4, 0.1});
    CHECK(edge.point.y == doctest::Approx(0.0));
    CHECK(edge.normal.y == doctest::Approx(-1.0));
}

TEST_CASE("domain construction and box margins are validated") {
    CHECK_THROWS_AS(SharpDomain::disk({0.0, 0.0}, -1.0), ConfigError);
    CHECK_THROWS_AS(SharpDomain::rectangle({1.0, 0.0}, {0.0, 1.0}), ConfigError);
    const ComputationalBox box{{-1.0, -1.0}, {1.0, 1.0}};
    CHECK_NOTHROW(require_domain_inside(kDisk, box, 0.25));
    CHECK_THROWS_AS(require_domain_inside(kDisk, box, 0.5), ConfigError);
    CHECK(kDisk.max_admissible_eps() == doctest::Approx(0.75 * std::sqrt(0.5)));
    CHECK(kUnitSquare.max_admissible_eps() == doctest::Approx(0.5));
}
