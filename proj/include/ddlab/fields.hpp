#pragma once

#include "ddlab/geometry.hpp"

#include <functional>

namespace ddlab {

using ScalarFn = std::function<double(Point2)>;

inline ScalarFn constant_fn(double v) {
    return [v](Point2) { return v; };
}

/// Scalar integrand with a smoothness tag. Singular fields declare their
/// pole so studies can audit node placement; evaluation happens at
/// quadrature nodes only and any non-finite sample is an error.
struct ScalarField {
    enum class Smoothness { Smooth, SingularLp };

    ScalarFn evaluator;
    Smoothness tag = Smoothness::Smooth;
    double mu = 0.0;  // singularity exponent (SingularLp)
    Point2 pole;      // pole location (SingularLp)

    static ScalarField smooth(ScalarFn f) {
        return {std::move(f), Smoothness::Smooth, 0.0, {}};
    }
    /// |x - pole|^(-mu).
    static ScalarField singular_lp(double mu, Point2 pole);
};

} // namespace ddlab
