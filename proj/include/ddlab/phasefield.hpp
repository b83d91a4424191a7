#pragma once

#include "ddlab/geometry.hpp"

#include <functional>
#include <string>

namespace ddlab {

/// Sigmoid profile S used to smear the indicator of D. Built-in profiles are
/// polynomial odd sigmoids clamped to +-1 outside (-1,1); each carries the
/// exponent alpha and envelope constants (zeta1, zeta2) of its power-law
/// behaviour near the outer band edge:
///   zeta1 t^alpha <= (1 + S(t-1))/2 <= zeta2 t^alpha  on (0,2).
class SProfile {
public:
    enum class Kind { Linear, Cubic, Quintic, Custom };

    static SProfile linear();
    static SProfile cubic();
    static SProfile quintic();
    static SProfile custom(std::function<double(double)> s,
                           std::function<double(double)> s_prime, double alpha,
                           double zeta1, double zeta2);

    /// Lookup by name ("linear" | "cubic" | "quintic"); throws ConfigError.
    static SProfile by_name(const std::string& name);

    Kind kind() const { return kind_; }
    const char* name() const;
    double alpha() const { return alpha_; }
    double zeta1() const { return zeta1_; }
    double zeta2() const { return zeta2_; }

    /// S(t) with the hard clamp S(t) = t/|t| for |t| >= 1.
    double value(double t) const;
    /// S'(t); zero for |t| >= 1 (one-sided convention at the clamp).
    double derivative(double t) const;

private:
    Kind kind_ = Kind::Linear;
    double alpha_ = 1.0, zeta1_ = 0.5, zeta2_ = 0.5;
    std::function<double(double)> s_;
    std::function<double(double)> sp_;
};

/// Per-axiom outcome of a profile verification sweep.
struct ProfileReport {
    bool antisymmetric = false;   // S(-t) = -S(t), clamp exact outside (-1,1)
    bool monotone = false;        // S nondecreasing, S' > 0 on (-1,1)
    bool envelope = false;        // power-law bounds with (alpha, zeta1, zeta2)
    bool derivative_monotone = false; // S' nonincreasing on [0,1)
    double witness = 0.0;         // sample t of the first failure, if any

    bool all_pass() const {
        return antisymmetric && monotone && envelope && derivative_monotone;
    }
    /// Name of the first failed axiom, or empty if all pass.
    std::string failed_axiom() const;
};

/// Samples the profile axioms on a uniform grid; samples >= 100 required.
ProfileReport verify_profile(const SProfile& profile, int samples);

/// Same, but throws AxiomViolation naming the failed axiom and witness.
void require_valid_profile(const SProfile& profile, int samples = 1000);

/// Phase-field description of D at interface half-width eps: the weight
/// omega = (1 + S(-d_D/eps)) / 2 equals 1 deep inside D, 0 outside the
/// eps-enlarged domain, and transitions across the band.
class PhaseField {
public:
    PhaseField(SProfile profile, double eps, SharpDomain domain);

    const SProfile& profile() const { return profile_; }
    double eps() const { return eps_; }
    const SharpDomain& domain() const { return domain_; }

    double omega(Point2 p) const;
    /// Diffuse surface density |grad omega| = S'(-d_D/eps) / (2 eps);
    /// identically zero outside the band, so no distance gradient is needed.
    double grad_omega_magnitude(Point2 p) const;

    double omega_from_distance(double d) const;
    double grad_omega_magnitude_from_distance(double d) const;

private:
    SProfile profile_;
    double eps_;
    SharpDomain domain_;
};

} // namespace ddlab
