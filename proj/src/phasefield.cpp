#include "ddlab/phasefield.hpp"

#include "ddlab/errors.hpp"

#include <cmath>

namespace ddlab {

SProfile SProfile::linear() {
    SProfile p;
    p.kind_ = Kind::Linear;
    p.alpha_ = 1.0;
    p.zeta1_ = 0.5;
    p.zeta2_ = 0.5;
    return p;
}

SProfile SProfile::cubic() {
    SProfile p;
    p.kind_ = Kind::Cubic;
    p.alpha_ = 2.0;
    p.zeta1_ = 0.25;
    p.zeta2_ = 0.75;
    return p;
}

SProfile SProfile::quintic() {
    SProfile p;
    p.kind_ = Kind::Quintic;
    p.alpha_ = 3.0;
    p.zeta1_ = 0.125;
    p.zeta2_ = 2.5;
    return p;
}

SProfile SProfile::custom(std::function<double(double)> s,
                          std::function<double(double)> s_prime, double alpha,
                          double zeta1, double zeta2) {
    if (!s || !s_prime)
        throw ConfigError("custom profile requires both S and S'");
    if (!(alpha > 0.0 && zeta1 > 0.0 && zeta2 >= zeta1))
        throw ConfigError("custom profile requires alpha > 0 and 0 < zeta1 <= zeta2");
    SProfile p;
    p.kind_ = Kind::Custom;
    p.s_ = std::move(s);
    p.sp_ = std::move(s_prime);
    p.alpha_ = alpha;
    p.zeta1_ = zeta1;
    p.zeta2_ = zeta2;
    return p;
}

SProfile SProfile::by_name(const std::string& name) {
    if (name == "linear")
        return linear();
    if (name == "cubic")
        return cubic();
    if (name == "quintic")
        return quintic();
    throw ConfigError("unknown profile '" + name + "' (expected linear|cubic|quintic)");
}

const char* SProfile::name() const {
    switch (kind_) {
    case Kind::Linear: return "linear";
    case Kind::Cubic: return "cubic";
    case Kind::Quintic: return "quintic";
    case Kind::Custom: return "custom";
    }
    return "?";
}

double SProfile::value(double t) const {
    if (t >= 1.0)
        return 1.0;
    if (t <= -1.0)
        return -1.0;
    switch (kind_) {
    case Kind::Linear:
        return t;
    case Kind::Cubic:
        return 0.5 * (3.0 * t - t * t * t);
    case Kind::Quintic: {
        const double t2 = t * t;
        return t * (15.0 / 8.0 + t2 * (-5.0 / 4.0 + t2 * (3.0 / 8.0)));
    }
    case Kind::Custom:
        return s_(t);
    }
    return 0.0;
}

double SProfile::derivative(double t) const {
    if (t >= 1.0 || t <= -1.0)
        return 0.0;
    switch (kind_) {
    case Kind::Linear:
        return 1.0;
    case Kind::Cubic:
        return 1.5 * (1.0 - t * t);
    case Kind::Quintic: {
        const double t2 = t * t;
        return 15.0 / 8.0 + t2 * (-15.0 / 4.0 + t2 * (15.0 / 8.0));
    }
    case Kind::Custom:
        return sp_(t);
    }
    return 0.0;
}

std::string ProfileReport::failed_axiom() const {
    if (!antisymmetric)
        return "antisymmetry";
    if (!monotone)
        return "monotonicity";
    if (!envelope)
        return "power-law envelope";
    if (!derivative_monotone)
        return "derivative monotonicity";
    return {};
}

ProfileReport verify_profile(const SProfile& profile, int samples) {
    if (samples < 100)
        throw ConfigError("verify_profile requires samples >= 100");
    ProfileReport rep;
    rep.antisymmetric = rep.monotone = rep.envelope = rep.derivative_monotone = true;

    const double slack = 1e-12;

    // Antisymmetry and the clamp, sampled on (0, 2).
    for (int i = 1; i < samples; ++i) {
        const double t = 2.0 * i / samples;
        if (std::abs(profile.value(t) + profile.value(-t)) > slack ||
            (t >= 1.0 && std::abs(profile.value(t) - 1.0) > slack)) {
            rep.antisymmetric = false;
            rep.witness = t;
            break;
        }
    }

    // Monotone on the transition: positive derivative and increasing values.
    double prev = profile.value(-1.0);
    for (int i = 1; i <= samples && rep.monotone; ++i) {
        const double t = -1.0 + 2.0 * i / samples;
        const double v = profile.value(t);
        if (v + slack < prev || (t < 1.0 && !(profile.derivative(t) > 0.0))) {
            rep.monotone = false;
            rep.witness = t;
        }
        prev = v;
    }

    // Power-law envelope of (1 + S(t-1))/2 on (0, 2). The named profiles
    // attain the bounds with equality at the endpoints, hence the relative
    // slack.
    for (int i = 1; i < samples && rep.envelope; ++i) {
        const double t = 2.0 * i / samples;
        const double w = 0.5 * (1.0 + profile.value(t - 1.0));
        const double ta = std::pow(t, profile.alpha());
        const double lo = profile.zeta1() * ta;
        const double hi = profile.zeta2() * ta;
        if (w < lo * (1.0 - 1e-9) - slack || w > hi * (1.0 + 1e-9) + slack) {
            rep.envelope = false;
            rep.witness = t;
        }
    }

    // S' nonincreasing on [0, 1).
    double prev_d = profile.derivative(0.0);
    for (int i = 1; i < samples && rep.derivative_monotone; ++i) {
        const double t = static_cast<double>(i) / samples;
        if (t >= 1.0)
            break;
        const double d = profile.derivative(t);
        if (d > prev_d * (1.0 + 1e-9) + slack) {
            rep.derivative_monotone = false;
            rep.witness = t;
        }
        prev_d = d;
    }
    return rep;
}

void require_valid_profile(const SProfile& profile, int samples) {
    ProfileReport rep = verify_profile(profile, samples);
    if (!rep.all_pass())
        throw AxiomViolation("profile '" + std::string(profile.name()) + "' violates " +
                             rep.failed_axiom() + " at t = " + std::to_string(rep.witness));
}

PhaseField::PhaseField(SProfile profile, double eps, SharpDomain domain)
    : profile_(std::move(profile)), eps_(eps), domain_(std::move(domain)) {
    if (!(eps > 0.0))
        throw ConfigError("phase field requires eps > 0");
    if (eps > domain_.max_admissible_eps())
        throw ConfigError("eps " + std::to_string(eps) +
                          " exceeds the admissible bound " +
                          std::to_string(domain_.max_admissible_eps()) +
                          " for this domain");
}

double PhaseField::omega_from_distance(double d) const {
    return 0.5 * (1.0 + profile_.value(-d / eps_));
}

double PhaseField::grad_omega_magnitude_from_distance(double d) const {
    return profile_.derivative(-d / eps_) / (2.0 * eps_);
}

double PhaseField::omega(Point2 p) const {
    return omega_from_distance(signed_distance(domain_, p));
}

double PhaseField::grad_omega_magnitude(Point2 p) const {
    return grad_omega_magnitude_from_distance(signed_distance(domain_, p));
}

} // namespace ddlab
