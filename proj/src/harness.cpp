#include "ddlab/harness.hpp"

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace ddlab {

namespace {

constexpr double kPi = std::numbers::pi;

double ustar(Point2 p) { return std::sin(kPi * p.x) * std::cos(kPi * p.y); }

Point2 ustar_grad(Point2 p) {
    return {kPi * std::cos(kPi * p.x) * std::cos(kPi * p.y),
            -kPi * std::sin(kPi * p.x) * std::sin(kPi * p.y)};
}

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

ManufacturedCase ManufacturedCase::robin(const SharpDomain& domain) {
    ManufacturedCase mc;
    mc.reference = {ustar, ustar_grad};
    mc.coeffs.A = [](Point2) { return Mat2::identity(); };
    mc.coeffs.c = constant_fn(1.0);
    mc.coeffs.b = constant_fn(1.0);
    mc.coeffs.f = [](Point2 p) { return (2.0 * kPi * kPi + 1.0) * ustar(p); };
    mc.coeffs.g = [domain](Point2 p) {
        const BoundaryPoint bp = boundary_projection(domain, p);
        return dot(bp.normal, ustar_grad(bp.point)) + ustar(bp.point);
    };
    return mc;
}

ManufacturedCase ManufacturedCase::dirichlet(const SharpDomain& domain) {
    ManufacturedCase mc = robin(domain);
    mc.coeffs.g = [domain](Point2 p) { return ustar(boundary_projection(domain, p).point); };
    return mc;
}

ManufacturedCase ManufacturedCase::neumann(const SharpDomain& domain) {
    ManufacturedCase mc;
    mc.reference = {ustar, ustar_grad};
    mc.coeffs.A = [](Point2) { return Mat2::identity(); };
    mc.coeffs.c = constant_fn(0.0);
    mc.coeffs.b = constant_fn(0.0);
    mc.coeffs.f = [](Point2 p) { return 2.0 * kPi * kPi * ustar(p); };
    mc.coeffs.g = [domain](Point2 p) {
        const BoundaryPoint bp = boundary_projection(domain, p);
        return dot(bp.normal, ustar_grad(bp.point));
    };
    return mc;
}

ManufacturedCase ManufacturedCase::constant_one() {
    ManufacturedCase mc;
    mc.reference = {constant_fn(1.0), [](Point2) { return Point2{0.0, 0.0}; }};
    mc.coeffs.c = constant_fn(1.0);
    mc.coeffs.b = constant_fn(1.0);
    mc.coeffs.f = constant_fn(1.0);
    mc.coeffs.g = constant_fn(1.0);
    return mc;
}

ManufacturedCase ManufacturedCase::radial_two_layer(const Disk& disk, double k1, double k2,
                                                    double r1) {
    if (!(k1 > 0.0 && k2 > 0.0))
        throw ConfigError("layer diffusivities must be positive");
    if (!(r1 > 0.0 && r1 < disk.radius))
        throw ConfigError("layer interface radius must lie inside the disk");
    // Inner solution a + b r^2 + e r^4, outer solution r^2, matched for
    // continuity of the value and of the radial flux k u' at r1. The quartic
    // term makes div(k grad u) jump across the interface; it scales with the
    // coefficient jump so equal layers reduce to the globally smooth r^2.
    const double e = 0.25 * (k2 / k1 - 1.0);
    const double b = k2 / k1 - 2.0 * e * r1 * r1;
    const double a = r1 * r1 * (1.0 - b) - e * r1 * r1 * r1 * r1;
    const Point2 ctr = disk.center;

    auto value = [=](Point2 p) {
        const double r2 = dot(p - ctr, p - ctr);
        if (r2 < r1 * r1)
            return a + b * r2 + e * r2 * r2;
        return r2;
    };
    auto gradient = [=](Point2 p) {
        const Point2 d = p - ctr;
        const double r2 = dot(d, d);
        const double s = r2 < r1 * r1 ? 2.0 * b + 4.0 * e * r2 : 2.0; // u'(r)/r
        return Point2{s * d.x, s * d.y};
    };

    ManufacturedCase mc;
    mc.reference = {value, gradient};
    mc.coeffs.A = [=](Point2 p) {
        const double r2 = dot(p - ctr, p - ctr);
        return Mat2::scaled(r2 < r1 * r1 ? k1 : k2);
    };
    mc.coeffs.c = constant_fn(1.0);
    mc.coeffs.b = constant_fn(1.0);
    mc.coeffs.f = [=](Point2 p) {
        const double r2 = dot(p - ctr, p - ctr);
        const double div = r2 < r1 * r1 ? k1 * (4.0 * b + 16.0 * e * r2) : 4.0 * k2;
        return -div + value(p);
    };
    const SharpDomain dom = SharpDomain::disk(disk.center, disk.radius);
    mc.coeffs.g = [=](Point2 p) {
        const BoundaryPoint bp = boundary_projection(dom, p);
        return dot(bp.normal, k2 * gradient(bp.point)) + value(bp.point);
    };
    return mc;
}

const char* case_name(CaseId id) {
    switch (id) {
    case CaseId::A: return "A";
    case CaseId::B: return "B";
    case CaseId::C: return "C";
    case CaseId::D: return "D";
    case CaseId::E: return "E";
    case CaseId::CustomRobin: return "custom-robin";
    case CaseId::CustomDirichlet: return "custom-dirichlet";
    case CaseId::CustomNeumann: return "custom-neumann";
    }
    return "?";
}

CaseId case_by_name(const std::string& name) {
    for (CaseId id : {CaseId::A, CaseId::B, CaseId::C, CaseId::D, CaseId::E, CaseId::CustomRobin,
                      CaseId::CustomDirichlet, CaseId::CustomNeumann})
        if (name == case_name(id))
            return id;
    throw ConfigError("unknown case '" + name + "' (expected A|B|C|D|E|custom-robin|"
                      "custom-dirichlet|custom-neumann)");
}

CaseConfig CaseConfig::for_case(CaseId id) {
    CaseConfig cfg;
    cfg.id = id;
    switch (id) {
    case CaseId::C:
        cfg.eps_list = {0.5, 0.25, 0.125};
        cfg.reference = ReferenceKind::SelfConvergence;
        break;
    case CaseId::E:
        cfg.domain = SharpDomain::rectangle({0.0, 0.0}, {1.0, 1.0});
        break;
    default:
        break;
    }
    return cfg;
}

void CaseConfig::validate() const {
    if (eps_list.size() < 2)
        throw ConfigError("phasefield.eps must contain at least 2 decreasing values");
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
        if (!(eps_list[k] > eps_list[k + 1]))
            throw ConfigError("phasefield.eps must be strictly decreasing");
    if (!(eps_list.back() > 0.0))
        throw ConfigError("phasefield.eps entries must be positive");
    if (eps_list.front() > domain.max_admissible_eps())
        throw ConfigError("phasefield.eps: largest value " + format_param(eps_list.front()) +
                          " exceeds the admissible bound " +
                          format_param(domain.max_admissible_eps()) + " for this domain");
    if (!(mesh_policy.gamma > 0.0 && mesh_policy.gamma <= 1.0))
        throw ConfigError("mesh.gamma must lie in (0, 1]");
    if (mesh_policy.vertex_cap < 16)
        throw ConfigError("mesh.vertex_cap is too small");
    if (band_depth < 0 || band_depth > 6)
        throw ConfigError("mesh.band_depth must lie in [0, 6]");
    if (interface_depth < 0 || interface_depth > 12)
        throw ConfigError("mesh.interface_depth must lie in [0, 12]");
    if (id == CaseId::B) {
        if (!(k1 > 0.0 && k2 > 0.0))
            throw ConfigError("case.k1 and case.k2 must be positive");
        if (!(r1_frac > 0.0 && r1_frac < 1.0))
            throw ConfigError("case.r1_frac must lie in (0, 1)");
    }
    if (id == CaseId::C) {
        if (reference != ReferenceKind::SelfConvergence)
            throw ConfigError("case C requires the self-convergence reference");
        if (mu_list.empty())
            throw ConfigError("case.mu must not be empty");
        for (double mu : mu_list)
            if (!(mu > 0.0 && mu < 2.0))
                throw ConfigError("case.mu entries must lie in (0, 2)");
    }
    if (id == CaseId::D || id == CaseId::CustomDirichlet) {
        if (sigma_list.empty())
            throw ConfigError("case.sigma must not be empty");
        for (double s : sigma_list)
            if (!(s > 0.0))
                throw ConfigError("case.sigma entries must be positive");
    }
    if (!(solver.tol > 0.0))
        throw ConfigError("solver.tol must be positive");
}

CaseConfig CaseConfig::from_table(const toml::Table& t) {
    CaseConfig cfg = for_case(case_by_name(t.get_string("case.id", "A")));
    const std::string domain_name =
        t.get_string("case.domain", cfg.id == CaseId::E ? "square" : "disk");
    if (domain_name == "disk") {
        const double r = t.get_number("case.disk_radius", std::sqrt(0.5));
        const double cx = t.get_number("case.disk_center_x", 0.0);
        const double cy = t.get_number("case.disk_center_y", 0.0);
        cfg.domain = SharpDomain::disk({cx, cy}, r);
    } else if (domain_name == "square") {
        const double x0 = t.get_number("case.square_min", 0.0);
        const double x1 = t.get_number("case.square_max", 1.0);
        cfg.domain = SharpDomain::rectangle({x0, x0}, {x1, x1});
    } else {
        throw ConfigError("case.domain must be 'disk' or 'square'");
    }
    const std::string ref = t.get_string("case.reference",
                                         cfg.reference == ReferenceKind::SelfConvergence
                                             ? "self"
                                             : "manufactured");
    if (ref == "self")
        cfg.reference = ReferenceKind::SelfConvergence;
    else if (ref == "manufactured")
        cfg.reference = ReferenceKind::Manufactured;
    else
        throw ConfigError("case.reference must be 'manufactured' or 'self'");
    cfg.k1 = t.get_number("case.k1", cfg.k1);
    cfg.k2 = t.get_number("case.k2", cfg.k2);
    cfg.r1_frac = t.get_number("case.r1_frac", cfg.r1_frac);
    cfg.mu_list = t.get_numbers("case.mu", cfg.mu_list);
    cfg.pole_angle = t.get_number("case.pole_angle", cfg.pole_angle);
    cfg.sigma_list = t.get_numbers("case.sigma", cfg.sigma_list);

    cfg.profile = SProfile::by_name(t.get_string("phasefield.profile", "linear"));
    cfg.eps_list = t.get_numbers("phasefield.eps", cfg.eps_list);

    cfg.mesh_policy.gamma = t.get_number("mesh.gamma", cfg.mesh_policy.gamma);
    cfg.mesh_policy.vertex_cap = t.get_integer("mesh.vertex_cap", cfg.mesh_policy.vertex_cap);
    cfg.band_depth = static_cast<int>(t.get_integer("mesh.band_depth", cfg.band_depth));
    cfg.interface_depth =
        static_cast<int>(t.get_integer("mesh.interface_depth", cfg.interface_depth));

    cfg.solver.tol = t.get_number("solver.tol", cfg.solver.tol);
    cfg.solver.max_iter = t.get_integer("solver.max_iter", 0);
    cfg.reference_initial_guess =
        t.get_bool("solver.reference_initial_guess", cfg.reference_initial_guess);
    cfg.validate();
    return cfg;
}

toml::Table CaseConfig::resolved_table() const {
    toml::Table t;
    t.set("case.id", toml::Value::of_string(case_name(id)));
    t.set("case.domain", toml::Value::of_string(domain.is_disk() ? "disk" : "square"));
    if (domain.is_disk()) {
        t.set("case.disk_radius", toml::Value::of_number(domain.as_disk().radius));
        t.set("case.disk_center_x", toml::Value::of_number(domain.as_disk().center.x));
        t.set("case.disk_center_y", toml::Value::of_number(domain.as_disk().center.y));
    } else {
        t.set("case.square_min", toml::Value::of_number(domain.as_rectangle().min.x));
        t.set("case.square_max", toml::Value::of_number(domain.as_rectangle().max.x));
    }
    t.set("case.reference", toml::Value::of_string(
                                reference == ReferenceKind::SelfConvergence ? "self"
                                                                            : "manufactured"));
    if (id == CaseId::B) {
        t.set("case.k1", toml::Value::of_number(k1));
        t.set("case.k2", toml::Value::of_number(k2));
        t.set("case.r1_frac", toml::Value::of_number(r1_frac));
    }
    if (id == CaseId::C) {
        t.set("case.mu", toml::Value::of_numbers(mu_list));
        t.set("case.pole_angle", toml::Value::of_number(pole_angle));
    }
    if (id == CaseId::D || id == CaseId::CustomDirichlet)
        t.set("case.sigma", toml::Value::of_numbers(sigma_list));
    t.set("phasefield.profile", toml::Value::of_string(profile.name()));
    t.set("phasefield.eps", toml::Value::of_numbers(eps_list));
    t.set("mesh.gamma", toml::Value::of_number(mesh_policy.gamma));
    t.set("mesh.vertex_cap", toml::Value::of_number(static_cast<double>(mesh_policy.vertex_cap)));
    t.set("mesh.band_depth", toml::Value::of_number(band_depth));
    t.set("mesh.interface_depth", toml::Value::of_number(interface_depth));
    t.set("solver.tol", toml::Value::of_number(solver.tol));
    t.set("solver.max_iter", toml::Value::of_number(static_cast<double>(solver.max_iter)));
    t.set("solver.reference_initial_guess", toml::Value::of_bool(reference_initial_guess));
    return t;
}

const std::vector<double>& StudyResult::eoc(NormKind kind) const {
    static const std::vector<double> empty;
    (void)empty;
    switch (kind) {
    case NormKind::L2_D: return eocs[0];
    case NormKind::W12_D: return eocs[1];
    case NormKind::W11_D: return eocs[2];
    case NormKind::W1inf_D: return eocs[3];
    default: throw ConfigError("study orders exist for restricted norms only");
    }
}

double StudyResult::final_eoc(NormKind kind) const {
    const std::vector<double>& e = eoc(kind);
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (std::isfinite(*it))
            return *it;
    throw ConfigError("study '" + label + "' has no convergence order for " + norm_name(kind));
}

namespace {

int norm_index(NormKind kind) {
    switch (kind) {
    case NormKind::L2_D: return 0;
    case NormKind::W12_D: return 1;
    case NormKind::W11_D: return 2;
    case NormKind::W1inf_D: return 3;
    default: return -1;
    }
}

constexpr NormKind kRestricted[4] = {NormKind::L2_D, NormKind::W12_D, NormKind::W11_D,
                                     NormKind::W1inf_D};

void finish_result(const CaseConfig& config, StudyResult& result) {
    for (auto& e : result.eocs)
        e.assign(result.rows.size(), std::numeric_limits<double>::quiet_NaN());
    std::ptrdiff_t prev = -1;
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        if (result.rows[k].skipped)
            continue;
        if (prev >= 0) {
            const StudyRow& a = result.rows[static_cast<std::size_t>(prev)];
            const StudyRow& b = result.rows[k];
            for (NormKind kind : kRestricted) {
                const double ea = a.report.by_kind(kind);
                const double eb = b.report.by_kind(kind);
                if (ea > 0.0 && eb > 0.0)
                    result.eocs[static_cast<std::size_t>(norm_index(kind))][k] =
                        std::log2(ea / eb);
            }
        }
        prev = static_cast<std::ptrdiff_t>(k);
    }
    std::ostringstream cfg;
    config.resolved_table().write(cfg);
    result.config_hash = fnv1a_hex(cfg.str());
    result.timestamp = utc_timestamp();
}

std::vector<double> nodal_reference(const TriMesh& mesh, const ActivityMap& activity,
                                    const RefField& ref) {
    std::vector<double> guess(static_cast<std::size_t>(activity.n_active), 0.0);
    for (std::int32_t k = 0; k < activity.n_active; ++k)
        guess[static_cast<std::size_t>(k)] = ref.value(
            mesh.vertex(activity.vertex_of_active[static_cast<std::size_t>(k)]));
    return guess;
}

StudyRow solve_row(const CaseConfig& config, const ComputationalBox& box, double eps,
                   const ManufacturedCase& mc, BCKind bc, const RefField& reference) {
    StudyRow row;
    row.eps = eps;
    TriMesh mesh;
    try {
        mesh = mesh_for_eps(box, eps, config.mesh_policy);
    } catch (const ResourceLimit& e) {
        row.skipped = true;
        row.skip_reason = e.what();
        return row;
    }
    if (!(std::max(mesh.dx, mesh.dy) < eps * eps))
        throw ConfigError("mesh spacing violates the h < eps^2 guard");

    ElementQuadrature quad;
    quad.band_subdivision_depth = config.band_depth;
    const PhaseField pf(config.profile, eps, config.domain);

    std::vector<double> guess;
    const std::vector<double>* guess_ptr = nullptr;
    if (config.reference_initial_guess) {
        const ActivityMap activity = compute_activity(mesh, quad, pf);
        guess = nodal_reference(mesh, activity, reference);
        guess_ptr = &guess;
    }
    const DiffuseSolution sol =
        solve_diffuse_problem(mesh, quad, pf, mc.coeffs, bc, config.solver, guess_ptr);
    row.iterations = sol.stats.iterations;
    row.residual = galerkin_residual(sol.system, sol.u);

    RefField ref = reference;
    if (bc.type == BCKind::Type::Neumann) {
        // The discrete solution has weighted mean zero; align the reference.
        ScalarField star = ScalarField::smooth(reference.value);
        const double mean =
            diffuse_volume_integral(star, pf, mesh, quad) / sol.system.omega_mass;
        auto base = reference.value;
        ref.value = [base, mean](Point2 p) { return base(p) - mean; };
    }
    row.report = compute_error_report(sol.u, ref, config.domain, mesh, eps,
                                      sol.stats.n_active, config.interface_depth);
    return row;
}

StudyResult run_manufactured(const CaseConfig& config, const std::string& label,
                             const ManufacturedCase& mc, BCKind bc) {
    config.validate();
    const double eps_max = config.eps_list.front();
    const ComputationalBox box = default_study_box(config.domain, eps_max);
    require_domain_inside(config.domain, box, eps_max);

    StudyResult result;
    result.label = label;
    for (double eps : config.eps_list)
        result.rows.push_back(solve_row(config, box, eps, mc, bc, mc.reference));
    finish_result(config, result);
    return result;
}

} // namespace

StudyResult run_case_b(const CaseConfig& config) {
    if (!config.domain.is_disk())
        throw ConfigError("case B requires a disk domain");
    const Disk disk = config.domain.as_disk();
    const ManufacturedCase mc =
        ManufacturedCase::radial_two_layer(disk, config.k1, config.k2,
                                           config.r1_frac * disk.radius);
    return run_manufactured(config, "B", mc, BCKind::robin());
}

namespace {

/// Owns the surrogate-reference solve of a self-convergence study.
struct SelfReference {
    std::unique_ptr<TriMesh> mesh;
    FEFunction u;
    RefField field() const {
        const FEFunction* fe = &u;
        return {[fe](Point2 p) { return fe->value_at(p); },
                [fe](Point2 p) { return fe->gradient_at(p); }};
    }
};

} // namespace

std::vector<StudyResult> run_case_c(const CaseConfig& config) {
    config.validate();
    if (!config.domain.is_disk())
        throw ConfigError("case C requires a disk domain");
    const Disk disk = config.domain.as_disk();
    const double eps_max = config.eps_list.front();
    const ComputationalBox box = default_study_box(config.domain, eps_max);
    require_domain_inside(config.domain, box, eps_max);
    const Point2 pole{disk.center.x + disk.radius * std::cos(config.pole_angle),
                      disk.center.y + disk.radius * std::sin(config.pole_angle)};

    std::vector<StudyResult> results;
    for (double mu : config.mu_list) {
        ManufacturedCase mc;
        mc.coeffs.c = constant_fn(1.0);
        mc.coeffs.b = constant_fn(1.0);
        mc.coeffs.g = constant_fn(0.0);
        const ScalarField f = ScalarField::singular_lp(mu, pole);
        mc.coeffs.f = f.evaluator;

        // Surrogate reference: the diffuse solution at half the finest eps,
        // on its own (finer) mesh. This measures self-convergence.
        const double eps_ref = config.eps_list.back() / 2.0;
        SelfReference ref;
        ref.mesh = std::make_unique<TriMesh>(
            mesh_for_eps(box, eps_ref, config.mesh_policy));
        ElementQuadrature quad;
        quad.band_subdivision_depth = config.band_depth;
        const PhaseField pf_ref(config.profile, eps_ref, config.domain);
        ref.u = solve_diffuse_problem(*ref.mesh, quad, pf_ref, mc.coeffs, BCKind::robin(),
                                      config.solver)
                    .u;
        mc.reference = ref.field();

        StudyResult result;
        result.label = std::string("C_mu") + format_param(mu);
        result.mu = mu;
        for (double eps : config.eps_list)
            result.rows.push_back(solve_row(config, box, eps, mc, BCKind::robin(), mc.reference));
        finish_result(config, result);
        results.push_back(std::move(result));
    }
    return results;
}

StudyResult run_case(const CaseConfig& config) {
    switch (config.id) {
    case CaseId::A:
        return run_manufactured(config, "A", ManufacturedCase::robin(config.domain),
                                BCKind::robin());
    case CaseId::B:
        return run_case_b(config);
    case CaseId::C:
        return run_case_c(config).front();
    case CaseId::D: {
        const double sigma = config.sigma_list.front();
        StudyResult r = run_manufactured(config, std::string("D_sigma") + format_param(sigma),
                                         ManufacturedCase::dirichlet(config.domain),
                                         BCKind::dirichlet_penalty(sigma));
        r.sigma = sigma;
        return r;
    }
    case CaseId::E:
        return run_manufactured(config, "E", ManufacturedCase::robin(config.domain),
                                BCKind::robin());
    case CaseId::CustomRobin:
        return run_manufactured(config, "custom-robin", ManufacturedCase::robin(config.domain),
                                BCKind::robin());
    case CaseId::CustomDirichlet: {
        const double sigma = config.sigma_list.front();
        StudyResult r = run_manufactured(config,
                                         std::string("custom-dirichlet_sigma") +
                                             format_param(sigma),
                                         ManufacturedCase::dirichlet(config.domain),
                                         BCKind::dirichlet_penalty(sigma));
        r.sigma = sigma;
        return r;
    }
    case CaseId::CustomNeumann:
        return run_manufactured(config, "custom-neumann",
                                ManufacturedCase::neumann(config.domain), BCKind::neumann());
    }
    throw ConfigError("unhandled case id");
}

std::vector<StudyResult> run_study(const CaseConfig& config) {
    if (config.id == CaseId::C)
        return run_case_c(config);
    if (config.id == CaseId::D || config.id == CaseId::CustomDirichlet) {
        std::vector<StudyResult> results;
        for (double sigma : config.sigma_list) {
            CaseConfig one = config;
            one.sigma_list = {sigma};
            results.push_back(run_case(one));
        }
        return results;
    }
    return {run_case(config)};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d_%H%M%S", &tm);
    return buf;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

double expected_rate(const StudyResult& result, CaseId id, NormKind kind, double sigma) {
    switch (id) {
    case CaseId::A:
    case CaseId::E:
    case CaseId::CustomRobin:
        if (kind == NormKind::L2_D || kind == NormKind::W11_D)
            return 2.0;
        if (kind == NormKind::W12_D)
            return 1.5;
        if (kind == NormKind::W1inf_D)
            return 1.0;
        break;
    case CaseId::B:
        if (kind == NormKind::W12_D || kind == NormKind::L2_D)
            return 1.0;
        break;
    case CaseId::D:
    case CaseId::CustomDirichlet:
        if (kind == NormKind::W12_D && sigma > 0.0)
            return sigma;
        if (kind == NormKind::L2_D && sigma > 0.0)
            return std::min(1.0, sigma + 0.25);
        break;
    default:
        break;
    }
    try {
        return result.final_eoc(kind);
    } catch (const Error&) {
        return 1.0;
    }
}

namespace {

std::string fmt(double v, const char* format = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

void write_csv(const StudyResult& result, std::ostream& out) {
    out << "case,eps,norm,error,eoc,dofs,iters\n";
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        const StudyRow& row = result.rows[k];
        if (row.skipped)
            continue;
        for (NormKind kind : kRestricted) {
            out << result.label << ',' << fmt(row.eps) << ',' << norm_name(kind) << ','
                << fmt(row.report.by_kind(kind)) << ',';
            const double e = result.eocs[static_cast<std::size_t>(norm_index(kind))][k];
            if (std::isfinite(e))
                out << fmt(e, "%.2f");
            out << ',' << row.report.dof_count << ',' << row.iterations << '\n';
        }
    }
}

void write_json(const StudyResult& result, std::ostream& out) {
    nlohmann::json j;
    j["case"] = result.label;
    j["config_hash"] = result.config_hash;
    j["timestamp"] = result.timestamp;
    if (result.sigma > 0.0)
        j["sigma"] = result.sigma;
    if (result.mu > 0.0)
        j["mu"] = result.mu;
    j["rows"] = nlohmann::json::array();
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        const StudyRow& row = result.rows[k];
        nlohmann::json r;
        r["eps"] = row.eps;
        if (row.skipped) {
            r["skipped"] = true;
            r["reason"] = row.skip_reason;
        } else {
            r["dofs"] = row.report.dof_count;
            r["iterations"] = row.iterations;
            r["residual"] = row.residual;
            for (NormKind kind : kRestricted) {
                r["error"][norm_name(kind)] = row.report.by_kind(kind);
                const double e = result.eocs[static_cast<std::size_t>(norm_index(kind))][k];
                if (std::isfinite(e))
                    r["eoc"][norm_name(kind)] = e;
            }
        }
        j["rows"].push_back(std::move(r));
    }
    out << j.dump(2) << '\n';
}

void write_plotdata(const StudyResult& result, CaseId id, const std::string& dir) {
    for (NormKind kind : kRestricted) {
        std::vector<std::pair<double, double>> pts;
        for (const StudyRow& row : result.rows) {
            if (row.skipped)
                continue;
            const double err = row.report.by_kind(kind);
            if (err > 0.0)
                pts.emplace_back(std::log2(1.0 / row.eps), std::log2(err));
        }
        if (pts.empty())
            continue;
        const std::string base = dir + "/plot_" + norm_name(kind);
        std::ofstream data(base + ".dat");
        if (!data)
            throw IoError("cannot write " + base + ".dat");
        for (const auto& [x, y] : pts)
            data << fmt(x) << ' ' << fmt(y) << '\n';

        // Guide line with the stated rate, anchored at the coarsest eps.
        const double r = expected_rate(result, id, kind, result.sigma);
        std::ofstream refline(base + "_ref.dat");
        if (!refline)
            throw IoError("cannot write " + base + "_ref.dat");
        for (const auto& [x, y] : pts) {
            (void)y;
            refline << fmt(x) << ' ' << fmt(pts.front().second - r * (x - pts.front().first))
                    << '\n';
        }
    }
}

} // namespace

void emit_results(const StudyResult& result, const std::vector<EmitFormat>& formats,
                  const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
        throw IoError("cannot create output directory '" + directory + "'");
    CaseId id = CaseId::CustomRobin;
    if (!result.label.empty()) {
        try {
            id = case_by_name(result.label.substr(0, result.label.find('_')));
        } catch (const ConfigError&) {
        }
    }
    for (EmitFormat format : formats) {
        switch (format) {
        case EmitFormat::Csv: {
            std::ofstream out(directory + "/results.csv");
            if (!out)
                throw IoError("cannot write results.csv in '" + directory + "'");
            write_csv(result, out);
            break;
        }
        case EmitFormat::Json: {
            std::ofstream out(directory + "/results.json");
            if (!out)
                throw IoError("cannot write results.json in '" + directory + "'");
            write_json(result, out);
            break;
        }
        case EmitFormat::PlotData:
            write_plotdata(result, id, directory);
            break;
        }
    }
}

void emit_svg_chart(const StudyResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    const double W = 640, H = 480, L = 60, Bm = 40;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    std::array<std::vector<std::pair<double, double>>, 4> series;
    for (int n = 0; n < 4; ++n) {
        for (const StudyRow& row : result.rows) {
            if (row.skipped)
                continue;
            const double err = row.report.by_kind(kRestricted[n]);
            if (!(err > 0.0))
                continue;
            const double x = std::log2(1.0 / row.eps);
            const double y = std::log2(err);
            series[static_cast<std::size_t>(n)].emplace_back(x, y);
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin > xmax) {
        out << "<svg xmlns='http://www.w3.org/2000/svg'/>\n";
        return;
    }
    const double sx = (W - L - 20) / std::max(1e-12, xmax - xmin);
    const double sy = (H - Bm - 20) / std::max(1e-12, ymax - ymin);
    const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='18' text-anchor='middle'>" << result.label
        << " error vs log2(1/eps)</text>\n";
    for (int n = 0; n < 4; ++n) {
        const auto& pts = series[static_cast<std::size_t>(n)];
        if (pts.empty())
            continue;
        out << "<polyline fill='none' stroke='" << colors[n] << "' stroke-width='2' points='";
        for (const auto& [x, y] : pts)
            out << L + (x - xmin) * sx << ',' << H - Bm - (y - ymin) * sy << ' ';
        out << "'/>\n";
        out << "<text x='" << W - 90 << "' y='" << 40 + 18 * n << "' fill='" << colors[n]
            << "'>" << norm_name(kRestricted[n]) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace ddlab
