// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code 0 iff all pass.
// Usage: ddlab_acceptance [criterion numbers...]

#include "ddlab/analysis.hpp"
#include "ddlab/harness.hpp"
#include "support/dense_eig.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace ddlab;

namespace {

constexpr double kPi = std::numbers::pi;
const SharpDomain kDisk = SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));
const double kR = std::sqrt(0.5);

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty())
            detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool in_band(Check& c, const char* label, double value, double lo, double hi) {
    const bool ok = value >= lo && value <= hi;
    c.require(ok, std::string(label) + " = " + fmt(value) + " outside [" + fmt(lo) + ", " +
                      fmt(hi) + "]");
    if (ok)
        c.note(std::string(label) + " = " + fmt(value));
    return ok;
}

// Residuals of every study solve, gathered for criterion 10.
std::vector<double> g_residuals;

void stash_residuals(const StudyResult& result) {
    for (const StudyRow& row : result.rows)
        if (!row.skipped)
            g_residuals.push_back(row.residual);
}

// --- criterion bodies -------------------------------------------------------

Check criterion_1_perimeter_exactness() {
    Check c;
    const ScalarField one = ScalarField::smooth(constant_fn(1.0));
    const double target = 2.0 * kPi * kR;
    for (const char* profile : {"linear", "cubic", "quintic"}) {
        for (double eps : {0.25, 0.125, 0.0625}) {
            const auto t0 = std::chrono::steady_clock::now();
            MeshPolicy policy;
            const TriMesh mesh = mesh_for_eps(default_study_box(kDisk, eps), eps, policy);
            ElementQuadrature quad;
            const PhaseField pf(SProfile::by_name(profile), eps, kDisk);
            const double value = diffuse_surface_integral(one, pf, mesh, quad);
            const double rel = std::abs(value - target) / target;
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            c.require(rel < 1e-3, std::string(profile) + " eps " + fmt(eps) + " rel err " +
                                      fmt(rel));
            c.require(secs < 10.0, std::string(profile) + " eps " + fmt(eps) +
                                       " configuration took " + fmt(secs) + " s");
        }
    }
    c.note("max rel err over 9 configurations < 1e-3");
    return c;
}

Check criterion_2_closed_form_volume_defect() {
    Check c;
    const ScalarField one = ScalarField::smooth(constant_fn(1.0));
    const std::vector<double> eps_list = {0.25, 0.125, 0.0625};
    const struct {
        const char* name;
        double coeff; // defect = coeff * pi * eps^2
    } cases[] = {{"linear", 1.0 / 3.0}, {"cubic", 1.0 / 5.0}};
    for (const auto& cfg : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const IntegralStudy study =
            volume_error_study(one, SProfile::by_name(cfg.name), kDisk, eps_list);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const IntegralErrorRow& row : study.rows) {
            const double expected = cfg.coeff * kPi * row.eps * row.eps;
            const double rel = std::abs(row.error - expected) / expected;
            c.require(rel < 1e-3, std::string(cfg.name) + " eps " + fmt(row.eps) +
                                      " defect off by " + fmt(rel));
        }
        c.require(secs < 10.0, std::string(cfg.name) + " study took " + fmt(secs) + " s");
    }
    c.note("volume defect matches pi eps^2 / 3 (linear) and / 5 (cubic)");
    return c;
}

Check criterion_3_smooth_integral_rates() {
    Check c;
    const ScalarField h = ScalarField::smooth(
        [](Point2 p) { return 10.0 * std::sin(kPi * p.x) - 5.0 * p.y * p.y; });
    const IntegralStudy study = volume_error_study(h, SProfile::linear(), kDisk,
                                                   {0.25, 0.125, 0.0625, 0.03125});
    for (double e : study.eocs)
        in_band(c, "pairwise order", e, 1.85, 2.15);
    return c;
}

Check criterion_4_case_a_rates() {
    Check c;
    const CaseConfig cfg = CaseConfig::for_case(CaseId::A);
    const StudyResult result = run_case(cfg);
    stash_residuals(result);
    in_band(c, "L2", result.final_eoc(NormKind::L2_D), 1.75, 2.25);
    in_band(c, "W12", result.final_eoc(NormKind::W12_D), 1.25, 1.75);
    in_band(c, "W11", result.final_eoc(NormKind::W11_D), 1.6, 2.3);
    in_band(c, "W1inf", result.final_eoc(NormKind::W1inf_D), 0.75, 1.25);
    return c;
}

Check criterion_5_case_b_degradation() {
    Check c;
    const CaseConfig cfg = CaseConfig::for_case(CaseId::B);
    const StudyResult result = run_case_b(cfg);
    stash_residuals(result);
    const double w12 = result.final_eoc(NormKind::W12_D);
    in_band(c, "W12 (finest pair)", w12, 0.75, 1.25);
    c.require(w12 < 1.25, "order " + fmt(w12) + " not strictly below the smooth-case band");
    return c;
}

Check criterion_6_case_d_penalty_rates() {
    Check c;
    {
        CaseConfig cfg = CaseConfig::for_case(CaseId::D);
        cfg.sigma_list = {0.75};
        cfg.eps_list = {0.25, 0.125, 0.0625, 0.03125};
        const auto t0 = std::chrono::steady_clock::now();
        const StudyResult result = run_case(cfg);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stash_residuals(result);
        in_band(c, "sigma 3/4: W12", result.final_eoc(NormKind::W12_D), 0.60, 0.90);
        c.require(secs < 900.0, "sigma 3/4 study took " + fmt(secs) + " s");
    }
    {
        CaseConfig cfg = CaseConfig::for_case(CaseId::D);
        cfg.sigma_list = {1.0};
        const auto t0 = std::chrono::steady_clock::now();
        const StudyResult result = run_case(cfg);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stash_residuals(result);
        in_band(c, "sigma 1: L2", result.final_eoc(NormKind::L2_D), 0.80, 1.20);
        c.require(secs < 900.0, "sigma 1 study took " + fmt(secs) + " s");
    }
    return c;
}

Check criterion_7_case_e_square() {
    Check c;
    const CaseConfig cfg = CaseConfig::for_case(CaseId::E);
    const StudyResult result = run_case(cfg);
    stash_residuals(result);
    in_band(c, "L2", result.final_eoc(NormKind::L2_D), 1.65, 2.35);
    in_band(c, "W12", result.final_eoc(NormKind::W12_D), 1.15, 1.85);
    in_band(c, "W11", result.final_eoc(NormKind::W11_D), 1.5, 2.4);
    in_band(c, "W1inf", result.final_eoc(NormKind::W1inf_D), 0.65, 1.35);
    return c;
}

Check criterion_8_inequality_constants() {
    Check c;
    ElementQuadrature quad;
    // eps-sweep: the three discrete constants stay within a factor 2.
    MeshPolicy policy;
    policy.gamma = 1.0;
    double lo[3] = {1e300, 1e300, 1e300};
    double hi[3] = {0.0, 0.0, 0.0};
    for (double eps : {0.25, 0.125, 0.0625}) {
        const TriMesh mesh = mesh_for_eps(default_study_box(kDisk, 0.25), eps, policy);
        const PhaseField pf(SProfile::linear(), eps, kDisk);
        const InequalityConstants k = compute_inequality_constants(mesh, pf, quad);
        const double v[3] = {k.trace, k.poincare_friedrichs, k.poincare_mean};
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }
    }
    const char* names[3] = {"trace", "poincare-friedrichs", "poincare-mean"};
    for (int i = 0; i < 3; ++i) {
        c.require(hi[i] < 2.0 * lo[i], std::string(names[i]) + " spread " + fmt(hi[i] / lo[i]) +
                                           " exceeds a factor 2");
        c.note(std::string(names[i]) + " spread " + fmt(hi[i] / lo[i]));
    }

    // Dense-oracle agreement on a tiny mesh.
    const TriMesh tiny = build_structured_mesh({{-1.25, -1.25}, {1.25, 1.25}}, 0.22);
    const PhaseField pf(SProfile::linear(), 0.25, kDisk);
    const ActivityMap activity = compute_activity(tiny, quad, pf);
    c.require(activity.n_active <= 300, "dense check mesh has too many DOFs");
    const SparseCsr bmass = assemble_operator(tiny, quad, pf, activity,
                                              WeightedOperator::BoundaryMass);
    const SparseCsr stiff = assemble_operator(tiny, quad, pf, activity,
                                              WeightedOperator::StiffnessOmega);
    const SparseCsr mass = assemble_operator(tiny, quad, pf, activity,
                                             WeightedOperator::MassOmega);
    const auto dense_b = testing::DenseMatrix::from_sparse(bmass);
    const auto dense_k = testing::DenseMatrix::from_sparse(stiff);
    const auto dense_m = testing::DenseMatrix::from_sparse(mass);
    EigenOptions opts;
    opts.tol = 1e-8;

    testing::DenseMatrix km = dense_k;
    for (std::size_t i = 0; i < km.a.size(); ++i)
        km.a[i] += dense_m.a[i];
    const double trace_dense = testing::dense_generalized_max_eigenvalue(dense_b, km);
    const double trace_iter = discrete_trace_constant(tiny, pf, quad, opts);
    c.require(std::abs(trace_iter - trace_dense) <= 1e-5 * trace_dense,
              "trace vs dense oracle: " + fmt(trace_iter) + " vs " + fmt(trace_dense));

    testing::DenseMatrix kb = dense_k;
    for (std::size_t i = 0; i < kb.a.size(); ++i)
        kb.a[i] += dense_b.a[i];
    const double pfc_dense = testing::dense_generalized_max_eigenvalue(dense_m, kb);
    const double pfc_iter = discrete_poincare_friedrichs_constant(tiny, pf, quad, opts);
    c.require(std::abs(pfc_iter - pfc_dense) <= 1e-5 * pfc_dense,
              "poincare-friedrichs vs dense oracle: " + fmt(pfc_iter) + " vs " + fmt(pfc_dense));

    const std::vector<double> mvec = weighted_mean_vector(tiny, quad, pf, activity);
    const double mean_dense =
        testing::dense_generalized_max_eigenvalue_constrained(dense_m, dense_k, mvec);
    const double mean_iter = discrete_poincare_mean_constant(tiny, pf, quad, opts);
    c.require(std::abs(mean_iter - mean_dense) <= 1e-5 * mean_dense,
              "poincare-mean vs dense oracle: " + fmt(mean_iter) + " vs " + fmt(mean_dense));
    return c;
}

Check criterion_9_profile_axioms() {
    Check c;
    const struct {
        const char* name;
        double alpha, zeta1, zeta2;
    } expected[] = {{"linear", 1.0, 0.5, 0.5},
                    {"cubic", 2.0, 0.25, 0.75},
                    {"quintic", 3.0, 0.125, 2.5}};
    for (const auto& e : expected) {
        const SProfile p = SProfile::by_name(e.name);
        c.require(p.alpha() == e.alpha && p.zeta1() == e.zeta1 && p.zeta2() == e.zeta2,
                  std::string(e.name) + " envelope constants");
        c.require(verify_profile(p, 1000).all_pass(), std::string(e.name) + " axioms");
    }
    // Odd, strictly monotone, but with an increasing derivative on (0,1).
    const SProfile bad =
        SProfile::custom([](double t) { return (t * t * t + 0.1 * t) / 1.1; },
                         [](double t) { return (3.0 * t * t + 0.1) / 1.1; }, 1.0, 0.38, 1.42);
    const ProfileReport rep = verify_profile(bad, 1000);
    c.require(!rep.all_pass() && !rep.derivative_monotone,
              "constructed violator was not rejected for derivative monotonicity");
    return c;
}

Check criterion_10_solver_contracts() {
    Check c;
    double max_res = 0.0;
    for (double r : g_residuals)
        max_res = std::max(max_res, r);
    c.require(!g_residuals.empty() && max_res <= 1e-9,
              "max study residual " + fmt(max_res));
    c.note("max relative residual over " + std::to_string(g_residuals.size()) +
           " study solves: " + fmt(max_res));

    // Constant consistency: u* = 1 reproduced to solver tolerance.
    const TriMesh mesh = build_structured_mesh({{-1.25, -1.25}, {1.25, 1.25}}, 0.03125);
    ElementQuadrature quad;
    const PhaseField pf(SProfile::linear(), 0.25, kDisk);
    const ManufacturedCase mc = ManufacturedCase::constant_one();
    const DiffuseSolution sol =
        solve_diffuse_problem(mesh, quad, pf, mc.coeffs, BCKind::robin(), {1e-12, 0});
    double dev = 0.0;
    for (std::int32_t k = 0; k < sol.system.activity.n_active; ++k) {
        const std::int32_t v = sol.system.activity.vertex_of_active[static_cast<std::size_t>(k)];
        dev = std::max(dev, std::abs(sol.u.values[static_cast<std::size_t>(v)] - 1.0));
    }
    c.require(dev <= 1e-6, "constant solution deviates by " + fmt(dev));

    // Neumann: weighted mean of the solution vanishes.
    Coefficients nc;
    nc.c = constant_fn(0.0);
    nc.b = constant_fn(0.0);
    nc.f = [](Point2 p) { return p.x + 0.3; };
    nc.g = constant_fn(0.1);
    const DiffuseSolution nsol =
        solve_diffuse_problem(mesh, quad, pf, nc, BCKind::neumann(), {1e-11, 0});
    double mean = 0.0, scale = 0.0;
    for (std::int32_t k = 0; k < nsol.system.activity.n_active; ++k) {
        const std::int32_t v = nsol.system.activity.vertex_of_active[static_cast<std::size_t>(k)];
        mean += (*nsol.system.constraint)[static_cast<std::size_t>(k)] *
                nsol.u.values[static_cast<std::size_t>(v)];
        scale = std::max(scale, std::abs(nsol.u.values[static_cast<std::size_t>(v)]));
    }
    const double rel_mean = std::abs(mean) / (nsol.system.omega_mass * scale);
    c.require(rel_mean <= 1e-9, "Neumann weighted mean " + fmt(rel_mean));
    return c;
}

Check criterion_11_case_c_monotonicity() {
    Check c;
    const CaseConfig cfg = CaseConfig::for_case(CaseId::C);
    const std::vector<StudyResult> results = run_case_c(cfg);
    double prev = 1e300;
    std::string rates;
    for (const StudyResult& r : results) {
        stash_residuals(r);
        const double rate = r.final_eoc(NormKind::W12_D);
        rates += (rates.empty() ? "" : ", ") + fmt(rate);
        c.require(rate <= prev + 0.1,
                  "W12 rate increased beyond slack at mu " + fmt(r.mu));
        prev = rate;
    }
    c.note("W12 self-convergence rates over mu {0.25, 0.5, 0.75, 1}: " + rates);
    return c;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int id) { return selected.empty() || selected.count(id) != 0; };

    struct Entry {
        int id;
        const char* title;
        std::function<Check()> run;
    };
    const std::vector<Entry> entries = {
        {1, "diffuse perimeter exactness on the disk", criterion_1_perimeter_exactness},
        {2, "closed-form diffuse volume defect", criterion_2_closed_form_volume_defect},
        {3, "second-order smooth integral rates", criterion_3_smooth_integral_rates},
        {4, "case A Robin rates", criterion_4_case_a_rates},
        {5, "case B discontinuous-coefficient degradation", criterion_5_case_b_degradation},
        {6, "case D penalty rates", criterion_6_case_d_penalty_rates},
        {7, "case E square rates", criterion_7_case_e_square},
        {8, "eps-uniform inequality constants", criterion_8_inequality_constants},
        {9, "profile axiom suite", criterion_9_profile_axioms},
        {10, "solver contracts", criterion_10_solver_contracts},
        {11, "case C singular-source monotonicity", criterion_11_case_c_monotonicity},
    };

    // Criterion 10 aggregates residuals of the study criteria, so those run
    // first; the report prints in criterion order at the end.
    const std::vector<int> order = {1, 2, 3, 4, 5, 6, 7, 11, 8, 9, 10};
    struct Outcome {
        Check check;
        double seconds = 0.0;
        bool ran = false;
    };
    std::vector<Outcome> outcomes(entries.size() + 1);
    bool all_ok = true;
    for (int id : order) {
        if (!wanted(id))
            continue;
        const Entry& e = entries[static_cast<std::size_t>(id - 1)];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome& out = outcomes[static_cast<std::size_t>(id)];
        try {
            out.check = e.run();
        } catch (const std::exception& ex) {
            out.check.ok = false;
            out.check.detail = std::string("exception: ") + ex.what();
        }
        out.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.ran = true;
        all_ok = all_ok && out.check.ok;
        std::fprintf(stderr, "criterion %d finished in %.1f s\n", id, out.seconds);
    }
    for (const Entry& e : entries) {
        const Outcome& out = outcomes[static_cast<std::size_t>(e.id)];
        if (!out.ran)
            continue;
        std::printf("[%s] criterion %2d: %s (%.1f s)%s%s\n", out.check.ok ? "PASS" : "FAIL",
                    e.id, e.title, out.seconds, out.check.detail.empty() ? "" : " -- ",
                    out.check.detail.c_str());
    }
    return all_ok ? 0 : 1;
}
