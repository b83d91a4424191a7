#include "cli.hpp"

#include "ddlab/analysis.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/harness.hpp"
#include "ddlab/parallel.hpp"

#include <CLI11.hpp>

#include "ddlab/toml.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

namespace ddlab::cli {

namespace {

std::vector<double> parse_eps_csv(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("phasefield.eps: cannot parse '" + item + "'");
        }
    }
    if (out.empty())
        throw ConfigError("phasefield.eps: empty list");
    return out;
}

struct CommonStudyFlags {
    std::string config_path;
    std::string case_id = "A";
    std::string profile;
    std::string eps;
    double gamma = -1.0;
    std::int64_t vertex_cap = -1;
    int band_depth = -1;
    int interface_depth = -1;
    double tol = -1.0;
    std::vector<double> sigma;
    std::vector<double> mu;
    double k1 = -1.0, k2 = -1.0, r1_frac = -1.0, pole_angle = -1e300;
};

void add_study_flags(CLI::App* cmd, CommonStudyFlags& f) {
    cmd->add_option("--config", f.config_path, "TOML configuration file");
    cmd->add_option("--case", f.case_id, "Case id: A|B|C|D|E|custom-robin|custom-dirichlet|"
                                         "custom-neumann");
    cmd->add_option("--profile", f.profile, "Profile name: linear|cubic|quintic");
    cmd->add_option("--eps", f.eps, "Comma-separated decreasing interface widths");
    cmd->add_option("--gamma", f.gamma, "Mesh policy factor: h = gamma * eps^2");
    cmd->add_option("--vertex-cap", f.vertex_cap, "Mesh vertex cap");
    cmd->add_option("--band-depth", f.band_depth, "Band quadrature subdivision depth");
    cmd->add_option("--interface-depth", f.interface_depth,
                    "Interface quadrature subdivision depth");
    cmd->add_option("--tol", f.tol, "Linear solver relative residual");
    cmd->add_option("--sigma", f.sigma, "Penalty exponents (case D)");
    cmd->add_option("--mu", f.mu, "Source singularity exponents (case C)");
    cmd->add_option("--k1", f.k1, "Inner diffusivity (case B)");
    cmd->add_option("--k2", f.k2, "Outer diffusivity (case B)");
    cmd->add_option("--r1-frac", f.r1_frac, "Layer interface radius fraction (case B)");
    cmd->add_option("--pole-angle", f.pole_angle, "Pole angle on the boundary (case C)");
}

CaseConfig build_config(const CommonStudyFlags& f) {
    toml::Table table;
    if (!f.config_path.empty())
        table = toml::parse_file(f.config_path);
    // CLI flags override file keys.
    table.set("case.id", toml::Value::of_string(f.case_id));
    if (!f.profile.empty())
        table.set("phasefield.profile", toml::Value::of_string(f.profile));
    if (!f.eps.empty())
        table.set("phasefield.eps", toml::Value::of_numbers(parse_eps_csv(f.eps)));
    if (f.gamma > 0.0)
        table.set("mesh.gamma", toml::Value::of_number(f.gamma));
    if (f.vertex_cap > 0)
        table.set("mesh.vertex_cap", toml::Value::of_number(static_cast<double>(f.vertex_cap)));
    if (f.band_depth >= 0)
        table.set("mesh.band_depth", toml::Value::of_number(f.band_depth));
    if (f.interface_depth >= 0)
        table.set("mesh.interface_depth", toml::Value::of_number(f.interface_depth));
    if (f.tol > 0.0)
        table.set("solver.tol", toml::Value::of_number(f.tol));
    if (!f.sigma.empty())
        table.set("case.sigma", toml::Value::of_numbers(f.sigma));
    if (!f.mu.empty())
        table.set("case.mu", toml::Value::of_numbers(f.mu));
    if (f.k1 > 0.0)
        table.set("case.k1", toml::Value::of_number(f.k1));
    if (f.k2 > 0.0)
        table.set("case.k2", toml::Value::of_number(f.k2));
    if (f.r1_frac > 0.0)
        table.set("case.r1_frac", toml::Value::of_number(f.r1_frac));
    if (f.pole_angle > -1e299)
        table.set("case.pole_angle", toml::Value::of_number(f.pole_angle));
    return CaseConfig::from_table(table);
}

ScalarField named_field(const std::string& name, const SharpDomain& domain, double mu,
                        double angle) {
    constexpr double pi = std::numbers::pi;
    if (name == "const1")
        return ScalarField::smooth(constant_fn(1.0));
    if (name == "caseA")
        return ScalarField::smooth(
            [pi](Point2 p) { return 10.0 * std::sin(pi * p.x) - 5.0 * p.y * p.y; });
    if (name == "x")
        return ScalarField::smooth([](Point2 p) { return p.x; });
    if (name == "y")
        return ScalarField::smooth([](Point2 p) { return p.y; });
    if (name == "x2")
        return ScalarField::smooth([](Point2 p) { return p.x * p.x; });
    if (name == "y2")
        return ScalarField::smooth([](Point2 p) { return p.y * p.y; });
    if (name == "x2py2")
        return ScalarField::smooth([](Point2 p) { return p.x * p.x + p.y * p.y; });
    if (name == "sinxcosy")
        return ScalarField::smooth(
            [pi](Point2 p) { return std::sin(pi * p.x) * std::cos(pi * p.y); });
    if (name == "singular") {
        if (!domain.is_disk())
            throw ConfigError("field 'singular' requires the disk domain");
        const Disk d = domain.as_disk();
        return ScalarField::singular_lp(
            mu, {d.center.x + d.radius * std::cos(angle), d.center.y + d.radius * std::sin(angle)});
    }
    throw ConfigError("unknown field '" + name + "' (expected const1|caseA|x|y|x2|y2|x2py2|"
                      "sinxcosy|singular)");
}

struct OutputFlags {
    std::string root = "out";
    std::vector<std::string> formats = {"csv", "json", "plotdata"};
    bool svg = false;
    // Whether the flag was given on the command line (beats file keys).
    bool root_set = false, formats_set = false, svg_set = false;
};

int run_study_cmd(const CommonStudyFlags& flags, OutputFlags out, const std::string& stamp,
                  bool dry_run) {
    const CaseConfig config = build_config(flags);
    if (!flags.config_path.empty()) {
        // [output] file keys apply where no flag was given.
        const toml::Table t = toml::parse_file(flags.config_path);
        if (!out.root_set)
            out.root = t.get_string("output.dir", out.root);
        if (!out.formats_set)
            out.formats = t.get_strings("output.formats", out.formats);
        if (!out.svg_set)
            out.svg = t.get_bool("output.svg", out.svg);
    }
    if (dry_run) {
        config.resolved_table().write(std::cout);
        return 0;
    }
    std::vector<EmitFormat> emit;
    for (const std::string& f : out.formats) {
        if (f == "csv")
            emit.push_back(EmitFormat::Csv);
        else if (f == "json")
            emit.push_back(EmitFormat::Json);
        else if (f == "plotdata")
            emit.push_back(EmitFormat::PlotData);
        else
            throw ConfigError("output.formats: unknown format '" + f + "'");
    }
    const std::vector<StudyResult> results = run_study(config);
    for (const StudyResult& result : results) {
        const std::string dir = out.root + "/" + result.label + "/" +
                                (stamp.empty() ? result.timestamp : stamp);
        emit_results(result, emit, dir);
        {
            std::ofstream cfg(dir + "/config.resolved.toml");
            if (!cfg)
                throw IoError("cannot write config.resolved.toml in '" + dir + "'");
            config.resolved_table().write(cfg);
        }
        if (out.svg)
            emit_svg_chart(result, dir + "/chart.svg");
        std::cout << "study " << result.label << " -> " << dir << '\n';
        for (std::size_t k = 0; k < result.rows.size(); ++k) {
            const StudyRow& row = result.rows[k];
            if (row.skipped) {
                std::printf("  eps %-8g skipped: %s\n", row.eps, row.skip_reason.c_str());
                continue;
            }
            std::printf("  eps %-8g dofs %-8d iters %-6lld L2 %-11.4e W12 %-11.4e"
                        " W11 %-11.4e W1inf %-11.4e\n",
                        row.eps, row.report.dof_count,
                        static_cast<long long>(row.iterations), row.report.l2, row.report.w12,
                        row.report.w11, row.report.w1inf);
        }
    }
    return 0;
}

int run_integrals_cmd(const CommonStudyFlags& flags, bool surface, const std::string& field_name,
                      double field_mu, double field_angle, const std::string& domain_name,
                      const std::string& out_path) {
    CaseConfig base = build_config(flags);
    SharpDomain domain = domain_name == "square"
                             ? SharpDomain::rectangle({0.0, 0.0}, {1.0, 1.0})
                             : SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));
    const ScalarField field = named_field(field_name, domain, field_mu, field_angle);
    const std::vector<double> eps =
        flags.eps.empty() ? std::vector<double>{0.25, 0.125, 0.0625} : parse_eps_csv(flags.eps);
    const IntegralStudy study =
        surface ? surface_error_study(field, base.profile, domain, eps, base.mesh_policy)
                : volume_error_study(field, base.profile, domain, eps, base.mesh_policy);
    write_integral_csv(study, std::cout);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw IoError("cannot write '" + out_path + "'");
        write_integral_csv(study, out);
    }
    return 0;
}

int run_properties_cmd(const CommonStudyFlags& flags, const std::string& which,
                       unsigned seed) {
    if (which == "profile") {
        for (const char* name : {"linear", "cubic", "quintic"}) {
            const ProfileReport rep = verify_profile(SProfile::by_name(name), 1000);
            std::printf("profile %-8s antisymmetry %s monotone %s envelope %s"
                        " derivative-monotone %s\n",
                        name, rep.antisymmetric ? "pass" : "FAIL",
                        rep.monotone ? "pass" : "FAIL", rep.envelope ? "pass" : "FAIL",
                        rep.derivative_monotone ? "pass" : "FAIL");
        }
        return 0;
    }
    const CaseConfig config = build_config(flags);
    ElementQuadrature quad;
    quad.band_subdivision_depth = config.band_depth;
    EigenOptions opts;
    opts.seed = seed;
    const ComputationalBox box = default_study_box(config.domain, config.eps_list.front());
    for (double eps : config.eps_list) {
        const TriMesh mesh = mesh_for_eps(box, eps, config.mesh_policy);
        const PhaseField pf(config.profile, eps, config.domain);
        double value = 0.0;
        if (which == "trace")
            value = discrete_trace_constant(mesh, pf, quad, opts);
        else if (which == "poincare")
            value = discrete_poincare_friedrichs_constant(mesh, pf, quad, opts);
        else if (which == "poincare-mean")
            value = discrete_poincare_mean_constant(mesh, pf, quad, opts);
        else
            throw ConfigError("properties: unknown kind '" + which + "'");
        std::printf("%s eps %-8g constant %.8g\n", which.c_str(), eps, value);
    }
    return 0;
}

int run_solve_cmd(const CommonStudyFlags& flags, double eps, const std::string& out_path,
                  const std::string& matrix_path) {
    CaseConfig config = build_config(flags);
    if (eps > 0.0)
        config.eps_list = {eps, eps / 2.0}; // validate() needs a decreasing list
    config.validate();
    const double e = eps > 0.0 ? eps : config.eps_list.front();
    const ComputationalBox box = default_study_box(config.domain, e);
    const TriMesh mesh = mesh_for_eps(box, e, config.mesh_policy);
    ElementQuadrature quad;
    quad.band_subdivision_depth = config.band_depth;
    const PhaseField pf(config.profile, e, config.domain);

    ManufacturedCase mc;
    BCKind bc = BCKind::robin();
    switch (config.id) {
    case CaseId::B: {
        const Disk disk = config.domain.as_disk();
        mc = ManufacturedCase::radial_two_layer(disk, config.k1, config.k2,
                                                config.r1_frac * disk.radius);
        break;
    }
    case CaseId::D:
    case CaseId::CustomDirichlet:
        mc = ManufacturedCase::dirichlet(config.domain);
        bc = BCKind::dirichlet_penalty(config.sigma_list.front());
        break;
    case CaseId::CustomNeumann:
        mc = ManufacturedCase::neumann(config.domain);
        bc = BCKind::neumann();
        break;
    default:
        mc = ManufacturedCase::robin(config.domain);
        break;
    }
    const DiffuseSolution sol = solve_diffuse_problem(mesh, quad, pf, mc.coeffs, bc, config.solver);
    std::printf("solve %s eps %g dofs %d iters %lld residual %.3e\n", case_name(config.id), e,
                sol.stats.n_active, static_cast<long long>(sol.stats.iterations),
                sol.stats.relative_residual);
    const ErrorReport rep = compute_error_report(sol.u, mc.reference, config.domain, mesh, e,
                                                 sol.stats.n_active, config.interface_depth);
    std::printf("errors L2 %.4e W12 %.4e W11 %.4e W1inf %.4e\n", rep.l2, rep.w12, rep.w11,
                rep.w1inf);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw IoError("cannot write '" + out_path + "'");
        dump_solution(sol.u, out);
    }
    if (!matrix_path.empty()) {
        std::ofstream out(matrix_path);
        if (!out)
            throw IoError("cannot write '" + matrix_path + "'");
        sol.system.matrix.dump_matrix_market(out);
    }
    return 0;
}

int run_mesh_dump_cmd(double h, double x0, double y0, double x1, double y1,
                      const std::string& out_path) {
    const ComputationalBox box{{x0, y0}, {x1, y1}};
    const TriMesh mesh = build_structured_mesh(box, h);
    if (out_path.empty()) {
        dump_mesh(mesh, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw IoError("cannot write '" + out_path + "'");
        dump_mesh(mesh, out);
    }
    return 0;
}

} // namespace

int parse_and_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"ddlab: diffuse-domain studies for elliptic boundary value problems"};
    app.require_subcommand(1);
    // Long-only help: the short -h would clash with the --h field flag.
    app.set_help_flag("--help", "Print help and exit");

    int threads = 0;
    unsigned seed = 1;
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");
    app.add_option("--seed", seed, "Seed for sampled diagnostics");

    CommonStudyFlags study_flags;
    OutputFlags output;
    std::string stamp;
    bool dry_run = false;
    CLI::App* study = app.add_subcommand("study", "Run an eps-convergence study");
    study->set_help_flag("--help", "Print help and exit");
    add_study_flags(study, study_flags);
    CLI::Option* out_opt = study->add_option("--out", output.root, "Output root directory");
    study->add_option("--stamp", stamp, "Fixed run directory name (default: timestamp)");
    CLI::Option* fmt_opt =
        study->add_option("--format", output.formats, "Output formats: csv json plotdata");
    CLI::Option* svg_opt = study->add_flag("--svg", output.svg, "Also write an SVG chart");
    study->add_flag("--dry-run", dry_run, "Resolve and print the config, then exit");

    CommonStudyFlags integ_flags;
    bool volume = false, surface = false;
    std::string field_name = "const1";
    std::string domain_name = "disk";
    std::string integ_out;
    double field_mu = 0.8, field_angle = 1.0;
    CLI::App* integrals = app.add_subcommand("integrals", "Diffuse integral error study");
    integrals->set_help_flag("--help", "Print help and exit");
    add_study_flags(integrals, integ_flags);
    integrals->add_flag("--volume", volume, "Volume integral study");
    integrals->add_flag("--surface", surface, "Boundary integral study");
    integrals->add_option("--h", field_name,
                          "Integrand: const1|caseA|x|y|x2|y2|x2py2|sinxcosy|singular");
    integrals->add_option("--field-mu", field_mu, "Singularity exponent for --h singular");
    integrals->add_option("--field-angle", field_angle, "Pole angle for --h singular");
    integrals->add_option("--domain", domain_name, "disk|square");
    integrals->add_option("--out", integ_out, "Also write the CSV to this file");

    CommonStudyFlags prop_flags;
    std::string prop_kind = "profile";
    CLI::App* properties = app.add_subcommand("properties", "Verify profiles or estimate"
                                                            " inequality constants");
    properties->set_help_flag("--help", "Print help and exit");
    add_study_flags(properties, prop_flags);
    properties->add_option("--kind", prop_kind, "profile|trace|poincare|poincare-mean");

    CommonStudyFlags solve_flags;
    double solve_eps = -1.0;
    std::string solve_out, matrix_out;
    CLI::App* solve = app.add_subcommand("solve", "Single diffuse solve");
    solve->set_help_flag("--help", "Print help and exit");
    add_study_flags(solve, solve_flags);
    solve->add_option("--at-eps", solve_eps, "Interface width for the solve");
    solve->add_option("--out", solve_out, "Solution CSV path");
    solve->add_option("--matrix-out", matrix_out, "Matrix-market dump path");

    double mesh_h = 0.25, bx0 = -1.0, by0 = -1.0, bx1 = 1.0, by1 = 1.0;
    std::string mesh_out;
    CLI::App* meshdump = app.add_subcommand("mesh-dump", "Write a structured mesh as text");
    meshdump->set_help_flag("--help", "Print help and exit");
    meshdump->add_option("--h", mesh_h, "Target cell size");
    meshdump->add_option("--xmin", bx0, "Box xmin");
    meshdump->add_option("--ymin", by0, "Box ymin");
    meshdump->add_option("--xmax", bx1, "Box xmax");
    meshdump->add_option("--ymax", by1, "Box ymax");
    meshdump->add_option("--out", mesh_out, "Output path (default stdout)");

    std::vector<std::string> argv_like(args.rbegin(), args.rend());
    try {
        app.parse(std::move(argv_like));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        // solver.threads from a config file applies when --threads is absent.
        if (app.count("--threads") == 0 && study->parsed() && !study_flags.config_path.empty()) {
            const toml::Table t = toml::parse_file(study_flags.config_path);
            threads = static_cast<int>(t.get_integer("solver.threads", 0));
        }
        set_thread_count(threads);
        if (study->parsed()) {
            output.root_set = out_opt->count() > 0;
            output.formats_set = fmt_opt->count() > 0;
            output.svg_set = svg_opt->count() > 0;
            return run_study_cmd(study_flags, output, stamp, dry_run);
        }
        if (integrals->parsed()) {
            if (volume == surface)
                throw ConfigError("integrals: pass exactly one of --volume / --surface");
            return run_integrals_cmd(integ_flags, surface, field_name, field_mu, field_angle,
                                     domain_name, integ_out);
        }
        if (properties->parsed())
            return run_properties_cmd(prop_flags, prop_kind, seed);
        if (solve->parsed())
            return run_solve_cmd(solve_flags, solve_eps, solve_out, matrix_out);
        if (meshdump->parsed())
            return run_mesh_dump_cmd(mesh_h, bx0, by0, bx1, by1, mesh_out);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace ddlab::cli
