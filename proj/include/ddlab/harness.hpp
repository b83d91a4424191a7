#pragma once

#include "ddlab/analysis.hpp"
#include "ddlab/fem.hpp"
#include "ddlab/toml.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ddlab {

/// Closed-form manufactured solution with the data derived from it.
struct ManufacturedCase {
    RefField reference;
    Coefficients coeffs;

    /// Robin data g = n . A grad(u*) + b u* on the boundary, extended into
    /// the band along normals (evaluation at the boundary projection).
    static ManufacturedCase robin(const SharpDomain& domain);
    /// Dirichlet datum g = u* at the boundary projection.
    static ManufacturedCase dirichlet(const SharpDomain& domain);
    /// Neumann datum g = n . A grad(u*); reaction c = 0.
    static ManufacturedCase neumann(const SharpDomain& domain);
    /// Constant solution u* = 1 with A = I, c = 1, b = 1 (f = 1, g = 1).
    static ManufacturedCase constant_one();
    /// Radial two-layer diffusion k1 / k2 with flux-matched piecewise
    /// solution; the coefficient jumps at radius r1 inside the disk.
    static ManufacturedCase radial_two_layer(const Disk& disk, double k1, double k2, double r1);
};

enum class CaseId { A, B, C, D, E, CustomRobin, CustomDirichlet, CustomNeumann };

const char* case_name(CaseId id);
CaseId case_by_name(const std::string& name);

enum class ReferenceKind { Manufactured, SelfConvergence };

struct CaseConfig {
    CaseId id = CaseId::A;
    SProfile profile = SProfile::linear();
    std::vector<double> eps_list = {0.5, 0.25, 0.125, 0.0625};
    MeshPolicy mesh_policy;
    ReferenceKind reference = ReferenceKind::Manufactured;
    int band_depth = 2;
    int interface_depth = 4;
    CgOptions solver;
    bool reference_initial_guess = false;

    // Case B parameters.
    double k1 = 1.0, k2 = 10.0, r1_frac = 0.9;
    // Case C parameters.
    std::vector<double> mu_list = {0.25, 0.5, 0.75, 1.0};
    double pole_angle = 1.0;
    // Case D parameters.
    std::vector<double> sigma_list = {0.75, 1.0};

    SharpDomain domain = SharpDomain::disk({0.0, 0.0}, std::sqrt(0.5));

    static CaseConfig for_case(CaseId id);
    static CaseConfig from_table(const toml::Table& table);
    toml::Table resolved_table() const;

    void validate() const; // throws ConfigError naming the offending key
};

struct StudyRow {
    double eps = 0.0;
    ErrorReport report;
    std::int64_t iterations = 0;
    double residual = 0.0;
    bool skipped = false;
    std::string skip_reason;
};

struct StudyResult {
    std::string label;      // e.g. "A", "D_sigma0.75", "C_mu0.5"
    std::vector<StudyRow> rows;
    /// Pairwise orders per restricted norm (L2, W12, W11, W1inf), aligned
    /// with rows; NaN where undefined (first row, skipped neighbours).
    std::array<std::vector<double>, 4> eocs;
    std::string config_hash;
    std::string timestamp;
    double sigma = 0.0; // penalty exponent, when applicable
    double mu = 0.0;    // source singularity exponent, when applicable

    const std::vector<double>& eoc(NormKind kind) const;
    /// Final pairwise order for the norm; throws if fewer than 2 rows.
    double final_eoc(NormKind kind) const;
};

/// Runs one manufactured study (cases A, B, D at a fixed sigma, E, and the
/// custom variants). Rows whose mesh exceeds the resource cap are marked
/// skipped; any other failure aborts with partial rows preserved.
StudyResult run_case(const CaseConfig& config);

/// Case B entry point: radial-layer reference built from (k1, k2, r1_frac).
StudyResult run_case_b(const CaseConfig& config);

/// Case C: one self-convergence study per mu (surrogate reference solved at
/// eps_min / 2 on its own mesh).
std::vector<StudyResult> run_case_c(const CaseConfig& config);

/// Dispatch on config.id; Case D expands its sigma list.
std::vector<StudyResult> run_study(const CaseConfig& config);

enum class EmitFormat { Csv, Json, PlotData };

/// Writes results.csv / results.json / plot_<norm>.dat (+ _ref slope lines)
/// into the directory. The CSV is byte-deterministic for a fixed config.
void emit_results(const StudyResult& result, const std::vector<EmitFormat>& formats,
                  const std::string& directory);

/// Optional single-file SVG line chart of all norms.
void emit_svg_chart(const StudyResult& result, const std::string& path);

/// Reference slope used for the plot guide lines; falls back to the final
/// observed order when no stated rate applies.
double expected_rate(const StudyResult& result, CaseId id, NormKind kind, double sigma);

std::string utc_timestamp();
std::string fnv1a_hex(const std::string& text);

} // namespace ddlab
