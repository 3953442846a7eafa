/** @file bench.hpp

    @brief Benchmark studies: biharmonic convergence, plate spectrum, shell
    energy sequences, membrane stress fields and quad-layout tracing, with
    CSV reports and least-squares convergence rates.

    Level k of a convergence study uses 2^k elements per direction on each
    patch of the six-patch domain and 2^(k+1) on the single patch, so the
    nominal element size is h = 2^-(k+1) in both cases.
*/

#pragma once

#include "mpiga/shell.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpiga {

enum class Study { Biharmonic, Spectrum, ShellHyperbolic, ShellElliptic, Stress, Trace };
enum class DomainKind { Single, Fig6, File };

std::string to_string(Study s);
std::string to_string(DomainKind d);

/// Configuration that cannot be run (unknown names, unsupported
/// combinations, failed requirement gate).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Requirement-gate rejection; `report` lists the failed conditions.
class GateError : public ConfigError
{
public:
    GateError(const std::string& what, RequirementReport report) : ConfigError(what), report(std::move(report)) {}
    RequirementReport report;
};

struct CouplingSpec
{
    enum class Kind { Single, C0, Penalty, Nitsche, SmoothC1 };

    Kind kind = Kind::SmoothC1;
    std::optional<double> alpha; ///< penalty / Nitsche parameter

    /// "single", "c0", "penalty", "penalty(10)", "nitsche(1e5)", "smooth-c1".
    static CouplingSpec parse(const std::string& text);
    std::string str() const;
};

struct BenchConfig
{
    Study study = Study::Biharmonic;
    DomainKind domain = DomainKind::Fig6;
    std::string domain_file;   ///< .mpatch for DomainKind::File
    CouplingSpec coupling;
    int p = 3;
    int r = 1;
    int levels = 0;            ///< 0 selects the study default
    int first_level = 1;
    int elements = 0;          ///< fixed-mesh studies; 0 selects the study default
    double boundary_alpha = 1e5;
    double rotation_factor = 1e3;
    double load_scale = 1.0;
    int grid = 64;             ///< stress sampling cells per patch direction
    int samples = 200;         ///< interface stress samples
    std::string mesh;          ///< quad mesh for the trace study
    std::string output = ".";
    std::string dump_maps;     ///< directory for extraction/constraint matrices, empty disables
    bool quiet = false;

    int effective_levels() const;
    int effective_elements() const;
    /// Interface parameter after study defaults (Nitsche 1e5, biharmonic and
    /// plate penalty 1e5, shell penalty 10).
    double effective_alpha() const;
};

/// Applies one key = value setting; keys mirror the long CLI flags.
void apply_config_key(BenchConfig& cfg, const std::string& key, const std::string& value);
/// Reads `key = value` lines ('#' starts a comment).
void load_config_file(BenchConfig& cfg, const std::string& path);
Study parse_study(const std::string& s);
DomainKind parse_domain(const std::string& s);

/// Planar domain of the config (unit square based).
MultiPatch make_planar_domain(const BenchConfig& cfg);

/// Scalar extraction map for a coupling. `zero_boundary` removes every DoF
/// with a nonzero boundary trace.
ExtractionMap make_scalar_map(const MultiPatch& mp, const CouplingSpec& c, bool zero_boundary = false);

/// Throws GateError for a smooth-c1 request the requirement table rejects.
void enforce_gate(const MultiPatch& mp, const CouplingSpec& c, int p, int r);

/// Least-squares slope of log(error) against log(h) over the last `last`
/// entries. Throws std::invalid_argument on fewer entries or non-positive data.
double compute_rate(const std::vector<double>& h, const std::vector<double>& err, int last = 3);

struct LevelRow
{
    int level = 0;
    double h = 0.0;
    Index dofs = 0;
    std::vector<double> values;
    double seconds = 0.0;
};

struct ConvergenceReport
{
    std::string name;
    std::vector<std::string> columns; ///< value column names
    std::vector<LevelRow> rows;
    std::vector<double> rates;        ///< per value column, empty when not meaningful

    /// level,h,dofs,<columns>
    void write_csv(std::ostream& os) const;
    void write_rates(std::ostream& os) const;
};

struct BiharmonicLevel
{
    Index dofs = 0;
    NormReport errors;
    ExtractionMap map;
    Eigen::VectorXd coeffs;
};

/// Manufactured biharmonic solve on one refined multipatch.
BiharmonicLevel solve_biharmonic_level(const MultiPatch& mp, const CouplingSpec& c, double alpha,
                                       double boundary_alpha);

ConvergenceReport run_biharmonic(const BenchConfig& cfg);

struct PlateSpec
{
    double E = 1e5;
    double t = 1e-2;
    double nu = 0.2;
    double rho = 1e5;

    double D() const { return E * t * t * t / (12.0 * (1.0 - nu * nu)); }
    /// (n^2 + m^2) pi^2 sqrt(D / (rho t)) on the unit square.
    double omega(int n, int m) const;
    /// The `count` smallest analytical frequencies with multiplicity.
    std::vector<double> spectrum(Index count) const;
};

struct SpectrumReport
{
    Index n = 0;
    Eigen::VectorXd omega_h;
    Eigen::VectorXd omega;

    double ratio(Index i) const { return omega_h(i) / omega(i); }
    /// max |omega_h,i / omega_i - 1| over the first `fraction` of the spectrum.
    double max_deviation(double fraction) const;
    double min_ratio() const;
    /// i,i_over_N,omega_h,omega,ratio (1-based i)
    void write_csv(std::ostream& os) const;
};

/// Simply supported plate, w = 0 imposed on the space, on a fixed mesh.
SpectrumReport plate_spectrum(const MultiPatch& mp, const CouplingSpec& c, double alpha, const PlateSpec& plate = {});
SpectrumReport run_spectrum(const BenchConfig& cfg);

/// Paraboloid surface over the config's planar domain scaled to [-1/2,1/2]^2.
MultiPatch make_shell_geometry(const BenchConfig& cfg, ParaboloidKind kind, int elements);

struct ShellLevel
{
    Index dofs = 0;
    ShellSolution solution;
    MultiPatch mp;
};

/// Builds and solves the paraboloid benchmark on one mesh. Hyperbolic:
/// clamped minimum-x edge and (0,0,-8000 t) per area. Elliptic: corner
/// supports and the apex point load 1e8 t in -z.
ShellLevel solve_shell_level(const BenchConfig& cfg, ParaboloidKind kind, int elements,
                             const ShellMaterial& mat = {});

ConvergenceReport run_shell(const BenchConfig& cfg);

struct StressReport
{
    Index dofs = 0;
    double energy = 0.0;
    InterfaceJump jump;
    std::vector<double> interface_max; ///< per interface
    std::vector<StressSample> samples;
};

/// Elliptic paraboloid at a fixed mesh with stress sampling and exports.
StressReport run_stress(const BenchConfig& cfg);

struct TraceReport
{
    int patches = 0;
    int interior_ev = 0;
    int boundary_ev = 0;
};

/// Quad mesh (.obj) to multipatch; writes `out` (.mpatch) when non-empty.
TraceReport run_trace(const std::string& mesh_path, const std::string& out);

/// Runs the configured study, writes its files under cfg.output and a one
/// line summary per level to `log`.
void run_study(const BenchConfig& cfg, std::ostream& log);

} // namespace mpiga
