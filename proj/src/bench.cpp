/** @file bench.cpp

    @brief Benchmark studies and their reports.
*/

#include "mpiga/bench.hpp"

#include "mpiga/linalg.hpp"
#include "mpiga/quadlayout.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mpiga {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double to_double(const std::string& key, const std::string& value)
{
    try
    {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos == value.size() && std::isfinite(d))
            return d;
    }
    catch (const std::exception&)
    {
    }
    throw ConfigError("invalid number for '" + key + "': '" + value + "'");
}

int to_int(const std::string& key, const std::string& value)
{
    try
    {
        std::size_t pos = 0;
        const int i = std::stoi(value, &pos);
        if (pos == value.size())
            return i;
    }
    catch (const std::exception&)
    {
    }
    throw ConfigError("invalid integer for '" + key + "': '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value)
{
    const std::string v = lower(value);
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw ConfigError("invalid boolean for '" + key + "': '" + value + "'");
}

bool is_shell(Study s)
{
    return s == Study::ShellHyperbolic || s == Study::ShellElliptic || s == Study::Stress;
}

std::filesystem::path output_dir(const BenchConfig& cfg)
{
    std::filesystem::path dir(cfg.output.empty() ? "." : cfg.output);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << std::setprecision(15);
    return os;
}

/// Elements per patch direction at level k.
int level_elements(const BenchConfig& cfg, int level)
{
    return cfg.domain == DomainKind::Single ? 1 << (level + 1) : 1 << level;
}

void dump_map(const BenchConfig& cfg, const MultiPatch& mp, const ExtractionMap& map, const std::string& tag)
{
    if (cfg.dump_maps.empty())
        return;
    std::filesystem::create_directories(cfg.dump_maps);
    const std::filesystem::path dir(cfg.dump_maps);
    write_matrix_market((dir / ("E_" + tag + ".mtx")).string(), map.reduce);
    if (cfg.coupling.kind == CouplingSpec::Kind::SmoothC1)
    {
        const ExtractionMap c0 = build_c0_map(mp);
        write_matrix_market((dir / ("C_" + tag + ".mtx")).string(), build_c1_constraints(mp, c0));
    }
}

void check_planar(const MultiPatch& mp)
{
    if (mp.dim() != 2)
        throw ConfigError("study needs a planar domain");
}

} // namespace

std::string to_string(Study s)
{
    switch (s)
    {
    case Study::Biharmonic: return "biharmonic";
    case Study::Spectrum: return "spectrum";
    case Study::ShellHyperbolic: return "shell-hyperbolic";
    case Study::ShellElliptic: return "shell-elliptic";
    case Study::Stress: return "stress";
    case Study::Trace: return "trace";
    }
    return "unknown";
}

std::string to_string(DomainKind d)
{
    switch (d)
    {
    case DomainKind::Single: return "single";
    case DomainKind::Fig6: return "fig6";
    case DomainKind::File: return "file";
    }
    return "unknown";
}

Study parse_study(const std::string& s)
{
    for (Study st : {Study::Biharmonic, Study::Spectrum, Study::ShellHyperbolic, Study::ShellElliptic, Study::Stress,
                     Study::Trace})
        if (lower(trim(s)) == to_string(st))
            return st;
    throw ConfigError("unknown study '" + s + "'");
}

DomainKind parse_domain(const std::string& s)
{
    for (DomainKind d : {DomainKind::Single, DomainKind::Fig6, DomainKind::File})
        if (lower(trim(s)) == to_string(d))
            return d;
    throw ConfigError("unknown domain '" + s + "'");
}

CouplingSpec CouplingSpec::parse(const std::string& text)
{
    const std::string t = lower(trim(text));
    std::string name = t, arg;
    const auto open = t.find('(');
    if (open != std::string::npos)
    {
        if (t.back() != ')')
            throw ConfigError("malformed coupling '" + text + "'");
        name = trim(t.substr(0, open));
        arg = trim(t.substr(open + 1, t.size() - open - 2));
    }
    CouplingSpec c;
    if (name == "single")
        c.kind = Kind::Single;
    else if (name == "c0")
        c.kind = Kind::C0;
    else if (name == "penalty")
        c.kind = Kind::Penalty;
    else if (name == "nitsche")
        c.kind = Kind::Nitsche;
    else if (name == "smooth-c1" || name == "smooth")
        c.kind = Kind::SmoothC1;
    else
        throw ConfigError("unknown coupling '" + text + "'");
    if (!arg.empty())
    {
        if (c.kind != Kind::Penalty && c.kind != Kind::Nitsche)
            throw ConfigError("coupling '" + name + "' takes no parameter");
        c.alpha = to_double("coupling", arg);
        if (*c.alpha <= 0.0)
            throw ConfigError("coupling parameter must be positive");
    }
    return c;
}

std::string CouplingSpec::str() const
{
    std::string s;
    switch (kind)
    {
    case Kind::Single: return "single";
    case Kind::C0: return "c0";
    case Kind::SmoothC1: return "smooth-c1";
    case Kind::Penalty: s = "penalty"; break;
    case Kind::Nitsche: s = "nitsche"; break;
    }
    if (alpha)
    {
        std::ostringstream os;
        os << s << '(' << *alpha << ')';
        return os.str();
    }
    return s;
}

int BenchConfig::effective_levels() const
{
    if (levels > 0)
        return levels;
    switch (study)
    {
    case Study::Biharmonic:
    case Study::ShellHyperbolic:
    case Study::ShellElliptic: return 5;
    default: return 1;
    }
}

int BenchConfig::effective_elements() const
{
    if (elements > 0)
        return elements;
    if (study == Study::Stress)
        return 64;
    if (study == Study::Spectrum)
        return domain == DomainKind::Single ? 32 : 16;
    return 8;
}

double BenchConfig::effective_alpha() const
{
    if (coupling.alpha)
        return *coupling.alpha;
    switch (coupling.kind)
    {
    case CouplingSpec::Kind::Nitsche: return 1e5;
    case CouplingSpec::Kind::Penalty: return is_shell(study) ? 10.0 : 1e5;
    default: return 0.0;
    }
}

void apply_config_key(BenchConfig& cfg, const std::string& key_in, const std::string& value_in)
{
    const std::string key = lower(trim(key_in));
    const std::string value = trim(value_in);
    if (key == "study")
        cfg.study = parse_study(value);
    else if (key == "domain")
        cfg.domain = parse_domain(value);
    else if (key == "domain-file")
    {
        cfg.domain_file = value;
        cfg.domain = DomainKind::File;
    }
    else if (key == "coupling")
    {
        const std::optional<double> keep = cfg.coupling.alpha;
        cfg.coupling = CouplingSpec::parse(value);
        if (!cfg.coupling.alpha)
            cfg.coupling.alpha = keep;
    }
    else if (key == "alpha")
    {
        cfg.coupling.alpha = to_double(key, value);
        if (*cfg.coupling.alpha <= 0.0)
            throw ConfigError("alpha must be positive");
    }
    else if (key == "p" || key == "degree")
        cfg.p = to_int(key, value);
    else if (key == "r" || key == "regularity")
        cfg.r = to_int(key, value);
    else if (key == "l" || key == "levels")
        cfg.levels = to_int(key, value);
    else if (key == "first-level")
        cfg.first_level = to_int(key, value);
    else if (key == "elements")
        cfg.elements = to_int(key, value);
    else if (key == "boundary-alpha")
        cfg.boundary_alpha = to_double(key, value);
    else if (key == "rotation-factor")
        cfg.rotation_factor = to_double(key, value);
    else if (key == "load-scale")
        cfg.load_scale = to_double(key, value);
    else if (key == "grid")
        cfg.grid = to_int(key, value);
    else if (key == "samples")
        cfg.samples = to_int(key, value);
    else if (key == "mesh")
        cfg.mesh = value;
    else if (key == "o" || key == "output")
        cfg.output = value;
    else if (key == "dump-maps")
        cfg.dump_maps = value;
    else if (key == "quiet")
        cfg.quiet = to_bool(key, value);
    else
        throw ConfigError("unknown config key '" + key_in + "'");
}

void load_config_file(BenchConfig& cfg, const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_config_key(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
}

MultiPatch make_planar_domain(const BenchConfig& cfg)
{
    switch (cfg.domain)
    {
    case DomainKind::Single: return make_unit_square();
    case DomainKind::Fig6: return make_fig_domain();
    case DomainKind::File:
        if (cfg.domain_file.empty())
            throw ConfigError("domain 'file' needs domain-file");
        return load_mpatch(cfg.domain_file);
    }
    throw ConfigError("unknown domain");
}

ExtractionMap make_scalar_map(const MultiPatch& mp, const CouplingSpec& c, bool zero_boundary)
{
    ExtractionMap map;
    switch (c.kind)
    {
    case CouplingSpec::Kind::Single:
        if (mp.num_patches() != 1)
            throw ConfigError("coupling 'single' needs a one-patch domain");
        map = build_identity_map(mp);
        break;
    case CouplingSpec::Kind::Penalty: map = build_identity_map(mp); break;
    case CouplingSpec::Kind::C0:
    case CouplingSpec::Kind::Nitsche: map = build_c0_map(mp); break;
    case CouplingSpec::Kind::SmoothC1: return build_smooth_c1_map(mp, zero_boundary);
    }
    if (zero_boundary)
        map = constrain(map, boundary_value_rows(mp, map));
    return map;
}

void enforce_gate(const MultiPatch& mp, const CouplingSpec& c, int p, int r)
{
    if (p < 1 || r < 0 || r >= p)
        throw ConfigError("need p >= 1 and 0 <= r < p (got p=" + std::to_string(p) + ", r=" + std::to_string(r) + ")");
    if (c.kind != CouplingSpec::Kind::SmoothC1)
        return;
    RequirementReport rep = check_requirements(mp, p, r);
    if (rep.any_passed())
        return;
    const std::string what = "smooth-c1 rejected for p=" + std::to_string(p) + ", r=" + std::to_string(r) +
                             "; requirement table:\n" + rep.summary();
    throw GateError(what, std::move(rep));
}

double compute_rate(const std::vector<double>& h, const std::vector<double>& err, int last)
{
    if (h.size() != err.size())
        throw std::invalid_argument("compute_rate: size mismatch");
    if (last < 2 || static_cast<int>(h.size()) < last)
        throw std::invalid_argument("compute_rate: need at least " + std::to_string(std::max(last, 2)) + " levels");
    const std::size_t b = h.size() - static_cast<std::size_t>(last);
    double sx = 0, sy = 0;
    for (std::size_t i = b; i < h.size(); ++i)
    {
        if (!(h[i] > 0.0) || !(err[i] > 0.0))
            throw std::invalid_argument("compute_rate: non-positive data");
        sx += std::log(h[i]);
        sy += std::log(err[i]);
    }
    sx /= last;
    sy /= last;
    double sxy = 0, sxx = 0;
    for (std::size_t i = b; i < h.size(); ++i)
    {
        const double dx = std::log(h[i]) - sx;
        sxy += dx * (std::log(err[i]) - sy);
        sxx += dx * dx;
    }
    if (sxx == 0.0)
        throw std::invalid_argument("compute_rate: identical h values");
    return sxy / sxx;
}

void ConvergenceReport::write_csv(std::ostream& os) const
{
    os << "level,h,dofs";
    for (const auto& c : columns)
        os << ',' << c;
    os << '\n';
    const auto prec = os.precision(15);
    for (const LevelRow& row : rows)
    {
        os << row.level << ',' << row.h << ',' << row.dofs;
        for (double v : row.values)
            os << ',' << v;
        os << '\n';
    }
    os.precision(prec);
}

void ConvergenceReport::write_rates(std::ostream& os) const
{
    const auto prec = os.precision(6);
    for (std::size_t i = 0; i < rates.size() && i < columns.size(); ++i)
        os << columns[i] << ' ' << rates[i] << '\n';
    os.precision(prec);
}

BiharmonicLevel solve_biharmonic_level(const MultiPatch& mp, const CouplingSpec& c, double alpha,
                                       double boundary_alpha)
{
    check_planar(mp);
    using MB = ManufacturedBiharmonic;
    BiharmonicLevel out;
    out.map = make_scalar_map(mp, c);
    SystemMatrices sys = assemble_biharmonic(mp, out.map, MB::rhs);
    const BoundaryTerms bt = nitsche_boundary_terms(
        mp, out.map, boundary_alpha, boundary_alpha, MB::value,
        [](const Eigen::Vector2d& x, const Eigen::Vector2d& n) {
            return MB::derivative(1, 0, x(0), x(1)) * n(0) + MB::derivative(0, 1, x(0), x(1)) * n(1);
        });
    SparseMatrix k = sys.K + bt.K;
    if (c.kind == CouplingSpec::Kind::Nitsche)
        k += nitsche_interface_terms(mp, out.map, alpha);
    else if (c.kind == CouplingSpec::Kind::Penalty)
        k += penalty_interface_terms(mp, out.map, alpha);
    const Eigen::VectorXd f = sys.f + bt.f;
    sys.K.resize(0, 0);
    const SparseMatrix kg = project(out.map, k);
    k.resize(0, 0);
    out.coeffs = solve_spd(kg, project(out.map, f));
    out.dofs = out.map.n_global();
    out.errors = error_norms(mp, out.map, out.coeffs, MB::jet);
    return out;
}

ConvergenceReport run_biharmonic(const BenchConfig& cfg)
{
    const MultiPatch base = make_planar_domain(cfg);
    check_planar(base);
    ConvergenceReport rep;
    rep.name = to_string(cfg.study);
    rep.columns = {"L2", "H1", "H2"};
    const int levels = cfg.effective_levels();
    std::vector<double> h;
    std::vector<std::vector<double>> err(3);
    for (int l = cfg.first_level; l < cfg.first_level + levels; ++l)
    {
        const auto t0 = Clock::now();
        const int n = level_elements(cfg, l);
        const MultiPatch mp = refine_to(base, cfg.p, cfg.r, n);
        if (l == cfg.first_level)
            enforce_gate(mp, cfg.coupling, cfg.p, cfg.r);
        BiharmonicLevel lv = solve_biharmonic_level(mp, cfg.coupling, cfg.effective_alpha(), cfg.boundary_alpha);
        dump_map(cfg, mp, lv.map, "level" + std::to_string(l));
        LevelRow row;
        row.level = l;
        row.h = std::ldexp(1.0, -(l + 1));
        row.dofs = lv.dofs;
        row.values = {lv.errors.L2, lv.errors.H1, lv.errors.H2};
        row.seconds = seconds_since(t0);
        h.push_back(row.h);
        for (int i = 0; i < 3; ++i)
            err[i].push_back(row.values[i]);
        rep.rows.push_back(std::move(row));
    }
    if (h.size() >= 3)
        for (int i = 0; i < 3; ++i)
            rep.rates.push_back(compute_rate(h, err[i], 3));
    return rep;
}

double PlateSpec::omega(int n, int m) const
{
    const double pi = 3.14159265358979323846;
    return (n * n + m * m) * pi * pi * std::sqrt(D() / (rho * t));
}

std::vector<double> PlateSpec::spectrum(Index count) const
{
    // Every pair with n^2 + m^2 <= bound is listed; the bound grows until it
    // covers `count` values.
    std::vector<double> out;
    int bound = 2;
    while (true)
    {
        std::vector<int> keys;
        const int nmax = static_cast<int>(std::sqrt(static_cast<double>(bound))) + 1;
        for (int n = 1; n <= nmax; ++n)
            for (int m = 1; m <= nmax; ++m)
                if (n * n + m * m <= bound)
                    keys.push_back(n * n + m * m);
        if (static_cast<Index>(keys.size()) >= count)
        {
            std::sort(keys.begin(), keys.end());
            keys.resize(static_cast<std::size_t>(count));
            const double pi = 3.14159265358979323846;
            const double base = pi * pi * std::sqrt(D() / (rho * t));
            out.reserve(keys.size());
            for (int k : keys)
                out.push_back(k * base);
            return out;
        }
        bound *= 2;
    }
}

double SpectrumReport::max_deviation(double fraction) const
{
    const Index m = std::max<Index>(1, static_cast<Index>(std::floor(fraction * static_cast<double>(n))));
    double d = 0.0;
    for (Index i = 0; i < std::min(m, n); ++i)
        d = std::max(d, std::abs(ratio(i) - 1.0));
    return d;
}

double SpectrumReport::min_ratio() const
{
    double r = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
        r = std::min(r, ratio(i));
    return r;
}

void SpectrumReport::write_csv(std::ostream& os) const
{
    const auto prec = os.precision(15);
    os << "i,i_over_N,omega_h,omega,ratio\n";
    for (Index i = 0; i < n; ++i)
        os << i + 1 << ',' << static_cast<double>(i + 1) / static_cast<double>(n) << ',' << omega_h(i) << ','
           << omega(i) << ',' << ratio(i) << '\n';
    os.precision(prec);
}

SpectrumReport plate_spectrum(const MultiPatch& mp, const CouplingSpec& c, double alpha, const PlateSpec& plate)
{
    check_planar(mp);
    const ExtractionMap map = make_scalar_map(mp, c, true);
    if (map.n_global() > kDenseEigenLimit)
        throw ConfigError("spectrum: " + std::to_string(map.n_global()) + " DoFs exceed the dense eigensolver limit " +
                          std::to_string(kDenseEigenLimit));
    const double D = plate.D();
    SparseMatrix k = assemble_biharmonic(mp, map, nullptr, D).K;
    if (c.kind == CouplingSpec::Kind::Nitsche)
        k += nitsche_interface_terms(mp, map, alpha, D);
    else if (c.kind == CouplingSpec::Kind::Penalty)
        k += penalty_interface_terms(mp, map, alpha, D);
    const SparseMatrix m = assemble_mass(mp, map, plate.rho * plate.t);
    const EigenPairs ep = eig_general(project(map, k), project(map, m));

    SpectrumReport rep;
    rep.n = ep.values.size();
    rep.omega_h = ep.values.cwiseMax(0.0).cwiseSqrt();
    const std::vector<double> w = plate.spectrum(rep.n);
    rep.omega = Eigen::Map<const Eigen::VectorXd>(w.data(), rep.n);
    return rep;
}

SpectrumReport run_spectrum(const BenchConfig& cfg)
{
    const MultiPatch base = make_planar_domain(cfg);
    check_planar(base);
    const MultiPatch mp = refine_to(base, cfg.p, cfg.r, cfg.effective_elements());
    enforce_gate(mp, cfg.coupling, cfg.p, cfg.r);
    return plate_spectrum(mp, cfg.coupling, cfg.effective_alpha());
}

MultiPatch make_shell_geometry(const BenchConfig& cfg, ParaboloidKind kind, int elements)
{
    MultiPatch base = make_planar_domain(cfg);
    check_planar(base);
    if (cfg.domain != DomainKind::File)
        base = transform_planar(base, 1.0, Eigen::Vector2d(-0.5, -0.5));
    return refine_to(make_paraboloid(kind, base, 2), cfg.p, cfg.r, elements);
}

ShellLevel solve_shell_level(const BenchConfig& cfg, ParaboloidKind kind, int elements, const ShellMaterial& mat)
{
    if (cfg.coupling.kind == CouplingSpec::Kind::Nitsche)
        throw ConfigError("nitsche coupling is not available for shells");
    ShellLevel out;
    out.mp = make_shell_geometry(cfg, kind, elements);
    const MultiPatch& mp = out.mp;
    enforce_gate(mp, cfg.coupling, cfg.p, cfg.r);

    const ExtractionMap map = vector_map(make_scalar_map(mp, cfg.coupling), 3);
    SparseMatrix k = assemble_kl_stiffness(mp, map, mat);
    if (cfg.coupling.kind == CouplingSpec::Kind::Penalty)
        k += penalty_shell_coupling(mp, map, cfg.effective_alpha(), mat);

    LoadSpec load;
    if (kind == ParaboloidKind::Elliptic)
        load = LoadSpec::point(Eigen::Vector3d(0.0, 0.0, paraboloid_height(kind, 0.0, 0.0)),
                               Eigen::Vector3d(0.0, 0.0, -1e8 * mat.t * cfg.load_scale),
                               cfg.domain == DomainKind::Fig6 ? 4 : -1);
    else
        load = LoadSpec::distributed(Eigen::Vector3d(0.0, 0.0, -8000.0 * mat.t * cfg.load_scale));
    const Eigen::VectorXd f = assemble_shell_load(mp, map, load);
    const std::vector<ShellBC> bcs =
        kind == ParaboloidKind::Elliptic ? elliptic_shell_bcs(mp) : hyperbolic_shell_bcs(mp);

    ShellSystem sys = apply_shell_bcs(k, f, mp, map, bcs, mat, cfg.rotation_factor);
    k.resize(0, 0);
    k.data().squeeze();
    out.dofs = sys.map.n_global();
    out.solution = solve_shell(std::move(sys));
    return out;
}

ConvergenceReport run_shell(const BenchConfig& cfg)
{
    const ParaboloidKind kind =
        cfg.study == Study::ShellHyperbolic ? ParaboloidKind::Hyperbolic : ParaboloidKind::Elliptic;
    ConvergenceReport rep;
    rep.name = to_string(cfg.study);
    rep.columns = {"W_int"};
    const int levels = cfg.effective_levels();
    for (int l = cfg.first_level; l < cfg.first_level + levels; ++l)
    {
        const auto t0 = Clock::now();
        const ShellLevel lv = solve_shell_level(cfg, kind, level_elements(cfg, l));
        LevelRow row;
        row.level = l;
        row.h = std::ldexp(1.0, -(l + 1));
        row.dofs = lv.dofs;
        row.values = {lv.solution.energy};
        row.seconds = seconds_since(t0);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

StressReport run_stress(const BenchConfig& cfg)
{
    const ShellMaterial mat;
    const int n = cfg.effective_elements();
    const ShellLevel lv = solve_shell_level(cfg, ParaboloidKind::Elliptic, n, mat);
    const ShellSolution& sol = lv.solution;

    StressReport rep;
    rep.dofs = lv.dofs;
    rep.energy = sol.energy;
    rep.jump = interface_stress_jump(lv.mp, sol.system.map, sol.coeffs, mat, cfg.samples);
    rep.interface_max = rep.jump.per_interface;
    rep.samples = von_mises_membrane(lv.mp, sol.system.map, sol.coeffs, mat, cfg.grid);

    const auto dir = output_dir(cfg);
    {
        auto os = open_out(dir / "stress.csv");
        write_stress_csv(os, rep.samples);
    }
    for (int k = 0; k < static_cast<int>(lv.mp.num_patches()); ++k)
    {
        auto os = open_out(dir / ("stress_patch" + std::to_string(k) + ".vtk"));
        write_stress_vtk(os, rep.samples, k, cfg.grid);
    }
    {
        auto os = open_out(dir / "stress_contours.csv");
        write_stress_contours(os, rep.samples, cfg.grid);
    }
    {
        auto os = open_out(dir / "stress_jumps.csv");
        os << "interface,patch_a,side_a,patch_b,side_b,max_jump\n";
        for (std::size_t i = 0; i < lv.mp.interfaces.size(); ++i)
        {
            const Interface& itf = lv.mp.interfaces[i];
            os << i << ',' << itf.patch_a << ',' << static_cast<int>(itf.side_a) << ',' << itf.patch_b << ','
               << static_cast<int>(itf.side_b) << ',' << rep.interface_max[i] << '\n';
        }
    }
    return rep;
}

TraceReport run_trace(const std::string& mesh_path, const std::string& out)
{
    const PatchLayout layout = quad_layout(load_quad_obj_file(mesh_path));
    TraceReport rep;
    rep.patches = static_cast<int>(layout.multipatch.num_patches());
    rep.interior_ev = layout.interior_ev;
    rep.boundary_ev = layout.boundary_ev;
    if (!out.empty())
        save_mpatch(out, layout.multipatch);
    return rep;
}

void run_study(const BenchConfig& cfg, std::ostream& log)
{
    if (cfg.effective_levels() < 1)
        throw ConfigError("levels must be at least 1");
    const auto say = [&](const std::string& line) {
        if (!cfg.quiet)
            log << line << std::endl;
    };
    std::ostringstream head;
    head << to_string(cfg.study) << ": domain=" << to_string(cfg.domain) << " coupling=" << cfg.coupling.str()
         << " p=" << cfg.p << " r=" << cfg.r;
    say(head.str());

    switch (cfg.study)
    {
    case Study::Biharmonic:
    case Study::ShellHyperbolic:
    case Study::ShellElliptic:
    {
        const ConvergenceReport rep = cfg.study == Study::Biharmonic ? run_biharmonic(cfg) : run_shell(cfg);
        const auto dir = output_dir(cfg);
        {
            auto os = open_out(dir / (rep.name + ".csv"));
            rep.write_csv(os);
        }
        for (const LevelRow& row : rep.rows)
        {
            std::ostringstream s;
            s << std::setprecision(6) << "level " << row.level << " h=" << row.h << " dofs=" << row.dofs;
            for (std::size_t i = 0; i < row.values.size(); ++i)
                s << ' ' << rep.columns[i] << '=' << row.values[i];
            s << " (" << std::fixed << std::setprecision(2) << row.seconds << " s)";
            say(s.str());
        }
        if (!rep.rates.empty())
        {
            auto os = open_out(dir / "rates.txt");
            rep.write_rates(os);
            std::ostringstream s;
            s << "rates:";
            for (std::size_t i = 0; i < rep.rates.size(); ++i)
                s << ' ' << rep.columns[i] << '=' << std::setprecision(4) << rep.rates[i];
            say(s.str());
        }
        break;
    }
    case Study::Spectrum:
    {
        const SpectrumReport rep = run_spectrum(cfg);
        auto os = open_out(output_dir(cfg) / "spectrum.csv");
        rep.write_csv(os);
        std::ostringstream s;
        s << std::setprecision(8) << "N=" << rep.n << " omega_h1=" << rep.omega_h(0) << " omega_11=" << rep.omega(0)
          << " max|ratio-1| (first half)=" << rep.max_deviation(0.5) << " min ratio=" << rep.min_ratio();
        say(s.str());
        break;
    }
    case Study::Stress:
    {
        const StressReport rep = run_stress(cfg);
        std::ostringstream s;
        s << std::setprecision(6) << "dofs=" << rep.dofs << " W_int=" << rep.energy
          << " max interface jump=" << rep.jump.max_jump << " mean=" << rep.jump.mean_jump << " over "
          << rep.jump.samples << " samples";
        say(s.str());
        break;
    }
    case Study::Trace:
    {
        if (cfg.mesh.empty())
            throw ConfigError("trace needs a mesh");
        const TraceReport rep = run_trace(cfg.mesh, (output_dir(cfg) / "trace.mpatch").string());
        say("patches=" + std::to_string(rep.patches) + " iEV=" + std::to_string(rep.interior_ev) +
            " bEV=" + std::to_string(rep.boundary_ev));
        break;
    }
    }
}

} // namespace mpiga
