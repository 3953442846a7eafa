/** @file mpiga.cpp

    @brief Command line driver: benchmark studies and quad-layout tracing.

    Exit codes: 0 success, 2 rejected configuration, 1 numerical failure.
*/

#include "mpiga/bench.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <utility>
#include <vector>

int main(int argc, char** argv)
{
    using namespace mpiga;

    CLI::App app{"Multi-patch isogeometric benchmarks"};
    app.require_subcommand(1);

    // bench
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark study");
    std::string study, config;
    bench->add_option("study", study, "biharmonic|spectrum|shell-hyperbolic|shell-elliptic|stress|trace")->required();
    bench->add_option("--config", config, "key = value configuration file (flags win)");

    // Every flag mirrors a config key and is applied after the file.
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--domain", "single|fig6|file"},
        {"--domain-file", ".mpatch domain (implies --domain file)"},
        {"--coupling", "single|c0|penalty(a)|nitsche(a)|smooth-c1"},
        {"--alpha", "interface parameter"},
        {"-p,--degree", "spline degree"},
        {"-r,--regularity", "spline regularity"},
        {"-L,--levels", "number of refinement levels"},
        {"--first-level", "first refinement level"},
        {"--elements", "elements per patch direction for fixed-mesh studies"},
        {"--boundary-alpha", "Nitsche boundary parameter"},
        {"--rotation-factor", "clamped-edge rotation penalty factor"},
        {"--load-scale", "shell load multiplier"},
        {"--grid", "stress sampling cells per patch direction"},
        {"--samples", "interface stress samples"},
        {"--mesh", "quad mesh (.obj) for the trace study"},
        {"-o,--output", "output directory"},
        {"--dump-maps", "directory for Matrix Market dumps of E and C"},
    };
    std::vector<std::string> values(flags.size());
    std::vector<CLI::Option*> options;
    for (std::size_t i = 0; i < flags.size(); ++i)
        options.push_back(bench->add_option(flags[i].first, values[i], flags[i].second));
    bool quiet = false;
    bench->add_flag("-q,--quiet", quiet, "suppress per-level log lines");

    // trace
    CLI::App* trace = app.add_subcommand("trace", "Trace a quad mesh into a patch layout");
    std::string mesh, out;
    trace->add_option("mesh", mesh, "quad mesh (.obj)")->required()->check(CLI::ExistingFile);
    trace->add_option("-o,--output", out, "output .mpatch file");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*trace)
        {
            const TraceReport rep = run_trace(mesh, out);
            std::cout << "patches=" << rep.patches << " iEV=" << rep.interior_ev << " bEV=" << rep.boundary_ev
                      << std::endl;
            return 0;
        }

        BenchConfig cfg;
        if (!config.empty())
            load_config_file(cfg, config);
        apply_config_key(cfg, "study", study);
        for (std::size_t i = 0; i < flags.size(); ++i)
            if (options[i]->count() > 0)
                apply_config_key(cfg, options[i]->get_name().substr(2), values[i]);
        if (quiet)
            cfg.quiet = true;
        run_study(cfg, std::cout);
        return 0;
    }
    catch (const GateError& e)
    {
        std::cerr << "rejected: " << e.what() << std::endl;
        return 2;
    }
    catch (const ConfigError& e)
    {
        std::cerr << "rejected: " << e.what() << std::endl;
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
