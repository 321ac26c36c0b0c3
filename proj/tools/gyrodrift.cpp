/// Command-line surface of the simulator: single runs, sweeps, comparisons,
/// config validation, and field-file inspection.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gyrodrift/config.hpp"
#include "gyrodrift/field_io.hpp"
#include "gyrodrift/harness.hpp"

namespace {

using namespace gyrodrift;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    bool quiet = false;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_out) {
    sub->add_option("--config", o.config_path, "JSON run configuration")
        ->required();
    if (with_out)
        sub->add_option("--out", o.out_dir, "output directory (overrides the config)");
    o.threads_opt = sub->add_option("--threads", o.threads,
                                    "worker threads, recorded in the resolved config "
                                    "(the kernels in this build are serial)")
                        ->check(CLI::Range(1, 4096));
    o.seed_opt = sub->add_option("--seed", o.seed,
                                 "reserved for perturbed initial data; recorded only");
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
}

RunConfig load_with_overrides(const CommonOpts& o) {
    RunConfig cfg = load_config(o.config_path);
    if (!o.out_dir.empty()) cfg.output = o.out_dir;
    if (o.threads_opt->count() > 0) cfg.threads = o.threads;
    if (o.seed_opt->count() > 0) cfg.seed = o.seed;
    return cfg;
}

int dispatch(const CLI::App& app, CommonOpts opts[4], const std::string& dump_path) {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "run") {
        RunConfig cfg = load_with_overrides(opts[0]);
        run_single(cfg, opts[0].quiet ? nullptr : &std::cout);
    } else if (name == "sweep") {
        RunConfig cfg = load_with_overrides(opts[1]);
        run_sweep(cfg, opts[1].quiet ? nullptr : &std::cout);
    } else if (name == "compare") {
        RunConfig cfg = load_with_overrides(opts[2]);
        run_compare(cfg, opts[2].quiet ? nullptr : &std::cout);
    } else if (name == "validate") {
        RunConfig cfg = load_with_overrides(opts[3]);
        if (!opts[3].quiet) std::cout << render_config(cfg);
    } else { // dump
        const FieldBlob b = load_field(dump_path);
        std::cout << dump_path << ": rank " << b.dims.size() << ", dims";
        for (std::uint32_t d : b.dims) std::cout << ' ' << d;
        double lo = b.data.empty() ? 0.0 : b.data[0], hi = lo, sum = 0.0;
        for (double v : b.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        char line[160];
        std::snprintf(line, sizeof line,
                      ", %zu entries\nmin %.17g  max %.17g  sum %.17g\n",
                      b.data.size(), lo, hi, sum);
        std::cout << line;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnetized plasma simulator: kinetic solver, drift-limit solver, "
                 "and their convergence harness"};
    app.require_subcommand(1);

    CommonOpts opts[4];
    add_common(app.add_subcommand("run", "single kinetic or limit run"), opts[0], true);
    add_common(app.add_subcommand("sweep", "kinetic runs across an epsilon list, "
                                           "compared against the shared limit run"),
               opts[1], true);
    add_common(app.add_subcommand("compare", "kinetic vs limit distances at matched "
                                             "snapshot times"),
               opts[2], true);
    add_common(app.add_subcommand("validate", "parse a config and print its resolved "
                                              "form"),
               opts[3], false);
    std::string dump_path;
    app.add_subcommand("dump", "print the header and summary stats of a field file")
        ->add_option("file", dump_path, "field (.fld) file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(app, opts, dump_path);
    } catch (const ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
    } catch (const IoError& e) {
        std::cerr << "error[io]: " << e.what() << "\n";
    } catch (const NeutralityError& e) {
        std::cerr << "error[neutrality]: " << e.what() << "\n";
    } catch (const SupportBreachError& e) {
        std::cerr << "error[support]: " << e.what() << "\n";
    } catch (const InstabilityError& e) {
        std::cerr << "error[instability]: " << e.what() << "\n";
    } catch (const PicardError& e) {
        std::cerr << "error[picard]: " << e.what() << "\n";
    } catch (const GyroError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}
