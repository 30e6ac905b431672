// SPDX-License-Identifier: Apache-2.0
//
// metastack-sim: run, validate and audit link-level experiments.

#include "metastack/config.hpp"
#include "metastack/experiment.hpp"
#include "metastack/gradcheck.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

using namespace metastack;

namespace
{

struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::size_t workers = 0;
    std::string out_dir;
    bool quiet = false;
};

void apply(ExperimentConfig &c, const Overrides &o)
{
    if (o.seed)
        c.simulation.seed = *o.seed;
    if (o.trials)
        c.simulation.trials = *o.trials;
    validate_config(c);
}

int execute(ExperimentConfig config, const Overrides &o)
{
    apply(config, o);
    RunOptions ro;
    ro.workers = o.workers;
    ro.out_dir = o.out_dir;
    if (!o.quiet)
        ro.progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\rtrial %zu/%zu", done, total);
            if (done == total)
                std::fputc('\n', stderr);
        };
    const ExperimentResult r = run_experiment(config, ro);

    std::printf("%-12s %8s %12s %12s\n", "method", "ebn0_db", "ber", "stderr");
    for (std::size_t m = 0; m < r.table.methods.size(); ++m)
        for (std::size_t p = 0; p < r.table.ebn0_db.size(); ++p)
            std::printf("%-12s %8.2f %12.4e %12.2e\n", std::string(to_string(r.table.methods[m])).c_str(),
                        r.table.ebn0_db[p], r.table.cells[m][p].ber, r.table.cells[m][p].stderr_);
    std::printf("failed trials: %zu/%zu\n", r.table.failed_trials, r.table.trials);
    for (const auto &f : r.written)
        if (f.parent_path() == r.csv_path.parent_path())
            std::printf("wrote %s\n", f.string().c_str());
    if (r.exit_code != 0)
        std::fprintf(stderr, "error: failed-trial fraction exceeds simulation.failure_tolerance\n");
    return r.exit_code;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"SIM-aided multi-user downlink: model-based and data-driven design, BER Monte Carlo"};
    app.set_version_flag("--version", library_version());
    app.require_subcommand(1);

    Overrides o;
    const auto add_run_flags = [&](CLI::App *sub) {
        sub->add_option("--seed", o.seed, "Master seed (overrides simulation.seed)");
        sub->add_option("--workers", o.workers, "Worker threads (default: available parallelism)");
        sub->add_option("--out-dir", o.out_dir, "Output directory (overrides output.directory)");
        sub->add_option("--trials", o.trials, "Monte Carlo trials (overrides simulation.trials)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", o.quiet, "No progress output");
    };

    std::string config_path;
    auto *run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Config file")->required();
    add_run_flags(run);

    auto *validate = app.add_subcommand("validate", "Load and validate a config, print its canonical form");
    validate->add_option("config", config_path, "Config file")->required();

    auto *demo = app.add_subcommand("demo", "Run the bundled desk-scale configuration (100 trials)");
    add_run_flags(demo);

    double tolerance = 1e-5;
    auto *gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
    gradcheck->add_option("--tolerance", tolerance, "Largest acceptable relative error");
    bool verbose = false;
    gradcheck->add_flag("--verbose", verbose, "Print every entry");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
            return execute(load_config(config_path), o);
        if (*demo)
        {
            ExperimentConfig c = parse_config(bundled_demo_config());
            c.simulation.trials = 100;
            if (o.out_dir.empty())
                o.out_dir = "demo_results";
            return execute(c, o);
        }
        if (*validate)
        {
            const ExperimentConfig c = load_config(config_path);
            std::cout << serialize_config(c);
            std::cerr << "config ok, hash " << config_hash(c) << "\n";
            return 0;
        }
        if (*gradcheck)
        {
            const GradcheckReport r = run_gradcheck();
            std::map<std::string, double> worst;
            for (const auto &e : r.entries)
            {
                auto &w = worst[e.loss + " / " + e.parameter];
                w = std::max(w, e.relative_error);
                if (verbose)
                    std::printf("%-16s %-13s %4zu  analytic %+.10e  numeric %+.10e  rel %.2e\n", e.loss.c_str(),
                                e.parameter.c_str(), e.index, e.analytic, e.numeric, e.relative_error);
            }
            for (const auto &[k, v] : worst)
                std::printf("%-34s max rel error %.3e\n", k.c_str(), v);
            const bool ok = r.max_relative_error < tolerance;
            std::printf("%zu entries, max relative error %.3e: %s\n", r.entries.size(), r.max_relative_error,
                        ok ? "PASS" : "FAIL");
            return ok ? 0 : 1;
        }
    }
    catch (const ConfigFileError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 66;
    }
    catch (const ConfigSchemaError &e)
    {
        std::cerr << "schema error: " << e.what() << "\n";
        return 65;
    }
    catch (const ConfigValidationError &e)
    {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 64;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
