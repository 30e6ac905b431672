// SPDX-License-Identifier: Apache-2.0

#include "metastack/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace metastack
{

using nlohmann::json;

std::string library_version()
{
    return METASTACK_VERSION;
}

TrialConfig make_trial_config(const ExperimentConfig &config)
{
    const SimulationConfig &s = config.simulation;
    TrialConfig t;
    t.users = s.users;
    t.modulation = s.modulation;
    t.ebn0_db = s.ebn0_db;
    t.bits_per_user = s.bits_per_user;
    t.total_power = s.effective_total_power();
    t.methods = s.methods;
    t.model_based = s.model_based;
    t.training = config.training;
    t.fit = config.fit;
    t.radiated_power_cap = s.radiated_power_cap;
    t.keep_curves = config.output.curves;
    return t;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig &config, std::size_t workers,
                                    const std::function<void(std::size_t, std::size_t)> &progress)
{
    const SimGeometry geo = SimGeometry::from_params(config.geometry);
    SimContext ctx;
    ctx.geometry = &geo;
    ctx.chain = build_diffraction_chain(geo);
    ctx.kinds = config.device.layer_kinds;
    ctx.bounds = config.device.bounds;
    ctx.passive_gain = config.device.passive_gain;
    const TrialConfig tc = make_trial_config(config);

    const std::size_t n = config.simulation.trials;
    if (workers == 0)
        workers = std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, n);

    std::vector<TrialRecord> records(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex mtx;
    std::exception_ptr error;

    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                records[i] = run_trial(ctx, tc, i, derive_seed(config.simulation.seed, {i}));
            }
            catch (...)
            {
                std::lock_guard lock(mtx);
                if (!error)
                    error = std::current_exception();
                next = n;
                return;
            }
            const std::size_t d = ++done;
            if (progress)
            {
                std::lock_guard lock(mtx);
                progress(d, n);
            }
        }
    };

    if (workers <= 1)
        work();
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
    return records;
}

namespace
{

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string header_comment(const ExperimentConfig &config)
{
    return "# seed=" + std::to_string(config.simulation.seed) + " config_hash=" + config_hash(config) +
           " version=" + library_version() + " modulation=" + std::string(to_string(config.simulation.modulation)) +
           " trials=" + std::to_string(config.simulation.trials) + "\n";
}

void write_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

} // namespace

std::string format_ber_csv(const BerTable &table, const ExperimentConfig &config)
{
    std::ostringstream os;
    os << header_comment(config);
    os << "method,ebn0_db,ber,stderr,bits,errors\n";
    for (std::size_t m = 0; m < table.methods.size(); ++m)
        for (std::size_t p = 0; p < table.ebn0_db.size(); ++p)
        {
            const BerCell &c = table.cells[m][p];
            os << to_string(table.methods[m]) << ',' << number(table.ebn0_db[p]) << ',' << number(c.ber) << ','
               << number(c.stderr_) << ',' << c.bits << ',' << c.errors << '\n';
        }
    return os.str();
}

std::string format_ber_json(const BerTable &table, const ExperimentConfig &config)
{
    json rows = json::array();
    for (std::size_t m = 0; m < table.methods.size(); ++m)
        for (std::size_t p = 0; p < table.ebn0_db.size(); ++p)
        {
            const BerCell &c = table.cells[m][p];
            rows.push_back({{"method", std::string(to_string(table.methods[m]))},
                            {"ebn0_db", table.ebn0_db[p]},
                            {"ber", c.ber},
                            {"stderr", c.stderr_},
                            {"bits", c.bits},
                            {"errors", c.errors}});
        }
    json j = {{"seed", config.simulation.seed},
              {"config_hash", config_hash(config)},
              {"version", library_version()},
              {"modulation", std::string(to_string(config.simulation.modulation))},
              {"trials", table.trials},
              {"failed_trials", table.failed_trials},
              {"rows", rows}};
    return j.dump(2) + "\n";
}

std::string format_manifest(const ExperimentConfig &config, const BerTable &table,
                            const std::vector<std::filesystem::path> &files)
{
    json names = json::array();
    for (const auto &f : files)
        names.push_back(f.filename().string());
    json j = {{"seed", config.simulation.seed},
              {"config_hash", config_hash(config)},
              {"version", library_version()},
              {"trials", table.trials},
              {"failed_trials", table.failed_trials},
              {"files", names},
              {"config", json::parse(serialize_config(config))}};
    return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig &config, const RunOptions &options)
{
    ExperimentResult out;
    out.config_hash = config_hash(config);
    out.records = run_trials(config, options.workers, options.progress);
    out.table = aggregate(out.records, config.simulation.ebn0_db);

    const std::filesystem::path dir = options.out_dir.empty() ? std::filesystem::path(config.output.directory)
                                                              : options.out_dir;
    std::filesystem::create_directories(dir);
    const std::string base = config.output.name;
    const std::string stamp = header_comment(config);

    out.csv_path = dir / (base + ".csv");
    write_file(out.csv_path, format_ber_csv(out.table, config));
    out.written.push_back(out.csv_path);

    if (config.output.json)
    {
        const auto p = dir / (base + ".json");
        write_file(p, format_ber_json(out.table, config));
        out.written.push_back(p);
    }

    if (config.output.snapshots)
    {
        const auto sdir = dir / (base + "_devices");
        std::filesystem::create_directories(sdir);
        for (const auto &r : out.records)
        {
            char idx[16];
            std::snprintf(idx, sizeof idx, "%05zu", r.index);
            const auto wrap = [&](const SimDevice &d) {
                json j = json::parse(serialize_device(d));
                j["seed"] = config.simulation.seed;
                j["config_hash"] = out.config_hash;
                j["trial"] = r.index;
                return j.dump() + "\n";
            };
            if (r.model_based_device)
            {
                const auto p = sdir / ("trial_" + std::string(idx) + "_model_based.json");
                write_file(p, wrap(*r.model_based_device));
                out.written.push_back(p);
            }
            if (r.data_driven_device)
            {
                const auto p = sdir / ("trial_" + std::string(idx) + "_data_driven.json");
                write_file(p, wrap(*r.data_driven_device));
                out.written.push_back(p);
            }
        }
    }

    if (config.output.curves)
    {
        std::ostringstream os;
        os << stamp << "trial,ebn0_db,iteration,loss,beta\n";
        for (const auto &r : out.records)
            for (std::size_t p = 0; p < r.curves.size() && p < config.simulation.ebn0_db.size(); ++p)
                for (std::size_t i = 0; i < r.curves[p].losses.size(); ++i)
                    os << r.index << ',' << number(config.simulation.ebn0_db[p]) << ',' << i << ','
                       << number(r.curves[p].losses[i]) << ',' << number(r.curves[p].betas[i]) << '\n';
        const auto p = dir / (base + "_curves.csv");
        write_file(p, os.str());
        out.written.push_back(p);
    }

    const auto manifest = dir / (base + "_manifest.json");
    write_file(manifest, format_manifest(config, out.table, out.written));
    out.written.push_back(manifest);

    const double failed = static_cast<double>(out.table.failed_trials) / static_cast<double>(out.table.trials);
    out.exit_code = failed > config.simulation.failure_tolerance ? 3 : 0;
    return out;
}

} // namespace metastack
