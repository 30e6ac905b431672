// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: trials on a worker pool, ordered aggregation, result files.

#pragma once

#include "metastack/config.hpp"
#include "metastack/linksim.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace metastack
{

struct RunOptions
{
    std::size_t workers = 0; // 0 = available parallelism
    std::filesystem::path out_dir; // empty = config.output.directory
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct ExperimentResult
{
    BerTable table;
    std::vector<TrialRecord> records;
    std::string config_hash;
    std::filesystem::path csv_path;
    std::vector<std::filesystem::path> written;
    int exit_code = 0; // 3 when the failed-trial fraction exceeds simulation.failure_tolerance
};

// Builds the geometry and diffraction chain and runs every trial. Trial t uses the seed
// derive_seed(master, {t}), so results do not depend on the worker count.
std::vector<TrialRecord> run_trials(const ExperimentConfig &config, std::size_t workers,
                                    const std::function<void(std::size_t, std::size_t)> &progress = {});

// run_trials + aggregate + file output.
ExperimentResult run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

// CSV: one '#' line with seed, config hash and version, then
// method,ebn0_db,ber,stderr,bits,errors with one row per method and Eb/N0 point.
std::string format_ber_csv(const BerTable &table, const ExperimentConfig &config);
std::string format_ber_json(const BerTable &table, const ExperimentConfig &config);
std::string format_manifest(const ExperimentConfig &config, const BerTable &table,
                            const std::vector<std::filesystem::path> &files);

TrialConfig make_trial_config(const ExperimentConfig &config);

std::string library_version();

} // namespace metastack
