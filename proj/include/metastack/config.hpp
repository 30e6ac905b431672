// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration. The on-disk format is a JSON object with the blocks
// geometry, device, training, fit, simulation and output; see README.md for the schema.
// Lengths are in wavelengths, the carrier frequency in Hz, gains in dB.

#pragma once

#include "metastack/constellation.hpp"
#include "metastack/designer.hpp"
#include "metastack/device.hpp"
#include "metastack/geometry.hpp"
#include "metastack/linksim.hpp"
#include "metastack/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metastack
{

// The config file cannot be opened.
class ConfigFileError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// The text is not JSON, or a key has the wrong type or is unknown.
class ConfigSchemaError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Well-formed but inconsistent or out of range. The message names the offending keys.
class ConfigValidationError : public ConfigError
{
public:
    using ConfigError::ConfigError;
};

struct DeviceConfig
{
    std::vector<LayerKind> layer_kinds;
    GainBounds bounds;
    double passive_gain = 0.9;
};

struct SimulationConfig
{
    std::size_t users = 4;
    Modulation modulation = Modulation::Qpsk;
    std::vector<double> ebn0_db{0.0, 4.0, 8.0, 12.0, 16.0};
    std::size_t bits_per_user = 1000;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::NoSim, Method::ModelBased, Method::DataDriven};
    std::optional<double> total_power; // defaults to K (unit symbol energy per user)
    ModelBasedRealization model_based = ModelBasedRealization::Ideal;
    std::optional<double> radiated_power_cap;
    double failure_tolerance = 0.05;

    double effective_total_power() const { return total_power.value_or(static_cast<double>(users)); }
};

struct OutputConfig
{
    std::string directory = "results";
    std::string name = "ber";
    bool json = true;
    bool snapshots = false;
    bool curves = false;
};

struct ExperimentConfig
{
    GeometryParams geometry;
    DeviceConfig device;
    TrainingConfig training;
    FitOptions fit;
    SimulationConfig simulation;
    OutputConfig output;
};

// Parses and validates. Throws ConfigSchemaError or ConfigValidationError.
ExperimentConfig parse_config(std::string_view text);

// Reads `path` and parses it. Throws ConfigFileError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path &path);

// Cross-field checks; throws ConfigValidationError.
void validate_config(const ExperimentConfig &config);

// Canonical JSON text with every field present. parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig &config);

// FNV-1a 64-bit hash of the canonical form without the output block, as 16 hex digits.
std::string config_hash(const ExperimentConfig &config);

bool operator==(const ExperimentConfig &a, const ExperimentConfig &b);

// The bundled full-scale QPSK configuration.
std::string_view bundled_demo_config();

// Device snapshot: kinds, bounds, passive gain, per-layer amplitudes and phases.
std::string serialize_device(const SimDevice &device);
SimDevice deserialize_device(std::string_view text);

} // namespace metastack
