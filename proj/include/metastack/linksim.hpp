// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo link chain: random bits -> Gray QAM -> b P G H + r -> beta scaling ->
// minimum-distance hard decisions -> bit error counts.

#pragma once

#include "metastack/common.hpp"
#include "metastack/constellation.hpp"
#include "metastack/designer.hpp"
#include "metastack/device.hpp"
#include "metastack/precoder.hpp"
#include "metastack/propagation.hpp"
#include "metastack/random.hpp"
#include "metastack/trainer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metastack
{

enum class Method
{
    NoSim,
    ModelBased,
    DataDriven,
};

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

// How the model-based design enters the link: the target G = U_left^H imposed exactly
// (the design's own assumption), or the device obtained by fitting the metasurface to it.
enum class ModelBasedRealization
{
    Ideal,
    Fitted,
};

std::string_view to_string(ModelBasedRealization r);
ModelBasedRealization parse_realization(std::string_view text);

// Entries CN(0, 1).
CMatrix generate_channel(std::size_t rows, std::size_t users, Rng &rng);

// sigma^2 = 1 / (log2(M) * 10^(ebn0/10)), equal for all users.
double ebn0_to_noise_variance(double ebn0_db, const Constellation &constellation);

// The precoder SNR of an operating point: P_S / (K sigma^2).
double operating_snr(double ebn0_db, const Constellation &constellation, double total_power, std::size_t users);

struct LinkResult
{
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
};

// Transmits `bits` (K rows of bits_per_user bits, row-major) through y = b P F + r with
// the given noise block (symbols x K) and demaps beta * y.
LinkResult transmit_block(const Constellation &constellation, const CMatrix &precoder, const CMatrix &effective,
                          double beta, std::span<const std::uint8_t> bits, std::size_t bits_per_user,
                          const CMatrix &noise);

struct TrialConfig
{
    std::size_t users = 4;
    Modulation modulation = Modulation::Qpsk;
    std::vector<double> ebn0_db;
    std::size_t bits_per_user = 1000;
    double total_power = 4.0;
    std::vector<Method> methods{Method::NoSim, Method::ModelBased, Method::DataDriven};
    ModelBasedRealization model_based = ModelBasedRealization::Ideal;
    TrainingConfig training;
    FitOptions fit;
    // Optional cap: at evaluation, G is attenuated so that ||P G||_F^2 <= cap * P_S.
    std::optional<double> radiated_power_cap;
    bool keep_curves = false;
};

// Everything needed to build and train devices; shared read-only across trials.
struct SimContext
{
    const SimGeometry *geometry = nullptr;
    std::vector<DiffractionMatrix> chain;
    std::vector<LayerKind> kinds;
    GainBounds bounds;
    double passive_gain = 0.9;
};

struct MethodCounts
{
    Method method;
    std::vector<std::uint64_t> errors; // per Eb/N0 point
    std::vector<std::uint64_t> bits;
};

struct TrialRecord
{
    std::size_t index = 0;
    std::uint64_t seed = 0;
    CMatrix channel; // Q(L) x K
    std::vector<MethodCounts> counts;
    bool failed = false;
    std::string failure;
    double fit_residual = 0.0;
    double fit_scale = 0.0;
    std::vector<double> data_driven_radiated_power; // per Eb/N0 point
    std::optional<SimDevice> model_based_device;
    std::optional<SimDevice> data_driven_device; // last Eb/N0 point
    std::vector<LossReport> curves;              // per Eb/N0 point when keep_curves
};

// One channel realization: every method is designed at every Eb/N0 point (the design tracks
// the operating point), then N_B bits per user are sent through each system with common
// bits and noise. Training failures mark the record as failed instead of throwing.
TrialRecord run_trial(const SimContext &context, const TrialConfig &config, std::size_t index,
                      std::uint64_t trial_seed);

struct BerCell
{
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
    double stderr_ = 0.0; // binomial sqrt(p (1 - p) / bits)
};

struct BerTable
{
    std::vector<Method> methods;
    std::vector<double> ebn0_db;
    std::vector<std::vector<BerCell>> cells; // [method][point]
    std::size_t trials = 0;
    std::size_t failed_trials = 0;

    const BerCell &cell(Method m, std::size_t point) const;
};

// Sums counts over the non-failed records. Throws std::invalid_argument for empty input.
BerTable aggregate(std::span<const TrialRecord> records, std::span<const double> ebn0_db);

} // namespace metastack
