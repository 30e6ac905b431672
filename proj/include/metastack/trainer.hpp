// SPDX-License-Identifier: Apache-2.0
//
// Joint data-driven optimization of the precoder and the metasurface coefficients by
// minimizing the empirical MSE of a pilot block for one channel realization.

#pragma once

#include "metastack/common.hpp"
#include "metastack/constellation.hpp"
#include "metastack/device.hpp"
#include "metastack/optimizer.hpp"
#include "metastack/precoder.hpp"
#include "metastack/propagation.hpp"
#include "metastack/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace metastack
{

struct TrainingConfig
{
    std::size_t pilot_symbols = 100;
    std::size_t iterations = 500;
    double step_size = 0.1;
    OptimizerKind optimizer = OptimizerKind::AdaptiveMoment;
    std::uint64_t seed = 0;
    double snr = 10.0;
    Modulation pilot_modulation = Modulation::Qpsk;
    double total_power = 1.0;

    // Throws ConfigError naming the offending field.
    void validate(std::size_t users) const;
};

struct LossReport
{
    std::vector<double> losses; // one per evaluated iterate, index 0 = initial state
    std::vector<double> betas;
    std::size_t best_iteration = 0;
    double best_loss = 0.0;
    double final_beta = 0.0;
    double final_radiated_power = 0.0;
    int restarts = 0;
};

struct TrainingResult
{
    SimDevice device;
    Precoder precoder;
    LossReport report;
};

// Runs config.iterations optimizer steps from `device` and `init_precoder` (the MMSE
// precoder of the initial device when omitted). The pilot block is drawn once; the noise
// is redrawn at every iteration. The best-loss iterate is returned.
//
// A loss above 10x the initial loss halves the step size and restarts once; a second
// divergence, or any non-finite loss, throws TrainingError.
TrainingResult train(std::span<const DiffractionMatrix> chain, const SimDevice &device, const CMatrix &channel,
                     const TrainingConfig &config, const std::optional<CMatrix> &init_precoder = std::nullopt);

// Pilot symbols drawn uniformly from the constellation, S x K.
CMatrix draw_pilot_block(const Constellation &constellation, std::size_t symbols, std::size_t users, Rng &rng);

} // namespace metastack
