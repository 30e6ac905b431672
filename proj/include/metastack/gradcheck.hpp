// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference audit of the analytic gradients on a small system.

#pragma once

#include "metastack/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace metastack
{

struct GradcheckOptions
{
    std::size_t layers = 3;
    std::size_t cells_x = 4;
    std::size_t cells_y = 4;
    std::size_t antennas = 2;
    std::size_t users = 2;
    std::size_t pilot_symbols = 8;
    double step = 1e-4;
    double snr = 10.0;
    std::uint64_t seed = 7;
};

struct GradcheckEntry
{
    std::string loss;      // empirical_mse, closed_form_mse, fitting_loss
    std::string parameter; // pc_phase, ac_amplitude, precoder_re, precoder_im
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

struct GradcheckReport
{
    std::vector<GradcheckEntry> entries;
    double max_relative_error = 0.0;
};

// |a - n| / max(|a|, |n|), or the absolute difference when both are below `floor`.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-12);

// Checks every backing parameter of the three losses on a layered device alternating
// AC and PC layers (first layer AC), with random channel, pilots, noise and target.
GradcheckReport run_gradcheck(const GradcheckOptions &options = {});

} // namespace metastack
