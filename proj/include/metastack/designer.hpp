// SPDX-License-Identifier: Apache-2.0
//
// Model-based synthesis: align the rows of G with the dominant left singular vectors of H,
// then fit the metasurface coefficients so that G(tau) realizes that target.

#pragma once

#include "metastack/common.hpp"
#include "metastack/device.hpp"
#include "metastack/optimizer.hpp"
#include "metastack/propagation.hpp"

#include <span>

namespace metastack
{

struct SvdDesign
{
    CMatrix left_vectors;   // Q x N, first N columns of U_H
    RVector singular_values; // K, nonincreasing
    CMatrix target_forward; // N x Q, U_G D U_left^H
    RVector diagonal_gains; // N (all ones for the simplified design)
    CMatrix rotation;       // N x N (identity for the simplified design)
};

// Simplified design G = U_left^H. Requires Q >= N >= K and a full-column-rank H
// (smallest singular value > 1e-12 * largest), otherwise DegenerateChannelError.
SvdDesign svd_target(const CMatrix &channel, std::size_t antennas);

// K - sum_k d_k^2 s_k^2 / (d_k^2 s_k^2 + 1/snr), the MSE the design attains if realized exactly.
double design_mse(const SvdDesign &design, double snr);

struct FitOptions
{
    std::size_t max_iterations = 1000;
    double tolerance = 1e-3;
    double step_size = 1e-2;
    OptimizerKind optimizer = OptimizerKind::AdaptiveMoment;
    // After fitting, scale the AC layers uniformly so that ||G||_F approaches ||target||_F.
    // The fitting loss is scale free, so this does not change the residual.
    bool match_scale = true;
    double warn_threshold = 1e-2;
};

struct FitResult
{
    SimDevice device;
    double residual = 0.0;      // fitting_loss at the returned device
    std::size_t iterations = 0; // optimizer steps taken
    bool converged = false;     // residual < tolerance
    bool flagged = false;       // residual > warn_threshold
    double scale = 0.0;         // ||G||_F / ||target||_F after scale matching
};

// Minimizes the scale-normalized Frobenius loss by first-order descent and returns the best
// iterate. Stops at max_iterations or when the residual drops below the tolerance.
FitResult fit_sim_to_target(std::span<const DiffractionMatrix> chain, const SimDevice &device,
                            const CMatrix &target, const FitOptions &options = {});

} // namespace metastack
