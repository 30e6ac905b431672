// SPDX-License-Identifier: Apache-2.0
//
// Losses over the forward operator and their gradients with respect to the unconstrained
// device and precoder parameters.
//
// Gradients of a real loss L with respect to a complex matrix X are carried in the
// convention dL = Re<g_X, dX> = Re sum conj(g_ij) dX_ij, i.e. g = dL/dRe X + j dL/dIm X.
// Reverse accumulation through G = W_1 T_1 ... W_L T_L reuses the cached layer inputs:
//   B_l = A_l T_l:          g_tau_l[q] = sum_n g_B[n, q] conj(A_l[n, q]),  g_A = g_B conj(T_l)
//   A_{l+1} = B_l W_{l+1}:  g_B = g_A W_{l+1}^H
// so one backward pass costs O(L N Q^2), the same as the forward pass.

#pragma once

#include "metastack/common.hpp"
#include "metastack/device.hpp"
#include "metastack/precoder.hpp"
#include "metastack/propagation.hpp"

#include <optional>
#include <span>

namespace metastack
{

// Gradient with respect to the device parameter vector given g_G.
RVector backpropagate(std::span<const DiffractionMatrix> chain, const SimDevice &device,
                      const ForwardOperator &forward, const CMatrix &grad_forward);

struct EmpiricalMse
{
    double loss = 0.0;
    double beta = 0.0;
};

// y = b P F + r row-wise over the block; beta is the real least-squares scalar
// Re<Y, B> / <Y, Y> unless `fixed_beta` is given; loss = (1/S) sum_i ||b_i - beta y_i||^2.
// All-zero Y gives beta = 0.
EmpiricalMse empirical_mse(const CMatrix &precoder, const CMatrix &effective, const CMatrix &symbols,
                           const CMatrix &noise, std::optional<double> fixed_beta = std::nullopt);
EmpiricalMse empirical_mse(const CMatrix &precoder, const CMatrix &forward, const CMatrix &channel,
                           const CMatrix &symbols, const CMatrix &noise,
                           std::optional<double> fixed_beta = std::nullopt);

struct LossGradient
{
    double loss = 0.0;
    double beta = 0.0;
    RVector device;    // one entry per device parameter
    RVector precoder;  // one entry per precoder parameter (empty for closed-form losses)
    CMatrix forward;   // G at the evaluation point
};

// Empirical MSE of the pilot block and its gradient. With the least-squares beta the
// beta-derivative vanishes, so only the dependence through Y is differentiated.
LossGradient empirical_mse_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &channel,
                                    const SimDevice &device, const TrainablePrecoder &precoder,
                                    const CMatrix &symbols, const CMatrix &noise);

// Closed-form MMSE value K - tr[F^H (F F^H + I/snr)^-1 F] as a function of the device,
// with g_F = -(2/snr) F (F^H F + I/snr)^-2.
LossGradient closed_form_mse_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &channel,
                                      const SimDevice &device, double snr);

// Scale-free fitting loss ||G/||G|| - T/||T|| ||_F^2 (or ||G||_F^2 for a zero target).
double fitting_loss(const CMatrix &forward, const CMatrix &target);
LossGradient fitting_loss_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &target,
                                   const SimDevice &device);

} // namespace metastack
