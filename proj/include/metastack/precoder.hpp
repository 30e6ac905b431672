// SPDX-License-Identifier: Apache-2.0
//
// Linear MMSE precoding for y = b P F + r, where F = G H is the N x K effective channel
// seen from the antenna feeds, P is K x N with ||P||_F^2 = P_S, and each receiver
// scales its sample by a common real beta.

#pragma once

#include "metastack/common.hpp"

#include <vector>

namespace metastack
{

struct Precoder
{
    CMatrix matrix;          // K x N
    double total_power = 0.; // P_S
    double beta = 0.;        // receive-side normalization
};

struct LinkBudget
{
    double snr = 0.0;
    std::vector<double> noise_variances;

    // Equal per-user noise variances such that P_S / sum(sigma_k^2) = snr.
    static LinkBudget from_snr(double snr, double total_power, std::size_t users);
    double total_noise() const;
};

// P = beta^-1 F^H (F F^H + I / snr)^-1, beta chosen so that ||P||_F^2 = P_S.
// The regularized Gram matrix is Hermitian positive definite and is factored, never inverted.
// When F is exactly zero no signal reaches the users, every feasible P gives MSE = K, and a
// uniform-power P with beta = 1 is returned.
Precoder mmse_precoder(const CMatrix &effective, double snr, double total_power);
Precoder mmse_precoder(const CMatrix &forward, const CMatrix &channel, double snr, double total_power);

// K - tr[F^H (F F^H + I / snr)^-1 F].
double closed_form_mse(const CMatrix &effective, double snr);
double closed_form_mse(const CMatrix &forward, const CMatrix &channel, double snr);

// K - sum_k s_k^2 / (s_k^2 + 1/snr) over the singular values of F.
double spectral_mse(const RVector &singular_values, double snr, std::size_t users);

// Expected E||b - beta y||^2 for an arbitrary precoder and scalar:
// ||I - beta P F||_F^2 + beta^2 sum sigma_k^2.
double expected_mse(const CMatrix &precoder, const CMatrix &effective, double beta, double total_noise);

// Same, minimized over the real scalar beta. Returns {mse, beta}.
std::pair<double, double> expected_mse_optimal_beta(const CMatrix &precoder, const CMatrix &effective,
                                                    double total_noise);

// P = sqrt(P_S) * X / ||X||_F with unconstrained complex X. The constraint holds for every X.
class TrainablePrecoder
{
public:
    TrainablePrecoder(std::size_t users, std::size_t antennas, double total_power, const CMatrix &init);

    std::size_t users() const { return static_cast<std::size_t>(backing_.rows()); }
    std::size_t antennas() const { return static_cast<std::size_t>(backing_.cols()); }
    double total_power() const { return total_power_; }
    const CMatrix &backing() const { return backing_; }

    CMatrix matrix() const;

    // Real parameter vector: column-major real parts followed by imaginary parts.
    std::size_t num_parameters() const { return 2 * static_cast<std::size_t>(backing_.size()); }
    RVector parameters() const;
    void set_parameters(const RVector &params);

    // Maps the conjugate-convention gradient with respect to P (dL = Re<g, dP>) to the
    // gradient with respect to the real parameter vector.
    RVector backing_gradient(const CMatrix &grad_p) const;

private:
    CMatrix backing_;
    double total_power_;
};

} // namespace metastack
