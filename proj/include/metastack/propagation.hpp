// SPDX-License-Identifier: Apache-2.0
//
// Rayleigh-Sommerfeld diffraction between consecutive planes and the forward operator
// G = W_1 T_1 W_2 T_2 ... W_L T_L mapping antenna feeds to the field leaving the last layer.

#pragma once

#include "metastack/common.hpp"
#include "metastack/device.hpp"
#include "metastack/geometry.hpp"

#include <span>
#include <vector>

namespace metastack
{

// Coupling coefficient between a source point and an observation point a distance `distance`
// apart, for planes separated by `axial` (so cos(theta) = axial / distance).
Complex rayleigh_sommerfeld(double area, double axial, double distance, double wavelength);

struct DiffractionMatrix
{
    CMatrix entries;
    int source_layer = 0; // 0 = antenna array, l >= 1 = metasurface layer l (1-based)
    int target_layer = 1;
};

// N x Q(1): antennas to the first layer.
DiffractionMatrix build_w1(const SimGeometry &geometry);

// Q(l-1) x Q(l): 0-based `layer` in [1, L-1] receives from layer - 1.
DiffractionMatrix build_w_layer(const SimGeometry &geometry, std::size_t layer);

// All L matrices. They do not depend on the device, so compute once per geometry.
std::vector<DiffractionMatrix> build_diffraction_chain(const SimGeometry &geometry);

struct ForwardOperator
{
    CMatrix matrix; // N x Q(L)
    // layer_inputs[l] = W_1 T_1 ... W_l (N x Q(l)): the field incident on layer l before T_l.
    std::vector<CMatrix> layer_inputs;
};

// Left-to-right accumulation; every intermediate stays N x Q(l).
ForwardOperator compose_forward(std::span<const DiffractionMatrix> chain, std::span<const CVector> transmissions);
ForwardOperator compose_forward(std::span<const DiffractionMatrix> chain, const SimDevice &device);

struct RadiatedPower
{
    double power = 0.0; // ||P G||_F^2
    double bound = 0.0; // ||P||_F^2 * ||G||_2^2
};

// Throws std::logic_error if the power exceeds its bound beyond round-off.
RadiatedPower radiated_power(const CMatrix &precoder, const CMatrix &forward);

double spectral_norm(const CMatrix &m);

} // namespace metastack
