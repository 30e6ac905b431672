// SPDX-License-Identifier: Apache-2.0
//
// Trainable state of a stacked metasurface: one transmission coefficient
// tau = alpha * exp(j phi) per meta-atom.
//
// Phase-controlled (PC) layers have fixed amplitude alpha_pc <= 1 and free phases.
// Amplitude-controlled (AC) layers have free amplitudes in [alpha_min, alpha_max]
// and phases frozen at initialization.
//
// Every free quantity is backed by one unconstrained real parameter:
//   PC atom: raw phase, wrapped into [0, 2pi) on read-out;
//   AC atom: u with alpha = alpha_min + (alpha_max - alpha_min) * logistic(u).
// The parameter vector concatenates layers in order.

#pragma once

#include "metastack/common.hpp"
#include "metastack/geometry.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace metastack
{

enum class LayerKind
{
    AmplitudeControlled,
    PhaseControlled,
};

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

struct GainBounds
{
    double min_db = -22.0;
    double max_db = 13.0;

    double min_linear() const { return db_to_amplitude(min_db); }
    double max_linear() const { return db_to_amplitude(max_db); }
};

double logistic(double u);
double wrap_phase(double phi);

class SimDevice
{
public:
    // Seeded initialization: PC phases and AC frozen phases uniform on [0, 2pi), AC amplitudes
    // at the geometric midpoint of the bounds, sqrt(alpha_min * alpha_max).
    static SimDevice init(const SimGeometry &geometry, std::span<const LayerKind> kinds, GainBounds bounds,
                          double passive_gain, std::uint64_t seed);

    // Builds a device from explicit per-layer amplitudes and phases (used by deserialization).
    // AC amplitudes are clamped into the bounds; PC amplitudes must equal passive_gain.
    static SimDevice from_state(std::vector<LayerKind> kinds, GainBounds bounds, double passive_gain,
                                const std::vector<RVector> &amplitudes, const std::vector<RVector> &phases);

    std::size_t num_layers() const { return layers_.size(); }
    std::size_t layer_size(std::size_t l) const { return static_cast<std::size_t>(layers_.at(l).raw.size()); }
    LayerKind kind(std::size_t l) const { return layers_.at(l).kind; }
    std::vector<LayerKind> kinds() const;
    GainBounds bounds() const { return bounds_; }
    double passive_gain() const { return passive_gain_; }

    RVector amplitudes(std::size_t l) const;
    RVector phases(std::size_t l) const; // in [0, 2pi)
    CVector transmission(std::size_t l) const;
    std::vector<CVector> transmissions() const;

    // d alpha / d u for AC layers (zero for PC layers).
    RVector amplitude_slope(std::size_t l) const;

    std::size_t num_parameters() const;
    std::size_t parameter_offset(std::size_t l) const;
    RVector parameters() const;
    void set_parameters(const RVector &params);

    // Wraps PC phases into [0, 2pi). AC amplitudes are always in bounds through the
    // logistic map and frozen quantities are never stored as parameters.
    SimDevice projected() const;

    // Multiplies every amplitude of AC layer l by `factor`, clamped into the bounds.
    void scale_amplitudes(std::size_t l, double factor);

    // Checks the constraints on read-out values; returns an empty string when valid.
    std::string validate(double tolerance = 1e-12) const;

    bool operator==(const SimDevice &other) const;

private:
    struct Layer
    {
        LayerKind kind;
        RVector raw;          // PC: unwrapped phase. AC: logistic pre-image.
        RVector fixed_phases; // AC only
    };

    SimDevice(std::vector<Layer> layers, GainBounds bounds, double passive_gain);
    double amplitude_from_raw(double u) const;
    double raw_from_amplitude(double alpha) const;

    std::vector<Layer> layers_;
    GainBounds bounds_;
    double passive_gain_;
};

} // namespace metastack
