// SPDX-License-Identifier: Apache-2.0

#include "metastack/device.hpp"
#include "metastack/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace metastack
{

namespace
{
// logistic(+-kRawLimit) is 1 (or 0) to within double precision relative to the bounds.
constexpr double kRawLimit = 40.0;
} // namespace

std::string_view to_string(LayerKind kind)
{
    return kind == LayerKind::AmplitudeControlled ? "AC" : "PC";
}

LayerKind parse_layer_kind(std::string_view text)
{
    if (text == "AC" || text == "ac" || text == "active")
        return LayerKind::AmplitudeControlled;
    if (text == "PC" || text == "pc" || text == "passive")
        return LayerKind::PhaseControlled;
    throw ConfigError("unknown layer kind '" + std::string(text) + "'");
}

double logistic(double u)
{
    if (u >= 0.0)
        return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double wrap_phase(double phi)
{
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    if (w >= kTwoPi)
        w = 0.0;
    return w;
}

SimDevice::SimDevice(std::vector<Layer> layers, GainBounds bounds, double passive_gain)
    : layers_(std::move(layers)), bounds_(bounds), passive_gain_(passive_gain)
{
    if (!(bounds_.min_db <= bounds_.max_db) || !std::isfinite(bounds_.min_db) || !std::isfinite(bounds_.max_db))
        throw ConfigError("gain bounds must satisfy min <= max");
    if (!(passive_gain_ > 0.0 && passive_gain_ <= 1.0))
        throw ConfigError("passive gain must lie in (0, 1]");
}

SimDevice SimDevice::init(const SimGeometry &geometry, std::span<const LayerKind> kinds, GainBounds bounds,
                          double passive_gain, std::uint64_t seed)
{
    if (kinds.size() != geometry.num_layers())
        throw ConfigError("layer kind count " + std::to_string(kinds.size()) + " does not match layer count " +
                          std::to_string(geometry.num_layers()));

    Rng rng(seed);
    std::vector<Layer> layers;
    layers.reserve(kinds.size());
    for (std::size_t l = 0; l < kinds.size(); ++l)
    {
        const auto q = static_cast<Eigen::Index>(geometry.layer(l).size());
        Layer layer{kinds[l], RVector::Zero(q), RVector()};
        if (kinds[l] == LayerKind::PhaseControlled)
        {
            for (Eigen::Index i = 0; i < q; ++i)
                layer.raw(i) = rng.uniform(0.0, kTwoPi);
        }
        else
        {
            layer.fixed_phases.resize(q);
            for (Eigen::Index i = 0; i < q; ++i)
                layer.fixed_phases(i) = rng.uniform(0.0, kTwoPi);
        }
        layers.push_back(std::move(layer));
    }

    SimDevice device(std::move(layers), bounds, passive_gain);
    const double mid = std::sqrt(bounds.min_linear() * bounds.max_linear());
    const double u0 = device.raw_from_amplitude(mid);
    for (auto &layer : device.layers_)
        if (layer.kind == LayerKind::AmplitudeControlled)
            layer.raw.setConstant(u0);
    return device;
}

SimDevice SimDevice::from_state(std::vector<LayerKind> kinds, GainBounds bounds, double passive_gain,
                                const std::vector<RVector> &amplitudes, const std::vector<RVector> &phases)
{
    if (amplitudes.size() != kinds.size() || phases.size() != kinds.size())
        throw ConfigError("device state: per-layer list lengths disagree");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l < kinds.size(); ++l)
    {
        if (amplitudes[l].size() != phases[l].size())
            throw ConfigError("device state: layer " + std::to_string(l) + " amplitude/phase sizes differ");
        layers.push_back({kinds[l], RVector::Zero(phases[l].size()), RVector()});
    }
    SimDevice device(std::move(layers), bounds, passive_gain);
    for (std::size_t l = 0; l < kinds.size(); ++l)
    {
        auto &layer = device.layers_[l];
        if (layer.kind == LayerKind::PhaseControlled)
        {
            for (Eigen::Index i = 0; i < phases[l].size(); ++i)
            {
                if (std::abs(amplitudes[l](i) - passive_gain) > 1e-9)
                    throw ConfigError("device state: PC layer " + std::to_string(l) +
                                      " amplitude differs from passive gain");
                layer.raw(i) = wrap_phase(phases[l](i));
            }
        }
        else
        {
            layer.fixed_phases = phases[l].unaryExpr([](double p) { return wrap_phase(p); });
            for (Eigen::Index i = 0; i < phases[l].size(); ++i)
                layer.raw(i) = device.raw_from_amplitude(amplitudes[l](i));
        }
    }
    return device;
}

double SimDevice::amplitude_from_raw(double u) const
{
    const double lo = bounds_.min_linear();
    const double hi = bounds_.max_linear();
    return std::clamp(lo + (hi - lo) * logistic(u), lo, hi);
}

double SimDevice::raw_from_amplitude(double alpha) const
{
    const double lo = bounds_.min_linear();
    const double hi = bounds_.max_linear();
    if (hi <= lo)
        return 0.0;
    const double t = (alpha - lo) / (hi - lo);
    if (t <= 0.0)
        return -kRawLimit;
    if (t >= 1.0)
        return kRawLimit;
    return std::clamp(std::log(t / (1.0 - t)), -kRawLimit, kRawLimit);
}

std::vector<LayerKind> SimDevice::kinds() const
{
    std::vector<LayerKind> out;
    for (const auto &layer : layers_)
        out.push_back(layer.kind);
    return out;
}

RVector SimDevice::amplitudes(std::size_t l) const
{
    const auto &layer = layers_.at(l);
    if (layer.kind == LayerKind::PhaseControlled)
        return RVector::Constant(layer.raw.size(), passive_gain_);
    return layer.raw.unaryExpr([this](double u) { return amplitude_from_raw(u); });
}

RVector SimDevice::phases(std::size_t l) const
{
    const auto &layer = layers_.at(l);
    if (layer.kind == LayerKind::PhaseControlled)
        return layer.raw.unaryExpr([](double p) { return wrap_phase(p); });
    return layer.fixed_phases;
}

CVector SimDevice::transmission(std::size_t l) const
{
    const auto &layer = layers_.at(l);
    const RVector alpha = amplitudes(l);
    const RVector &phi = layer.kind == LayerKind::PhaseControlled ? layer.raw : layer.fixed_phases;
    CVector tau(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        tau(i) = std::polar(alpha(i), phi(i));
    return tau;
}

std::vector<CVector> SimDevice::transmissions() const
{
    std::vector<CVector> out;
    out.reserve(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l)
        out.push_back(transmission(l));
    return out;
}

RVector SimDevice::amplitude_slope(std::size_t l) const
{
    const auto &layer = layers_.at(l);
    if (layer.kind == LayerKind::PhaseControlled)
        return RVector::Zero(layer.raw.size());
    const double span = bounds_.max_linear() - bounds_.min_linear();
    return layer.raw.unaryExpr([span](double u) {
        const double s = logistic(u);
        return span * s * (1.0 - s);
    });
}

std::size_t SimDevice::num_parameters() const
{
    std::size_t n = 0;
    for (const auto &layer : layers_)
        n += static_cast<std::size_t>(layer.raw.size());
    return n;
}

std::size_t SimDevice::parameter_offset(std::size_t l) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < l; ++i)
        n += static_cast<std::size_t>(layers_.at(i).raw.size());
    return n;
}

RVector SimDevice::parameters() const
{
    RVector out(static_cast<Eigen::Index>(num_parameters()));
    Eigen::Index off = 0;
    for (const auto &layer : layers_)
    {
        out.segment(off, layer.raw.size()) = layer.raw;
        off += layer.raw.size();
    }
    return out;
}

void SimDevice::set_parameters(const RVector &params)
{
    if (static_cast<std::size_t>(params.size()) != num_parameters())
        throw ConfigError("set_parameters: expected " + std::to_string(num_parameters()) + " values, got " +
                          std::to_string(params.size()));
    Eigen::Index off = 0;
    for (auto &layer : layers_)
    {
        layer.raw = params.segment(off, layer.raw.size());
        off += layer.raw.size();
    }
}

SimDevice SimDevice::projected() const
{
    SimDevice out = *this;
    for (auto &layer : out.layers_)
        if (layer.kind == LayerKind::PhaseControlled)
            layer.raw = layer.raw.unaryExpr([](double p) { return wrap_phase(p); });
    return out;
}

void SimDevice::scale_amplitudes(std::size_t l, double factor)
{
    auto &layer = layers_.at(l);
    if (layer.kind != LayerKind::AmplitudeControlled)
        throw ConfigError("scale_amplitudes: layer " + std::to_string(l) + " is not amplitude-controlled");
    const RVector alpha = amplitudes(l);
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        layer.raw(i) = raw_from_amplitude(alpha(i) * factor);
}

std::string SimDevice::validate(double tolerance) const
{
    const double lo = bounds_.min_linear();
    const double hi = bounds_.max_linear();
    for (std::size_t l = 0; l < layers_.size(); ++l)
    {
        const RVector a = amplitudes(l);
        const RVector p = phases(l);
        if (!a.allFinite() || !p.allFinite())
            return "layer " + std::to_string(l) + ": non-finite coefficients";
        if ((p.array() < 0.0).any() || (p.array() >= kTwoPi).any())
            return "layer " + std::to_string(l) + ": phase outside [0, 2pi)";
        if (layers_[l].kind == LayerKind::PhaseControlled)
        {
            if (((a.array() - passive_gain_).abs() > tolerance).any())
                return "layer " + std::to_string(l) + ": PC amplitude differs from passive gain";
        }
        else if ((a.array() < lo - tolerance).any() || (a.array() > hi + tolerance).any())
        {
            return "layer " + std::to_string(l) + ": AC amplitude outside bounds";
        }
    }
    return {};
}

bool SimDevice::operator==(const SimDevice &other) const
{
    if (layers_.size() != other.layers_.size() || bounds_.min_db != other.bounds_.min_db ||
        bounds_.max_db != other.bounds_.max_db || passive_gain_ != other.passive_gain_)
        return false;
    for (std::size_t l = 0; l < layers_.size(); ++l)
    {
        const auto &a = layers_[l];
        const auto &b = other.layers_[l];
        if (a.kind != b.kind || a.raw.size() != b.raw.size() || a.raw != b.raw)
            return false;
        if (a.fixed_phases.size() != b.fixed_phases.size() || a.fixed_phases != b.fixed_phases)
            return false;
    }
    return true;
}

} // namespace metastack
