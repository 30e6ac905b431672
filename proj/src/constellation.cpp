// SPDX-License-Identifier: Apache-2.0

#include "metastack/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace metastack
{

std::string_view to_string(Modulation m)
{
    return m == Modulation::Qpsk ? "qpsk" : "16qam";
}

Modulation parse_modulation(std::string_view text)
{
    if (text == "qpsk" || text == "QPSK" || text == "4qam")
        return Modulation::Qpsk;
    if (text == "16qam" || text == "16-QAM" || text == "qam16" || text == "16QAM")
        return Modulation::Qam16;
    throw ConfigError("unknown modulation '" + std::string(text) + "'");
}

Constellation::Constellation(Modulation modulation) : modulation_(modulation)
{
    // Per-axis PAM with Gray labels, indexed by label.
    std::vector<double> level_of_label;
    if (modulation == Modulation::Qpsk)
    {
        bits_per_symbol_ = 2;
        level_of_label = {1.0, -1.0};
    }
    else
    {
        bits_per_symbol_ = 4;
        level_of_label = {1.0, 3.0, -1.0, -3.0}; // 00, 01, 10, 11
    }
    const unsigned axis_bits = bits_per_symbol_ / 2;
    const std::uint32_t axis_order = 1u << axis_bits;

    double energy = 0.0;
    for (double v : level_of_label)
        energy += 2.0 * v * v;
    const double norm = std::sqrt(energy / static_cast<double>(axis_order));

    points_.resize(static_cast<std::size_t>(axis_order) * axis_order);
    for (std::uint32_t i = 0; i < axis_order; ++i)
        for (std::uint32_t q = 0; q < axis_order; ++q)
            points_[(i << axis_bits) | q] = Complex(level_of_label[i], level_of_label[q]) / norm;

    std::vector<std::uint32_t> order(axis_order);
    for (std::uint32_t i = 0; i < axis_order; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return level_of_label[a] < level_of_label[b]; });
    for (auto lab : order)
    {
        axis_levels_.push_back(level_of_label[lab] / norm);
        axis_labels_.push_back(lab);
    }
}

std::uint32_t Constellation::demap(Complex sample) const
{
    // Square lattice: the nearest point decomposes into independent per-axis decisions.
    auto nearest = [this](double v) {
        std::size_t best = 0;
        double best_d = std::abs(v - axis_levels_[0]);
        for (std::size_t i = 1; i < axis_levels_.size(); ++i)
        {
            const double d = std::abs(v - axis_levels_[i]);
            if (d < best_d)
            {
                best_d = d;
                best = i;
            }
        }
        return axis_labels_[best];
    };
    const unsigned axis_bits = bits_per_symbol_ / 2;
    return (nearest(sample.real()) << axis_bits) | nearest(sample.imag());
}

std::vector<Complex> Constellation::modulate(std::span<const std::uint8_t> bits) const
{
    const std::size_t n = bits.size() / bits_per_symbol_;
    std::vector<Complex> out(n);
    for (std::size_t s = 0; s < n; ++s)
    {
        std::uint32_t label = 0;
        for (unsigned b = 0; b < bits_per_symbol_; ++b)
            label = (label << 1) | (bits[s * bits_per_symbol_ + b] & 1u);
        out[s] = map(label);
    }
    return out;
}

} // namespace metastack
