// SPDX-License-Identifier: Apache-2.0
//
// Gray-labelled square QAM with unit average symbol energy.
//
// Bits are consumed most-significant first. The first half of a label drives the in-phase
// axis, the second half the quadrature axis. Per axis, the leading bit is the sign
// (0 -> positive) and the remaining bits select the Gray-coded magnitude; for 16-QAM the
// per-axis levels -3, -1, +1, +3 carry labels 11, 10, 00, 01.

#pragma once

#include "metastack/common.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace metastack
{

enum class Modulation
{
    Qpsk,
    Qam16,
};

std::string_view to_string(Modulation m);
Modulation parse_modulation(std::string_view text);

class Constellation
{
public:
    explicit Constellation(Modulation modulation);

    Modulation modulation() const { return modulation_; }
    std::size_t order() const { return points_.size(); }
    unsigned bits_per_symbol() const { return bits_per_symbol_; }
    const std::vector<Complex> &points() const { return points_; }

    // points()[label] is the symbol carrying `label`.
    Complex map(std::uint32_t label) const { return points_.at(label); }

    // Nearest point by Euclidean distance.
    std::uint32_t demap(Complex sample) const;

    // Maps bits.size() / bits_per_symbol() symbols.
    std::vector<Complex> modulate(std::span<const std::uint8_t> bits) const;

private:
    Modulation modulation_;
    unsigned bits_per_symbol_;
    std::vector<Complex> points_;
    std::vector<double> axis_levels_; // sorted ascending
    std::vector<std::uint32_t> axis_labels_;
};

} // namespace metastack
