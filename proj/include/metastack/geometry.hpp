// SPDX-License-Identifier: Apache-2.0
//
// Antenna array and metasurface layer coordinates.
//
// Layers are indexed from 0 (closest to the array) to L-1. Each layer is a centered
// rectangular grid in a plane parallel to the array; meta-atom (qx, qy) is stored at the
// row-major index q = qx * qy_count + qy.

#pragma once

#include "metastack/common.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace metastack
{

struct Point2
{
    double x = 0.0;
    double y = 0.0;
};

class LayerGrid
{
public:
    LayerGrid(std::size_t qx_count, std::size_t qy_count, double spacing, double z_offset);

    std::size_t qx_count() const { return qx_count_; }
    std::size_t qy_count() const { return qy_count_; }
    std::size_t size() const { return qx_count_ * qy_count_; }
    double spacing() const { return spacing_; }
    double z_offset() const { return z_offset_; }

    std::size_t index(std::size_t qx, std::size_t qy) const;
    std::pair<std::size_t, std::size_t> unmap(std::size_t q) const;

    // Throws std::out_of_range for q >= size().
    Point2 atom_position(std::size_t q) const;

private:
    std::size_t qx_count_;
    std::size_t qy_count_;
    double spacing_;
    double z_offset_;
};

// Everything below is given in meters unless noted. All lengths in GeometryParams are
// expressed in wavelengths and converted on construction.
struct GeometryParams
{
    std::size_t antennas = 4;
    double antenna_spacing_wl = 0.5;
    double array_to_first_layer_wl = 0.5;
    double layer_spacing_wl = 0.5;
    std::vector<std::pair<std::size_t, std::size_t>> layer_cells; // (Qx, Qy) per layer
    double cell_spacing_wl = 0.5;
    double carrier_frequency_hz = 28.0e9;
    double antenna_area_wl2 = 0.25;
    double cell_area_wl2 = 0.25;
};

class SimGeometry
{
public:
    SimGeometry(std::vector<Point2> array_positions, double array_to_first_layer, double inter_layer_spacing,
                std::vector<LayerGrid> layers, double carrier_frequency, double antenna_effective_area,
                double meta_atom_area, double antenna_spacing);

    static SimGeometry from_params(const GeometryParams &params);

    const std::vector<Point2> &array_positions() const { return array_positions_; }
    double array_to_first_layer() const { return array_to_first_layer_; }
    double inter_layer_spacing() const { return inter_layer_spacing_; }
    const std::vector<LayerGrid> &layers() const { return layers_; }
    const LayerGrid &layer(std::size_t l) const { return layers_.at(l); }
    double carrier_frequency() const { return carrier_frequency_; }
    double wavelength() const { return kSpeedOfLight / carrier_frequency_; }
    double antenna_effective_area() const { return antenna_effective_area_; }
    double meta_atom_area() const { return meta_atom_area_; }
    double antenna_spacing() const { return antenna_spacing_; }

    std::size_t num_antennas() const { return array_positions_.size(); }
    std::size_t num_layers() const { return layers_.size(); }
    std::size_t last_layer_size() const { return layers_.back().size(); }

private:
    std::vector<Point2> array_positions_;
    double array_to_first_layer_;
    double inter_layer_spacing_;
    std::vector<LayerGrid> layers_;
    double carrier_frequency_;
    double antenna_effective_area_;
    double meta_atom_area_;
    double antenna_spacing_;
};

// Centered uniform planar array with pitch `spacing`. The grid is rows x cols with rows the
// largest divisor of n not exceeding sqrt(n), so n = 4 gives a 2x2 square.
std::vector<Point2> centered_upa(std::size_t n, double spacing);

// Distance from antenna n to atom q of the first layer.
double array_to_layer_distance(const SimGeometry &geometry, std::size_t n, std::size_t q);

// Distance from atom `src` of layer `layer - 1` to atom `dst` of `layer` (layer >= 1).
double layer_to_layer_distance(const SimGeometry &geometry, std::size_t layer, std::size_t src, std::size_t dst);

} // namespace metastack
