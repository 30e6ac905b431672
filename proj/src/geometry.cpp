// SPDX-License-Identifier: Apache-2.0

#include "metastack/geometry.hpp"

#include <cmath>
#include <string>

namespace metastack
{

LayerGrid::LayerGrid(std::size_t qx_count, std::size_t qy_count, double spacing, double z_offset)
    : qx_count_(qx_count), qy_count_(qy_count), spacing_(spacing), z_offset_(z_offset)
{
    if (qx_count == 0 || qy_count == 0)
        throw ConfigError("LayerGrid: cell counts must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw ConfigError("LayerGrid: spacing must be positive");
    if (!(z_offset > 0.0) || !std::isfinite(z_offset))
        throw ConfigError("LayerGrid: z_offset must be positive");
}

std::size_t LayerGrid::index(std::size_t qx, std::size_t qy) const
{
    if (qx >= qx_count_ || qy >= qy_count_)
        throw std::out_of_range("LayerGrid::index: (" + std::to_string(qx) + ", " + std::to_string(qy) +
                                ") outside grid");
    return qx * qy_count_ + qy;
}

std::pair<std::size_t, std::size_t> LayerGrid::unmap(std::size_t q) const
{
    if (q >= size())
        throw std::out_of_range("LayerGrid::unmap: atom index " + std::to_string(q) + " >= " +
                                std::to_string(size()));
    return {q / qy_count_, q % qy_count_};
}

Point2 LayerGrid::atom_position(std::size_t q) const
{
    const auto [qx, qy] = unmap(q);
    const double cx = 0.5 * static_cast<double>(qx_count_ - 1);
    const double cy = 0.5 * static_cast<double>(qy_count_ - 1);
    return {(static_cast<double>(qx) - cx) * spacing_, (static_cast<double>(qy) - cy) * spacing_};
}

SimGeometry::SimGeometry(std::vector<Point2> array_positions, double array_to_first_layer,
                         double inter_layer_spacing, std::vector<LayerGrid> layers, double carrier_frequency,
                         double antenna_effective_area, double meta_atom_area, double antenna_spacing)
    : array_positions_(std::move(array_positions)), array_to_first_layer_(array_to_first_layer),
      inter_layer_spacing_(inter_layer_spacing), layers_(std::move(layers)), carrier_frequency_(carrier_frequency),
      antenna_effective_area_(antenna_effective_area), meta_atom_area_(meta_atom_area),
      antenna_spacing_(antenna_spacing)
{
    if (array_positions_.empty())
        throw ConfigError("SimGeometry: at least one antenna required");
    if (layers_.empty())
        throw ConfigError("SimGeometry: at least one layer required");
    if (!(carrier_frequency_ > 0.0))
        throw ConfigError("SimGeometry: carrier frequency must be positive");
    if (!(array_to_first_layer_ > 0.0))
        throw ConfigError("SimGeometry: array-to-first-layer distance must be positive");
    if (layers_.size() > 1 && !(inter_layer_spacing_ > 0.0))
        throw ConfigError("SimGeometry: inter-layer spacing must be positive");
    if (!(antenna_effective_area_ > 0.0) || !(meta_atom_area_ > 0.0))
        throw ConfigError("SimGeometry: areas must be positive");

    // z offsets are determined by sigma and s; reject grids that disagree.
    for (std::size_t l = 0; l < layers_.size(); ++l)
    {
        const double expected = array_to_first_layer_ + static_cast<double>(l) * inter_layer_spacing_;
        if (std::abs(layers_[l].z_offset() - expected) > 1e-12 * std::max(1.0, expected))
            throw ConfigError("SimGeometry: layer " + std::to_string(l) + " z_offset inconsistent with spacings");
    }
}

SimGeometry SimGeometry::from_params(const GeometryParams &p)
{
    if (!(p.carrier_frequency_hz > 0.0))
        throw ConfigError("geometry: carrier frequency must be positive");
    const double wl = kSpeedOfLight / p.carrier_frequency_hz;
    const double sigma = p.array_to_first_layer_wl * wl;
    const double s = p.layer_spacing_wl * wl;

    std::vector<LayerGrid> layers;
    layers.reserve(p.layer_cells.size());
    for (std::size_t l = 0; l < p.layer_cells.size(); ++l)
        layers.emplace_back(p.layer_cells[l].first, p.layer_cells[l].second, p.cell_spacing_wl * wl,
                            sigma + static_cast<double>(l) * s);

    return SimGeometry(centered_upa(p.antennas, p.antenna_spacing_wl * wl), sigma, s, std::move(layers),
                       p.carrier_frequency_hz, p.antenna_area_wl2 * wl * wl, p.cell_area_wl2 * wl * wl,
                       p.antenna_spacing_wl * wl);
}

std::vector<Point2> centered_upa(std::size_t n, double spacing)
{
    if (n == 0)
        throw ConfigError("centered_upa: antenna count must be positive");
    std::size_t rows = 1;
    for (std::size_t r = 1; r * r <= n; ++r)
        if (n % r == 0)
            rows = r;
    const std::size_t cols = n / rows;
    const LayerGrid grid(rows, cols, spacing, 1.0);
    std::vector<Point2> pos(n);
    for (std::size_t i = 0; i < n; ++i)
        pos[i] = grid.atom_position(i);
    return pos;
}

double array_to_layer_distance(const SimGeometry &geometry, std::size_t n, std::size_t q)
{
    if (n >= geometry.num_antennas())
        throw std::out_of_range("array_to_layer_distance: antenna index out of range");
    const Point2 a = geometry.array_positions()[n];
    const Point2 b = geometry.layer(0).atom_position(q);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double z = geometry.array_to_first_layer();
    return std::sqrt(dx * dx + dy * dy + z * z);
}

double layer_to_layer_distance(const SimGeometry &geometry, std::size_t layer, std::size_t src, std::size_t dst)
{
    if (layer == 0 || layer >= geometry.num_layers())
        throw std::out_of_range("layer_to_layer_distance: layer must be in [1, L-1]");
    const Point2 a = geometry.layer(layer - 1).atom_position(src);
    const Point2 b = geometry.layer(layer).atom_position(dst);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double z = geometry.inter_layer_spacing();
    return std::sqrt(dx * dx + dy * dy + z * z);
}

} // namespace metastack
