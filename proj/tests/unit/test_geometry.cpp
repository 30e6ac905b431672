// SPDX-License-Identifier: Apache-2.0

#include "metastack/geometry.hpp"
#include "metastack/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace metastack;

namespace
{

SimGeometry two_layer(double sigma, double s, std::size_t qx, std::size_t qy, double pitch)
{
    return SimGeometry({{0.0, 0.0}}, sigma, s, {LayerGrid(qx, qy, pitch, sigma), LayerGrid(qx, qy, pitch, sigma + s)},
                       28e9, 1e-6, 1e-6, 0.005);
}

} // namespace

TEST_CASE("single atom sits at the grid centroid")
{
    const LayerGrid g(1, 1, 0.5 * kSpeedOfLight / 28e9, 0.1);
    const Point2 p = g.atom_position(0);
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
}

TEST_CASE("row-major index: (2, 3) on a grid with 12 columns is 27")
{
    const LayerGrid g(12, 12, 0.01, 0.1);
    CHECK(g.index(2, 3) == 27);
    const auto [qx, qy] = g.unmap(27);
    CHECK(qx == 2);
    CHECK(qy == 3);
}

TEST_CASE("2x2 grid with 1 m pitch puts atom 0 at (-0.5, -0.5)")
{
    const LayerGrid g(2, 2, 1.0, 1.0);
    CHECK(g.atom_position(0).x == doctest::Approx(-0.5));
    CHECK(g.atom_position(0).y == doctest::Approx(-0.5));
    CHECK(g.atom_position(3).x == doctest::Approx(0.5));
}

TEST_CASE("index mapping round-trips over the whole grid")
{
    const LayerGrid g(5, 7, 0.1, 0.2);
    for (std::size_t qx = 0; qx < 5; ++qx)
        for (std::size_t qy = 0; qy < 7; ++qy)
        {
            const auto q = g.index(qx, qy);
            REQUIRE(q < g.size());
            CHECK(g.unmap(q) == std::make_pair(qx, qy));
        }
    CHECK_THROWS_AS(g.atom_position(35), std::out_of_range);
    CHECK_THROWS_AS(g.unmap(35), std::out_of_range);
}

TEST_CASE("grid is centered: coordinates sum to zero")
{
    const LayerGrid g(4, 6, 0.3, 1.0);
    double sx = 0.0, sy = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q)
    {
        sx += g.atom_position(q).x;
        sy += g.atom_position(q).y;
        CHECK(g.atom_position(q).x == doctest::Approx(oracle::centered(q / 6, 4, 0.3)));
        CHECK(g.atom_position(q).y == doctest::Approx(oracle::centered(q % 6, 6, 0.3)));
    }
    CHECK(std::abs(sx) < 1e-12);
    CHECK(std::abs(sy) < 1e-12);
}

TEST_CASE("invalid grids and geometries are rejected")
{
    CHECK_THROWS_AS(LayerGrid(0, 3, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(LayerGrid(3, 3, 0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(LayerGrid(3, 3, 0.1, 0.0), ConfigError);
    // z offset inconsistent with sigma + l s
    CHECK_THROWS_AS(SimGeometry({{0.0, 0.0}}, 0.1, 0.2, {LayerGrid(2, 2, 0.1, 0.1), LayerGrid(2, 2, 0.1, 0.25)}, 28e9,
                                1e-6, 1e-6, 0.005),
                    ConfigError);
    GeometryParams p;
    CHECK_THROWS_AS(SimGeometry::from_params(p), ConfigError); // no layers
}

TEST_CASE("full-scale geometry: wavelength, layer offsets and a centered 2x2 array")
{
    GeometryParams p;
    p.layer_cells.assign(8, {12, 12});
    const SimGeometry geo = SimGeometry::from_params(p);
    const double lambda = 3e8 / 28e9;
    CHECK(geo.wavelength() == doctest::Approx(lambda).epsilon(1e-15));
    CHECK(geo.num_antennas() == 4);
    CHECK(geo.num_layers() == 8);
    CHECK(geo.last_layer_size() == 144);
    for (std::size_t l = 0; l < 8; ++l)
        CHECK(geo.layer(l).z_offset() == doctest::Approx(0.5 * lambda + static_cast<double>(l) * 0.5 * lambda));
    const auto &a = geo.array_positions();
    REQUIRE(a.size() == 4);
    for (std::size_t n = 0; n < 4; ++n)
    {
        CHECK(std::abs(a[n].x) == doctest::Approx(0.25 * lambda));
        CHECK(std::abs(a[n].y) == doctest::Approx(0.25 * lambda));
    }
    CHECK(geo.meta_atom_area() == doctest::Approx(0.25 * lambda * lambda));
}

TEST_CASE("array-to-layer distance: coaxial gives sigma, (3, 4) offset with sigma 12 gives 13")
{
    const SimGeometry coax({{0.0, 0.0}}, 0.7, 0.5, {LayerGrid(1, 1, 1.0, 0.7)}, 28e9, 1e-6, 1e-6, 1.0);
    CHECK(array_to_layer_distance(coax, 0, 0) == doctest::Approx(0.7));

    const SimGeometry py({{-3.0, -4.0}}, 12.0, 1.0, {LayerGrid(1, 1, 1.0, 12.0)}, 28e9, 1e-6, 1e-6, 1.0);
    CHECK(array_to_layer_distance(py, 0, 0) == doctest::Approx(13.0).epsilon(1e-14));
}

TEST_CASE("layer-to-layer distance: aligned atoms give s, (0.03, 0.04) offset with s 0.12 gives 0.13")
{
    const SimGeometry g = two_layer(0.05, 0.12, 3, 3, 0.01);
    for (std::size_t q = 0; q < 9; ++q)
        CHECK(layer_to_layer_distance(g, 1, q, q) == doctest::Approx(0.12));

    // Offsets of 3 and 4 pitches with pitch 0.01 m.
    const SimGeometry h = two_layer(0.05, 0.12, 5, 5, 0.01);
    const auto src = h.layer(0).index(0, 0);
    const auto dst = h.layer(1).index(3, 4);
    CHECK(layer_to_layer_distance(h, 1, src, dst) == doctest::Approx(0.13).epsilon(1e-14));
    CHECK_THROWS(layer_to_layer_distance(h, 0, 0, 0));
    CHECK_THROWS(layer_to_layer_distance(h, 2, 0, 0));
}

TEST_CASE("random geometry distances match a direct formula and respect the axial lower bound")
{
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial)
    {
        const double sigma = rng.uniform(0.001, 0.05), s = rng.uniform(0.001, 0.05), pitch = rng.uniform(0.001, 0.01);
        const std::size_t qx = 2 + trial, qy = 3 + trial;
        const double d_s = rng.uniform(0.001, 0.02);
        const SimGeometry g({{-0.5 * d_s, 0.0}, {0.5 * d_s, 0.0}}, sigma, s,
                            {LayerGrid(qx, qy, pitch, sigma), LayerGrid(qx, qy, pitch, sigma + s)}, 28e9, 1e-6, 1e-6,
                            d_s);
        for (std::size_t n = 0; n < 2; ++n)
            for (std::size_t q = 0; q < qx * qy; ++q)
            {
                const double dx = oracle::centered(q / qy, qx, pitch) - (n == 0 ? -0.5 : 0.5) * d_s;
                const double dy = oracle::centered(q % qy, qy, pitch);
                const double d = array_to_layer_distance(g, n, q);
                CHECK(d == doctest::Approx(std::sqrt(dx * dx + dy * dy + sigma * sigma)).epsilon(1e-14));
                CHECK(d >= sigma);
                CHECK(sigma / d > 0.0);
                CHECK(sigma / d <= 1.0);
            }
    }
}

TEST_CASE("12x12 layer pair: all 144^2 distances match a brute-force loop")
{
    GeometryParams p;
    p.layer_cells.assign(2, {12, 12});
    const SimGeometry g = SimGeometry::from_params(p);
    const double pitch = 0.5 * g.wavelength(), s = 0.5 * g.wavelength();
    std::size_t mismatches = 0;
    for (std::size_t a = 0; a < 144; ++a)
        for (std::size_t b = 0; b < 144; ++b)
        {
            const double dx = oracle::centered(b / 12, 12, pitch) - oracle::centered(a / 12, 12, pitch);
            const double dy = oracle::centered(b % 12, 12, pitch) - oracle::centered(a % 12, 12, pitch);
            const double expect = std::sqrt(dx * dx + dy * dy + s * s);
            const double got = layer_to_layer_distance(g, 1, a, b);
            mismatches += std::abs(got - expect) > 1e-14 * expect;
            mismatches += got < s;
        }
    CHECK(mismatches == 0);
}

TEST_CASE("centered UPA: N = 4 is a 2x2 square, N = 6 is 2x3")
{
    const auto four = centered_upa(4, 1.0);
    REQUIRE(four.size() == 4);
    CHECK(four[0].x == doctest::Approx(-0.5));
    CHECK(four[0].y == doctest::Approx(-0.5));
    CHECK(four[3].x == doctest::Approx(0.5));
    CHECK(four[3].y == doctest::Approx(0.5));
    const auto six = centered_upa(6, 2.0);
    REQUIRE(six.size() == 6);
    double sx = 0.0;
    for (const auto &p : six)
        sx += p.x + p.y;
    CHECK(std::abs(sx) < 1e-12);
}
