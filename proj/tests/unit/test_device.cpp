// SPDX-License-Identifier: Apache-2.0

#include "metastack/device.hpp"
#include "metastack/geometry.hpp"
#include "metastack/optimizer.hpp"
#include "metastack/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace metastack;

namespace
{

SimGeometry small_geometry(std::size_t layers = 4)
{
    GeometryParams p;
    p.layer_cells.assign(layers, {3, 4});
    return SimGeometry::from_params(p);
}

const std::vector<LayerKind> kMixed{LayerKind::AmplitudeControlled, LayerKind::PhaseControlled,
                                    LayerKind::AmplitudeControlled, LayerKind::PhaseControlled};

} // namespace

TEST_CASE("PC layers carry exactly the passive gain")
{
    const SimDevice d = SimDevice::init(small_geometry(), kMixed, GainBounds{}, 0.9, 1);
    for (std::size_t l : {1UL, 3UL})
    {
        CHECK(d.amplitudes(l).isConstant(0.9));
        CHECK(d.transmission(l).cwiseAbs().maxCoeff() == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(d.transmission(l).cwiseAbs().minCoeff() == doctest::Approx(0.9).epsilon(1e-15));
    }
}

TEST_CASE("dB bounds -22..13 map to linear amplitude limits")
{
    const GainBounds b{};
    CHECK(b.min_linear() == doctest::Approx(std::pow(10.0, -22.0 / 20.0)).epsilon(1e-15));
    CHECK(b.max_linear() == doctest::Approx(std::pow(10.0, 13.0 / 20.0)).epsilon(1e-15));
    const SimDevice d = SimDevice::init(small_geometry(), kMixed, b, 0.9, 1);
    CHECK(d.amplitudes(0).isConstant(std::sqrt(b.min_linear() * b.max_linear()), 1e-12));
}

TEST_CASE("same seed gives an identical device, different seeds differ")
{
    const auto geo = small_geometry();
    const SimDevice a = SimDevice::init(geo, kMixed, GainBounds{}, 0.9, 77);
    const SimDevice b = SimDevice::init(geo, kMixed, GainBounds{}, 0.9, 77);
    const SimDevice c = SimDevice::init(geo, kMixed, GainBounds{}, 0.9, 78);
    CHECK(a == b);
    CHECK(a.parameters() == b.parameters());
    CHECK_FALSE(a == c);
}

TEST_CASE("initial phases lie in [0, 2pi)")
{
    const SimDevice d = SimDevice::init(small_geometry(), kMixed, GainBounds{}, 0.9, 5);
    for (std::size_t l = 0; l < d.num_layers(); ++l)
    {
        CHECK(d.phases(l).minCoeff() >= 0.0);
        CHECK(d.phases(l).maxCoeff() < kTwoPi);
    }
}

TEST_CASE("init rejects bad bounds, passive gain and kind count")
{
    const auto geo = small_geometry();
    CHECK_THROWS_AS(SimDevice::init(geo, kMixed, GainBounds{5.0, -5.0}, 0.9, 1), ConfigError);
    CHECK_THROWS_AS(SimDevice::init(geo, kMixed, GainBounds{}, 1.2, 1), ConfigError);
    CHECK_THROWS_AS(SimDevice::init(geo, kMixed, GainBounds{}, 0.0, 1), ConfigError);
    const std::vector<LayerKind> three(3, LayerKind::PhaseControlled);
    CHECK_THROWS_AS(SimDevice::init(geo, three, GainBounds{}, 0.9, 1), ConfigError);
}

TEST_CASE("unit amplitude and zero phase everywhere gives identity transmissions")
{
    const std::vector<LayerKind> pc(2, LayerKind::PhaseControlled);
    const std::vector<RVector> amps(2, RVector::Ones(12));
    const std::vector<RVector> phases(2, RVector::Zero(12));
    const SimDevice d = SimDevice::from_state(pc, GainBounds{}, 1.0, amps, phases);
    for (const auto &t : d.transmissions())
        CHECK((t - CVector::Ones(12)).norm() == 0.0);
}

TEST_CASE("amplitudes and phases read back from T reproduce the state")
{
    const SimDevice d = SimDevice::init(small_geometry(), kMixed, GainBounds{}, 0.9, 21);
    std::vector<RVector> amps, phases;
    for (std::size_t l = 0; l < d.num_layers(); ++l)
    {
        const CVector t = d.transmission(l);
        RVector a(t.size()), p(t.size());
        for (Eigen::Index q = 0; q < t.size(); ++q)
        {
            a(q) = std::abs(t(q));
            p(q) = wrap_phase(std::arg(t(q)));
            CHECK(a(q) == doctest::Approx(d.amplitudes(l)(q)).epsilon(1e-14));
        }
        amps.push_back(a);
        phases.push_back(p);
    }
    const SimDevice e = SimDevice::from_state(kMixed, GainBounds{}, 0.9, amps, phases);
    for (std::size_t l = 0; l < d.num_layers(); ++l)
        CHECK((e.transmission(l) - d.transmission(l)).norm() < 1e-12);
}

TEST_CASE("projection is idempotent on a valid device and wraps PC phases")
{
    SimDevice d = SimDevice::init(small_geometry(), kMixed, GainBounds{}, 0.9, 4);
    const SimDevice p1 = d.projected();
    for (std::size_t l = 0; l < d.num_layers(); ++l)
        CHECK((p1.transmission(l) - d.transmission(l)).norm() < 1e-12);
    CHECK(p1.projected() == p1);

    RVector theta = d.parameters();
    const auto off = static_cast<Eigen::Index>(d.parameter_offset(1));
    theta(off) = kTwoPi + 0.1;
    theta(off + 1) = -0.25;
    d.set_parameters(theta);
    const SimDevice w = d.projected();
    CHECK(w.phases(1)(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(w.phases(1)(1) == doctest::Approx(kTwoPi - 0.25).epsilon(1e-12));
    CHECK(w.parameters()(off) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(wrap_phase(kTwoPi + 0.1) == doctest::Approx(0.1));
}

TEST_CASE("AC amplitude saturates at the bounds as the raw parameter diverges")
{
    const GainBounds b{};
    SimDevice d = SimDevice::init(small_geometry(), kMixed, b, 0.9, 4);
    RVector theta = d.parameters();
    theta.head(12).setConstant(1e6);
    theta(1) = -1e6;
    d.set_parameters(theta);
    CHECK(d.amplitudes(0)(0) == doctest::Approx(b.max_linear()).epsilon(1e-12));
    CHECK(d.amplitudes(0)(1) == doctest::Approx(b.min_linear()).epsilon(1e-12));
    CHECK(d.validate().empty());
}

TEST_CASE("amplitude map is strictly monotone with a positive slope")
{
    const GainBounds b{};
    SimDevice d = SimDevice::init(small_geometry(), kMixed, b, 0.9, 4);
    double prev = -1.0;
    for (double u = -30.0; u <= 30.0; u += 0.5)
    {
        RVector theta = d.parameters();
        theta(0) = u;
        d.set_parameters(theta);
        const double a = d.amplitudes(0)(0);
        CHECK(a > prev);
        CHECK(d.amplitude_slope(0)(0) > 0.0);
        prev = a;
    }
    CHECK(logistic(-800.0) == 0.0);
    CHECK(logistic(800.0) == 1.0);
}

TEST_CASE("trainable parameter count is the PC phases plus the AC amplitudes")
{
    GeometryParams p;
    p.layer_cells = {{3, 3}, {2, 5}, {4, 4}};
    const SimGeometry geo = SimGeometry::from_params(p);
    const std::vector<LayerKind> kinds{LayerKind::PhaseControlled, LayerKind::AmplitudeControlled,
                                       LayerKind::PhaseControlled};
    const SimDevice d = SimDevice::init(geo, kinds, GainBounds{}, 0.8, 2);
    CHECK(d.num_parameters() == 9 + 10 + 16);
    CHECK(d.parameter_offset(2) == 19);
}

TEST_CASE("random optimizer walks keep every constraint and leave frozen quantities untouched")
{
    const auto geo = small_geometry();
    SimDevice d = SimDevice::init(geo, kMixed, GainBounds{}, 0.9, 9);
    const RVector frozen0 = d.phases(0), frozen2 = d.phases(2);
    Rng rng(3);
    Optimizer opt(OptimizerKind::AdaptiveMoment, 0.5, static_cast<Eigen::Index>(d.num_parameters()));
    RVector theta = d.parameters();
    for (int step = 0; step < 300; ++step)
    {
        RVector g(theta.size());
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g(i) = 50.0 * rng.normal();
        opt.step(theta, g);
        d.set_parameters(theta);
        const SimDevice p = d.projected();
        REQUIRE(p.validate().empty());
        CHECK((p.phases(0) - frozen0).norm() == 0.0);
        CHECK((p.phases(2) - frozen2).norm() == 0.0);
        CHECK(p.amplitudes(1).isConstant(0.9));
    }
}

TEST_CASE("scale_amplitudes only touches AC layers and stays in bounds")
{
    SimDevice d = SimDevice::init(small_geometry(), kMixed, GainBounds{}, 0.9, 9);
    const double a0 = d.amplitudes(0)(0);
    d.scale_amplitudes(0, 2.0);
    CHECK(d.amplitudes(0)(0) == doctest::Approx(2.0 * a0).epsilon(1e-9));
    d.scale_amplitudes(0, 1e9);
    CHECK(d.amplitudes(0).maxCoeff() <= GainBounds{}.max_linear() + 1e-12);
    CHECK_THROWS(d.scale_amplitudes(1, 2.0));
    CHECK(d.validate().empty());
}

TEST_CASE("layer kind strings")
{
    CHECK(parse_layer_kind("AC") == LayerKind::AmplitudeControlled);
    CHECK(parse_layer_kind("pc") == LayerKind::PhaseControlled);
    CHECK(to_string(LayerKind::PhaseControlled) == "PC");
    CHECK_THROWS_AS(parse_layer_kind("xx"), ConfigError);
}
