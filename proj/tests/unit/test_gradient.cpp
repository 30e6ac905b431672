// SPDX-License-Identifier: Apache-2.0

#include "metastack/gradcheck.hpp"
#include "metastack/gradient.hpp"
#include "metastack/precoder.hpp"
#include "metastack/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace metastack;

namespace
{

struct Small
{
    SimGeometry geo;
    std::vector<DiffractionMatrix> chain;
    SimDevice device;
    CMatrix channel;
};

Small downscaled(std::uint64_t seed)
{
    GeometryParams p;
    p.antennas = 2;
    p.layer_cells.assign(3, {4, 4});
    SimGeometry geo = SimGeometry::from_params(p);
    auto chain = build_diffraction_chain(geo);
    const std::vector<LayerKind> kinds{LayerKind::AmplitudeControlled, LayerKind::PhaseControlled,
                                       LayerKind::PhaseControlled};
    SimDevice d = SimDevice::init(geo, kinds, GainBounds{}, 0.9, seed);
    Rng rng(seed + 1);
    RVector x = d.parameters();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) += rng.uniform(-1.0, 1.0);
    d.set_parameters(x);
    CMatrix h = rng.complex_normal_matrix(16, 2);
    return {std::move(geo), std::move(chain), std::move(d), std::move(h)};
}

// Central difference written independently of the library's audit module.
template <class F>
RVector numeric_gradient(F f, const RVector &x, double h = 1e-4)
{
    RVector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
    {
        RVector a = x, b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

double worst_relative(const RVector &a, const RVector &n)
{
    double w = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        const double scale = std::max(std::abs(a(i)), std::abs(n(i)));
        w = std::max(w, scale < 1e-12 ? std::abs(a(i) - n(i)) : std::abs(a(i) - n(i)) / scale);
    }
    return w;
}

} // namespace

TEST_CASE("empirical MSE: perfect channel gives beta 1 and zero loss")
{
    Rng rng(1);
    const CMatrix b = rng.complex_normal_matrix(50, 3);
    const EmpiricalMse e = empirical_mse(CMatrix::Identity(3, 3), CMatrix::Identity(3, 3), b, CMatrix::Zero(50, 3));
    CHECK(e.beta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.loss < 1e-28);
}

TEST_CASE("empirical MSE: dead channel gives beta 0 and the mean symbol energy")
{
    Rng rng(2);
    const CMatrix b = rng.complex_normal_matrix(40, 4);
    const EmpiricalMse e = empirical_mse(CMatrix::Identity(4, 4), CMatrix::Zero(4, 4), b, CMatrix::Zero(40, 4));
    CHECK(e.beta == 0.0);
    CHECK(e.loss == doctest::Approx(b.squaredNorm() / 40.0));
}

TEST_CASE("empirical MSE with the closed-form scalar approaches the trace form for a long block")
{
    Rng rng(3);
    const CMatrix f = rng.complex_normal_matrix(4, 4);
    const double snr = 10.0, ps = 4.0;
    const Precoder p = mmse_precoder(f, snr, ps);
    const double sigma2 = ps / (4.0 * snr);
    const Eigen::Index s = 40000;
    CMatrix b(s, 4);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index k = 0; k < 4; ++k)
            b(i, k) = Complex(rng.bit() ? 1.0 : -1.0, rng.bit() ? 1.0 : -1.0) / std::sqrt(2.0);
    const CMatrix r = rng.complex_normal_matrix(s, 4, sigma2);
    const double emp = empirical_mse(p.matrix, f, b, r, p.beta).loss;
    // Per-symbol error energies have a spread on the order of the mean; 3 standard errors.
    const CMatrix e = b - p.beta * (b * p.matrix * f + r);
    const Eigen::ArrayXd per = e.rowwise().squaredNorm().array();
    const double sd = std::sqrt((per - per.mean()).square().sum() / static_cast<double>(s - 1));
    CHECK(std::abs(emp - closed_form_mse(f, snr)) < 3.0 * sd / std::sqrt(static_cast<double>(s)));
}

TEST_CASE("every backing parameter's gradient matches central differences")
{
    const Small sys = downscaled(10);
    Rng rng(11);
    const CMatrix b = rng.complex_normal_matrix(6, 2);
    const CMatrix r = rng.complex_normal_matrix(6, 2, 0.1);
    const TrainablePrecoder prec(2, 2, 2.0, rng.complex_normal_matrix(2, 2));

    SUBCASE("empirical MSE, device and precoder")
    {
        const LossGradient lg = empirical_mse_gradient(sys.chain, sys.channel, sys.device, prec, b, r);
        const auto nd = static_cast<Eigen::Index>(sys.device.num_parameters());
        RVector x(nd + static_cast<Eigen::Index>(prec.num_parameters()));
        x << sys.device.parameters(), prec.parameters();
        const RVector num = numeric_gradient(
            [&](const RVector &v) {
                SimDevice d = sys.device;
                d.set_parameters(v.head(nd));
                TrainablePrecoder p = prec;
                p.set_parameters(v.tail(v.size() - nd));
                const CMatrix g = oracle::naive_forward(
                    {sys.chain[0].entries, sys.chain[1].entries, sys.chain[2].entries}, d.transmissions());
                const CMatrix y = b * p.matrix() * g * sys.channel + r;
                const double beta = real_inner(y, b) / y.squaredNorm();
                return (b - beta * y).squaredNorm() / static_cast<double>(b.rows());
            },
            x);
        RVector ana(x.size());
        ana << lg.device, lg.precoder;
        CHECK(worst_relative(ana, num) < 1e-5);
    }

    SUBCASE("closed-form MSE")
    {
        const LossGradient lg = closed_form_mse_gradient(sys.chain, sys.channel, sys.device, 5.0);
        const RVector num = numeric_gradient(
            [&](const RVector &v) {
                SimDevice d = sys.device;
                d.set_parameters(v);
                const CMatrix g = oracle::naive_forward(
                    {sys.chain[0].entries, sys.chain[1].entries, sys.chain[2].entries}, d.transmissions());
                return oracle::eigen_mse(g * sys.channel, 5.0);
            },
            sys.device.parameters());
        CHECK(worst_relative(lg.device, num) < 1e-5);
        CHECK(lg.precoder.size() == 0);
    }

    SUBCASE("fitting loss")
    {
        const CMatrix target = rng.complex_normal_matrix(2, 16);
        const LossGradient lg = fitting_loss_gradient(sys.chain, target, sys.device);
        const RVector num = numeric_gradient(
            [&](const RVector &v) {
                SimDevice d = sys.device;
                d.set_parameters(v);
                const CMatrix g = oracle::naive_forward(
                    {sys.chain[0].entries, sys.chain[1].entries, sys.chain[2].entries}, d.transmissions());
                return (g / g.norm() - target / target.norm()).squaredNorm();
            },
            sys.device.parameters());
        CHECK(worst_relative(lg.device, num) < 1e-5);
    }
}

TEST_CASE("frozen AC phases have no gradient entry")
{
    const Small sys = downscaled(20);
    const LossGradient lg = closed_form_mse_gradient(sys.chain, sys.channel, sys.device, 5.0);
    // 16 AC amplitudes + 2 x 16 PC phases; the 16 frozen AC phases are not parameters.
    CHECK(lg.device.size() == 48);
}

TEST_CASE("a uniform phase shift of one PC layer leaves the closed-form MSE flat")
{
    const Small sys = downscaled(30);
    const LossGradient lg = closed_form_mse_gradient(sys.chain, sys.channel, sys.device, 5.0);
    RVector dir = RVector::Zero(lg.device.size());
    dir.segment(static_cast<Eigen::Index>(sys.device.parameter_offset(1)), 16).setOnes();
    CHECK(std::abs(lg.device.dot(dir)) < 1e-10 * lg.device.norm());

    // Numerically, along the same direction.
    const auto f = [&](double t) {
        SimDevice d = sys.device;
        d.set_parameters(sys.device.parameters() + t * dir);
        return closed_form_mse(compose_forward(sys.chain, d).matrix, sys.channel, 5.0);
    };
    CHECK(std::abs((f(1e-4) - f(-1e-4)) / 2e-4) < 1e-9);
    CHECK(std::abs(f(0.7) - f(0.0)) < 1e-12);
}

TEST_CASE("the library audit agrees with this suite on the downscaled system")
{
    const GradcheckReport r = run_gradcheck();
    CHECK(r.entries.size() > 0);
    CHECK(r.max_relative_error < 1e-5);
    CHECK(gradient_relative_error(1.0, 1.0 + 1e-7) == doctest::Approx(1e-7).epsilon(1e-3));
}
