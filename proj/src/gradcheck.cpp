// SPDX-License-Identifier: Apache-2.0

#include "metastack/gradcheck.hpp"
#include "metastack/device.hpp"
#include "metastack/geometry.hpp"
#include "metastack/gradient.hpp"
#include "metastack/precoder.hpp"
#include "metastack/propagation.hpp"
#include "metastack/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace metastack
{

double gradient_relative_error(double analytic, double numeric, double floor)
{
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return scale < floor ? diff : diff / scale;
}

namespace
{

double central_difference(const std::function<double(const RVector &)> &f, RVector x, Eigen::Index i, double h)
{
    const double x0 = x(i);
    x(i) = x0 + h;
    const double up = f(x);
    x(i) = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

std::string device_parameter_name(const SimDevice &device, Eigen::Index i)
{
    std::size_t l = 0;
    while (l + 1 < device.num_layers() && static_cast<Eigen::Index>(device.parameter_offset(l + 1)) <= i)
        ++l;
    return device.kind(l) == LayerKind::PhaseControlled ? "pc_phase" : "ac_amplitude";
}

void record(GradcheckReport &report, std::string loss, std::string parameter, std::size_t index, double a, double n)
{
    GradcheckEntry e{std::move(loss), std::move(parameter), index, a, n, gradient_relative_error(a, n)};
    report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
    report.entries.push_back(std::move(e));
}

} // namespace

GradcheckReport run_gradcheck(const GradcheckOptions &options)
{
    GeometryParams gp;
    gp.antennas = options.antennas;
    gp.layer_cells.assign(options.layers, {options.cells_x, options.cells_y});
    const SimGeometry geo = SimGeometry::from_params(gp);
    const auto chain = build_diffraction_chain(geo);

    std::vector<LayerKind> kinds;
    for (std::size_t l = 0; l < options.layers; ++l)
        kinds.push_back(l % 2 == 0 ? LayerKind::AmplitudeControlled : LayerKind::PhaseControlled);

    Rng rng(options.seed);
    SimDevice device = SimDevice::init(geo, kinds, GainBounds{}, 0.9, derive_seed(options.seed, {1}));
    // Move away from the symmetric starting point so every entry has a distinct value.
    RVector theta = device.parameters();
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        theta(i) += rng.uniform(-1.0, 1.0);
    device.set_parameters(theta);

    const auto q = static_cast<Eigen::Index>(geo.last_layer_size());
    const auto k = static_cast<Eigen::Index>(options.users);
    const auto s = static_cast<Eigen::Index>(options.pilot_symbols);
    const CMatrix channel = rng.complex_normal_matrix(q, k);
    const CMatrix symbols = rng.complex_normal_matrix(s, k);
    const CMatrix target = rng.complex_normal_matrix(static_cast<Eigen::Index>(options.antennas), q);
    const double total_power = static_cast<double>(options.users);
    const CMatrix noise = rng.complex_normal_matrix(s, k, total_power / (options.snr * static_cast<double>(k)));
    const TrainablePrecoder precoder(options.users, options.antennas, total_power,
                                     rng.complex_normal_matrix(k, static_cast<Eigen::Index>(options.antennas)));

    GradcheckReport report;
    const double h = options.step;
    const auto n_dev = static_cast<Eigen::Index>(device.num_parameters());

    {
        const LossGradient lg = empirical_mse_gradient(chain, channel, device, precoder, symbols, noise);
        RVector x(n_dev + static_cast<Eigen::Index>(precoder.num_parameters()));
        x << device.parameters(), precoder.parameters();
        auto f = [&](const RVector &v) {
            SimDevice d = device;
            d.set_parameters(v.head(n_dev));
            TrainablePrecoder p = precoder;
            p.set_parameters(v.tail(v.size() - n_dev));
            return empirical_mse(p.matrix(), compose_forward(chain, d).matrix, channel, symbols, noise).loss;
        };
        const auto half = static_cast<Eigen::Index>(precoder.num_parameters() / 2);
        for (Eigen::Index i = 0; i < x.size(); ++i)
        {
            const double a = i < n_dev ? lg.device(i) : lg.precoder(i - n_dev);
            const std::string name = i < n_dev ? device_parameter_name(device, i)
                                     : (i - n_dev) < half ? "precoder_re"
                                                          : "precoder_im";
            record(report, "empirical_mse", name, static_cast<std::size_t>(i), a, central_difference(f, x, i, h));
        }
    }

    {
        const LossGradient lg = closed_form_mse_gradient(chain, channel, device, options.snr);
        auto f = [&](const RVector &v) {
            SimDevice d = device;
            d.set_parameters(v);
            return closed_form_mse(compose_forward(chain, d).matrix, channel, options.snr);
        };
        const RVector x = device.parameters();
        for (Eigen::Index i = 0; i < n_dev; ++i)
            record(report, "closed_form_mse", device_parameter_name(device, i), static_cast<std::size_t>(i),
                   lg.device(i), central_difference(f, x, i, h));
    }

    {
        const LossGradient lg = fitting_loss_gradient(chain, target, device);
        auto f = [&](const RVector &v) {
            SimDevice d = device;
            d.set_parameters(v);
            return fitting_loss(compose_forward(chain, d).matrix, target);
        };
        const RVector x = device.parameters();
        for (Eigen::Index i = 0; i < n_dev; ++i)
            record(report, "fitting_loss", device_parameter_name(device, i), static_cast<std::size_t>(i), lg.device(i),
                   central_difference(f, x, i, h));
    }
    return report;
}

} // namespace metastack
