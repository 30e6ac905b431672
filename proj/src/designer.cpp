// SPDX-License-Identifier: Apache-2.0

#include "metastack/designer.hpp"
#include "metastack/gradient.hpp"
#include "metastack/precoder.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace metastack
{

SvdDesign svd_target(const CMatrix &channel, std::size_t antennas)
{
    const auto q = static_cast<std::size_t>(channel.rows());
    const auto k = static_cast<std::size_t>(channel.cols());
    if (!(q >= antennas && antennas >= k))
        throw ConfigError("svd_target: need Q >= N >= K, got Q = " + std::to_string(q) +
                          ", N = " + std::to_string(antennas) + ", K = " + std::to_string(k));

    Eigen::JacobiSVD<CMatrix> svd(channel, Eigen::ComputeFullU);
    const RVector s = svd.singularValues();
    if (s.size() == 0 || !(s(s.size() - 1) > 1e-12 * s(0)))
        throw DegenerateChannelError("svd_target: channel matrix is rank deficient");

    const auto n = static_cast<Eigen::Index>(antennas);
    SvdDesign d;
    d.left_vectors = svd.matrixU().leftCols(n);
    d.singular_values = s;
    d.diagonal_gains = RVector::Ones(n);
    d.rotation = CMatrix::Identity(n, n);
    d.target_forward = d.rotation * d.diagonal_gains.asDiagonal() * d.left_vectors.adjoint();
    return d;
}

double design_mse(const SvdDesign &design, double snr)
{
    const auto k = design.singular_values.size();
    const RVector effective = design.diagonal_gains.head(k).cwiseProduct(design.singular_values);
    return spectral_mse(effective, snr, static_cast<std::size_t>(k));
}

namespace
{

// Uniform AC rescaling toward `factor`, split evenly over AC layers and limited so that
// no amplitude leaves its bounds (which would distort the fitted shape).
void match_scale(SimDevice &device, double factor)
{
    std::vector<std::size_t> ac;
    for (std::size_t l = 0; l < device.num_layers(); ++l)
        if (device.kind(l) == LayerKind::AmplitudeControlled)
            ac.push_back(l);
    if (ac.empty() || !(factor > 0.0) || !std::isfinite(factor))
        return;

    const double lo = device.bounds().min_linear();
    const double hi = device.bounds().max_linear();
    double remaining = factor;
    for (std::size_t i = 0; i < ac.size(); ++i)
    {
        const RVector a = device.amplitudes(ac[i]);
        const double fmin = lo / a.minCoeff();
        const double fmax = hi / a.maxCoeff();
        double f = std::pow(remaining, 1.0 / static_cast<double>(ac.size() - i));
        f = std::clamp(f, std::min(1.0, fmin), std::max(1.0, fmax));
        device.scale_amplitudes(ac[i], f);
        remaining /= f;
    }
}

} // namespace

FitResult fit_sim_to_target(std::span<const DiffractionMatrix> chain, const SimDevice &device,
                            const CMatrix &target, const FitOptions &options)
{
    SimDevice dev = device;
    RVector params = dev.parameters();
    Optimizer opt(options.optimizer, options.step_size, params.size());

    double best = std::numeric_limits<double>::infinity();
    RVector best_params = params;
    std::size_t steps = 0;
    for (std::size_t t = 0;; ++t)
    {
        const LossGradient lg = fitting_loss_gradient(chain, target, dev);
        if (!std::isfinite(lg.loss))
            throw TrainingError("fitting loss is not finite at iteration " + std::to_string(t));
        if (lg.loss < best)
        {
            best = lg.loss;
            best_params = params;
        }
        if (lg.loss < options.tolerance || t == options.max_iterations)
            break;
        opt.step(params, lg.device);
        dev.set_parameters(params);
        steps = t + 1;
    }

    dev.set_parameters(best_params);
    FitResult out{dev.projected(), best, steps, best < options.tolerance, best > options.warn_threshold, 0.0};

    const double tn = target.norm();
    if (tn > 0.0)
    {
        double gn = compose_forward(chain, out.device).matrix.norm();
        if (options.match_scale && gn > 0.0)
        {
            match_scale(out.device, tn / gn);
            gn = compose_forward(chain, out.device).matrix.norm();
        }
        out.scale = gn / tn;
        out.residual = fitting_loss(compose_forward(chain, out.device).matrix, target);
    }
    return out;
}

} // namespace metastack
