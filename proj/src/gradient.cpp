// SPDX-License-Identifier: Apache-2.0

#include "metastack/gradient.hpp"

#include <cmath>
#include <string>

namespace metastack
{

RVector backpropagate(std::span<const DiffractionMatrix> chain, const SimDevice &device,
                      const ForwardOperator &forward, const CMatrix &grad_forward)
{
    const std::size_t n_layers = device.num_layers();
    if (chain.size() != n_layers || forward.layer_inputs.size() != n_layers)
        throw ConfigError("backpropagate: chain, device and forward operator disagree on layer count");

    RVector grad(static_cast<Eigen::Index>(device.num_parameters()));
    CMatrix g_out = grad_forward; // gradient w.r.t. B_l = A_l T_l
    for (std::size_t l = n_layers; l-- > 0;)
    {
        const CMatrix &incident = forward.layer_inputs[l];
        const CVector tau = device.transmission(l);
        // g_tau[q] = sum_n g_B[n, q] conj(A[n, q])
        const CVector g_tau = g_out.cwiseProduct(incident.conjugate()).colwise().sum().transpose();

        const auto off = static_cast<Eigen::Index>(device.parameter_offset(l));
        if (device.kind(l) == LayerKind::PhaseControlled)
        {
            // d tau / d phi = j tau  =>  dL/dphi = Re(conj(g) j tau) = -Im(conj(g) tau)
            for (Eigen::Index q = 0; q < tau.size(); ++q)
                grad(off + q) = -(std::conj(g_tau(q)) * tau(q)).imag();
        }
        else
        {
            const RVector slope = device.amplitude_slope(l);
            const RVector phi = device.phases(l);
            for (Eigen::Index q = 0; q < tau.size(); ++q)
                grad(off + q) = (std::conj(g_tau(q)) * std::polar(1.0, phi(q))).real() * slope(q);
        }

        if (l > 0)
        {
            const CMatrix g_in = g_out * tau.conjugate().asDiagonal();
            g_out = g_in * chain[l].entries.adjoint();
        }
    }
    return grad;
}

EmpiricalMse empirical_mse(const CMatrix &precoder, const CMatrix &effective, const CMatrix &symbols,
                           const CMatrix &noise, std::optional<double> fixed_beta)
{
    if (symbols.rows() != noise.rows() || symbols.cols() != noise.cols())
        throw ConfigError("empirical_mse: symbol and noise blocks differ in shape");
    if (symbols.rows() == 0)
        throw ConfigError("empirical_mse: empty pilot block");
    const CMatrix y = symbols * (precoder * effective) + noise;
    const auto s = static_cast<double>(symbols.rows());
    double beta = 0.0;
    if (fixed_beta)
        beta = *fixed_beta;
    else
    {
        const double yy = y.squaredNorm();
        beta = yy > 0.0 ? real_inner(y, symbols) / yy : 0.0;
    }
    return {(symbols - beta * y).squaredNorm() / s, beta};
}

EmpiricalMse empirical_mse(const CMatrix &precoder, const CMatrix &forward, const CMatrix &channel,
                           const CMatrix &symbols, const CMatrix &noise, std::optional<double> fixed_beta)
{
    return empirical_mse(precoder, CMatrix(forward * channel), symbols, noise, fixed_beta);
}

LossGradient empirical_mse_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &channel,
                                    const SimDevice &device, const TrainablePrecoder &precoder,
                                    const CMatrix &symbols, const CMatrix &noise)
{
    const ForwardOperator fwd = compose_forward(chain, device);
    const CMatrix p = precoder.matrix();
    const CMatrix gh = fwd.matrix * channel; // N x K
    const CMatrix m = p * gh;                // K x K
    const CMatrix y = symbols * m + noise;
    const auto s = static_cast<double>(symbols.rows());

    const double yy = y.squaredNorm();
    const double beta = yy > 0.0 ? real_inner(y, symbols) / yy : 0.0;
    const CMatrix resid = symbols - beta * y;

    LossGradient out;
    out.loss = resid.squaredNorm() / s;
    out.beta = beta;
    if (!std::isfinite(out.loss))
        throw TrainingError("empirical MSE is not finite");

    const CMatrix g_y = (-2.0 * beta / s) * resid;
    const CMatrix g_m = symbols.adjoint() * g_y;
    const CMatrix g_p = g_m * gh.adjoint();
    const CMatrix g_g = p.adjoint() * g_m * channel.adjoint();

    out.device = backpropagate(chain, device, fwd, g_g);
    out.precoder = precoder.backing_gradient(g_p);
    out.forward = fwd.matrix;
    return out;
}

LossGradient closed_form_mse_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &channel,
                                      const SimDevice &device, double snr)
{
    const ForwardOperator fwd = compose_forward(chain, device);
    const CMatrix f = fwd.matrix * channel; // N x K
    const double xi = 1.0 / snr;
    CMatrix r = f.adjoint() * f;
    r.diagonal().array() += xi;
    Eigen::LLT<CMatrix> llt(r);
    const CMatrix r_inv = llt.solve(CMatrix::Identity(r.rows(), r.cols()));

    LossGradient out;
    out.loss = xi * r_inv.trace().real();
    if (!std::isfinite(out.loss))
        throw TrainingError("closed-form MSE is not finite");
    const CMatrix g_f = (-2.0 * xi) * f * (r_inv * r_inv);
    out.device = backpropagate(chain, device, fwd, g_f * channel.adjoint());
    out.forward = fwd.matrix;
    return out;
}

double fitting_loss(const CMatrix &forward, const CMatrix &target)
{
    const double tn = target.norm();
    if (tn == 0.0)
        return forward.squaredNorm();
    const double gn = forward.norm();
    if (gn == 0.0)
        return 1.0;
    return (forward / gn - target / tn).squaredNorm();
}

LossGradient fitting_loss_gradient(std::span<const DiffractionMatrix> chain, const CMatrix &target,
                                   const SimDevice &device)
{
    const ForwardOperator fwd = compose_forward(chain, device);
    const CMatrix &g = fwd.matrix;
    if (g.rows() != target.rows() || g.cols() != target.cols())
        throw ConfigError("fitting target must be " + std::to_string(g.rows()) + " x " + std::to_string(g.cols()));

    LossGradient out;
    out.loss = fitting_loss(g, target);
    out.forward = g;
    const double tn = target.norm();
    const double gn = g.norm();
    CMatrix grad_g;
    if (tn == 0.0)
        grad_g = 2.0 * g;
    else if (gn == 0.0)
        grad_g = CMatrix::Zero(g.rows(), g.cols());
    else
    {
        const CMatrix g_hat = g / gn;
        const CMatrix t_hat = target / tn;
        grad_g = (-2.0 / gn) * (t_hat - g_hat * real_inner(g_hat, t_hat));
    }
    out.device = backpropagate(chain, device, fwd, grad_g);
    return out;
}

} // namespace metastack
