// SPDX-License-Identifier: Apache-2.0

#include "metastack/precoder.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace metastack
{

namespace
{

void check_snr(double snr)
{
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw std::invalid_argument("SNR must be positive and finite, got " + std::to_string(snr));
}

// Z = (F F^H + xi I)^-1 F, via Cholesky of the N x N regularized Gram matrix.
CMatrix regularized_solve(const CMatrix &f, double snr)
{
    const auto n = f.rows();
    CMatrix gram = f * f.adjoint();
    gram.diagonal().array() += 1.0 / snr;
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("regularized Gram matrix not positive definite (n = " + std::to_string(n) + ")");
    return llt.solve(f);
}

} // namespace

LinkBudget LinkBudget::from_snr(double snr, double total_power, std::size_t users)
{
    check_snr(snr);
    if (users == 0)
        throw ConfigError("LinkBudget: users must be positive");
    return {snr, std::vector<double>(users, total_power / (snr * static_cast<double>(users)))};
}

double LinkBudget::total_noise() const
{
    return std::accumulate(noise_variances.begin(), noise_variances.end(), 0.0);
}

Precoder mmse_precoder(const CMatrix &f, double snr, double total_power)
{
    check_snr(snr);
    if (!(total_power > 0.0))
        throw std::invalid_argument("total power must be positive");
    const auto n = f.rows();
    const auto k = f.cols();

    if (f.squaredNorm() == 0.0)
        return {CMatrix::Constant(k, n, Complex(std::sqrt(total_power / static_cast<double>(k * n)), 0.0)),
                total_power, 1.0};

    const CMatrix z = regularized_solve(f, snr); // N x K
    // tr[F^H X^-2 F] = ||X^-1 F||_F^2.
    const double beta = std::sqrt(z.squaredNorm() / total_power);
    CMatrix p = z.adjoint() / beta;
    // Remove round-off so the power constraint holds to the last bit.
    const double scale = std::sqrt(total_power) / p.norm();
    p *= scale;
    return {std::move(p), total_power, beta / scale};
}

Precoder mmse_precoder(const CMatrix &forward, const CMatrix &channel, double snr, double total_power)
{
    if (forward.cols() != channel.rows())
        throw ConfigError("mmse_precoder: G has " + std::to_string(forward.cols()) + " columns but H has " +
                          std::to_string(channel.rows()) + " rows");
    return mmse_precoder(CMatrix(forward * channel), snr, total_power);
}

double closed_form_mse(const CMatrix &f, double snr)
{
    check_snr(snr);
    const CMatrix z = regularized_solve(f, snr);
    const double tr = (f.adjoint() * z).trace().real();
    return std::max(0.0, static_cast<double>(f.cols()) - tr);
}

double closed_form_mse(const CMatrix &forward, const CMatrix &channel, double snr)
{
    if (forward.cols() != channel.rows())
        throw ConfigError("closed_form_mse: G and H dimensions disagree");
    return closed_form_mse(CMatrix(forward * channel), snr);
}

double spectral_mse(const RVector &singular_values, double snr, std::size_t users)
{
    check_snr(snr);
    if ((singular_values.array() < 0.0).any())
        throw std::invalid_argument("spectral_mse: negative singular value");
    if (static_cast<std::size_t>(singular_values.size()) > users)
        throw std::invalid_argument("spectral_mse: more singular values than users");
    const double xi = 1.0 / snr;
    double sum = 0.0;
    for (double s : singular_values)
    {
        const double s2 = s * s;
        if (std::isinf(s2))
            sum += 1.0;
        else
            sum += s2 / (s2 + xi);
    }
    return static_cast<double>(users) - sum;
}

double expected_mse(const CMatrix &precoder, const CMatrix &f, double beta, double total_noise)
{
    const CMatrix m = precoder * f;
    const CMatrix resid = CMatrix::Identity(m.rows(), m.cols()) - beta * m;
    return resid.squaredNorm() + beta * beta * total_noise;
}

std::pair<double, double> expected_mse_optimal_beta(const CMatrix &precoder, const CMatrix &f, double total_noise)
{
    const CMatrix m = precoder * f;
    const double num = m.trace().real();
    const double den = m.squaredNorm() + total_noise;
    if (den == 0.0)
        return {static_cast<double>(m.rows()), 0.0};
    const double beta = num / den;
    return {static_cast<double>(m.rows()) - num * num / den, beta};
}

TrainablePrecoder::TrainablePrecoder(std::size_t users, std::size_t antennas, double total_power,
                                     const CMatrix &init)
    : backing_(init), total_power_(total_power)
{
    if (static_cast<std::size_t>(init.rows()) != users || static_cast<std::size_t>(init.cols()) != antennas)
        throw ConfigError("TrainablePrecoder: init must be " + std::to_string(users) + " x " +
                          std::to_string(antennas));
    if (!(total_power > 0.0))
        throw ConfigError("TrainablePrecoder: total power must be positive");
    if (!(init.norm() > 0.0) || !init.allFinite())
        throw ConfigError("TrainablePrecoder: init must be nonzero and finite");
}

CMatrix TrainablePrecoder::matrix() const
{
    return backing_ * (std::sqrt(total_power_) / backing_.norm());
}

RVector TrainablePrecoder::parameters() const
{
    const auto n = backing_.size();
    RVector out(2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        out(i) = backing_.data()[i].real();
        out(n + i) = backing_.data()[i].imag();
    }
    return out;
}

void TrainablePrecoder::set_parameters(const RVector &params)
{
    const auto n = backing_.size();
    if (params.size() != 2 * n)
        throw ConfigError("TrainablePrecoder::set_parameters: wrong parameter count");
    for (Eigen::Index i = 0; i < n; ++i)
        backing_.data()[i] = Complex(params(i), params(n + i));
}

RVector TrainablePrecoder::backing_gradient(const CMatrix &grad_p) const
{
    // P = c X / ||X||: g_X = (c / ||X||) (g_P - X Re<X, g_P> / ||X||^2).
    const double nx = backing_.norm();
    const double c = std::sqrt(total_power_);
    const double r = real_inner(backing_, grad_p);
    const CMatrix gx = (c / nx) * (grad_p - backing_ * (r / (nx * nx)));
    const auto n = gx.size();
    RVector out(2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        // For real loss, dL/dRe = Re g, dL/dIm = Im g under the Re<g, dX> convention.
        out(i) = gx.data()[i].real();
        out(n + i) = gx.data()[i].imag();
    }
    return out;
}

} // namespace metastack
