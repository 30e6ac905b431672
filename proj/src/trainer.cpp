// SPDX-License-Identifier: Apache-2.0

#include "metastack/trainer.hpp"
#include "metastack/gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace metastack
{

void TrainingConfig::validate(std::size_t users) const
{
    if (pilot_symbols < users)
        throw ConfigError("training.pilot_symbols (" + std::to_string(pilot_symbols) +
                          ") must be at least the number of users (" + std::to_string(users) + ")");
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw ConfigError("training.step_size must be positive");
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw ConfigError("training snr must be positive and finite");
    if (!(total_power > 0.0))
        throw ConfigError("training total_power must be positive");
}

CMatrix draw_pilot_block(const Constellation &constellation, std::size_t symbols, std::size_t users, Rng &rng)
{
    const auto order = static_cast<std::uint32_t>(constellation.order());
    CMatrix b(static_cast<Eigen::Index>(symbols), static_cast<Eigen::Index>(users));
    for (Eigen::Index k = 0; k < b.cols(); ++k)
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            b(i, k) = constellation.map(static_cast<std::uint32_t>(rng.engine()() % order));
    return b;
}

namespace
{

struct Attempt
{
    bool diverged = false;
    TrainingResult result;
};

Attempt run_attempt(std::span<const DiffractionMatrix> chain, const SimDevice &device, const CMatrix &channel,
                    const TrainingConfig &config, const CMatrix &p0, const CMatrix &pilots, double step_size)
{
    const auto users = static_cast<std::size_t>(channel.cols());
    const std::size_t antennas = device.num_layers() == 0 ? 0 : static_cast<std::size_t>(chain.front().entries.rows());
    const double noise_var = config.total_power / (config.snr * static_cast<double>(users));

    Rng noise_rng(derive_seed(config.seed, {2}));
    SimDevice dev = device;
    TrainablePrecoder prec(users, antennas, config.total_power, p0);

    const auto n_dev = static_cast<Eigen::Index>(dev.num_parameters());
    const auto n_prec = static_cast<Eigen::Index>(prec.num_parameters());
    RVector params(n_dev + n_prec);
    params << dev.parameters(), prec.parameters();
    Optimizer opt(config.optimizer, step_size, params.size());

    Attempt out{false, {device, Precoder{}, LossReport{}}};
    LossReport &report = out.result.report;
    report.losses.reserve(config.iterations + 1);
    report.betas.reserve(config.iterations + 1);

    double initial = 0.0;
    double best = std::numeric_limits<double>::infinity();
    RVector best_params = params;
    double best_beta = 0.0;
    CMatrix best_forward;

    for (std::size_t t = 0; t <= config.iterations; ++t)
    {
        const CMatrix noise = noise_rng.complex_normal_matrix(pilots.rows(), pilots.cols(), noise_var);
        const LossGradient lg = empirical_mse_gradient(chain, channel, dev, prec, pilots, noise);
        if (!std::isfinite(lg.loss) || !lg.device.allFinite() || !lg.precoder.allFinite())
            throw TrainingError("non-finite loss or gradient at iteration " + std::to_string(t));
        if (t == 0)
            initial = lg.loss;
        else if (lg.loss > 10.0 * initial)
        {
            out.diverged = true;
            return out;
        }

        report.losses.push_back(lg.loss);
        report.betas.push_back(lg.beta);
        if (lg.loss < best)
        {
            best = lg.loss;
            best_params = params;
            best_beta = lg.beta;
            best_forward = lg.forward;
            report.best_iteration = t;
        }

        if (t == config.iterations)
            break;
        RVector grad(params.size());
        grad << lg.device, lg.precoder;
        opt.step(params, grad);
        dev.set_parameters(params.head(n_dev));
        prec.set_parameters(params.tail(n_prec));
    }

    dev.set_parameters(best_params.head(n_dev));
    prec.set_parameters(best_params.tail(n_prec));
    out.result.device = dev.projected();
    out.result.precoder = Precoder{prec.matrix(), config.total_power, best_beta};
    report.best_loss = best;
    report.final_beta = best_beta;
    report.final_radiated_power = (out.result.precoder.matrix * best_forward).squaredNorm();
    return out;
}

} // namespace

TrainingResult train(std::span<const DiffractionMatrix> chain, const SimDevice &device, const CMatrix &channel,
                     const TrainingConfig &config, const std::optional<CMatrix> &init_precoder)
{
    const auto users = static_cast<std::size_t>(channel.cols());
    config.validate(users);
    if (chain.size() != device.num_layers())
        throw ConfigError("train: diffraction chain and device disagree on layer count");
    if (channel.rows() != chain.back().entries.cols())
        throw ConfigError("train: channel rows must equal the last layer size");
    if (!channel.allFinite())
        throw ConfigError("train: channel has non-finite entries");

    const Constellation constellation(config.pilot_modulation);
    Rng pilot_rng(derive_seed(config.seed, {1}));
    const CMatrix pilots = draw_pilot_block(constellation, config.pilot_symbols, users, pilot_rng);

    CMatrix p0;
    if (init_precoder)
        p0 = *init_precoder;
    else
    {
        const ForwardOperator fwd = compose_forward(chain, device);
        p0 = mmse_precoder(fwd.matrix, channel, config.snr, config.total_power).matrix;
    }

    double step = config.step_size;
    for (int attempt = 0; attempt < 2; ++attempt)
    {
        Attempt a = run_attempt(chain, device, channel, config, p0, pilots, step);
        if (!a.diverged)
        {
            a.result.report.restarts = attempt;
            return std::move(a.result);
        }
        step *= 0.5;
    }
    throw TrainingError("training diverged twice (loss exceeded 10x its initial value)");
}

} // namespace metastack
