// SPDX-License-Identifier: Apache-2.0

#include "metastack/linksim.hpp"
#include "metastack/gradient.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

namespace metastack
{

std::string_view to_string(Method m)
{
    switch (m)
    {
    case Method::NoSim:
        return "no_sim";
    case Method::ModelBased:
        return "model_based";
    case Method::DataDriven:
        return "data_driven";
    }
    return "?";
}

Method parse_method(std::string_view text)
{
    if (text == "no_sim" || text == "nosim" || text == "baseline")
        return Method::NoSim;
    if (text == "model_based" || text == "modelbased" || text == "model")
        return Method::ModelBased;
    if (text == "data_driven" || text == "datadriven" || text == "data")
        return Method::DataDriven;
    throw ConfigError("unknown method '" + std::string(text) + "' (expected no_sim, model_based or data_driven)");
}

std::string_view to_string(ModelBasedRealization r)
{
    return r == ModelBasedRealization::Ideal ? "ideal" : "fitted";
}

ModelBasedRealization parse_realization(std::string_view text)
{
    if (text == "ideal")
        return ModelBasedRealization::Ideal;
    if (text == "fitted")
        return ModelBasedRealization::Fitted;
    throw ConfigError("unknown model-based realization '" + std::string(text) + "' (expected ideal or fitted)");
}

CMatrix generate_channel(std::size_t rows, std::size_t users, Rng &rng)
{
    return rng.complex_normal_matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(users), 1.0);
}

double ebn0_to_noise_variance(double ebn0_db, const Constellation &constellation)
{
    return 1.0 / (static_cast<double>(constellation.bits_per_symbol()) * db_to_power(ebn0_db));
}

double operating_snr(double ebn0_db, const Constellation &constellation, double total_power, std::size_t users)
{
    return total_power / (static_cast<double>(users) * ebn0_to_noise_variance(ebn0_db, constellation));
}

LinkResult transmit_block(const Constellation &constellation, const CMatrix &precoder, const CMatrix &effective,
                          double beta, std::span<const std::uint8_t> bits, std::size_t bits_per_user,
                          const CMatrix &noise)
{
    const auto users = static_cast<std::size_t>(effective.cols());
    const unsigned m = constellation.bits_per_symbol();
    const std::size_t symbols = bits_per_user / m;
    if (bits.size() != users * bits_per_user || bits_per_user % m != 0)
        throw std::invalid_argument("transmit_block: bit block does not match K x bits_per_user symbols");
    if (noise.rows() != static_cast<Eigen::Index>(symbols) || noise.cols() != effective.cols())
        throw std::invalid_argument("transmit_block: noise block must be symbols x K");

    CMatrix b(static_cast<Eigen::Index>(symbols), static_cast<Eigen::Index>(users));
    for (std::size_t k = 0; k < users; ++k)
    {
        const auto row = constellation.modulate(bits.subspan(k * bits_per_user, bits_per_user));
        for (std::size_t i = 0; i < symbols; ++i)
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[i];
    }

    const CMatrix y = b * (precoder * effective) + noise;

    LinkResult out;
    out.bits = users * bits_per_user;
    for (std::size_t k = 0; k < users; ++k)
        for (std::size_t i = 0; i < symbols; ++i)
        {
            const std::uint32_t label =
                constellation.demap(beta * y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            for (unsigned j = 0; j < m; ++j)
            {
                const std::uint8_t sent = bits[k * bits_per_user + i * m + j];
                const auto got = static_cast<std::uint8_t>((label >> (m - 1 - j)) & 1U);
                out.bit_errors += sent != got;
            }
        }
    return out;
}

namespace
{

// Stream counters under the trial seed.
enum : std::uint64_t
{
    kChannelStream = 0,
    kDirectStream = 1,
    kDeviceStream = 2,
    kTrainingStream = 3,
    kNoiseStream = 4,
    kBitStream = 5,
};

struct System
{
    CMatrix precoder;
    CMatrix effective;
    double beta = 1.0;
};

// Attenuates G (hence F) so that ||P F-side radiated power|| stays within the cap.
void apply_cap(System &sys, const CMatrix &forward, double cap, double total_power)
{
    const double radiated = (sys.precoder * forward).squaredNorm();
    const double limit = cap * total_power;
    if (radiated <= limit || radiated == 0.0)
        return;
    const double f = std::sqrt(limit / radiated);
    sys.effective *= f;
    sys.beta /= f;
}

} // namespace

TrialRecord run_trial(const SimContext &context, const TrialConfig &config, std::size_t index,
                      std::uint64_t trial_seed)
{
    if (context.geometry == nullptr)
        throw ConfigError("run_trial: missing geometry");
    const SimGeometry &geo = *context.geometry;
    const std::size_t users = config.users;
    const std::size_t antennas = geo.num_antennas();
    const Constellation constellation(config.modulation);
    const std::size_t points = config.ebn0_db.size();

    TrialRecord rec;
    rec.index = index;
    rec.seed = trial_seed;

    Rng channel_rng(derive_seed(trial_seed, {kChannelStream}));
    rec.channel = generate_channel(geo.last_layer_size(), users, channel_rng);
    Rng direct_rng(derive_seed(trial_seed, {kDirectStream}));
    const CMatrix direct = generate_channel(antennas, users, direct_rng);

    Rng bit_rng(derive_seed(trial_seed, {kBitStream}));
    std::vector<std::uint8_t> bits(users * config.bits_per_user);
    for (auto &b : bits)
        b = static_cast<std::uint8_t>(bit_rng.bit());

    for (Method m : config.methods)
        rec.counts.push_back({m, std::vector<std::uint64_t>(points, 0), std::vector<std::uint64_t>(points, 0)});

    try
    {
        const SimDevice initial =
            SimDevice::init(geo, context.kinds, context.bounds, context.passive_gain,
                            derive_seed(trial_seed, {kDeviceStream}));

        bool wants_mb = false;
        for (Method m : config.methods)
            wants_mb |= m == Method::ModelBased;

        // The model-based target does not depend on the SNR; only its precoder does.
        CMatrix mb_forward;
        if (wants_mb)
        {
            const SvdDesign design = svd_target(rec.channel, antennas);
            if (config.model_based == ModelBasedRealization::Ideal)
                mb_forward = design.target_forward;
            else
            {
                FitResult fit = fit_sim_to_target(context.chain, initial, design.target_forward, config.fit);
                rec.fit_residual = fit.residual;
                rec.fit_scale = fit.scale;
                mb_forward = compose_forward(context.chain, fit.device).matrix;
                rec.model_based_device = std::move(fit.device);
            }
        }

        const std::size_t symbols = config.bits_per_user / constellation.bits_per_symbol();
        for (std::size_t p = 0; p < points; ++p)
        {
            const double sigma2 = ebn0_to_noise_variance(config.ebn0_db[p], constellation);
            const double snr = operating_snr(config.ebn0_db[p], constellation, config.total_power, users);
            Rng noise_rng(derive_seed(trial_seed, {kNoiseStream, p}));
            const CMatrix noise = noise_rng.complex_normal_matrix(static_cast<Eigen::Index>(symbols),
                                                                  static_cast<Eigen::Index>(users), sigma2);

            for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
            {
                System sys;
                CMatrix forward;
                switch (config.methods[mi])
                {
                case Method::NoSim: {
                    const Precoder pr = mmse_precoder(direct, snr, config.total_power);
                    sys = {pr.matrix, direct, pr.beta};
                    break;
                }
                case Method::ModelBased: {
                    forward = mb_forward;
                    const CMatrix f = forward * rec.channel;
                    const Precoder pr = mmse_precoder(f, snr, config.total_power);
                    sys = {pr.matrix, f, pr.beta};
                    break;
                }
                case Method::DataDriven: {
                    TrainingConfig tc = config.training;
                    tc.snr = snr;
                    tc.total_power = config.total_power;
                    tc.pilot_modulation = config.modulation;
                    tc.seed = derive_seed(trial_seed, {kTrainingStream, p});
                    TrainingResult tr = train(context.chain, initial, rec.channel, tc);
                    forward = compose_forward(context.chain, tr.device).matrix;
                    sys = {tr.precoder.matrix, forward * rec.channel, tr.precoder.beta};
                    rec.data_driven_radiated_power.push_back(tr.report.final_radiated_power);
                    if (config.keep_curves)
                        rec.curves.push_back(std::move(tr.report));
                    rec.data_driven_device = std::move(tr.device);
                    break;
                }
                }
                if (config.radiated_power_cap && forward.size() > 0)
                    apply_cap(sys, forward, *config.radiated_power_cap, config.total_power);

                const LinkResult lr =
                    transmit_block(constellation, sys.precoder, sys.effective, sys.beta, bits, config.bits_per_user, noise);
                rec.counts[mi].errors[p] = lr.bit_errors;
                rec.counts[mi].bits[p] = lr.bits;
            }
        }
    }
    catch (const TrainingError &e)
    {
        rec.failed = true;
        rec.failure = e.what();
    }
    catch (const DegenerateChannelError &e)
    {
        rec.failed = true;
        rec.failure = e.what();
    }
    return rec;
}

const BerCell &BerTable::cell(Method m, std::size_t point) const
{
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == m)
            return cells.at(i).at(point);
    throw std::out_of_range("BerTable: method " + std::string(to_string(m)) + " not present");
}

BerTable aggregate(std::span<const TrialRecord> records, std::span<const double> ebn0_db)
{
    if (records.empty())
        throw std::invalid_argument("aggregate: no trial records");

    BerTable t;
    t.ebn0_db.assign(ebn0_db.begin(), ebn0_db.end());
    for (const auto &c : records.front().counts)
        t.methods.push_back(c.method);
    t.cells.assign(t.methods.size(), std::vector<BerCell>(t.ebn0_db.size()));
    t.trials = records.size();

    for (const auto &r : records)
    {
        if (r.failed)
        {
            ++t.failed_trials;
            continue;
        }
        if (r.counts.size() != t.methods.size())
            throw std::invalid_argument("aggregate: records disagree on the method list");
        for (std::size_t m = 0; m < r.counts.size(); ++m)
        {
            if (r.counts[m].method != t.methods[m] || r.counts[m].errors.size() != t.ebn0_db.size())
                throw std::invalid_argument("aggregate: records disagree on methods or grid");
            for (std::size_t p = 0; p < t.ebn0_db.size(); ++p)
            {
                t.cells[m][p].errors += r.counts[m].errors[p];
                t.cells[m][p].bits += r.counts[m].bits[p];
            }
        }
    }

    for (auto &row : t.cells)
        for (auto &c : row)
            if (c.bits > 0)
            {
                const double n = static_cast<double>(c.bits);
                c.ber = static_cast<double>(c.errors) / n;
                c.stderr_ = std::sqrt(c.ber * (1.0 - c.ber) / n);
            }
    return t;
}

} // namespace metastack
