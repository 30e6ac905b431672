// SPDX-License-Identifier: Apache-2.0

#include "metastack/propagation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace metastack
{

Complex rayleigh_sommerfeld(double area, double axial, double distance, double wavelength)
{
    const double cos_theta = axial / distance;
    const Complex radial(1.0 / (kTwoPi * distance), -1.0 / wavelength);
    return (area * cos_theta / distance) * radial * std::polar(1.0, kTwoPi * distance / wavelength);
}

DiffractionMatrix build_w1(const SimGeometry &geometry)
{
    const auto n_ant = static_cast<Eigen::Index>(geometry.num_antennas());
    const auto q = static_cast<Eigen::Index>(geometry.layer(0).size());
    const double wl = geometry.wavelength();
    const double area = geometry.antenna_effective_area();
    const double sigma = geometry.array_to_first_layer();

    DiffractionMatrix w{CMatrix(n_ant, q), 0, 1};
    for (Eigen::Index j = 0; j < q; ++j)
        for (Eigen::Index n = 0; n < n_ant; ++n)
        {
            const double d = array_to_layer_distance(geometry, static_cast<std::size_t>(n), static_cast<std::size_t>(j));
            w.entries(n, j) = rayleigh_sommerfeld(area, sigma, d, wl);
        }
    return w;
}

DiffractionMatrix build_w_layer(const SimGeometry &geometry, std::size_t layer)
{
    if (layer == 0 || layer >= geometry.num_layers())
        throw std::out_of_range("build_w_layer: layer must be in [1, L-1]");
    const auto &src = geometry.layer(layer - 1);
    const auto &dst = geometry.layer(layer);
    const double wl = geometry.wavelength();
    const double area = geometry.meta_atom_area();
    const double s = geometry.inter_layer_spacing();

    // Precompute coordinates; the distance helper re-derives them per call.
    std::vector<Point2> a(src.size());
    std::vector<Point2> b(dst.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = src.atom_position(i);
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = dst.atom_position(i);

    DiffractionMatrix w{CMatrix(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size())),
                        static_cast<int>(layer), static_cast<int>(layer) + 1};
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const double dx = b[j].x - a[i].x;
            const double dy = b[j].y - a[i].y;
            const double d = std::sqrt(dx * dx + dy * dy + s * s);
            w.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rayleigh_sommerfeld(area, s, d, wl);
        }
    return w;
}

std::vector<DiffractionMatrix> build_diffraction_chain(const SimGeometry &geometry)
{
    std::vector<DiffractionMatrix> chain;
    chain.reserve(geometry.num_layers());
    chain.push_back(build_w1(geometry));
    for (std::size_t l = 1; l < geometry.num_layers(); ++l)
        chain.push_back(build_w_layer(geometry, l));
    return chain;
}

ForwardOperator compose_forward(std::span<const DiffractionMatrix> chain, std::span<const CVector> transmissions)
{
    if (chain.empty() || chain.size() != transmissions.size())
        throw ConfigError("compose_forward: " + std::to_string(chain.size()) + " diffraction matrices vs " +
                          std::to_string(transmissions.size()) + " transmission layers");
    ForwardOperator out;
    out.layer_inputs.reserve(chain.size());
    CMatrix field;
    for (std::size_t l = 0; l < chain.size(); ++l)
    {
        const CMatrix &w = chain[l].entries;
        if (l > 0 && field.cols() != w.rows())
            throw ConfigError("compose_forward: dimension mismatch entering layer " + std::to_string(l));
        if (w.cols() != transmissions[l].size())
            throw ConfigError("compose_forward: layer " + std::to_string(l) + " has " +
                              std::to_string(transmissions[l].size()) + " coefficients, expected " +
                              std::to_string(w.cols()));
        CMatrix incident = l == 0 ? w : CMatrix(field * w);
        field = incident * transmissions[l].asDiagonal();
        out.layer_inputs.push_back(std::move(incident));
    }
    out.matrix = std::move(field);
    return out;
}

ForwardOperator compose_forward(std::span<const DiffractionMatrix> chain, const SimDevice &device)
{
    const auto tau = device.transmissions();
    return compose_forward(chain, std::span<const CVector>(tau));
}

double spectral_norm(const CMatrix &m)
{
    if (m.size() == 0)
        return 0.0;
    // Largest eigenvalue of the smaller Gram matrix.
    const CMatrix gram = m.rows() <= m.cols() ? CMatrix(m * m.adjoint()) : CMatrix(m.adjoint() * m);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

RadiatedPower radiated_power(const CMatrix &precoder, const CMatrix &forward)
{
    if (precoder.cols() != forward.rows())
        throw ConfigError("radiated_power: precoder has " + std::to_string(precoder.cols()) +
                          " columns, forward operator has " + std::to_string(forward.rows()) + " rows");
    RadiatedPower out;
    out.power = (precoder * forward).squaredNorm();
    const double g = spectral_norm(forward);
    out.bound = precoder.squaredNorm() * g * g;
    if (out.power > out.bound * (1.0 + 1e-9) + 1e-300)
        throw std::logic_error("radiated_power: ||PG||_F^2 exceeds ||P||_F^2 ||G||^2");
    return out;
}

} // namespace metastack
