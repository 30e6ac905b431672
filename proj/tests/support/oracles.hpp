// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for the tests. Nothing here calls into the library's
// numerical routines; inputs are plain coordinates, std::complex scalars and dense products.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle
{

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

constexpr double pi = std::numbers::pi;
constexpr double c0 = 3.0e8;

// Centered grid coordinate along one axis: index i of `count`, pitch `pitch`.
inline double centered(std::size_t i, std::size_t count, double pitch)
{
    return (static_cast<double>(i) - 0.5 * static_cast<double>(count - 1)) * pitch;
}

// One coupling coefficient written out term by term:
// (A cos(theta) / d) (1/(2 pi d) - j/lambda) exp(j 2 pi d / lambda), cos(theta) = axial / d.
inline cd diffraction_entry(double area, double axial, double dx, double dy, double lambda)
{
    const double d = std::sqrt(dx * dx + dy * dy + axial * axial);
    const double cos_theta = axial / d;
    const double amplitude = area * cos_theta / d;
    const cd bracket(1.0 / (2.0 * pi * d), -1.0 / lambda);
    const double phase = 2.0 * pi * d / lambda;
    return amplitude * bracket * cd(std::cos(phase), std::sin(phase));
}

// W1 and W_l for a stack of identical square-pitch grids (all lengths in meters).
struct Stack
{
    std::size_t antennas_x, antennas_y;
    double antenna_pitch;
    std::size_t qx, qy;
    double cell_pitch;
    double sigma, s;
    double lambda;
    double antenna_area, cell_area;
};

inline Mat w1(const Stack &g)
{
    const std::size_t n = g.antennas_x * g.antennas_y, q = g.qx * g.qy;
    Mat w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < q; ++b)
        {
            const double xa = centered(a / g.antennas_y, g.antennas_x, g.antenna_pitch);
            const double ya = centered(a % g.antennas_y, g.antennas_y, g.antenna_pitch);
            const double xb = centered(b / g.qy, g.qx, g.cell_pitch);
            const double yb = centered(b % g.qy, g.qy, g.cell_pitch);
            w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                diffraction_entry(g.antenna_area, g.sigma, xb - xa, yb - ya, g.lambda);
        }
    return w;
}

inline Mat wl(const Stack &g)
{
    const std::size_t q = g.qx * g.qy;
    Mat w(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b)
        {
            const double dx = centered(b / g.qy, g.qx, g.cell_pitch) - centered(a / g.qy, g.qx, g.cell_pitch);
            const double dy = centered(b % g.qy, g.qy, g.cell_pitch) - centered(a % g.qy, g.qy, g.cell_pitch);
            w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                diffraction_entry(g.cell_area, g.s, dx, dy, g.lambda);
        }
    return w;
}

// Dense product W1 diag(t1) W2 diag(t2) ... with explicit diagonal matrices.
inline Mat naive_forward(const std::vector<Mat> &w, const std::vector<Eigen::VectorXcd> &tau)
{
    Mat g = w[0] * Mat(tau[0].asDiagonal());
    for (std::size_t l = 1; l < w.size(); ++l)
        g = g * w[l] * Mat(tau[l].asDiagonal());
    return g;
}

// K - sum lambda_i / (lambda_i + 1/snr) over the eigenvalues of F^H F.
inline double eigen_mse(const Mat &f, double snr)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(f.adjoint() * f);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    {
        const double l = std::max(0.0, es.eigenvalues()(i));
        sum += l / (l + 1.0 / snr);
    }
    return static_cast<double>(f.cols()) - sum;
}

// E||b - beta y||^2 for unit-energy symbols, written with an explicit inverse:
// K - 2 beta Re tr(P F) + beta^2 (||P F||^2 + total noise).
inline double mse_by_expansion(const Mat &p, const Mat &f, double beta, double total_noise)
{
    const Mat m = p * f;
    const double k = static_cast<double>(m.rows());
    return k - 2.0 * beta * m.trace().real() + beta * beta * (m.squaredNorm() + total_noise);
}

// Uncoded QPSK over flat Rayleigh fading with coherent detection, Eb/N0 = gamma (linear).
inline double rayleigh_qpsk_ber(double gamma)
{
    return 0.5 * (1.0 - std::sqrt(gamma / (1.0 + gamma)));
}

inline double qfunc(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

} // namespace oracle
