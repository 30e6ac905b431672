// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric types and error classes.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace metastack
{

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 3.0e8; // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Malformed or inconsistent configuration: bad dimensions, invalid bounds, mismatched lists.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// The channel matrix is rank deficient, so no SVD-based design exists.
class DegenerateChannelError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Optimization diverged or produced a non-finite loss.
class TrainingError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

// Real inner product Re<a, b> = Re sum conj(a_ij) b_ij.
inline double real_inner(const CMatrix &a, const CMatrix &b)
{
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

} // namespace metastack
