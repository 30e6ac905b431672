// SPDX-License-Identifier: Apache-2.0

#include "metastack/optimizer.hpp"

#include <cmath>
#include <string>

namespace metastack
{

namespace
{
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
} // namespace

std::string_view to_string(OptimizerKind kind)
{
    return kind == OptimizerKind::AdaptiveMoment ? "adam" : "gd";
}

OptimizerKind parse_optimizer_kind(std::string_view text)
{
    if (text == "adam" || text == "adaptive_moment")
        return OptimizerKind::AdaptiveMoment;
    if (text == "gd" || text == "gradient_descent")
        return OptimizerKind::GradientDescent;
    throw ConfigError("unknown optimizer '" + std::string(text) + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double step_size, Eigen::Index size)
    : kind_(kind), step_size_(step_size), m_(RVector::Zero(size)), v_(RVector::Zero(size))
{
    if (!(step_size > 0.0))
        throw ConfigError("optimizer step size must be positive");
}

void Optimizer::reset()
{
    m_.setZero();
    v_.setZero();
    t_ = 0;
}

void Optimizer::step(RVector &params, const RVector &grad)
{
    if (kind_ == OptimizerKind::GradientDescent)
    {
        params -= step_size_ * grad;
        return;
    }
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * grad;
    v_ = kBeta2 * v_ + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    params.array() -= step_size_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
}

} // namespace metastack
