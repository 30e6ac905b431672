// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "metastack/common.hpp"

#include <string_view>

namespace metastack
{

enum class OptimizerKind
{
    GradientDescent,
    AdaptiveMoment,
};

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

// First-order minimizer over a flat real parameter vector. AdaptiveMoment is Adam with
// the usual (0.9, 0.999, 1e-8) constants.
class Optimizer
{
public:
    Optimizer(OptimizerKind kind, double step_size, Eigen::Index size);

    void step(RVector &params, const RVector &grad);
    void reset();
    double step_size() const { return step_size_; }

private:
    OptimizerKind kind_;
    double step_size_;
    RVector m_;
    RVector v_;
    long t_ = 0;
};

} // namespace metastack
