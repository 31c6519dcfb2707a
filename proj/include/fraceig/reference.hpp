#pragma once

#include <span>
#include <vector>

#include "fraceig/network.hpp"

namespace fraceig::reference {

// Plain serial loops with std::tanh, kept as a yardstick for the blocked
// kernels in network.cpp.

double forward(const NetworkParams& params, std::span<const double> x, std::span<const double> q);

std::vector<double> forward_batch(const NetworkParams& params, const EvalPoints& points);

LossGradient loss_gradient(const NetworkParams& params, const EvalPoints& points, const LossEvaluator& evaluator);

}  // namespace fraceig::reference
