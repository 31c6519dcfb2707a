#pragma once

#include <cstddef>
#include <span>

namespace fraceig {

/// Pairwise (tree) summation with a fixed split rule.
///
/// The reduction order depends only on the length of the input, so results
/// are bitwise reproducible regardless of how the terms were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace fraceig
