#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "fraceig/summation.hpp"

using namespace fraceig;

TEST_CASE("pairwise sum of small inputs") {
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{2.5}) == 2.5);
  CHECK(pairwise_sum(std::vector<double>{1.0, 2.0, 3.0}) == 6.0);
}

TEST_CASE("pairwise sum is accurate on long inputs") {
  const std::vector<double> v(1000000, 0.1);
  CHECK(std::abs(pairwise_sum(v) - 100000.0) < 1e-9);
}

TEST_CASE("pairwise sum depends only on the input sequence") {
  std::vector<double> v(12345);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
  const double first = pairwise_sum(v);
  CHECK(pairwise_sum(v) == first);
  const std::vector<double> copy(v);
  CHECK(pairwise_sum(copy) == first);
}
