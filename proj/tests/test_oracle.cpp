#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "fraceig/error.hpp"
#include "fraceig/oracle.hpp"

using namespace fraceig;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("ball profile constants") {
  CHECK(ball_profile_constant(1, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ball_profile_constant(3, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  // 50-digit reference evaluations of 2^{2s} Gamma(1+s) Gamma(s+d/2) / Gamma(d/2).
  CHECK(ball_profile_constant(1, 0.25) == doctest::Approx(0.88622692545275801365).epsilon(1e-14));
  CHECK(ball_profile_constant(1, 0.75) == doctest::Approx(1.3293403881791370205).epsilon(1e-14));
  CHECK(ball_profile_constant(2, 0.5) == doctest::Approx(1.5707963267948966192).epsilon(1e-14));
  CHECK(ball_profile_constant(3, 0.3) == doctest::Approx(1.4296245588603043945).epsilon(1e-14));
  CHECK_THROWS_AS(ball_profile_constant(1, 1.0), ConfigError);
}

TEST_CASE("closed-form quadratic energy") {
  CHECK(closed_form_quadratic(0.5) == doctest::Approx(kPi / 2.0).epsilon(1e-14));
  CHECK(closed_form_quadratic(0.25) == doctest::Approx(1.5491586698003223075).epsilon(1e-14));
  CHECK(closed_form_quadratic(0.75) == doctest::Approx(1.911283445683745393).epsilon(1e-14));
  CHECK(closed_form_quadratic(0.05) == doctest::Approx(1.8467836783425597659).epsilon(1e-14));
  CHECK(closed_form_quadratic(0.95) == doctest::Approx(2.4713562483140116333).epsilon(1e-14));
}

TEST_CASE("seminorm quadrature agrees with the closed form") {
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    INFO("s = " << s);
    CHECK(seminorm_quadrature(s) == doctest::Approx(closed_form_quadratic(s)).epsilon(1e-8));
  }
}

TEST_CASE("Laplacian limits") {
  CHECK(laplacian_limit("interval", 1) == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-15));
  CHECK(laplacian_limit("interval", 3) == doctest::Approx(9.0 * kPi * kPi / 4.0).epsilon(1e-15));
  CHECK(laplacian_limit("ball3", 1) == doctest::Approx(kPi * kPi).epsilon(1e-14));
  CHECK(laplacian_limit("square", 2) == doctest::Approx(5.0 * kPi * kPi / 4.0).epsilon(1e-15));
  CHECK(laplacian_limit("square", 2) == doctest::Approx(12.3370).epsilon(1e-5));
  CHECK_THROWS_AS(laplacian_limit("square", 0), ConfigError);
  CHECK_THROWS_AS(laplacian_limit("interval", 201), ConfigError);
  CHECK_THROWS_AS(laplacian_limit("disk", 1), ConfigError);
}

TEST_CASE("square table equals a brute-force enumeration") {
  const std::vector<double>& table = laplacian_table("square");
  std::map<int, int> mult;
  for (int m = 1; m <= 60; ++m) {
    for (int n = 1; n <= 60; ++n) ++mult[m * m + n * n];
  }
  std::vector<double> expected;
  for (const auto& [q, count] : mult) {
    if (q >= 1 + 41 * 41) break;
    for (int i = 0; i < count; ++i) expected.push_back(kPi * kPi / 4.0 * q);
  }
  REQUIRE(table.size() == expected.size());
  for (std::size_t i = 0; i < table.size(); ++i) REQUIRE(table[i] == doctest::Approx(expected[i]).epsilon(1e-14));
  // Multiplicities of the lowest levels: 2, 5, 8, 10, 13, 17, 18, 20, 25 in units of pi^2/4.
  CHECK(mult[2] == 1);
  CHECK(mult[5] == 2);
  CHECK(mult[8] == 1);
  CHECK(mult[10] == 2);
  CHECK(mult[25] == 2);
  CHECK(mult[50] == 3);
}

TEST_CASE("ball table: spherical Bessel zeros with multiplicity 2l+1") {
  const std::vector<double>& t = laplacian_table("ball3");
  REQUIRE(t.size() > 10);
  CHECK(t[0] == doctest::Approx(9.86960440108935862).epsilon(1e-13));
  for (int i = 1; i <= 3; ++i) CHECK(t[i] == doctest::Approx(20.19072855642663).epsilon(1e-13));
  for (int i = 4; i <= 8; ++i) CHECK(t[i] == doctest::Approx(33.2174619142683689).epsilon(1e-13));
  CHECK(t[9] == doctest::Approx(39.4784176043574345).epsilon(1e-13));
  CHECK(std::count_if(t.begin(), t.end(), [](double v) { return std::abs(v - 59.6795159441094189) < 1e-9; }) == 3);
  CHECK(std::count_if(t.begin(), t.end(), [](double v) { return std::abs(v - 82.71923110149328) < 1e-9; }) == 5);
  CHECK(std::is_sorted(t.begin(), t.end()));
}

TEST_CASE("reference lookups") {
  CHECK(paper_reference("interval", 0.5, 1).value == 1.15777);
  CHECK(paper_reference("interval", 0.5, 1).source == "paper-exact");
  CHECK(paper_reference("interval", 0.5, 1, "paper-our").value == 1.15780);
  CHECK(paper_reference("interval", 0.95, 1).digits == "2.24406");
  CHECK(paper_reference("square", 0.5, 1).digits == "1.83440");
  CHECK(paper_reference("lshape", 0.5, 1).digits == "2.43299");
  CHECK(paper_reference("lshape", 0.5, 1).variant == "A");
  CHECK(paper_reference("drumA", 0.5, 1).digits == "2.4887");
  CHECK(paper_reference("drumB", 0.5, 2).digits == "3.1559");
  CHECK_THROWS_AS(paper_reference("interval", 0.5, 7), ConfigError);
  CHECK_THROWS_AS(paper_reference("hexagon", 0.5, 1), ConfigError);
}

TEST_CASE("reference table is well formed") {
  const auto& table = reference_table();
  CHECK(table.size() == 439);
  const std::set<std::string> domains{"interval", "interval_harmonic", "interval_stiff_sine", "ball3", "ball9",
                                      "square",   "lshape",            "drumA",               "drumB"};
  std::set<std::tuple<std::string, std::string, double, int, std::string>> keys;
  for (const ReferenceEntry& e : table) {
    INFO(e.domain << " s=" << e.s << " k=" << e.k);
    CHECK(domains.count(e.domain) == 1);
    CHECK(e.value > 0.0);
    CHECK(e.k >= 1);
    CHECK(std::stod(e.digits) == e.value);
    CHECK(keys.insert({e.domain, e.variant, e.s, e.k, e.source}).second);
    if (e.source == "laplacian-limit") {
      CHECK(e.s == 1.0);
    } else {
      CHECK(e.s > 0.0);
      CHECK(e.s < 1.0);
    }
  }
}

TEST_CASE("exact interval eigenvalues increase with k and stay below the Laplacian limit") {
  for (double s : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    double prev = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double v = paper_reference("interval", s, k, "paper-exact").value;
      CHECK(v > prev);
      CHECK(v < laplacian_limit("interval", k));
      prev = v;
    }
  }
  // The first eigenvalue dips below 1 before rising towards pi^2/4.
  CHECK(paper_reference("interval", 0.25, 1).value < paper_reference("interval", 0.05, 1).value);
}
