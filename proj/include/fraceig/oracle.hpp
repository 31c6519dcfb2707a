#pragma once

#include <string>
#include <vector>

namespace fraceig {

/// Constant c with (-Delta)^s (1 - |x|^2)_+^s = c on the unit d-ball.
double ball_profile_constant(int d, double s);

/// a(u,u) for u = (1 - x^2)_+^s on (-1, 1) in closed form.
double closed_form_quadratic(double s);

/// Same quantity by nested tanh-sinh quadrature of the seminorm double
/// integral (interior part split at y = x, exterior part integrated in y).
double seminorm_quadrature(double s);

/// Dirichlet Laplacian eigenvalues: "interval" (-1,1), "square" [-1,1]^2, "ball3" unit ball.
double laplacian_limit(const std::string& domain, int k);
/// Sorted eigenvalues (with multiplicity) stored for the given domain.
const std::vector<double>& laplacian_table(const std::string& domain);

struct ReferenceEntry {
  std::string domain;   // interval, interval_harmonic, interval_stiff_sine, ball3, ball9, square, lshape, drumA, drumB
  std::string variant;  // feature scheme for lshape ("A" or "B"), otherwise empty
  double s = 0.0;
  int k = 0;
  double value = 0.0;
  std::string source;  // paper-exact, paper-our, laplacian-limit
  std::string digits;  // value as printed
};

const std::vector<ReferenceEntry>& reference_table();

/// Published value for (domain, s, k); "paper-exact" rows win over "paper-our".
/// An empty variant selects "A" for the L-shape.
ReferenceEntry paper_reference(const std::string& domain, double s, int k, const std::string& source = "",
                               const std::string& variant = "");

}  // namespace fraceig
