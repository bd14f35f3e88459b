#pragma once

#include <span>
#include <vector>

namespace rgflow {

// Truncated derivative vector of the running potential about x0 = 0:
// derivs[k] = g^(k) = d^k V / dx^k |_0, k = 0 .. order, order even.
// even_parity promises that every odd entry is exactly zero, which lets the
// flow work on the x^2 coefficients alone.
struct CouplingVector {
  int order = 0;
  std::vector<double> derivs;
  bool even_parity = false;

  CouplingVector() : derivs(1, 0.0), even_parity(true) {}
  CouplingVector(int order_, std::vector<double> derivs_, bool even_parity_ = false);

  // V = (1/2) M Omega^2 x^2 + (lambda/4!) x^4, truncated at `order`.
  static CouplingVector anharmonic(int order, double mass, double omega2, double lambda);
  static CouplingVector zero(int order, bool even_parity = true);

  double g(int k) const;
  void validate() const;  // throws std::domain_error
};

// Taylor coefficients a_k = g^(k)/k!, k = 0 .. order.
std::vector<double> to_taylor(const CouplingVector& cv);

// Taylor coefficients of V'': b_k = (k+2)(k+1) a_{k+2}, k = 0 .. order-2.
std::vector<double> second_derivative_jet(const CouplingVector& cv);

// Cauchy product of two Taylor jets, truncated at degree `order`.
std::vector<double> jet_multiply(std::span<const double> a, std::span<const double> b, int order);

// Taylor jet of log(1 + u(x)) through degree `order`; requires 1 + u[0] > 0
// (throws LogDomainError otherwise). Uses the derivative recurrence
// w_n = (u_n - (1/n) sum_{j=1}^{n-1} (n-j) u_j w_{n-j}) / (1 + u_0).
std::vector<double> jet_log1p(std::span<const double> u, int order);

// Taylor jet of exp(u(x)) through degree `order` (inverse check for jet_log1p).
std::vector<double> jet_exp(std::span<const double> u, int order);

// E_z[V(x0 + z)] for z ~ N(0, a2): sum_j V^(2j)(x0) a2^j / (2^j j!).
double gaussian_smear(const CouplingVector& cv, double a2, double x0);

// All derivatives of the polynomial at x0: out[k] = V^(k)(x0) (Taylor shift).
std::vector<double> derivatives_at(const CouplingVector& cv, double x0);

}  // namespace rgflow
