#include "rgflow/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rgflow/kernels.hpp"

namespace rgflow {

namespace {

constexpr std::int64_t chunk = 1 << 14;

// log(sinh(z)) for z > 0 without overflow.
double log_sinh(double z) { return z + std::log1p(-std::exp(-2.0 * z)) - std::log(2.0); }

}  // namespace

double harmonic_effective_constant(const LatticeConfig& cfg, double omega2) {
  cfg.validate();
  if (omega2 == 0.0) {
    return 0.0;
  }
  const double omega1_sq = matsubara_frequency_sq(cfg, 1);
  if (omega1_sq + omega2 <= 0.0) {
    throw std::domain_error(
        "harmonic_effective_constant: omega_1^2 + Omega^2 must be positive");
  }
  const kernels::Kernels& k = kernels::active_kernels();
  const double eps = cfg.epsilon();
  const double num = omega2 * eps * eps;  // Omega^2/omega_m^2 = num/(eps^2 omega_m^2)
  const double pi_over = M_PI / static_cast<double>(cfg.n + 1);
  const std::int64_t modes = cfg.mode_count();
  std::vector<double> q(static_cast<std::size_t>(std::min(chunk, modes)));

  double sum = 0.0;
  double comp = 0.0;
  for (std::int64_t m0 = 1; m0 <= modes; m0 += chunk) {
    const std::int64_t cnt = std::min(chunk, modes - m0 + 1);
    k.fill_eps2_omega_sq(m0, cnt, pi_over, q.data());
    const double part = k.log1p_ratio_sum(q.data(), cnt, num);
    const double y = part - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / cfg.beta;
}

double harmonic_effective_constant_continuum(double beta, double hbar, double omega2) {
  if (!(beta > 0.0) || !(hbar > 0.0)) {
    throw std::domain_error("harmonic_effective_constant_continuum: beta, hbar must be positive");
  }
  if (!(omega2 > 0.0)) {
    throw std::domain_error("harmonic_effective_constant_continuum: omega2 must be positive");
  }
  const double b = beta * hbar * std::sqrt(omega2);
  return (log_sinh(b / 2.0) - std::log(b / 2.0)) / beta;
}

double harmonic_partition_function_log(const LatticeConfig& cfg, double omega2) {
  if (!(omega2 > 0.0)) {
    throw std::domain_error("harmonic_partition_function_log: omega2 must be positive");
  }
  const double eh = harmonic_effective_constant(cfg, omega2);
  return -cfg.beta * eh - std::log(cfg.hbar * cfg.beta * std::sqrt(omega2));
}

double harmonic_partition_function_log_continuum(double beta, double hbar, double omega2) {
  if (!(beta > 0.0) || !(hbar > 0.0) || !(omega2 > 0.0)) {
    throw std::domain_error(
        "harmonic_partition_function_log_continuum: beta, hbar, omega2 must be positive");
  }
  return -log_sinh(beta * hbar * std::sqrt(omega2) / 2.0) - std::log(2.0);
}

double classical_partition_function_log(const CouplingVector& potential, double beta, double mass,
                                        double hbar) {
  potential.validate();
  if (!(beta > 0.0) || !(mass > 0.0) || !(hbar > 0.0)) {
    throw std::domain_error(
        "classical_partition_function_log: beta, mass, hbar must be positive");
  }
  int lead = potential.order;
  while (lead > 0 && potential.derivs[static_cast<std::size_t>(lead)] == 0.0) {
    --lead;
  }
  if (lead == 0 || (lead % 2) != 0 || potential.derivs[static_cast<std::size_t>(lead)] <= 0.0) {
    throw std::domain_error(
        "classical_partition_function_log: potential must be confining "
        "(positive leading even coefficient)");
  }
  const std::vector<double> a = to_taylor(potential);
  const double v0 = a[0];
  const auto v_shifted = [&](double x) {
    double acc = 0.0;
    for (std::size_t j = a.size(); j-- > 1;) {
      acc = acc * x + a[j];
    }
    return acc * x;  // V(x) - V(0)
  };

  // Domain: grow L until beta*(V(L)-V(0)) is far past underflow of interest.
  double half = 1.0;
  while (beta * std::min(v_shifted(half), v_shifted(-half)) < 60.0 && half < 1e8) {
    half *= 2.0;
  }
  const auto integrand = [&](double x) { return std::exp(-beta * v_shifted(x)); };
  boost::math::quadrature::gauss_kronrod<double, 15> quad;
  const double integral =
      quad.integrate(integrand, -half, half, 15, 1e-12);
  return std::log(integral) - beta * v0 + 0.5 * std::log(mass / (2.0 * M_PI * hbar * hbar * beta));
}

}  // namespace rgflow
