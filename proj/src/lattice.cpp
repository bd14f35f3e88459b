#include "rgflow/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgflow/kernels.hpp"

namespace rgflow {

void LatticeConfig::validate() const {
  if (n < 2 || (n % 2) != 0) {
    throw std::domain_error("LatticeConfig: n must be even and >= 2 (got " + std::to_string(n) +
                            ")");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("LatticeConfig: beta must be positive and finite");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::domain_error("LatticeConfig: mass must be positive and finite");
  }
  if (!(hbar > 0.0) || !std::isfinite(hbar)) {
    throw std::domain_error("LatticeConfig: hbar must be positive and finite");
  }
}

double matsubara_frequency_sq(const LatticeConfig& cfg, std::int64_t m) {
  cfg.validate();
  if (m < 1 || m > cfg.mode_count()) {
    throw std::domain_error("matsubara_frequency_sq: m must lie in [1, N/2], got " +
                            std::to_string(m));
  }
  const double eps = cfg.epsilon();
  const double s = std::sin(M_PI * static_cast<double>(m) / static_cast<double>(cfg.n + 1));
  return 4.0 * s * s / (eps * eps);
}

double frequency_product_log(const LatticeConfig& cfg) {
  cfg.validate();
  const kernels::Kernels& k = kernels::active_kernels();
  const double pi_over = M_PI / static_cast<double>(cfg.n + 1);
  const std::int64_t modes = cfg.mode_count();
  constexpr std::int64_t chunk = 1 << 14;
  std::vector<double> q(static_cast<std::size_t>(std::min(chunk, modes)));

  double total = 0.0;
  double comp = 0.0;
  for (std::int64_t m0 = 1; m0 <= modes; m0 += chunk) {
    const std::int64_t count = std::min(chunk, modes - m0 + 1);
    k.fill_eps2_omega_sq(m0, count, pi_over, q.data());
    const double part = k.log_sum(q.data(), count);
    const double y = part - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  return total;
}

}  // namespace rgflow
