#pragma once

#include <cstdint>

namespace rgflow {

// Euclidean time discretization and physical constants. The interval hbar*beta
// is cut into N+1 slices of width epsilon; the N dynamical Fourier modes come
// in conjugate pairs, leaving N/2 independent mode indices m = 1 .. N/2.
struct LatticeConfig {
  std::int64_t n = 100'000'000;
  double beta = 1e5;
  double mass = 1.0;
  double hbar = 1.0;

  LatticeConfig() = default;
  LatticeConfig(std::int64_t n_, double beta_, double mass_ = 1.0, double hbar_ = 1.0)
      : n(n_), beta(beta_), mass(mass_), hbar(hbar_) {
    validate();
  }

  double epsilon() const noexcept { return hbar * beta / static_cast<double>(n + 1); }
  std::int64_t mode_count() const noexcept { return n / 2; }
  void validate() const;  // throws std::domain_error
};

// omega_m^2 = (2 - 2 cos(2 pi m/(N+1)))/eps^2, evaluated as
// 4 sin^2(pi m/(N+1))/eps^2 to stay cancellation-free at small m.
double matsubara_frequency_sq(const LatticeConfig& cfg, std::int64_t m);

// sum_{m=1}^{N/2} log(eps^2 omega_m^2). Equals log(N+1) exactly: the product
// of the dimensionless eps^2 omega_m^2 over one mode per conjugate pair
// telescopes to N+1.
double frequency_product_log(const LatticeConfig& cfg);

}  // namespace rgflow
