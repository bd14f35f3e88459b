#include <cmath>

#include "doctest.h"
#include "rgflow/exact.hpp"
#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"

using namespace rgflow;

TEST_CASE("harmonic effective constant equals the naive mode sum") {
  const LatticeConfig cfg{1000, 3.0, 1.5, 1.0};
  const double omega2 = 1.7;
  double naive = 0.0;
  for (std::int64_t m = cfg.mode_count(); m >= 1; --m) {
    naive += std::log1p(omega2 / matsubara_frequency_sq(cfg, m));
  }
  naive /= cfg.beta;
  const double got = harmonic_effective_constant(cfg, omega2);
  CHECK(std::abs(got - naive) <= 1e-13 * std::abs(naive));
}

TEST_CASE("lattice constant converges to the continuum expression") {
  const double beta = 1000.0;
  const double cont = harmonic_effective_constant_continuum(beta, 1.0, 1.0);
  CHECK(cont == doctest::Approx(0.493092244721).epsilon(1e-10));
  const LatticeConfig cfg{1000000, beta, 1.0, 1.0};
  CHECK(std::abs(harmonic_effective_constant(cfg, 1.0) - cont) <= 1e-7);
}

TEST_CASE("partition normalization ties log Z to the effective constant") {
  const LatticeConfig cfg{4000, 10.0, 1.0, 1.0};
  const double omega2 = 1.3;
  const double omega = std::sqrt(omega2);
  const double lhs = harmonic_partition_function_log(cfg, omega2);
  const double rhs = -cfg.beta * harmonic_effective_constant(cfg, omega2) -
                     std::log(cfg.hbar * cfg.beta * omega);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));

  // continuum limit is the canonical -log(2 sinh(beta hbar Omega / 2))
  const double cont = harmonic_partition_function_log_continuum(10.0, 1.0, omega2);
  CHECK(cont == doctest::Approx(-std::log(2.0 * std::sinh(5.0 * omega))).epsilon(1e-13));
  // log Z carries beta * (constant error), so the discretization error that is
  // ~2e-8 in the constant shows up as ~2e-5 here
  const LatticeConfig fine{1000000, 1000.0, 1.0, 1.0};
  CHECK(std::abs(harmonic_partition_function_log(fine, 1.0) -
                 harmonic_partition_function_log_continuum(1000.0, 1.0, 1.0)) <= 1e-4);
  const LatticeConfig dense{8000, 10.0, 1.0, 1.0};
  CHECK(std::abs(harmonic_partition_function_log(dense, 1.0) -
                 harmonic_partition_function_log_continuum(10.0, 1.0, 1.0)) <= 1e-6);
}

TEST_CASE("discretization error in log Z falls off as 1/N^2") {
  const double beta = 10.0;
  const double cont = harmonic_partition_function_log_continuum(beta, 1.0, 1.0);
  const auto err = [&](std::int64_t n) {
    return std::abs(harmonic_partition_function_log(LatticeConfig{n, beta, 1.0, 1.0}, 1.0) - cont);
  };
  const double e1 = err(1000);
  const double e2 = err(2000);
  const double e4 = err(4000);
  CHECK(e2 <= 0.6 * e1);
  CHECK(e4 <= 0.6 * e2);
}

TEST_CASE("classical partition function is the high-temperature limit") {
  const double beta = 1e-3;
  const CouplingVector harmonic = CouplingVector::anharmonic(4, 1.0, 1.0, 0.0);
  const double cl = classical_partition_function_log(harmonic, beta, 1.0, 1.0);
  const double qm = harmonic_partition_function_log_continuum(beta, 1.0, 1.0);
  // leading correction is (beta hbar Omega)^2 / 24 ~ 4.2e-8
  CHECK(std::abs(cl - qm) <= 1e-7);

  const CouplingVector runaway(4, {0.0, 0.0, 0.0, 0.0, -2.4}, true);
  CHECK_THROWS(classical_partition_function_log(runaway, beta, 1.0, 1.0));
}
