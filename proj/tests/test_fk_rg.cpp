#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "rgflow/errors.hpp"
#include "rgflow/exact.hpp"
#include "rgflow/fk_rg.hpp"
#include "rgflow/lattice.hpp"
#include "rgflow/oracle.hpp"
#include "rgflow/series.hpp"
#include "rgflow/wh_flow.hpp"

using namespace rgflow;

namespace {

// one variational step evaluated at a single point on the grid potential
double vstep_grid(const GridPotential& v, const LatticeConfig& cfg, std::int64_t m, double x0,
                  int quad_order = 32, SmearPolicy policy = SmearPolicy::strict) {
  const double w2 = matsubara_frequency_sq(cfg, m);
  const TrialFrequency tf = self_consistent_frequency(v, cfg, m, x0, quad_order, policy);
  return (std::log1p(tf.omega_trial_sq / w2) - tf.omega_trial_sq / (tf.omega_trial_sq + w2)) /
             cfg.beta +
         smeared_potential(v, tf.a2, x0, quad_order, policy);
}

// same step with exact polynomial smears instead of the spline, so Jensen's
// inequality can be checked below the spline's own bias
double vstep_poly(const CouplingVector& v, const LatticeConfig& cfg, std::int64_t m, double x0) {
  const double w2 = matsubara_frequency_sq(cfg, m);
  const auto d = derivatives_at(v, x0);
  const CouplingVector vpp(v.order - 2, std::vector<double>(d.begin() + 2, d.end()), false);
  double omega2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double a2 = 2.0 / (cfg.beta * cfg.mass * (w2 + omega2));
    const double next = gaussian_smear(vpp, a2, 0.0) / cfg.mass;
    if (std::abs(next - omega2) <= 1e-14 * std::max(1.0, std::abs(next))) {
      omega2 = next;
      break;
    }
    omega2 = next;
  }
  const double a2 = 2.0 / (cfg.beta * cfg.mass * (w2 + omega2));
  return (std::log1p(omega2 / w2) - omega2 / (omega2 + w2)) / cfg.beta +
         gaussian_smear(v, a2, x0);
}

double eval_taylor(const CouplingVector& v, double x) {
  const auto a = to_taylor(v);
  double val = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) val = val * x + a[k];
  return val;
}

}  // namespace

TEST_CASE("grid potential construction and domain policing") {
  std::vector<double> xs, vs;
  for (int i = -50; i <= 50; ++i) {
    xs.push_back(0.1 * static_cast<double>(i));
    vs.push_back(xs.back() * xs.back());
  }
  const GridPotential v(xs, vs);
  CHECK(v(0.37) == doctest::Approx(0.1369).epsilon(1e-4));
  CHECK_THROWS_AS(v(5.01), GridDomainError);
  CHECK_THROWS_AS(v(-5.01), GridDomainError);

  // too few points
  CHECK_THROWS_AS(GridPotential(std::vector<double>(xs.begin(), xs.begin() + 20),
                                std::vector<double>(vs.begin(), vs.begin() + 20)),
                  std::domain_error);
  // not symmetric about 0
  auto xs_shift = xs;
  for (double& x : xs_shift) x += 0.05;
  CHECK_THROWS_AS(GridPotential(xs_shift, vs), std::domain_error);
  // not strictly increasing
  auto xs_bad = xs;
  std::swap(xs_bad[3], xs_bad[4]);
  CHECK_THROWS_AS(GridPotential(xs_bad, vs), std::domain_error);

  CHECK_THROWS_AS(GridPotential::tabulate(CouplingVector::zero(4), -1.0, 101), std::domain_error);
  CHECK_THROWS_AS(GridPotential::tabulate(CouplingVector::zero(4), 8.0, 20), std::domain_error);
}

TEST_CASE("spline reproduces a quartic well inside the grid") {
  const CouplingVector q = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  const GridPotential v = GridPotential::tabulate(q, 8.0, 129);
  double dv = 0.0, dv2 = 0.0;
  for (int i = -40; i <= 40; ++i) {
    const double x = 0.1 * static_cast<double>(i);
    dv = std::max(dv, std::abs(v(x) - eval_taylor(q, x)));
    dv2 = std::max(dv2, std::abs(v.second_derivative(x) - (1.0 + 1.2 * x * x)));
  }
  CHECK(dv <= 5e-6);
  CHECK(dv2 <= 1e-2);
}

TEST_CASE("gaussian smears on the spline match closed forms") {
  // a2 = 0 short-circuits to plain evaluation
  const GridPotential sq = GridPotential::tabulate(CouplingVector(2, {0.0, 0.0, 2.0}, true), 15.0, 301);
  CHECK(smeared_potential(sq, 0.0, 0.7) == sq(0.7));

  // E[(x0+z)^2] = x0^2 + a2
  CHECK(std::abs(smeared_potential(sq, 0.5, 0.7) - (0.49 + 0.5)) <= 1e-9);

  // degree-6 polynomial against the series-side smear
  const CouplingVector v6(6, {0.01, 0.0, 1.0, 0.0, 2.4, 0.0, 5.0}, true);
  const GridPotential g6 = GridPotential::tabulate(v6, 15.0, 2001);
  const double got = smeared_potential(g6, 0.3, 0.6, 48);
  CHECK(std::abs(got - gaussian_smear(v6, 0.3, 0.6)) <= 1e-7);

  // strict smears refuse quadrature nodes outside the grid...
  CHECK_THROWS_AS(smeared_potential(sq, 4.0, 14.0, 32, SmearPolicy::strict), GridDomainError);
  // ...and agree with clamp exactly when every node is covered
  CHECK(smeared_potential(sq, 0.5, 0.7, 32, SmearPolicy::strict) ==
        smeared_potential(sq, 0.5, 0.7, 32, SmearPolicy::clamp));
  CHECK_THROWS_AS(smeared_potential(sq, -0.1, 0.0), std::domain_error);
}

TEST_CASE("self-consistent trial curvature: harmonic closed form") {
  const GridPotential v = GridPotential::tabulate(CouplingVector(2, {0.0, 0.0, 1.7}, true), 15.0, 501);
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
  const TrialFrequency tf = self_consistent_frequency(v, cfg, 3, 0.4);
  CHECK(std::abs(tf.omega_trial_sq - 1.7) <= 1e-10);
  CHECK(tf.iterations <= 3);
  const double w2 = matsubara_frequency_sq(cfg, 3);
  CHECK(tf.a2 == doctest::Approx(2.0 / (cfg.beta * (w2 + tf.omega_trial_sq))).epsilon(1e-12));
}

TEST_CASE("self-consistent trial curvature: fixed point checks") {
  const CouplingVector q = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  const GridPotential v = GridPotential::tabulate(q, 14.0, 501);
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
  const double w2 = matsubara_frequency_sq(cfg, 1);

  const auto g = [&](double omega2) {
    const double a2 = 2.0 / (cfg.beta * (w2 + omega2));
    return smeared_second_derivative(v, a2, 0.0, 48);
  };

  // iteration map contracts from the cold start
  const double x0 = 0.0, x1 = g(x0), x2 = g(x1);
  CHECK(std::abs(x2 - x1) <= std::abs(x1 - x0));

  // fixed-point iterate agrees with a bisection root of omega2 - g(omega2)
  const TrialFrequency tf = self_consistent_frequency(v, cfg, 1, 0.0, 48);
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((mid - g(mid) > 0) ? hi : lo) = mid;
  }
  CHECK(std::abs(tf.omega_trial_sq - 0.5 * (lo + hi)) <= 1e-8);
  CHECK(tf.iterations <= 20);
}

TEST_CASE("quantum limit: trial curvature collapses onto the bare second derivative") {
  const CouplingVector q = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  const GridPotential v = GridPotential::tabulate(q, 14.0, 501);
  const LatticeConfig cfg{1000000, 100000.0, 1.0, 1.0};
  const double x0 = 0.5;
  const double want = 1.0 + 1.2 * x0 * x0;
  // m = 1 is excluded: its cold-start smear (a2 = 2/(beta M omega_1^2) ~ 5e3)
  // would need a +-900 grid before the iteration contracts
  for (std::int64_t m : {std::int64_t{100}, cfg.mode_count()}) {
    const TrialFrequency tf = self_consistent_frequency(v, cfg, m, x0, 48);
    CHECK(std::abs(tf.omega_trial_sq - want) <= 1e-3 * want);
  }
}

TEST_CASE("inverted curvature: strict reports, clamp floors") {
  const GridPotential v = GridPotential::tabulate(CouplingVector(2, {0.0, 0.0, -2.0}, true), 15.0, 501);
  const LatticeConfig cfg{100, 10.0, 1.0, 1.0};
  try {
    self_consistent_frequency(v, cfg, 1, 0.25, 32, SmearPolicy::strict);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::strstr(e.what(), "x0=0.25") != nullptr);
  }
  const TrialFrequency tf = self_consistent_frequency(v, cfg, 1, 0.25, 32, SmearPolicy::clamp);
  CHECK(tf.omega_trial_sq == 0.0);
}

TEST_CASE("variational step: harmonic shift is the flow logarithm minus nothing") {
  const GridPotential v = GridPotential::tabulate(CouplingVector(2, {0.0, 0.0, 1.7}, true), 15.0, 501);
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
  for (std::int64_t m : {std::int64_t{1}, std::int64_t{10}, std::int64_t{50}}) {
    const double w2 = matsubara_frequency_sq(cfg, m);
    const double shift = std::log1p(1.7 / w2) / cfg.beta;
    for (double x0 : {0.0, 0.6, 1.2}) {
      const double got = vstep_grid(v, cfg, m, x0) - v(x0);
      // the a2*M*Omega^2/2 gained by the smear cancels the ratio term exactly
      CHECK(std::abs(got - shift) <= 1e-10 * std::max(1.0, std::abs(shift)));
    }
  }
}

TEST_CASE("variational step degenerates correctly in both temperature limits") {
  const CouplingVector q = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);

  // classical limit: eliminating one mode leaves the potential unchanged
  {
    const LatticeConfig cfg{100, 1e-3, 1.0, 1.0};
    const GridPotential v = GridPotential::tabulate(q, 14.0, 501);
    for (std::int64_t m : {cfg.mode_count(), cfg.mode_count() / 2}) {
      for (double x0 : {0.0, 0.5, 1.0}) {
        const double got = vstep_grid(v, cfg, m, x0, 48);
        CHECK(std::abs(got - v(x0)) <= 1e-6);
      }
    }
  }

  // quantum limit: smearing widths vanish and the step approaches the jet step
  {
    const LatticeConfig cfg{1000000, 100000.0, 1.0, 1.0};
    const std::int64_t m = cfg.mode_count() / 2;
    const GridPotential v = GridPotential::tabulate(q, 14.0, 501);
    const FlowState next = wh_step(FlowState{m, q, cfg});
    for (double x0 : {0.0, 0.5}) {
      const double got = vstep_grid(v, cfg, m, x0, 48);
      const double want = eval_taylor(next.couplings, x0);
      CHECK(std::abs(got - want) <= 1e-3 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("one variational step upper-bounds the quadrature oracle") {
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
  const CouplingVector q = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  for (std::int64_t m : {std::int64_t{1}, std::int64_t{25}}) {
    for (double x0 : {0.0, 0.5, 1.0}) {
      const double var = vstep_poly(q, cfg, m, x0);
      const double oracle = single_mode_step_oracle(q, cfg, m, x0).value;
      CHECK(oracle <= var + 1e-8);
    }
  }
}

TEST_CASE("full-grid variational step and its coverage demands") {
  const CouplingVector q = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};

  // strict refuses: the outermost knots always need nodes beyond the grid
  const GridPotential bare = GridPotential::tabulate(q, 12.0, 301);
  CHECK_THROWS_AS(variational_rg_step(bare, cfg, 1, 32, SmearPolicy::strict), GridDomainError);

  // clamp proceeds and reports the trial field it used
  TrialFrequencyField field;
  const GridPotential next = variational_rg_step(bare, cfg, 1, 32, SmearPolicy::clamp, &field);
  CHECK(next.xs() == bare.xs());
  CHECK(next(0.0) > bare(0.0));
  REQUIRE(field.xs.size() == bare.xs().size());
  const std::size_t mid = field.xs.size() / 2;
  CHECK(field.omega2[mid] > 0.0);
  CHECK(field.a2[mid] > 0.0);
}

TEST_CASE("variational flow: exact fixed points and the harmonic constant") {
  // free particle stays identically zero
  {
    const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
    const GridPotential zero = GridPotential::tabulate(CouplingVector::zero(4), 10.0, 257);
    const GridPotential out = run_variational_flow(zero, cfg);
    for (double v : out.vs()) CHECK(v == 0.0);
  }

  // harmonic flow reproduces the closed-form constant at every knot spacing
  {
    const LatticeConfig cfg{10000, 10.0, 1.0, 1.0};
    const CouplingVector h = CouplingVector::anharmonic(2, 1.0, 1.0, 0.0);
    const double hw = variational_grid_half_width(h, cfg);
    const GridPotential init = GridPotential::tabulate(h, hw, 257);
    const GridPotential out = run_variational_flow(init, cfg);
    const double want = harmonic_effective_constant(cfg, 1.0);
    CHECK(std::abs(out(0.0) - init(0.0) - want) <= 1e-3);
  }
}

TEST_CASE("variational flow upper-bounds the coupling flow for the quartic well") {
  const LatticeConfig cfg{2000, 10.0, 1.0, 1.0};
  const CouplingVector q = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);
  const double hw = variational_grid_half_width(q, cfg);
  CHECK(hw > 4.0);
  const GridPotential init = GridPotential::tabulate(q, hw, 257);
  const GridPotential out = run_variational_flow(init, cfg);
  const double e_var = out(0.0);
  const double e_rg = ground_state_energy(run_flow(q, cfg));
  CHECK(e_var >= e_rg - 1e-9);
  CHECK(e_var - e_rg <= 0.02);
}

TEST_CASE("zero-temperature variational bound at anchor couplings") {
  {
    const auto r = fk_variational_energy(CouplingVector::anharmonic(4, 1.0, 1.0, 0.0));
    CHECK(std::abs(r.energy - 0.5) <= 1e-9);
    CHECK(r.omega == doctest::Approx(1.0).epsilon(1e-6));
  }
  {
    const auto r = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, 2.4));
    CHECK(std::abs(r.energy - 0.5603) <= 1e-4);
    CHECK(r.omega == doctest::Approx(1.22120).epsilon(1e-3));
  }
  {
    // lambda = 24 closes in radicals: Omega = 2, E = 13/16
    const auto r = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, 24.0));
    CHECK(std::abs(r.energy - 0.8125) <= 1e-6);
    CHECK(r.omega == doctest::Approx(2.0).epsilon(1e-5));
  }
  {
    const auto r = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, 24000.0));
    CHECK(std::abs(r.energy - 6.8279) <= 1e-3);
  }

  // the bound sits above the true energy and grows with the coupling
  for (double lambda : {2.4, 24.0}) {
    const auto var = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, lambda));
    const auto exact = schrodinger_ground_energy(CouplingVector::anharmonic(4, 1.0, 1.0, lambda), 1.0, 1.0);
    CHECK(var.energy >= exact.value - exact.est_error);
  }
  const double e1 = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, 2.4)).energy;
  const double e2 = fk_variational_energy(CouplingVector::anharmonic(6, 1.0, 1.0, 4.8)).energy;
  CHECK(e1 < e2);

  CHECK_THROWS(fk_variational_energy(CouplingVector(4, {0.0, 0.0, 1.0, 0.0, -1.0}, true)));
}
