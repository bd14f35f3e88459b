#include <array>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rgflow/errors.hpp"
#include "rgflow/exact.hpp"
#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"
#include "rgflow/wh_flow.hpp"

using namespace rgflow;

namespace {

double eval_taylor(const CouplingVector& v, double x) {
  const auto a = to_taylor(v);
  double val = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) val = val * x + a[k];
  return val;
}

}  // namespace

TEST_CASE("run_flow composes wh_step") {
  const LatticeConfig cfg{10, 1.0, 1.0, 1.0};
  const CouplingVector init = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);

  FlowState state{cfg.mode_count(), init, cfg};
  while (state.m >= 1) state = wh_step(state);

  const FlowTrace trace = run_flow(init, cfg);
  REQUIRE(state.couplings.derivs.size() == trace.final_couplings.derivs.size());
  for (std::size_t i = 0; i < state.couplings.derivs.size(); ++i) {
    const double a = state.couplings.derivs[i];
    const double b = trace.final_couplings.derivs[i];
    CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)));
  }

  CHECK_THROWS_AS(wh_step(FlowState{0, init, cfg}), std::domain_error);
  CHECK_THROWS_AS(wh_step(FlowState{cfg.mode_count() + 1, init, cfg}), std::domain_error);
}

TEST_CASE("harmonic flow reproduces the closed-form mode sum") {
  const LatticeConfig cfg{1000000, 1000.0, 1.0, 1.0};
  const FlowTrace trace = run_flow(CouplingVector::anharmonic(6, 1.0, 1.0, 0.0), cfg);
  const double want = harmonic_effective_constant(cfg, 1.0);
  CHECK(std::abs(ground_state_energy(trace) - want) <= 1e-13 * std::abs(want));
  // only the constant flows for a quadratic potential
  CHECK(trace.final_couplings.g(2) == 1.0);
  CHECK(trace.final_couplings.g(4) == 0.0);
  CHECK(trace.final_couplings.g(6) == 0.0);
}

TEST_CASE("free particle is an exact fixed point") {
  const LatticeConfig cfg{10000, 10.0, 1.0, 1.0};
  const FlowTrace trace = run_flow(CouplingVector::zero(6), cfg);
  for (double d : trace.final_couplings.derivs) CHECK(d == 0.0);
}

TEST_CASE("general-jet path agrees with the even-parity path") {
  const LatticeConfig cfg{100, 1.0, 1.0, 1.0};
  const CouplingVector even = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);
  CouplingVector generic = even;
  generic.even_parity = false;

  const FlowTrace a = run_flow(even, cfg);
  const FlowTrace b = run_flow(generic, cfg);
  REQUIRE(a.final_couplings.derivs.size() == b.final_couplings.derivs.size());
  for (std::size_t i = 0; i < a.final_couplings.derivs.size(); ++i) {
    const double x = a.final_couplings.derivs[i];
    const double y = b.final_couplings.derivs[i];
    CHECK(std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)));
  }
  // parity survives the generic recursion exactly
  for (std::size_t i = 1; i < b.final_couplings.derivs.size(); i += 2) {
    CHECK(b.final_couplings.derivs[i] == 0.0);
  }
}

TEST_CASE("classical limit: effective potential collapses onto the bare one") {
  const LatticeConfig cfg{100, 1e-3, 1.0, 1.0};
  const CouplingVector init = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);
  const FlowTrace trace = run_flow(init, cfg);
  double sup = 0.0;
  for (int i = -10; i <= 10; ++i) {
    const double x = 0.1 * static_cast<double>(i);
    const double bare = eval_taylor(init, x);
    const double eff = eval_taylor(trace.final_couplings, x);
    sup = std::max(sup, std::abs(eff - bare) / std::max(1.0, std::abs(bare)));
  }
  CHECK(sup <= 1e-4);
}

TEST_CASE("energy and couplings grow with the quartic strength") {
  const LatticeConfig cfg{10000, 10.0, 1.0, 1.0};
  std::vector<double> e, g2;
  for (double lambda : {2.4, 4.8, 9.6}) {
    const FlowTrace t = run_flow(CouplingVector::anharmonic(6, 1.0, 1.0, lambda), cfg);
    e.push_back(ground_state_energy(t));
    g2.push_back(t.final_couplings.g(2));
  }
  CHECK(e[0] == doctest::Approx(0.304971).epsilon(1e-4));
  CHECK(e[1] == doctest::Approx(0.334672).epsilon(1e-4));
  CHECK(e[2] == doctest::Approx(0.384022).epsilon(1e-4));
  CHECK(e[0] < e[1]);
  CHECK(e[1] < e[2]);
  CHECK(g2[0] == doctest::Approx(1.4150).epsilon(1e-3));
  CHECK(g2[0] < g2[1]);
  CHECK(g2[1] < g2[2]);
}

TEST_CASE("one-loop sum is the weak-coupling limit of the flow") {
  const LatticeConfig cfg{10000, 10.0, 1.0, 1.0};
  const auto defect = [&](double lambda) {
    const CouplingVector init = CouplingVector::anharmonic(6, 1.0, 1.0, lambda);
    const FlowTrace t = run_flow(init, cfg);
    const CouplingVector p = perturbative_effective_potential(init, cfg);
    return std::array<double, 2>{std::abs(p.g(0) - t.final_couplings.g(0)),
                                 std::abs(p.g(2) - t.final_couplings.g(2))};
  };
  const auto d1 = defect(0.1);
  const auto d2 = defect(0.2);
  // frozen curvature: constant misses at O(lambda), running couplings at O(lambda^2)
  const double slope_g0 = std::log2(d2[0] / d1[0]);
  const double slope_g2 = std::log2(d2[1] / d1[1]);
  CHECK(slope_g0 > 0.9);
  CHECK(slope_g0 < 1.1);
  CHECK(slope_g2 > 1.7);
  CHECK(slope_g2 < 2.3);
  // and at full coupling the one-loop sum is visibly wrong
  CHECK(defect(2.4)[0] > 1e-3);
}

TEST_CASE("continuum flow integrates the harmonic logarithm exactly") {
  const double beta = 100.0;
  const double k_max = 1e4;
  const CouplingVector res =
      continuum_wh_flow(CouplingVector::anharmonic(6, 1.0, 1.0, 0.0), beta, 1.0, 1.0, k_max, 200000);
  const auto antideriv = [](double k) { return k * std::log1p(1.0 / (k * k)) + 2.0 * std::atan(k); };
  const double k_min = 2.0 * std::numbers::pi / beta;
  const double want = (antideriv(k_max) - antideriv(k_min)) / (2.0 * std::numbers::pi);
  CHECK(std::abs(res.g(0) - want) <= 1e-8);
  CHECK(res.g(2) == 1.0);
  CHECK(res.g(4) == 0.0);

  const CouplingVector zero = continuum_wh_flow(CouplingVector::zero(6), beta, 1.0, 1.0, k_max, 1000);
  for (double d : zero.derivs) CHECK(d == 0.0);

  CHECK_THROWS_AS(continuum_wh_flow(CouplingVector::zero(6), -1.0, 1.0, 1.0, 10.0, 10),
                  std::domain_error);
  CHECK_THROWS_AS(continuum_wh_flow(CouplingVector::zero(6), beta, 1.0, 1.0, 0.01, 10),
                  std::domain_error);
  CHECK_THROWS_AS(continuum_wh_flow(CouplingVector::zero(6), beta, 1.0, 1.0, k_max, 0),
                  std::domain_error);
}

TEST_CASE("double well at weak coupling leaves the log domain") {
  const LatticeConfig cfg{1000000, 1000.0, 1.0, 1.0};
  const CouplingVector init = CouplingVector::anharmonic(6, 1.0, -1.0, 2.4);
  try {
    run_flow(init, cfg);
    FAIL("expected FlowDomainError");
  } catch (const FlowDomainError& e) {
    CHECK(e.mode() > 0);
    CHECK(e.mode() < cfg.mode_count());
    CHECK(std::strstr(e.what(), "log-domain") != nullptr);
  }
}

TEST_CASE("batched lanes fail independently") {
  const LatticeConfig cfg{1000000, 1000.0, 1.0, 1.0};
  const std::vector<CouplingVector> inits = {
      CouplingVector::anharmonic(6, 1.0, -1.0, 2.4),
      CouplingVector::anharmonic(6, 1.0, -1.0, 9.6),
  };
  const auto batch = run_flow_batch(inits, cfg);
  REQUIRE(batch.size() == 2);

  CHECK(!batch[0].ok());
  CHECK(batch[0].fail_m > 0);
  CHECK(batch[0].fail_omega_sq > 0.0);
  CHECK(batch[0].fail_g2 < 0.0);

  REQUIRE(batch[1].ok());
  CHECK(ground_state_energy(*batch[1].trace) == doctest::Approx(0.25860).epsilon(1e-3));
  CHECK(batch[1].trace->final_couplings.g(2) == doctest::Approx(0.95993).epsilon(1e-3));
}

TEST_CASE("frozen-quartic truncation pins g4 while g0 and g2 flow") {
  const LatticeConfig cfg{10000, 10.0, 1.0, 1.0};
  FlowOptions opts;
  opts.update_mask = 0b011;
  const CouplingVector init = CouplingVector::anharmonic(4, 1.0, 1.0, 2.4);
  const FlowTrace t = run_flow(init, cfg, opts);
  CHECK(t.final_couplings.g(4) == 2.4);
  CHECK(t.final_couplings.g(2) > 1.0);
  CHECK(t.final_couplings.g(0) > 0.0);
  CHECK(t.update_mask == 0b011u);
}

TEST_CASE("trace bookkeeping: snapshots descend from the initial mode") {
  const LatticeConfig cfg{2000, 5.0, 1.0, 1.0};
  FlowOptions opts;
  opts.snapshot_stride = 100;
  const FlowTrace t = run_flow(CouplingVector::anharmonic(6, 1.0, 1.0, 2.4), cfg, opts);
  REQUIRE(!t.snapshots.empty());
  CHECK(t.snapshots.front().m == cfg.mode_count());
  CHECK(t.snapshots.back().m >= 1);
  for (std::size_t i = 1; i < t.snapshots.size(); ++i) {
    CHECK(t.snapshots[i].m < t.snapshots[i - 1].m);
  }
  CHECK(!t.kernel.empty());
  CHECK(ground_state_energy(t) == t.final_couplings.g(0));
}
