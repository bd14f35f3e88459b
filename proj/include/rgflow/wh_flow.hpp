#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"

namespace rgflow {

// State of the mode-elimination flow: `couplings` describes V_m after every
// mode above m has been integrated out; m runs from N/2 (bare) down to 0.
struct FlowState {
  std::int64_t m = 0;
  CouplingVector couplings;
  LatticeConfig cfg;
};

// One elimination step m -> m-1 (reference implementation on general jets):
// V_{m-1} = V_m + (1/beta) log(1 + V_m''/(omega_m^2 M)) as a truncated jet.
// Throws FlowDomainError when 1 + g^(2)/(omega_m^2 M) <= 0.
FlowState wh_step(const FlowState& state);

struct FlowSnapshot {
  std::int64_t m = 0;
  CouplingVector couplings;
};

struct FlowTrace {
  LatticeConfig cfg;
  int order = 0;
  unsigned update_mask = ~0u;
  std::string kernel;
  std::vector<FlowSnapshot> snapshots;
  CouplingVector final_couplings;
};

struct FlowOptions {
  std::int64_t snapshot_stride = 0;  // 0: N/200, floored at 1
  unsigned update_mask = ~0u;        // bit j: g^(2j) flows (frozen-quartic: order 4, mask 0b011)
  int workers = 0;                   // lane groups per run_flow_batch; 0: RGFLOW_WORKERS or hw
  std::function<void(std::int64_t, std::int64_t)> progress;  // (modes done, modes total)
};

FlowTrace run_flow(const CouplingVector& initial, const LatticeConfig& cfg,
                   const FlowOptions& opts = {});

// Outcome of one lane of a batched flow; on a log-domain failure the trace is
// empty and fail_m/fail_g2 identify the mode and curvature at failure.
struct BatchEntry {
  std::optional<FlowTrace> trace;
  std::int64_t fail_m = 0;
  double fail_g2 = 0.0;
  double fail_omega_sq = 0.0;
  bool ok() const noexcept { return trace.has_value(); }
};

// Lane-parallel flow of several even-parity potentials over one lattice; all
// initials must share the truncation order. Lanes are arithmetically
// independent, so results do not depend on the worker count.
std::vector<BatchEntry> run_flow_batch(std::span<const CouplingVector> initials,
                                       const LatticeConfig& cfg, const FlowOptions& opts = {});

// Final g^(0) = V_{m=0}(0), the ground-state energy estimate.
double ground_state_energy(const FlowTrace& trace);

// Sharp-cutoff continuum flow dV/dk = -(hbar/2pi) log(1 + V''/(M k^2)),
// integrated on a geometric grid from k_max down to k_min = 2 pi/(hbar beta),
// each step evaluated at the geometric midpoint.
CouplingVector continuum_wh_flow(const CouplingVector& initial, double beta, double mass,
                                 double hbar, double k_max, std::int64_t steps);

// One-loop sum: the same mode sum with the source couplings frozen at the
// bare ones. The running couplings agree with run_flow to O(lambda^2) at weak
// coupling; the constant term keeps an O(lambda) defect because the frozen
// curvature never sees the quartic term.
CouplingVector perturbative_effective_potential(const CouplingVector& initial,
                                                const LatticeConfig& cfg);

}  // namespace rgflow
