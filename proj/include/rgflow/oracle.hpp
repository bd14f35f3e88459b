#pragma once

#include <cstdint>
#include <string>

#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"

namespace rgflow {

// Resolution knobs the oracle actually used, reported back so callers can
// judge how hard it had to work.
struct OracleResolution {
    std::int64_t grid_n = 0;       // FD interior points (Richardson-extrapolated pair uses 2x)
    double domain_half_width = 0;  // [-L, L] box, or quadrature scaling where applicable
    int quad_order = 0;            // Gauss-Hermite points per axis (quadrature oracles)
    double tail_ratio = 0;         // boundary amplitude of the ground state (FD oracle)
};

struct OracleResult {
    double value = 0;
    std::string method;
    OracleResolution resolution;
    double est_error = 0;
};

struct SchrodingerOptions {
    std::int64_t grid_n = 4000;    // interior FD points before Richardson doubling
    double half_width = 0;         // <= 0 means auto-select from the potential's scale
};

// Ground-state energy of H = p^2/(2M) + V(x) on a hard-wall box, by
// second-order finite differences with Sturm-sequence bisection and
// Richardson extrapolation in the grid spacing.
OracleResult schrodinger_ground_energy(const CouplingVector& potential, double mass,
                                       double hbar, const SchrodingerOptions& opts = {});

// One RG step for a single Fourier mode pair (a_m, b_m), done by direct 2-D
// Gauss-Hermite quadrature of the constrained path integral. Independent of
// the jet arithmetic; used to validate wh_step's one-loop logarithm.
OracleResult single_mode_step_oracle(const CouplingVector& potential, const LatticeConfig& cfg,
                                     std::int64_t m, double x0, int max_order = 512);

// Full effective potential V_0(x0) on a tiny lattice (N <= 6) by tensor-product
// Gauss-Hermite quadrature over all Fourier mode amplitudes.
OracleResult small_lattice_effective_potential(const CouplingVector& potential,
                                               const LatticeConfig& cfg, double x0,
                                               int max_order = 64);

} // namespace rgflow
