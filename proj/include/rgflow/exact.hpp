#pragma once

#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"

namespace rgflow {

// E_h = (1/beta) sum_{m=1}^{N/2} log(1 + Omega^2/omega_m^2): the constant a
// pure quadratic potential with curvature M Omega^2 accumulates under the
// flow. omega2 may be negative as long as omega_1^2 + Omega^2 > 0.
double harmonic_effective_constant(const LatticeConfig& cfg, double omega2);

// Continuum limit of the same constant:
// (1/beta) log(sinh(b/2)/(b/2)), b = beta*hbar*Omega.
double harmonic_effective_constant_continuum(double beta, double hbar, double omega2);

// log Z for the discretized oscillator. Normalized so that
// log Z = -beta*E_h - log(hbar*beta*Omega), whose continuum limit is the
// canonical -log(2 sinh(beta*hbar*Omega/2)).
double harmonic_partition_function_log(const LatticeConfig& cfg, double omega2);

double harmonic_partition_function_log_continuum(double beta, double hbar, double omega2);

// High-temperature reference: log of
// Z_cl = sqrt(M/(2 pi hbar^2 beta)) * int dx exp(-beta V(x)).
// The potential must be confining (positive leading even coefficient).
double classical_partition_function_log(const CouplingVector& potential, double beta, double mass,
                                        double hbar);

}  // namespace rgflow
