#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rgflow/lattice.hpp"
#include "rgflow/series.hpp"

namespace rgflow {

// How a Gaussian smear treats quadrature nodes that fall outside the
// tabulated domain: refuse (strict) or evaluate at the nearest edge (clamp).
// Flows use clamp together with a padded grid; the far-tail weight a clamped
// node carries is exponentially small once the pad exceeds the smearing width.
// Clamp additionally floors the self-consistent trial curvature at zero, so
// the boundary junk the clamping accumulates in the pad cannot push the
// Gaussian trial to an imaginary frequency; strict reports it instead.
enum class SmearPolicy { strict, clamp };

// Running potential tabulated on a symmetric grid with natural cubic spline
// interpolation. Evaluation outside the grid is an error, never extrapolation.
class GridPotential {
  public:
    GridPotential(std::vector<double> xs, std::vector<double> vs);

    // Sample a polynomial potential on [-half_width, half_width].
    static GridPotential tabulate(const CouplingVector& v, double half_width, int count);

    double operator()(double x) const;
    double second_derivative(double x) const;

    double lo() const { return xs_.front(); }
    double hi() const { return xs_.back(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& vs() const { return vs_; }

  private:
    std::vector<double> xs_, vs_, d2_;
    std::size_t locate(double x) const;
};

// E_z[V(x0+z)] for z ~ Gaussian(0, a2), by Gauss-Hermite quadrature on the
// spline. a2 = 0 short-circuits to V(x0).
double smeared_potential(const GridPotential& v, double a2, double x0, int quad_order = 32,
                         SmearPolicy policy = SmearPolicy::strict);

// E_z[V''(x0+z)]; equals 2 d/da2 of smeared_potential by the heat-kernel identity.
double smeared_second_derivative(const GridPotential& v, double a2, double x0,
                                 int quad_order = 32, SmearPolicy policy = SmearPolicy::strict);

struct TrialFrequency {
    double omega_trial_sq = 0;
    double a2 = 0;
    int iterations = 0;
};

// Self-consistent Gaussian trial curvature at one grid point:
// Omega^2 = (smeared V'')/M with a2 = (2/(beta M))/(omega_m^2 + Omega^2),
// iterated from Omega^2 = 0 to relative 1e-10 (cap 200).
TrialFrequency self_consistent_frequency(const GridPotential& v, const LatticeConfig& cfg,
                                         std::int64_t m, double x0, int quad_order = 32,
                                         SmearPolicy policy = SmearPolicy::strict);

struct TrialFrequencyField {
    std::vector<double> xs;
    std::vector<double> omega2;
    std::vector<double> a2;
};

// One variational RG step on the full grid:
// V_{m-1}(x0) = (1/beta) log1p(Omega^2/omega_m^2) - (1/beta) Omega^2/(Omega^2+omega_m^2)
//             + smeared_potential(V, a2, x0).
GridPotential variational_rg_step(const GridPotential& v, const LatticeConfig& cfg,
                                  std::int64_t m, int quad_order = 32,
                                  SmearPolicy policy = SmearPolicy::strict,
                                  TrialFrequencyField* field_out = nullptr);

struct VariationalFlowOptions {
    int quad_order = 32;
    SmearPolicy policy = SmearPolicy::clamp;
    // called as progress(modes_done, modes_total) every 1000 modes
    std::function<void(std::int64_t, std::int64_t)> progress;
};

// Compose variational steps m = N/2 .. 1. Intended for moderate N; the input
// grid must carry enough margin for the accumulated smearing width (see
// variational_grid_half_width).
GridPotential run_variational_flow(const GridPotential& initial, const LatticeConfig& cfg,
                                   const VariationalFlowOptions& opts = {});

// Half-width for a flow working grid: a core region scaled by the quartic
// length plus the accumulated smearing allowance of the whole cascade.
double variational_grid_half_width(const CouplingVector& potential, const LatticeConfig& cfg);

struct VariationalMinimum {
    double energy = 0;
    double omega = 0; // minimizing trial frequency
};

// Zero-temperature first-order variational bound:
// min over Omega > 0 of hbar*Omega/4 + gaussian_smear(V, hbar/(2 M Omega), 0).
VariationalMinimum fk_variational_energy(const CouplingVector& potential, double mass = 1.0,
                                         double hbar = 1.0);

} // namespace rgflow
