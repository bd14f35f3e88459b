#include "rgflow/fk_rg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "rgflow/errors.hpp"
#include "rgflow/quadrature.hpp"

namespace rgflow {

namespace {

const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

std::string point_tag(double x0) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "x0=%.6g", x0);
    return buf;
}

} // namespace

GridPotential::GridPotential(std::vector<double> xs, std::vector<double> vs)
    : xs_(std::move(xs)), vs_(std::move(vs)) {
    const std::size_t n = xs_.size();
    if (n < 33) throw std::domain_error("grid potential needs at least 33 points");
    if (vs_.size() != n) throw std::domain_error("grid potential xs/vs length mismatch");
    const double span = xs_.back() - xs_.front();
    if (!(span > 0)) throw std::domain_error("grid potential span must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs_[i]) || !std::isfinite(vs_[i]))
            throw std::domain_error("grid potential entries must be finite");
        if (i > 0 && !(xs_[i] > xs_[i - 1]))
            throw std::domain_error("grid potential xs must be strictly increasing");
        if (std::abs(xs_[i] + xs_[n - 1 - i]) > 1e-9 * span)
            throw std::domain_error("grid potential must be symmetric about 0");
    }

    // natural cubic spline: tridiagonal solve for the knot second derivatives
    d2_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = xs_[i] - xs_[i - 1];
        const double hr = xs_[i + 1] - xs_[i];
        diag[i] = 2.0 * (hl + hr);
        upper[i] = hr;
        rhs[i] = 6.0 * ((vs_[i + 1] - vs_[i]) / hr - (vs_[i] - vs_[i - 1]) / hl);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double hl = xs_[i] - xs_[i - 1];
        const double w = hl / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        d2_[i] = (rhs[i] - upper[i] * d2_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

GridPotential GridPotential::tabulate(const CouplingVector& v, double half_width, int count) {
    v.validate();
    if (!(half_width > 0)) throw std::domain_error("tabulate needs a positive half-width");
    if (count < 33) throw std::domain_error("tabulate needs at least 33 points");
    const auto a = to_taylor(v);
    std::vector<double> xs(static_cast<std::size_t>(count)), vs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        // symmetric by construction: xs[i] = -xs[count-1-i] exactly
        const double x = half_width * double(2 * i - (count - 1)) / double(count - 1);
        double val = 0;
        for (std::size_t k = a.size(); k-- > 0;) val = val * x + a[k];
        xs[std::size_t(i)] = x;
        vs[std::size_t(i)] = val;
    }
    return GridPotential(std::move(xs), std::move(vs));
}

std::size_t GridPotential::locate(double x) const {
    if (!(x >= xs_.front()) || !(x <= xs_.back()))
        throw GridDomainError(x, x, xs_.front(), xs_.back());
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = std::size_t(it - xs_.begin());
    if (i > 0) --i;
    if (i + 1 >= xs_.size()) i = xs_.size() - 2;
    return i;
}

double GridPotential::operator()(double x) const {
    const std::size_t i = locate(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = x - xs_[i];
    const double slope = (vs_[i + 1] - vs_[i]) / h - h * (2.0 * d2_[i] + d2_[i + 1]) / 6.0;
    return vs_[i] + t * (slope + t * (0.5 * d2_[i] + t * (d2_[i + 1] - d2_[i]) / (6.0 * h)));
}

double GridPotential::second_derivative(double x) const {
    const std::size_t i = locate(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = x - xs_[i];
    return d2_[i] + t * (d2_[i + 1] - d2_[i]) / h;
}

namespace {

template <typename Eval>
double smeared_quadrature(const GridPotential& v, double a2, double x0, int quad_order,
                          SmearPolicy policy, Eval&& eval) {
    if (!(a2 >= 0)) throw std::domain_error("smearing variance must be nonnegative");
    if (quad_order < 32) quad_order = 32;
    if (a2 == 0) return eval(x0);
    const auto& rule = gauss_hermite(quad_order);
    const double width = std::sqrt(2.0 * a2);
    if (policy == SmearPolicy::strict) {
        const double need_lo = x0 + width * rule.nodes.front();
        const double need_hi = x0 + width * rule.nodes.back();
        if (need_lo < v.lo() || need_hi > v.hi())
            throw GridDomainError(need_lo, need_hi, v.lo(), v.hi());
    }
    double acc = 0;
    for (int i = 0; i < quad_order; ++i) {
        double z = x0 + width * rule.nodes[std::size_t(i)];
        if (policy == SmearPolicy::clamp) z = std::clamp(z, v.lo(), v.hi());
        acc += rule.weights[std::size_t(i)] * eval(z);
    }
    return acc * inv_sqrt_pi;
}

} // namespace

double smeared_potential(const GridPotential& v, double a2, double x0, int quad_order,
                         SmearPolicy policy) {
    return smeared_quadrature(v, a2, x0, quad_order, policy, [&](double z) { return v(z); });
}

double smeared_second_derivative(const GridPotential& v, double a2, double x0, int quad_order,
                                 SmearPolicy policy) {
    return smeared_quadrature(v, a2, x0, quad_order, policy,
                              [&](double z) { return v.second_derivative(z); });
}

TrialFrequency self_consistent_frequency(const GridPotential& v, const LatticeConfig& cfg,
                                         std::int64_t m, double x0, int quad_order,
                                         SmearPolicy policy) {
    cfg.validate();
    const double w2 = matsubara_frequency_sq(cfg, m);
    const double two_over_beta_m = 2.0 / (cfg.beta * cfg.mass);

    double omega2 = 0.0;
    std::vector<double> history;
    for (int iter = 1; iter <= 200; ++iter) {
        if (!(w2 + omega2 > 0))
            throw std::domain_error("trial curvature drove omega_m^2 + Omega^2 nonpositive at " +
                                    point_tag(x0));
        const double a2 = two_over_beta_m / (w2 + omega2);
        double next = smeared_second_derivative(v, a2, x0, quad_order, policy) / cfg.mass;
        // Under clamp the pad region carries boundary junk whose curvature can be
        // arbitrarily negative; floor the iterate so the Gaussian trial stays real.
        if (policy == SmearPolicy::clamp && next < 0) next = 0;
        history.push_back(next);
        if (std::abs(next - omega2) <= 1e-10 * std::max(1.0, std::abs(next))) {
            if (!(w2 + next > 0))
                throw std::domain_error("converged trial curvature is out of domain at " +
                                        point_tag(x0));
            return {next, two_over_beta_m / (w2 + next), iter};
        }
        omega2 = next;
    }
    throw ConvergenceError("self-consistent trial frequency stalled after 200 iterations at " +
                               point_tag(x0),
                           std::move(history));
}

GridPotential variational_rg_step(const GridPotential& v, const LatticeConfig& cfg,
                                  std::int64_t m, int quad_order, SmearPolicy policy,
                                  TrialFrequencyField* field_out) {
    const double w2 = matsubara_frequency_sq(cfg, m);
    const auto& xs = v.xs();
    std::vector<double> out(xs.size());
    if (field_out) {
        field_out->xs = xs;
        field_out->omega2.assign(xs.size(), 0.0);
        field_out->a2.assign(xs.size(), 0.0);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x0 = xs[i];
        try {
            const TrialFrequency tf = self_consistent_frequency(v, cfg, m, x0, quad_order, policy);
            const double smeared = smeared_potential(v, tf.a2, x0, quad_order, policy);
            out[i] = (std::log1p(tf.omega_trial_sq / w2) -
                      tf.omega_trial_sq / (tf.omega_trial_sq + w2)) /
                         cfg.beta +
                     smeared;
            if (field_out) {
                field_out->omega2[i] = tf.omega_trial_sq;
                field_out->a2[i] = tf.a2;
            }
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("variational step (mode " + std::to_string(m) + ", " +
                                       point_tag(x0) + "): " + e.what(),
                                   e.history());
        }
    }
    return GridPotential(xs, std::move(out));
}

GridPotential run_variational_flow(const GridPotential& initial, const LatticeConfig& cfg,
                                   const VariationalFlowOptions& opts) {
    cfg.validate();
    const std::int64_t total = cfg.mode_count();
    GridPotential current = initial;
    for (std::int64_t m = total; m >= 1; --m) {
        current = variational_rg_step(current, cfg, m, opts.quad_order, opts.policy);
        const std::int64_t done = total - m + 1;
        if (opts.progress && (done % 1000 == 0 || m == 1)) opts.progress(done, total);
    }
    return current;
}

double variational_grid_half_width(const CouplingVector& potential, const LatticeConfig& cfg) {
    potential.validate();
    cfg.validate();
    const auto a = to_taylor(potential);
    const double quartic = a.size() > 4 && a[4] > 0 ? a[4] : 0.0;
    const double core =
        6.0 * std::max(1.0, quartic > 0 ? std::pow(cfg.mass * quartic, -1.0 / 6.0) : 1.0);

    // total smearing width of the cascade: sum_m a2_m at Omega=0 telescopes to
    // (2/(beta M)) eps^2 ((N+1)^2 - 1)/24
    const double eps = cfg.epsilon();
    const double np1 = double(cfg.n + 1);
    const double sigma_total_sq =
        2.0 / (cfg.beta * cfg.mass) * eps * eps * (np1 * np1 - 1.0) / 24.0;
    const double sigma_step_sq =
        2.0 / (cfg.beta * cfg.mass) / matsubara_frequency_sq(cfg, 1);
    return core + 8.0 * std::sqrt(sigma_total_sq) + 6.0 * std::sqrt(sigma_step_sq);
}

VariationalMinimum fk_variational_energy(const CouplingVector& potential, double mass,
                                         double hbar) {
    potential.validate();
    if (!(mass > 0) || !(hbar > 0)) throw std::domain_error("mass and hbar must be positive");
    const auto a = to_taylor(potential);
    int top = -1;
    for (int k = int(a.size()) - 1; k >= 1; --k)
        if (a[std::size_t(k)] != 0) { top = k; break; }
    if (top < 2 || top % 2 != 0 || a[std::size_t(top)] <= 0)
        throw std::domain_error("variational bound needs a confining potential");

    const auto energy_at = [&](double omega) {
        return hbar * omega / 4.0 + gaussian_smear(potential, hbar / (2.0 * mass * omega), 0.0);
    };

    // geometric scan for a bracketing triple
    double a_om = 0, c_om = 0;
    bool bracketed = false;
    double prev_om = 1e-4, prev_e = energy_at(prev_om);
    double mid_om = prev_om * 1.3, mid_e = energy_at(mid_om);
    for (double om = mid_om * 1.3; om <= 1e6; om *= 1.3) {
        const double e = energy_at(om);
        if (mid_e < prev_e && mid_e < e) {
            a_om = prev_om;
            c_om = om;
            bracketed = true;
            break;
        }
        prev_om = mid_om; prev_e = mid_e;
        mid_om = om; mid_e = e;
    }
    if (!bracketed)
        throw std::runtime_error("variational energy has no interior minimum in [1e-4, 1e6]");

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c_om - gr * (c_om - a_om);
    double x2 = a_om + gr * (c_om - a_om);
    double f1 = energy_at(x1), f2 = energy_at(x2);
    while (c_om - a_om > 1e-10 * std::max(1.0, a_om)) {
        if (f1 < f2) {
            c_om = x2; x2 = x1; f2 = f1;
            x1 = c_om - gr * (c_om - a_om);
            f1 = energy_at(x1);
        } else {
            a_om = x1; x1 = x2; f1 = f2;
            x2 = a_om + gr * (c_om - a_om);
            f2 = energy_at(x2);
        }
    }
    const double omega = 0.5 * (a_om + c_om);
    return {energy_at(omega), omega};
}

} // namespace rgflow
