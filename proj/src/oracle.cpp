#include "rgflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rgflow/errors.hpp"
#include "rgflow/quadrature.hpp"

namespace rgflow {

namespace {

constexpr double pi = std::numbers::pi;

double taylor_eval(const std::vector<double>& a, double x) {
    double v = 0;
    for (std::size_t k = a.size(); k-- > 0;) v = v * x + a[k];
    return v;
}

// Characteristic ground-state length: harmonic width for the quadratic part,
// (hbar^2/(M a_k))^(1/(k+2)) for each higher confining term; the smallest wins.
double auto_half_width(const std::vector<double>& a, double mass, double hbar) {
    double s = std::numeric_limits<double>::infinity();
    if (a.size() > 2 && a[2] > 0) {
        double omega = std::sqrt(2.0 * a[2] / mass);
        s = std::min(s, std::sqrt(hbar / (mass * omega)));
    }
    for (std::size_t k = 3; k < a.size(); ++k) {
        if (a[k] > 0)
            s = std::min(s, std::pow(hbar * hbar / (mass * a[k]), 1.0 / double(k + 2)));
    }
    if (!std::isfinite(s)) throw std::domain_error("potential has no confining scale");
    return 10.0 * s;
}

// Smallest eigenvalue of the symmetric tridiagonal (diag d, constant
// off-diagonal e) by Sturm-sequence bisection.
double sturm_smallest(const std::vector<double>& d, double e) {
    const double e2 = e * e;
    const double pivmin = std::numeric_limits<double>::min() /
                          std::numeric_limits<double>::epsilon() * std::max(1.0, e2);
    auto count_below = [&](double sigma) {
        std::int64_t cnt = 0;
        double q = std::numeric_limits<double>::infinity();
        for (double di : d) {
            q = di - sigma - e2 / q;
            if (std::abs(q) < pivmin) q = -pivmin;
            if (q < 0) ++cnt;
        }
        return cnt;
    };
    auto [dmin, dmax] = std::minmax_element(d.begin(), d.end());
    double lo = *dmin - 2.0 * std::abs(e), hi = *dmax + 2.0 * std::abs(e);
    for (int it = 0; it < 128 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Boundary amplitude of the ground state, by a few inverse-iteration sweeps
// shifted slightly below the computed eigenvalue.
double boundary_amplitude(const std::vector<double>& d, double e, double energy) {
    const std::size_t n = d.size();
    const double sigma = energy - 1e-7 * std::max(1.0, std::abs(energy));
    std::vector<double> x(n, 1.0), cp(n), y(n);
    for (int sweep = 0; sweep < 3; ++sweep) {
        double b0 = d[0] - sigma;
        if (std::abs(b0) < 1e-300) b0 = 1e-300;
        cp[0] = e / b0;
        y[0] = x[0] / b0;
        for (std::size_t i = 1; i < n; ++i) {
            double den = d[i] - sigma - e * cp[i - 1];
            if (std::abs(den) < 1e-300) den = 1e-300;
            cp[i] = e / den;
            y[i] = (x[i] - e * y[i - 1]) / den;
        }
        for (std::size_t i = n - 1; i-- > 0;) y[i] -= cp[i] * y[i + 1];
        double peak = 0;
        for (double v : y) peak = std::max(peak, std::abs(v));
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / peak;
    }
    double peak = 0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    return std::max(std::abs(x[0]), std::abs(x[n - 1])) / peak;
}

double fd_ground(const std::vector<double>& a, double mass, double hbar, std::int64_t n,
                 double half_width, double* tail = nullptr) {
    const double h = 2.0 * half_width / double(n + 1);
    const double kin = hbar * hbar / (mass * h * h);
    std::vector<double> d(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        d[std::size_t(i)] = kin + taylor_eval(a, -half_width + double(i + 1) * h);
    const double e = -0.5 * kin;
    double energy = sturm_smallest(d, e);
    if (tail) *tail = boundary_amplitude(d, e, energy);
    return energy;
}

std::int64_t binom(int k, int j) {
    std::int64_t c = 1;
    for (int i = 0; i < j; ++i) c = c * (k - i) / (i + 1);
    return c;
}

} // namespace

OracleResult schrodinger_ground_energy(const CouplingVector& potential, double mass,
                                       double hbar, const SchrodingerOptions& opts) {
    potential.validate();
    if (!(mass > 0) || !(hbar > 0)) throw std::domain_error("mass and hbar must be positive");
    if (opts.grid_n < 200) throw std::domain_error("schrodinger oracle needs grid_n >= 200");
    auto a = to_taylor(potential);
    int top = -1;
    for (int k = int(a.size()) - 1; k >= 1; --k)
        if (a[std::size_t(k)] != 0) { top = k; break; }
    if (top < 2 || top % 2 != 0 || a[std::size_t(top)] <= 0)
        throw std::domain_error("potential is not confining (leading coefficient must be even-order and positive)");

    const bool auto_width = !(opts.half_width > 0);
    double half_width = auto_width ? auto_half_width(a, mass, hbar) : opts.half_width;

    double coarse = 0, fine = 0, tail = 0;
    for (int attempt = 0;; ++attempt) {
        coarse = fd_ground(a, mass, hbar, opts.grid_n, half_width);
        fine = fd_ground(a, mass, hbar, 2 * opts.grid_n + 1, half_width, &tail);
        if (tail <= 1e-8 || !auto_width || attempt >= 5) break;
        half_width *= 1.4;
    }
    OracleResult r;
    r.value = (4.0 * fine - coarse) / 3.0;
    r.method = "schrodinger";
    r.resolution.grid_n = 2 * opts.grid_n + 1;
    r.resolution.domain_half_width = half_width;
    r.resolution.tail_ratio = tail;
    r.est_error = std::max(std::abs(fine - coarse) / 3.0, tail * std::max(1.0, std::abs(r.value)));
    return r;
}

OracleResult single_mode_step_oracle(const CouplingVector& potential, const LatticeConfig& cfg,
                                     std::int64_t m, double x0, int max_order) {
    potential.validate();
    cfg.validate();
    if (max_order < 16) throw std::domain_error("single-mode oracle needs max_order >= 16");
    const double eps = cfg.epsilon();
    const double omega_sq = matsubara_frequency_sq(cfg, m);
    const auto dv = derivatives_at(potential, x0);
    const double v0 = dv[0];
    const double vpp = potential.order >= 2 ? dv[2] : 0.0;

    const double c_free = eps * cfg.mass * omega_sq / cfg.hbar;
    const double c_eff = c_free + eps * vpp / cfg.hbar;
    const double c_s = c_eff > 0 ? c_eff : c_free;
    // log(c_s/c_free), kept in log1p form so stiff modes do not lose digits
    const double log_ratio = c_eff > 0 ? std::log1p(vpp / (cfg.mass * omega_sq)) : 0.0;

    // Discrete time sums of the single-mode path, in closed form: for each
    // potential order k the only surviving binomial terms are those with
    // m(2j-k) = 0 mod N+1.
    struct Term { int j; double coef; };
    std::vector<std::vector<Term>> survivors(dv.size());
    const std::int64_t period = cfg.n + 1;
    double fact = 2.0; // k!
    for (int k = 3; k < int(dv.size()); ++k) {
        fact *= k;
        if (dv[std::size_t(k)] == 0) continue;
        const double pref = (eps / cfg.hbar) * (dv[std::size_t(k)] / fact) *
                            std::pow(double(period), 1.0 - 0.5 * k);
        for (int j = 0; j <= k; ++j)
            if ((std::int64_t(2 * j - k) * m) % period == 0)
                survivors[std::size_t(k)].push_back({j, pref * double(binom(k, j))});
    }

    const double inv_sqrt_cs = 1.0 / std::sqrt(c_s);
    const double quad_shift = c_eff - c_s; // nonzero only when curvature is negative

    OracleResult r;
    r.method = "single_mode";
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int q = 8; q <= max_order; q *= 2) {
        const auto& rule = gauss_hermite(q);
        double wsum = 0;
        for (double w : rule.weights) wsum += w;
        const double norm_defect = wsum * wsum / pi - 1.0;

        double acc = 0, comp = 0; // Kahan over expm1(-R) terms
        for (int i = 0; i < q; ++i) {
            const double av = rule.nodes[std::size_t(i)] * inv_sqrt_cs;
            for (int jj = 0; jj < q; ++jj) {
                const double bv = rule.nodes[std::size_t(jj)] * inv_sqrt_cs;
                const std::complex<double> z(av, bv);
                double R = quad_shift * (av * av + bv * bv);
                for (int k = 3; k < int(dv.size()); ++k) {
                    for (const Term& t : survivors[std::size_t(k)]) {
                        std::complex<double> val = std::pow(z, t.j) * std::pow(std::conj(z), k - t.j);
                        R += t.coef * val.real();
                    }
                }
                if (-R > 700.0)
                    throw QuadratureError("single-mode integrand overflows (non-confining direction)");
                const double inc = rule.weights[std::size_t(i)] * rule.weights[std::size_t(jj)] / pi *
                                   std::expm1(-R);
                const double y = inc - comp;
                const double t2 = acc + y;
                comp = (t2 - acc) - y;
                acc = t2;
            }
        }
        const double integral_defect = acc + norm_defect; // I - 1
        if (integral_defect <= -1.0)
            throw QuadratureError("single-mode integral collapsed to a non-positive value");
        const double value = v0 + (log_ratio - std::log1p(integral_defect)) / cfg.beta;

        r.resolution.quad_order = q;
        if (!std::isnan(prev)) {
            r.est_error = std::abs(value - prev);
            if (r.est_error <= 1e-9 * std::max(1.0, std::abs(value))) {
                r.value = value;
                return r;
            }
        }
        prev = value;
        r.value = value;
    }
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "single-mode quadrature did not reach 1e-9 relative by %d points (last delta %.3e)",
                  max_order, r.est_error);
    throw QuadratureError(msg);
}

OracleResult small_lattice_effective_potential(const CouplingVector& potential,
                                               const LatticeConfig& cfg, double x0,
                                               int max_order) {
    potential.validate();
    cfg.validate();
    if (cfg.n > 6)
        throw std::domain_error("small-lattice oracle handles N <= 6 only (integral dimension 2*N/2)");
    if (max_order < 16) throw std::domain_error("small-lattice oracle needs max_order >= 16");

    const int pairs = int(cfg.n / 2);
    const int dims = 2 * pairs;
    const int period = int(cfg.n) + 1;
    const double eps = cfg.epsilon();

    const auto dv = derivatives_at(potential, x0);
    const double v0 = dv[0];
    const double vpp = potential.order >= 2 ? dv[2] : 0.0;
    const double kappa = std::max(vpp, 0.0);

    std::vector<double> shifted(dv.size()); // Taylor of V(x0 + u) - V(x0) in u
    double fact = 1.0;
    for (std::size_t k = 1; k < dv.size(); ++k) {
        fact *= double(k);
        shifted[k] = dv[k] / fact;
    }
    shifted[0] = 0.0;

    std::vector<double> c(static_cast<std::size_t>(pairs)), inv_sqrt_c(static_cast<std::size_t>(pairs));
    double prefactor_log = 0;
    for (int mm = 1; mm <= pairs; ++mm) {
        const double w2 = matsubara_frequency_sq(cfg, mm);
        c[std::size_t(mm - 1)] = eps * (cfg.mass * w2 + kappa) / cfg.hbar;
        inv_sqrt_c[std::size_t(mm - 1)] = 1.0 / std::sqrt(c[std::size_t(mm - 1)]);
        prefactor_log += std::log(eps * w2 * cfg.mass / (pi * cfg.hbar * c[std::size_t(mm - 1)]));
    }

    // mode functions (2/sqrt(N+1)) cos/sin(2 pi m n/(N+1)), n = 1..N+1
    std::vector<std::vector<double>> cosw(static_cast<std::size_t>(pairs)), sinw(static_cast<std::size_t>(pairs));
    const double amp = 2.0 / std::sqrt(double(period));
    for (int mm = 1; mm <= pairs; ++mm) {
        cosw[std::size_t(mm - 1)].resize(std::size_t(period));
        sinw[std::size_t(mm - 1)].resize(std::size_t(period));
        for (int n = 1; n <= period; ++n) {
            const double th = 2.0 * pi * double(mm) * double(n) / double(period);
            cosw[std::size_t(mm - 1)][std::size_t(n - 1)] = amp * std::cos(th);
            sinw[std::size_t(mm - 1)][std::size_t(n - 1)] = amp * std::sin(th);
        }
    }

    OracleResult r;
    r.method = "small_lattice";
    r.resolution.grid_n = cfg.n;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int q = 8; q <= max_order; q *= 2) {
        double budget = 1;
        for (int dd = 0; dd < dims; ++dd) budget *= double(q);
        if (budget > 4e7) break;

        const auto& rule = gauss_hermite(q);
        std::vector<int> idx(std::size_t(dims), 0);
        std::vector<double> delta(static_cast<std::size_t>(period));
        double acc = 0, comp = 0;
        for (;;) {
            double wprod = 1.0, r2sum = 0;
            std::fill(delta.begin(), delta.end(), 0.0);
            for (int mm = 0; mm < pairs; ++mm) {
                const double av = rule.nodes[std::size_t(idx[std::size_t(2 * mm)])] * inv_sqrt_c[std::size_t(mm)];
                const double bv = rule.nodes[std::size_t(idx[std::size_t(2 * mm + 1)])] * inv_sqrt_c[std::size_t(mm)];
                wprod *= rule.weights[std::size_t(idx[std::size_t(2 * mm)])] *
                         rule.weights[std::size_t(idx[std::size_t(2 * mm + 1)])];
                r2sum += av * av + bv * bv;
                for (int n = 0; n < period; ++n)
                    delta[std::size_t(n)] += av * cosw[std::size_t(mm)][std::size_t(n)] +
                                             bv * sinw[std::size_t(mm)][std::size_t(n)];
            }
            double dT = 0;
            for (int n = 0; n < period; ++n) dT += taylor_eval(shifted, delta[std::size_t(n)]);
            const double arg = (eps / cfg.hbar) * (kappa * r2sum - dT);
            if (arg > 700.0) throw QuadratureError("small-lattice integrand overflows");
            const double inc = wprod * std::exp(arg);
            const double y = inc - comp;
            const double t2 = acc + y;
            comp = (t2 - acc) - y;
            acc = t2;

            int dd = 0;
            while (dd < dims && ++idx[std::size_t(dd)] == q) idx[std::size_t(dd)] = 0, ++dd;
            if (dd == dims) break;
        }
        if (!(acc > 0)) throw QuadratureError("small-lattice integral collapsed to a non-positive value");
        const double value = v0 - (prefactor_log + std::log(acc)) / cfg.beta;

        r.resolution.quad_order = q;
        if (!std::isnan(prev)) {
            r.est_error = std::abs(value - prev);
            if (r.est_error <= 1e-9 * std::max(1.0, std::abs(value))) {
                r.value = value;
                return r;
            }
        }
        prev = value;
        r.value = value;
    }
    if (std::isnan(prev)) throw QuadratureError("small-lattice node budget exhausted before two refinements");
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "small-lattice quadrature did not reach 1e-9 relative within the node budget (last delta %.3e)",
                  r.est_error);
    throw QuadratureError(msg);
}

} // namespace rgflow
