#include "rgflow/wh_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "rgflow/errors.hpp"
#include "rgflow/kernels.hpp"

namespace rgflow {

namespace {

constexpr std::int64_t chunk_len = 1 << 14;

int resolve_workers(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("RGFLOW_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<int>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::int64_t resolve_stride(const LatticeConfig& cfg, std::int64_t stride) {
  if (stride > 0) {
    return stride;
  }
  return std::max<std::int64_t>(cfg.mode_count() / 200, 1);
}

// y-coefficients c_j = g^(2j)/(2j)! of an even-parity coupling vector.
std::vector<double> to_even_coeffs(const CouplingVector& cv) {
  const int nc = cv.order / 2 + 1;
  std::vector<double> c(static_cast<std::size_t>(nc));
  double fact = 1.0;
  for (int j = 0; j < nc; ++j) {
    if (j > 0) {
      fact *= (2.0 * j - 1.0) * (2.0 * j);
    }
    c[static_cast<std::size_t>(j)] = cv.derivs[static_cast<std::size_t>(2 * j)] / fact;
  }
  return c;
}

CouplingVector from_even_coeffs(std::span<const double> c, int order) {
  CouplingVector cv = CouplingVector::zero(order, true);
  double fact = 1.0;
  for (int j = 0; 2 * j <= order; ++j) {
    if (j > 0) {
      fact *= (2.0 * j - 1.0) * (2.0 * j);
    }
    cv.derivs[static_cast<std::size_t>(2 * j)] = c[static_cast<std::size_t>(j)] * fact;
  }
  return cv;
}

// Taylor jet of log(1+u) through degree n into w; false when 1+u[0] <= 0.
bool log_jet(const double* u, int n, double* w) {
  const double one_u0 = 1.0 + u[0];
  if (one_u0 <= 0.0) {
    return false;
  }
  w[0] = std::log1p(u[0]);
  const double r = 1.0 / one_u0;
  for (int nn = 1; nn <= n; ++nn) {
    double acc = u[nn];
    for (int j = 1; j < nn; ++j) {
      acc -= static_cast<double>(nn - j) / static_cast<double>(nn) * u[j] * w[nn - j];
    }
    w[nn] = acc * r;
  }
  return true;
}

struct LaneGroup {
  int ncoef = 0;
  int nlanes = 0;
  unsigned update_mask = ~0u;
  double inv_beta = 0.0;
  std::vector<double> coef;
  std::vector<double> comp;
  std::vector<double> fail_c1;
  std::vector<std::int64_t> fail_m;
  std::vector<std::vector<FlowSnapshot>> snapshots;  // per lane

  LaneGroup(std::span<const CouplingVector> initials, int first, int count, double beta,
            unsigned mask) {
    ncoef = initials[static_cast<std::size_t>(first)].order / 2 + 1;
    nlanes = count;
    update_mask = mask;
    inv_beta = 1.0 / beta;
    const int stride = kernels::lane_group;
    coef.assign(static_cast<std::size_t>(ncoef) * stride, 0.0);
    comp.assign(static_cast<std::size_t>(ncoef) * stride, 0.0);
    fail_c1.assign(stride, 0.0);
    fail_m.assign(stride, 0);
    snapshots.resize(static_cast<std::size_t>(count));
    for (int l = 0; l < count; ++l) {
      const std::vector<double> c = to_even_coeffs(initials[static_cast<std::size_t>(first + l)]);
      for (int j = 0; j < ncoef; ++j) {
        coef[static_cast<std::size_t>(j) * stride + l] = c[static_cast<std::size_t>(j)];
      }
    }
  }

  kernels::FlowLanes view() {
    kernels::FlowLanes st;
    st.ncoef = ncoef;
    st.nlanes = nlanes;
    st.stride = kernels::lane_group;
    st.update_mask = update_mask;
    st.inv_beta = inv_beta;
    st.coef = coef.data();
    st.comp = comp.data();
    st.fail_m = fail_m.data();
    st.fail_c1 = fail_c1.data();
    return st;
  }

  CouplingVector extract(int lane) const {
    std::vector<double> c(static_cast<std::size_t>(ncoef));
    for (int j = 0; j < ncoef; ++j) {
      c[static_cast<std::size_t>(j)] = coef[static_cast<std::size_t>(j) * kernels::lane_group + lane];
    }
    return from_even_coeffs(c, (ncoef - 1) * 2);
  }

  void record(std::int64_t m) {
    for (int l = 0; l < nlanes; ++l) {
      if (fail_m[static_cast<std::size_t>(l)] == 0) {
        snapshots[static_cast<std::size_t>(l)].push_back({m, extract(l)});
      }
    }
  }
};

void run_group(LaneGroup& grp, const LatticeConfig& cfg, const kernels::Kernels& k,
               std::int64_t snap_stride,
               const std::function<void(std::int64_t, std::int64_t)>& progress) {
  const std::int64_t total = cfg.mode_count();
  const double eps = cfg.epsilon();
  const double eps2_over_mass = eps * eps / cfg.mass;
  const double pi_over = M_PI / static_cast<double>(cfg.n + 1);
  std::vector<double> q(chunk_len);
  std::vector<double> invs(chunk_len);
  kernels::FlowLanes st = grp.view();

  std::int64_t m = total;
  grp.record(m);
  while (m >= 1) {
    const std::int64_t target = std::max<std::int64_t>(m - snap_stride, 0);
    std::int64_t hi = m;
    while (hi > target) {
      const std::int64_t cnt = std::min(chunk_len, hi - target);
      const std::int64_t lo = hi - cnt + 1;
      k.fill_eps2_omega_sq(lo, cnt, pi_over, q.data());
      for (std::int64_t i = 0; i < cnt; ++i) {
        invs[static_cast<std::size_t>(i)] = eps2_over_mass / q[static_cast<std::size_t>(i)];
      }
      k.flow_block(st, invs.data(), lo, cnt);
      hi = lo - 1;
      if (progress) {
        progress(total - hi, total);
      }
    }
    m = target;
    if (m >= 1) {
      grp.record(m);
    }
  }
}

FlowTrace run_flow_generic(const CouplingVector& initial, const LatticeConfig& cfg,
                           const FlowOptions& opts) {
  const int order = initial.order;
  const std::int64_t total = cfg.mode_count();
  const std::int64_t stride = resolve_stride(cfg, opts.snapshot_stride);
  const kernels::Kernels& k = kernels::active_kernels();
  const double eps = cfg.epsilon();
  const double inv_mass = 1.0 / cfg.mass;
  const double eps2_over_mass = eps * eps * inv_mass;
  const double inv_beta = 1.0 / cfg.beta;
  const double pi_over = M_PI / static_cast<double>(cfg.n + 1);

  std::vector<double> a = to_taylor(initial);
  std::vector<double> comp(a.size(), 0.0);
  std::vector<double> u(a.size(), 0.0);
  std::vector<double> w(a.size(), 0.0);
  std::vector<double> q(chunk_len);

  const auto update_allowed = [&](int d) {
    if ((d % 2) != 0) {
      return true;
    }
    return ((opts.update_mask >> (d / 2)) & 1u) != 0;
  };

  FlowTrace trace;
  trace.cfg = cfg;
  trace.order = order;
  trace.update_mask = opts.update_mask;
  trace.kernel = k.name;

  const auto record = [&](std::int64_t m) {
    CouplingVector cv = initial;
    double fact = 1.0;
    for (int d = 0; d <= order; ++d) {
      if (d > 1) {
        fact *= static_cast<double>(d);
      }
      cv.derivs[static_cast<std::size_t>(d)] = a[static_cast<std::size_t>(d)] * fact;
    }
    trace.snapshots.push_back({m, cv});
  };

  std::int64_t m = total;
  record(m);
  while (m >= 1) {
    const std::int64_t target = std::max<std::int64_t>(m - stride, 0);
    std::int64_t hi = m;
    while (hi > target) {
      const std::int64_t cnt = std::min(chunk_len, hi - target);
      const std::int64_t lo = hi - cnt + 1;
      k.fill_eps2_omega_sq(lo, cnt, pi_over, q.data());
      for (std::int64_t i = cnt; i-- > 0;) {
        const double scale = eps2_over_mass / q[static_cast<std::size_t>(i)];
        for (int d = 0; d + 2 <= order; ++d) {
          u[static_cast<std::size_t>(d)] =
              static_cast<double>((d + 2) * (d + 1)) * a[static_cast<std::size_t>(d) + 2] * scale;
        }
        if (order >= 1) {
          u[static_cast<std::size_t>(order) - 1] = 0.0;
        }
        u[static_cast<std::size_t>(order)] = 0.0;
        if (!log_jet(u.data(), order, w.data())) {
          throw FlowDomainError(lo + i, order >= 2 ? 2.0 * a[2] : 0.0,
                                q[static_cast<std::size_t>(i)] / (eps * eps));
        }
        for (int d = 0; d <= order; ++d) {
          if (!update_allowed(d)) {
            continue;
          }
          const double y = inv_beta * w[static_cast<std::size_t>(d)] -
                           comp[static_cast<std::size_t>(d)];
          const double t = a[static_cast<std::size_t>(d)] + y;
          comp[static_cast<std::size_t>(d)] = (t - a[static_cast<std::size_t>(d)]) - y;
          a[static_cast<std::size_t>(d)] = t;
        }
      }
      hi = lo - 1;
      if (opts.progress) {
        opts.progress(total - hi, total);
      }
    }
    m = target;
    if (m >= 1) {
      record(m);
    }
  }
  record(0);
  trace.final_couplings = trace.snapshots.back().couplings;
  trace.snapshots.pop_back();
  return trace;
}

}  // namespace

std::vector<BatchEntry> run_flow_batch(std::span<const CouplingVector> initials,
                                       const LatticeConfig& cfg, const FlowOptions& opts) {
  cfg.validate();
  if (initials.empty()) {
    return {};
  }
  const int order = initials[0].order;
  if (order > 2 * (kernels::max_coeffs - 1)) {
    throw std::domain_error("run_flow_batch: truncation order must be <= 10");
  }
  for (const CouplingVector& cv : initials) {
    cv.validate();
    if (!cv.even_parity) {
      throw std::domain_error("run_flow_batch: every lane must be even-parity");
    }
    if (cv.order != order) {
      throw std::domain_error("run_flow_batch: every lane must share the truncation order");
    }
  }
  const std::int64_t stride = resolve_stride(cfg, opts.snapshot_stride);
  const kernels::Kernels& k = kernels::active_kernels();
  const int nlanes = static_cast<int>(initials.size());
  const int ngroups = (nlanes + kernels::lane_group - 1) / kernels::lane_group;

  std::vector<LaneGroup> groups;
  groups.reserve(static_cast<std::size_t>(ngroups));
  for (int g = 0; g < ngroups; ++g) {
    const int first = g * kernels::lane_group;
    const int count = std::min(kernels::lane_group, nlanes - first);
    groups.emplace_back(initials, first, count, cfg.beta, opts.update_mask);
  }

  const int workers = std::min(resolve_workers(opts.workers), ngroups);
  if (workers <= 1) {
    for (int g = 0; g < ngroups; ++g) {
      run_group(groups[static_cast<std::size_t>(g)], cfg, k, stride,
                g == 0 ? opts.progress : nullptr);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&, wkr] {
        for (int g = wkr; g < ngroups; g += workers) {
          run_group(groups[static_cast<std::size_t>(g)], cfg, k, stride, nullptr);
        }
      });
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  std::vector<BatchEntry> entries(static_cast<std::size_t>(nlanes));
  for (int lane = 0; lane < nlanes; ++lane) {
    LaneGroup& grp = groups[static_cast<std::size_t>(lane / kernels::lane_group)];
    const int l = lane % kernels::lane_group;
    BatchEntry& e = entries[static_cast<std::size_t>(lane)];
    if (grp.fail_m[static_cast<std::size_t>(l)] != 0) {
      e.fail_m = grp.fail_m[static_cast<std::size_t>(l)];
      e.fail_g2 = 2.0 * grp.fail_c1[static_cast<std::size_t>(l)];
      e.fail_omega_sq = matsubara_frequency_sq(cfg, e.fail_m);
    } else {
      FlowTrace trace;
      trace.cfg = cfg;
      trace.order = order;
      trace.update_mask = opts.update_mask;
      trace.kernel = k.name;
      trace.snapshots = std::move(grp.snapshots[static_cast<std::size_t>(l)]);
      trace.final_couplings = grp.extract(l);
      e.trace = std::move(trace);
    }
  }
  return entries;
}

FlowTrace run_flow(const CouplingVector& initial, const LatticeConfig& cfg,
                   const FlowOptions& opts) {
  initial.validate();
  cfg.validate();
  if (!initial.even_parity) {
    return run_flow_generic(initial, cfg, opts);
  }
  std::vector<BatchEntry> entries = run_flow_batch({&initial, 1}, cfg, opts);
  BatchEntry& e = entries.front();
  if (!e.ok()) {
    throw FlowDomainError(e.fail_m, e.fail_g2, e.fail_omega_sq);
  }
  return std::move(*e.trace);
}

double ground_state_energy(const FlowTrace& trace) { return trace.final_couplings.g(0); }

FlowState wh_step(const FlowState& state) {
  state.cfg.validate();
  state.couplings.validate();
  if (state.m < 1 || state.m > state.cfg.mode_count()) {
    throw std::domain_error("wh_step: m must lie in [1, N/2]");
  }
  const double omega_sq = matsubara_frequency_sq(state.cfg, state.m);
  const double scale = 1.0 / (omega_sq * state.cfg.mass);
  std::vector<double> u = second_derivative_jet(state.couplings);
  for (double& x : u) {
    x *= scale;
  }
  std::vector<double> w;
  try {
    w = jet_log1p(u, state.couplings.order);
  } catch (const LogDomainError&) {
    throw FlowDomainError(state.m, state.couplings.order >= 2 ? state.couplings.g(2) : 0.0,
                          omega_sq);
  }
  FlowState out;
  out.m = state.m - 1;
  out.cfg = state.cfg;
  out.couplings = state.couplings;
  const double inv_beta = 1.0 / state.cfg.beta;
  double fact = 1.0;
  for (int d = 0; d <= state.couplings.order; ++d) {
    if (d > 1) {
      fact *= static_cast<double>(d);
    }
    out.couplings.derivs[static_cast<std::size_t>(d)] += inv_beta * fact * w[static_cast<std::size_t>(d)];
  }
  return out;
}

CouplingVector continuum_wh_flow(const CouplingVector& initial, double beta, double mass,
                                 double hbar, double k_max, std::int64_t steps) {
  initial.validate();
  if (!(beta > 0.0) || !(mass > 0.0) || !(hbar > 0.0)) {
    throw std::domain_error("continuum_wh_flow: beta, mass, hbar must be positive");
  }
  if (steps < 1) {
    throw std::domain_error("continuum_wh_flow: steps must be >= 1");
  }
  const double k_min = 2.0 * M_PI / (hbar * beta);
  if (!(k_max > k_min)) {
    throw std::domain_error("continuum_wh_flow: k_max must exceed 2 pi/(hbar beta)");
  }
  const int order = initial.order;
  std::vector<double> a = to_taylor(initial);
  std::vector<double> comp(a.size(), 0.0);
  std::vector<double> u(a.size(), 0.0);
  std::vector<double> w(a.size(), 0.0);
  const double log_ratio = std::log(k_max / k_min) / static_cast<double>(steps);

  double k_hi = k_max;
  for (std::int64_t i = 0; i < steps; ++i) {
    const double k_lo =
        (i + 1 == steps) ? k_min : k_max * std::exp(-log_ratio * static_cast<double>(i + 1));
    const double k_mid = std::sqrt(k_hi * k_lo);
    const double scale = 1.0 / (mass * k_mid * k_mid);
    for (int d = 0; d + 2 <= order; ++d) {
      u[static_cast<std::size_t>(d)] =
          static_cast<double>((d + 2) * (d + 1)) * a[static_cast<std::size_t>(d) + 2] * scale;
    }
    if (order >= 1) {
      u[static_cast<std::size_t>(order) - 1] = 0.0;
    }
    u[static_cast<std::size_t>(order)] = 0.0;
    if (!log_jet(u.data(), order, w.data())) {
      throw LogDomainError(u[0]);
    }
    const double wgt = hbar * (k_hi - k_lo) / (2.0 * M_PI);
    for (int d = 0; d <= order; ++d) {
      const double y = wgt * w[static_cast<std::size_t>(d)] - comp[static_cast<std::size_t>(d)];
      const double t = a[static_cast<std::size_t>(d)] + y;
      comp[static_cast<std::size_t>(d)] = (t - a[static_cast<std::size_t>(d)]) - y;
      a[static_cast<std::size_t>(d)] = t;
    }
    k_hi = k_lo;
  }

  CouplingVector out = initial;
  double fact = 1.0;
  for (int d = 0; d <= order; ++d) {
    if (d > 1) {
      fact *= static_cast<double>(d);
    }
    out.derivs[static_cast<std::size_t>(d)] = a[static_cast<std::size_t>(d)] * fact;
  }
  return out;
}

CouplingVector perturbative_effective_potential(const CouplingVector& initial,
                                                const LatticeConfig& cfg) {
  initial.validate();
  cfg.validate();
  const int order = initial.order;
  const std::int64_t total = cfg.mode_count();
  const kernels::Kernels& k = kernels::active_kernels();
  const double eps = cfg.epsilon();
  const double eps2_over_mass = eps * eps / cfg.mass;
  const double inv_beta = 1.0 / cfg.beta;
  const double pi_over = M_PI / static_cast<double>(cfg.n + 1);

  const std::vector<double> a0 = to_taylor(initial);
  std::vector<double> ub(a0.size(), 0.0);
  for (int d = 0; d + 2 <= order; ++d) {
    ub[static_cast<std::size_t>(d)] =
        static_cast<double>((d + 2) * (d + 1)) * a0[static_cast<std::size_t>(d) + 2] *
        eps2_over_mass;
  }
  std::vector<double> acc(a0.size(), 0.0);
  std::vector<double> comp(a0.size(), 0.0);
  std::vector<double> u(a0.size(), 0.0);
  std::vector<double> w(a0.size(), 0.0);
  std::vector<double> q(chunk_len);

  for (std::int64_t lo = 1; lo <= total; lo += chunk_len) {
    const std::int64_t cnt = std::min(chunk_len, total - lo + 1);
    k.fill_eps2_omega_sq(lo, cnt, pi_over, q.data());
    for (std::int64_t i = 0; i < cnt; ++i) {
      const double rq = 1.0 / q[static_cast<std::size_t>(i)];
      for (int d = 0; d <= order; ++d) {
        u[static_cast<std::size_t>(d)] = ub[static_cast<std::size_t>(d)] * rq;
      }
      if (!log_jet(u.data(), order, w.data())) {
        throw FlowDomainError(lo + i, initial.order >= 2 ? initial.g(2) : 0.0,
                              q[static_cast<std::size_t>(i)] / (eps * eps));
      }
      for (int d = 0; d <= order; ++d) {
        const double y = inv_beta * w[static_cast<std::size_t>(d)] -
                         comp[static_cast<std::size_t>(d)];
        const double t = acc[static_cast<std::size_t>(d)] + y;
        comp[static_cast<std::size_t>(d)] = (t - acc[static_cast<std::size_t>(d)]) - y;
        acc[static_cast<std::size_t>(d)] = t;
      }
    }
  }

  CouplingVector out = initial;
  double fact = 1.0;
  for (int d = 0; d <= order; ++d) {
    if (d > 1) {
      fact *= static_cast<double>(d);
    }
    out.derivs[static_cast<std::size_t>(d)] =
        (a0[static_cast<std::size_t>(d)] + acc[static_cast<std::size_t>(d)]) * fact;
  }
  return out;
}

}  // namespace rgflow
