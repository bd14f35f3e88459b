#include "rgflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace rgflow {

namespace {

// Orthonormal Hermite recurrence (weight e^{-x^2}):
// p_0 = pi^{-1/4}, p_j = x sqrt(2/j) p_{j-1} - sqrt((j-1)/j) p_{j-2},
// p_n'(x) = sqrt(2n) p_{n-1}(x).
void hermite_eval(int n, double x, double& pn, double& dpn) {
  double pm1 = 0.0;
  double p = 7.5112554446494248286e-01;  // pi^{-1/4}
  for (int j = 1; j <= n; ++j) {
    const double pm2 = pm1;
    pm1 = p;
    p = x * std::sqrt(2.0 / j) * pm1 - std::sqrt((j - 1.0) / j) * pm2;
  }
  pn = p;
  dpn = std::sqrt(2.0 * n) * pm1;
}

GaussHermiteRule build_rule(int n) {
  GaussHermiteRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[static_cast<std::size_t>(n - 1)];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[static_cast<std::size_t>(n - 2)];
    } else {
      z = 2.0 * z - rule.nodes[static_cast<std::size_t>(n - i + 1)];
    }
    double pn = 0.0;
    double dpn = 0.0;
    bool converged = false;
    for (int it = 0; it < 64; ++it) {
      hermite_eval(n, z, pn, dpn);
      const double dz = pn / dpn;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw std::runtime_error("gauss_hermite: Newton iteration failed to converge");
    }
    hermite_eval(n, z, pn, dpn);
    const double w = 2.0 / (dpn * dpn);
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    rule.weights[static_cast<std::size_t>(i)] = w;
  }
  if ((n % 2) != 0) {
    rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1) {
    throw std::domain_error("gauss_hermite: n must be >= 1");
  }
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, build_rule(n)).first;
  }
  return it->second;
}

}  // namespace rgflow
