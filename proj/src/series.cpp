#include "rgflow/series.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rgflow/errors.hpp"

namespace rgflow {

CouplingVector::CouplingVector(int order_, std::vector<double> derivs_, bool even_parity_)
    : order(order_), derivs(std::move(derivs_)), even_parity(even_parity_) {
  validate();
}

CouplingVector CouplingVector::anharmonic(int order, double mass, double omega2, double lambda) {
  if (order < 2) {
    throw std::domain_error("CouplingVector::anharmonic: order must be >= 2");
  }
  CouplingVector cv = zero(order, true);
  cv.derivs[2] = mass * omega2;
  if (order >= 4) {
    cv.derivs[4] = lambda;
  } else if (lambda != 0.0) {
    throw std::domain_error("CouplingVector::anharmonic: order < 4 cannot hold lambda != 0");
  }
  return cv;
}

CouplingVector CouplingVector::zero(int order, bool even_parity) {
  CouplingVector cv;
  cv.order = order;
  cv.derivs.assign(static_cast<std::size_t>(order) + 1, 0.0);
  cv.even_parity = even_parity;
  cv.validate();
  return cv;
}

double CouplingVector::g(int k) const {
  if (k < 0 || k > order) {
    throw std::out_of_range("CouplingVector::g: k out of range");
  }
  return derivs[static_cast<std::size_t>(k)];
}

void CouplingVector::validate() const {
  if (order < 0 || (order % 2) != 0) {
    throw std::domain_error("CouplingVector: order must be even and >= 0 (got " +
                            std::to_string(order) + ")");
  }
  if (derivs.size() != static_cast<std::size_t>(order) + 1) {
    throw std::domain_error("CouplingVector: derivs must have order+1 entries");
  }
  for (double d : derivs) {
    if (!std::isfinite(d)) {
      throw std::domain_error("CouplingVector: non-finite entry");
    }
  }
  if (even_parity) {
    for (int k = 1; k <= order; k += 2) {
      if (derivs[static_cast<std::size_t>(k)] != 0.0) {
        throw std::domain_error("CouplingVector: even_parity set but g^(" + std::to_string(k) +
                                ") != 0");
      }
    }
  }
}

std::vector<double> to_taylor(const CouplingVector& cv) {
  cv.validate();
  std::vector<double> a(cv.derivs.size());
  double fact = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k > 1) {
      fact *= static_cast<double>(k);
    }
    a[k] = cv.derivs[k] / fact;
  }
  return a;
}

std::vector<double> second_derivative_jet(const CouplingVector& cv) {
  cv.validate();
  if (cv.order < 2) {
    return {0.0};
  }
  const std::vector<double> a = to_taylor(cv);
  std::vector<double> b(static_cast<std::size_t>(cv.order) - 1);
  for (std::size_t k = 0; k < b.size(); ++k) {
    b[k] = static_cast<double>((k + 2) * (k + 1)) * a[k + 2];
  }
  return b;
}

std::vector<double> jet_multiply(std::span<const double> a, std::span<const double> b, int order) {
  if (order < 0) {
    throw std::domain_error("jet_multiply: order must be >= 0");
  }
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < na && i <= static_cast<std::size_t>(order); ++i) {
    if (a[i] == 0.0) {
      continue;
    }
    const std::size_t jmax = std::min(nb, static_cast<std::size_t>(order) + 1 - i);
    for (std::size_t j = 0; j < jmax; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

std::vector<double> jet_log1p(std::span<const double> u, int order) {
  if (order < 0) {
    throw std::domain_error("jet_log1p: order must be >= 0");
  }
  const auto at = [&u](std::size_t k) { return k < u.size() ? u[k] : 0.0; };
  const double u0 = at(0);
  const double one_u0 = 1.0 + u0;
  if (one_u0 <= 0.0) {
    throw LogDomainError(u0);
  }
  std::vector<double> w(static_cast<std::size_t>(order) + 1, 0.0);
  w[0] = std::log1p(u0);
  const double r = 1.0 / one_u0;
  for (int n = 1; n <= order; ++n) {
    double acc = at(static_cast<std::size_t>(n));
    for (int j = 1; j < n; ++j) {
      acc -= static_cast<double>(n - j) / static_cast<double>(n) *
             at(static_cast<std::size_t>(j)) * w[static_cast<std::size_t>(n - j)];
    }
    w[static_cast<std::size_t>(n)] = acc * r;
  }
  return w;
}

std::vector<double> jet_exp(std::span<const double> u, int order) {
  if (order < 0) {
    throw std::domain_error("jet_exp: order must be >= 0");
  }
  const auto at = [&u](std::size_t k) { return k < u.size() ? u[k] : 0.0; };
  std::vector<double> w(static_cast<std::size_t>(order) + 1, 0.0);
  w[0] = std::exp(at(0));
  for (int n = 1; n <= order; ++n) {
    double acc = 0.0;
    for (int j = 1; j <= n; ++j) {
      acc += static_cast<double>(j) / static_cast<double>(n) * at(static_cast<std::size_t>(j)) *
             w[static_cast<std::size_t>(n - j)];
    }
    w[static_cast<std::size_t>(n)] = acc;
  }
  return w;
}

std::vector<double> derivatives_at(const CouplingVector& cv, double x0) {
  cv.validate();
  // Taylor shift on coefficients, then back to derivatives.
  std::vector<double> a = to_taylor(cv);
  const int n = cv.order;
  for (int k = 0; k < n; ++k) {
    for (int j = n - 1; j >= k; --j) {
      a[static_cast<std::size_t>(j)] += x0 * a[static_cast<std::size_t>(j) + 1];
    }
  }
  double fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 1) {
      fact *= static_cast<double>(k);
    }
    a[static_cast<std::size_t>(k)] *= fact;
  }
  return a;
}

double gaussian_smear(const CouplingVector& cv, double a2, double x0) {
  cv.validate();
  if (a2 < 0.0) {
    throw std::domain_error("gaussian_smear: a2 must be >= 0");
  }
  const std::vector<double> d = derivatives_at(cv, x0);
  double sum = d[0];
  double weight = 1.0;  // a2^j / (2^j j!)
  for (int j = 1; 2 * j <= cv.order; ++j) {
    weight *= a2 / (2.0 * static_cast<double>(j));
    sum += weight * d[static_cast<std::size_t>(2 * j)];
  }
  return sum;
}

}  // namespace rgflow
