#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgflow {

// 1 + u(0) <= 0 passed to a log jet; carries the offending constant term.
class LogDomainError : public std::runtime_error {
 public:
  explicit LogDomainError(double u0);
  double u0() const noexcept { return u0_; }

 private:
  double u0_;
};

// Log-domain violation hit at a specific flow mode. For the double well this
// is an expected outcome at small coupling, so the failing mode and curvature
// are kept machine-readable.
class FlowDomainError : public std::runtime_error {
 public:
  FlowDomainError(std::int64_t mode, double g2, double omega_sq);
  std::int64_t mode() const noexcept { return mode_; }
  double g2() const noexcept { return g2_; }
  double omega_sq() const noexcept { return omega_sq_; }

 private:
  std::int64_t mode_;
  double g2_;
  double omega_sq_;
};

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

// A Gaussian smear needed potential values outside the tabulated domain.
class GridDomainError : public std::domain_error {
 public:
  GridDomainError(double need_lo, double need_hi, double have_lo, double have_hi);
  double need_lo() const noexcept { return need_lo_; }
  double need_hi() const noexcept { return need_hi_; }

 private:
  double need_lo_;
  double need_hi_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history);
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace rgflow
