#include "rgflow/errors.hpp"

#include <sstream>

namespace rgflow {

namespace {

std::string log_domain_msg(double u0) {
  std::ostringstream os;
  os << "log-domain violation: 1 + u0 <= 0 (u0 = " << u0 << ")";
  return os.str();
}

std::string flow_domain_msg(std::int64_t mode, double g2, double omega_sq) {
  std::ostringstream os;
  os << "log-domain violation at mode m = " << mode << ": 1 + g2/(omega_m^2 M) <= 0 (g2 = "
     << g2 << ", omega_m^2 = " << omega_sq << ")";
  return os.str();
}

std::string grid_domain_msg(double need_lo, double need_hi, double have_lo, double have_hi) {
  std::ostringstream os;
  os << "grid potential domain [" << have_lo << ", " << have_hi << "] does not cover required ["
     << need_lo << ", " << need_hi << "]";
  return os.str();
}

}  // namespace

LogDomainError::LogDomainError(double u0) : std::runtime_error(log_domain_msg(u0)), u0_(u0) {}

FlowDomainError::FlowDomainError(std::int64_t mode, double g2, double omega_sq)
    : std::runtime_error(flow_domain_msg(mode, g2, omega_sq)),
      mode_(mode),
      g2_(g2),
      omega_sq_(omega_sq) {}

GridDomainError::GridDomainError(double need_lo, double need_hi, double have_lo, double have_hi)
    : std::domain_error(grid_domain_msg(need_lo, need_hi, have_lo, have_hi)),
      need_lo_(need_lo),
      need_hi_(need_hi) {}

ConvergenceError::ConvergenceError(const std::string& what, std::vector<double> history)
    : std::runtime_error(what), history_(std::move(history)) {}

}  // namespace rgflow
