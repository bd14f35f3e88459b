#include <cmath>
#include <cstdint>

#include "rgflow/kernels.hpp"

namespace rgflow::kernels {

namespace {

void fill_eps2_omega_sq_scalar(std::int64_t m0, std::int64_t count, double pi_over, double* q) {
  for (std::int64_t i = 0; i < count; ++i) {
    const double s = std::sin(pi_over * static_cast<double>(m0 + i));
    q[i] = 4.0 * s * s;
  }
}

double log_sum_scalar(const double* q, std::int64_t count) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::int64_t i = 0; i < count; ++i) {
    const double y = std::log(q[i]) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double log1p_ratio_sum_scalar(const double* q, std::int64_t count, double num) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::int64_t i = 0; i < count; ++i) {
    const double y = std::log1p(num / q[i]) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Reference flow kernel. For each mode (descending) and live lane:
//   u_j = c_{j+1} (2j+2)(2j+1) / (omega^2 M),      j < ncoef-1, u_top = 0
//   w_0 = log1p(u_0),   w_n = (u_n - sum_{j=1}^{n-1} ((n-j)/n) u_j w_{n-j}) / (1+u_0)
//   c_j += w_j / beta   (Kahan-compensated, subject to update_mask)
void flow_block_scalar(FlowLanes& st, const double* invs, std::int64_t m0, std::int64_t count) {
  const int nc = st.ncoef;
  double k2f[max_coeffs];
  for (int j = 0; j < nc; ++j) {
    k2f[j] = (2.0 * j + 2.0) * (2.0 * j + 1.0);
  }
  double u[max_coeffs];
  double w[max_coeffs];
  for (int lane = 0; lane < st.nlanes; ++lane) {
    if (st.fail_m[lane] != 0) {
      continue;
    }
    double* c = st.coef + lane;
    double* comp = st.comp + lane;
    const std::int64_t stride = st.stride;
    for (std::int64_t i = count; i-- > 0;) {
      const double s = invs[i];
      for (int j = 0; j + 1 < nc; ++j) {
        u[j] = c[(j + 1) * stride] * k2f[j] * s;
      }
      u[nc - 1] = 0.0;
      const double one_u0 = 1.0 + u[0];
      if (one_u0 <= 0.0) {
        st.fail_m[lane] = m0 + i;
        st.fail_c1[lane] = nc > 1 ? c[stride] : 0.0;
        break;
      }
      const double r = 1.0 / one_u0;
      w[0] = std::log1p(u[0]);
      for (int n = 1; n < nc; ++n) {
        double acc = u[n];
        for (int j = 1; j < n; ++j) {
          acc -= static_cast<double>(n - j) / static_cast<double>(n) * u[j] * w[n - j];
        }
        w[n] = acc * r;
      }
      for (int j = 0; j < nc; ++j) {
        if (((st.update_mask >> j) & 1u) == 0) {
          continue;
        }
        const double y = st.inv_beta * w[j] - comp[j * stride];
        const double t = c[j * stride] + y;
        comp[j * stride] = (t - c[j * stride]) - y;
        c[j * stride] = t;
      }
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", &fill_eps2_omega_sq_scalar, &flow_block_scalar,
                         &log1p_ratio_sum_scalar, &log_sum_scalar};
  return k;
}

}  // namespace rgflow::kernels
