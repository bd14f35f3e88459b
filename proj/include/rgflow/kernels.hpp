#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rgflow::kernels {

// Highest supported truncation: order 10, i.e. 6 even coefficients
// c_j = g^(2j)/(2j)! of the potential viewed as a polynomial in x^2.
inline constexpr int max_coeffs = 6;

// Lanes per vector in the wide kernels; FlowLanes strides are padded to this.
inline constexpr int lane_group = 4;

// Lane-parallel flow state (structure of arrays). coef[j*stride + lane] holds
// c_j for that lane and comp the matching Kahan compensation. A lane that
// leaves the log domain records the failing mode in fail_m and c_1 at failure
// in fail_c1 (g2 = 2 c_1); its coefficients freeze there while other lanes
// keep flowing.
struct FlowLanes {
  int ncoef = 0;
  int nlanes = 0;
  int stride = 0;
  unsigned update_mask = ~0u;  // bit j set: coefficient j receives increments
  double inv_beta = 0.0;
  double* coef = nullptr;
  double* comp = nullptr;
  std::int64_t* fail_m = nullptr;
  double* fail_c1 = nullptr;
};

// q[i] = 4 sin^2(pi_over * (m0 + i)) for i in [0, count): the dimensionless
// eps^2 * omega_m^2 for ascending mode indices starting at m0.
using FillOmegaFn = void (*)(std::int64_t m0, std::int64_t count, double pi_over, double* q);

// Advance every live lane through modes m = m0+count-1 down to m0.
// invs[i] = eps^2/(mass*q[i]) = 1/(omega_m^2 M) for m = m0 + i.
using FlowBlockFn = void (*)(FlowLanes& lanes, const double* invs, std::int64_t m0,
                             std::int64_t count);

// Compensated sum of log1p(num/q[i]); num/q[i] must stay > -1.
using Log1pRatioSumFn = double (*)(const double* q, std::int64_t count, double num);

// Compensated sum of log(q[i]); q[i] > 0.
using LogSumFn = double (*)(const double* q, std::int64_t count);

struct Kernels {
  const char* name;
  FillOmegaFn fill_eps2_omega_sq;
  FlowBlockFn flow_block;
  Log1pRatioSumFn log1p_ratio_sum;
  LogSumFn log_sum;
};

const Kernels& scalar_kernels();
bool avx2_supported();

#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
// Elementwise hooks for accuracy tests against libm.
void avx2_log1p(const double* in, double* out, std::int64_t count);
void avx2_four_sin2(const double* theta, double* out, std::int64_t count);
#endif

// Runtime selection, overridable with RGFLOW_SIMD = auto | scalar | avx2.
const Kernels& active_kernels();
std::vector<std::string> available_kernel_names();

}  // namespace rgflow::kernels
