#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "rgflow/kernels.hpp"

namespace rgflow::kernels {

namespace {

using vd = __m256d;

inline vd vset1(double x) { return _mm256_set1_pd(x); }

// log(y) for normal positive y: split y = 2^e * f with f in (1/sqrt2, sqrt2],
// then log f = 2 atanh(s), s = (f-1)/(f+1), atanh summed through s^21
// (|s| <= 0.1716, so the truncated tail is < 1e-17 relative).
inline vd vec_log(vd y) {
  const vd one = vset1(1.0);
  const __m256i bits = _mm256_castpd_si256(y);
  const __m256i expi = _mm256_srli_epi64(bits, 52);
  const __m256i mant =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL));
  vd f = _mm256_castsi256_pd(mant);
  const vd gt = _mm256_cmp_pd(f, vset1(M_SQRT2), _CMP_GT_OQ);
  f = _mm256_blendv_pd(f, _mm256_mul_pd(f, vset1(0.5)), gt);
  vd e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(expi, _mm256_set1_epi64x(0x4330000000000000LL))),
      vset1(4503599627370496.0));  // 2^52
  e = _mm256_sub_pd(e, vset1(1023.0));
  e = _mm256_add_pd(e, _mm256_and_pd(gt, one));
  const vd s = _mm256_div_pd(_mm256_sub_pd(f, one), _mm256_add_pd(f, one));
  const vd s2 = _mm256_mul_pd(s, s);
  vd p = vset1(1.0 / 21.0);
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s2, vset1(1.0 / 3.0));
  p = _mm256_fmadd_pd(p, s2, one);
  const vd logf = _mm256_mul_pd(_mm256_add_pd(s, s), p);
  const vd ln2_hi = vset1(6.93147180369123816490e-01);
  const vd ln2_lo = vset1(1.90821492927058770002e-10);
  return _mm256_fmadd_pd(e, ln2_hi, _mm256_fmadd_pd(e, ln2_lo, logf));
}

// log1p(u) for u > -1. |u| <= 0.25 goes through 2 atanh(u/(2+u)) (t^17
// series); elsewhere 1+u keeps enough bits for vec_log (Sterbenz exact on
// [-1, -0.5], relative rounding harmless beyond).
inline vd vec_log1p(vd u) {
  const vd one = vset1(1.0);
  const vd t = _mm256_div_pd(u, _mm256_add_pd(vset1(2.0), u));
  const vd t2 = _mm256_mul_pd(t, t);
  vd p = vset1(1.0 / 17.0);
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, t2, vset1(1.0 / 3.0));
  p = _mm256_fmadd_pd(p, t2, one);
  const vd small = _mm256_mul_pd(_mm256_add_pd(t, t), p);
  const vd general = vec_log(_mm256_add_pd(one, u));
  const vd absu = _mm256_andnot_pd(vset1(-0.0), u);
  const vd pick_small = _mm256_cmp_pd(absu, vset1(0.25), _CMP_LE_OQ);
  return _mm256_blendv_pd(general, small, pick_small);
}

// 4 sin^2(theta), theta in (0, pi/2]. theta <= pi/4 uses the sine kernel
// directly; above, sin(theta) = cos(pio2 - theta) with the two-word pi/2
// keeping the reduced argument exact (Sterbenz on the hi word).
inline vd vec_four_sin2(vd theta) {
  const vd one = vset1(1.0);
  const vd z = _mm256_mul_pd(theta, theta);
  vd r = _mm256_fmadd_pd(vset1(1.58969099521155010221e-10), z,
                         vset1(-2.50507602534068634195e-08));
  r = _mm256_fmadd_pd(r, z, vset1(2.75573137070700676789e-06));
  r = _mm256_fmadd_pd(r, z, vset1(-1.98412698298579493134e-04));
  r = _mm256_fmadd_pd(r, z, vset1(8.33333333332248946124e-03));
  r = _mm256_fmadd_pd(r, z, vset1(-1.66666666666666324348e-01));
  const vd sinv = _mm256_fmadd_pd(_mm256_mul_pd(z, theta), r, theta);

  const vd pio2_hi = vset1(1.57079632679489655800e+00);
  const vd pio2_lo = vset1(6.12323399573676603587e-17);
  const vd rc = _mm256_add_pd(_mm256_sub_pd(pio2_hi, theta), pio2_lo);
  const vd zc = _mm256_mul_pd(rc, rc);
  vd cr = _mm256_fmadd_pd(vset1(-1.13596475577881948265e-11), zc,
                          vset1(2.08757232129817482790e-09));
  cr = _mm256_fmadd_pd(cr, zc, vset1(-2.75573143513906633035e-07));
  cr = _mm256_fmadd_pd(cr, zc, vset1(2.48015872894767294178e-05));
  cr = _mm256_fmadd_pd(cr, zc, vset1(-1.38888888888741095749e-03));
  cr = _mm256_fmadd_pd(cr, zc, vset1(4.16666666666666019037e-02));
  cr = _mm256_mul_pd(cr, zc);
  const vd cosv = _mm256_fmadd_pd(zc, cr, _mm256_fnmadd_pd(vset1(0.5), zc, one));

  const vd use_cos = _mm256_cmp_pd(theta, vset1(7.85398163397448278999e-01), _CMP_GT_OQ);
  const vd s = _mm256_blendv_pd(sinv, cosv, use_cos);
  return _mm256_mul_pd(vset1(4.0), _mm256_mul_pd(s, s));
}

void fill_eps2_omega_sq_avx2(std::int64_t m0, std::int64_t count, double pi_over, double* q) {
  const vd pio = vset1(pi_over);
  const vd mbase = vset1(static_cast<double>(m0));
  const vd idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  std::int64_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const vd mi = _mm256_add_pd(_mm256_add_pd(mbase, vset1(static_cast<double>(i))), idx);
    _mm256_storeu_pd(q + i, vec_four_sin2(_mm256_mul_pd(pio, mi)));
  }
  for (; i < count; ++i) {
    alignas(32) double buf[4] = {pi_over * static_cast<double>(m0 + i), 0.5, 0.5, 0.5};
    alignas(32) double out[4];
    _mm256_store_pd(out, vec_four_sin2(_mm256_load_pd(buf)));
    q[i] = out[0];
  }
}

// Four lane-wise Kahan accumulators folded in fixed lane order at the end.
struct VecKahan {
  vd sum = _mm256_setzero_pd();
  vd comp = _mm256_setzero_pd();

  void add(vd v) {
    const vd y = _mm256_sub_pd(v, comp);
    const vd t = _mm256_add_pd(sum, y);
    comp = _mm256_sub_pd(_mm256_sub_pd(t, sum), y);
    sum = t;
  }

  void reduce(double& s, double& c) const {
    alignas(32) double sl[4];
    alignas(32) double cl[4];
    _mm256_store_pd(sl, sum);
    _mm256_store_pd(cl, comp);
    for (int l = 0; l < 4; ++l) {
      const double y = sl[l] - cl[l] - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
  }
};

double log_sum_avx2(const double* q, std::int64_t count) {
  VecKahan acc;
  std::int64_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc.add(vec_log(_mm256_loadu_pd(q + i)));
  }
  double s = 0.0;
  double c = 0.0;
  acc.reduce(s, c);
  for (; i < count; ++i) {
    const double y = std::log(q[i]) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double log1p_ratio_sum_avx2(const double* q, std::int64_t count, double num) {
  const vd numv = vset1(num);
  VecKahan acc;
  std::int64_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc.add(vec_log1p(_mm256_div_pd(numv, _mm256_loadu_pd(q + i))));
  }
  double s = 0.0;
  double c = 0.0;
  acc.reduce(s, c);
  for (; i < count; ++i) {
    const double y = std::log1p(num / q[i]) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

template <int NC>
void flow_group(FlowLanes& st, int group, const double* invs, std::int64_t m0,
                std::int64_t count) {
  const std::int64_t stride = st.stride;
  double* cbase = st.coef + group * lane_group;
  double* pbase = st.comp + group * lane_group;
  std::int64_t* fm = st.fail_m + group * lane_group;
  double* fc1 = st.fail_c1 + group * lane_group;

  vd c[NC];
  vd cp[NC];
  for (int j = 0; j < NC; ++j) {
    c[j] = _mm256_loadu_pd(cbase + j * stride);
    cp[j] = _mm256_loadu_pd(pbase + j * stride);
  }
  const __m256i fmv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(fm));
  vd dead = _mm256_castsi256_pd(_mm256_cmpgt_epi64(fmv, _mm256_setzero_si256()));

  const vd one = vset1(1.0);
  const vd zero = _mm256_setzero_pd();
  const vd invb = vset1(st.inv_beta);
  vd ks[NC];
  for (int j = 0; j + 1 < NC; ++j) {
    ks[j] = vset1((2.0 * j + 2.0) * (2.0 * j + 1.0));
  }

  for (std::int64_t i = count; i-- > 0;) {
    const vd s = _mm256_broadcast_sd(invs + i);
    vd u[NC];
    vd w[NC];
    u[NC - 1] = zero;
    for (int j = 0; j + 1 < NC; ++j) {
      u[j] = _mm256_mul_pd(_mm256_mul_pd(c[j + 1], ks[j]), s);
    }
    const vd one_u0 = _mm256_add_pd(one, u[0]);
    const vd bad = _mm256_andnot_pd(dead, _mm256_cmp_pd(one_u0, zero, _CMP_LE_OQ));
    if (_mm256_movemask_pd(bad) != 0) {
      alignas(32) double c1buf[4];
      if constexpr (NC > 1) {
        _mm256_store_pd(c1buf, c[1]);
      } else {
        _mm256_store_pd(c1buf, zero);
      }
      const int mask = _mm256_movemask_pd(bad);
      for (int l = 0; l < lane_group; ++l) {
        if ((mask >> l) & 1) {
          fm[l] = m0 + i;
          fc1[l] = c1buf[l];
        }
      }
      dead = _mm256_or_pd(dead, bad);
      if (_mm256_movemask_pd(dead) == 0xF) {
        break;
      }
    }
    w[0] = vec_log1p(_mm256_andnot_pd(dead, u[0]));
    const vd r = _mm256_div_pd(one, _mm256_blendv_pd(one_u0, one, dead));
    for (int n = 1; n < NC; ++n) {
      vd acc = u[n];
      for (int j = 1; j < n; ++j) {
        const vd kk = vset1(static_cast<double>(n - j) / static_cast<double>(n));
        acc = _mm256_fnmadd_pd(_mm256_mul_pd(kk, u[j]), w[n - j], acc);
      }
      w[n] = _mm256_mul_pd(acc, r);
    }
    for (int j = 0; j < NC; ++j) {
      if (((st.update_mask >> j) & 1u) == 0) {
        continue;
      }
      const vd inc = _mm256_andnot_pd(dead, _mm256_mul_pd(invb, w[j]));
      const vd y = _mm256_sub_pd(inc, cp[j]);
      const vd t = _mm256_add_pd(c[j], y);
      cp[j] = _mm256_sub_pd(_mm256_sub_pd(t, c[j]), y);
      c[j] = t;
    }
  }

  for (int j = 0; j < NC; ++j) {
    _mm256_storeu_pd(cbase + j * stride, c[j]);
    _mm256_storeu_pd(pbase + j * stride, cp[j]);
  }
}

void flow_block_avx2(FlowLanes& st, const double* invs, std::int64_t m0, std::int64_t count) {
  if (st.ncoef < 1 || st.ncoef > max_coeffs) {
    throw std::logic_error("flow_block: ncoef out of range");
  }
  const int ngroups = (st.nlanes + lane_group - 1) / lane_group;
  for (int g = 0; g < ngroups; ++g) {
    switch (st.ncoef) {
      case 1: flow_group<1>(st, g, invs, m0, count); break;
      case 2: flow_group<2>(st, g, invs, m0, count); break;
      case 3: flow_group<3>(st, g, invs, m0, count); break;
      case 4: flow_group<4>(st, g, invs, m0, count); break;
      case 5: flow_group<5>(st, g, invs, m0, count); break;
      case 6: flow_group<6>(st, g, invs, m0, count); break;
      default: break;
    }
  }
}

template <vd (*F)(vd)>
void map_array(const double* in, double* out, std::int64_t count, double pad) {
  std::int64_t i = 0;
  for (; i + 4 <= count; i += 4) {
    _mm256_storeu_pd(out + i, F(_mm256_loadu_pd(in + i)));
  }
  if (i < count) {
    alignas(32) double buf[4] = {pad, pad, pad, pad};
    alignas(32) double res[4];
    for (std::int64_t l = 0; i + l < count; ++l) {
      buf[l] = in[i + l];
    }
    _mm256_store_pd(res, F(_mm256_load_pd(buf)));
    for (std::int64_t l = 0; i + l < count; ++l) {
      out[i + l] = res[l];
    }
  }
}

}  // namespace

void avx2_log1p(const double* in, double* out, std::int64_t count) {
  map_array<vec_log1p>(in, out, count, 0.0);
}

void avx2_four_sin2(const double* theta, double* out, std::int64_t count) {
  map_array<vec_four_sin2>(theta, out, count, 0.5);
}

const Kernels& avx2_kernels() {
  static const Kernels k{"avx2", &fill_eps2_omega_sq_avx2, &flow_block_avx2, &log1p_ratio_sum_avx2,
                         &log_sum_avx2};
  return k;
}

}  // namespace rgflow::kernels

#endif  // x86-64
