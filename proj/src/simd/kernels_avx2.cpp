// AVX2 variants of the hot kernels. Compiled with -mavx2 (no FMA: rounding
// must match the scalar reference op-for-op so the two variants differ only
// in accumulation order). d=3 rows and the exp-bound nonlinear bond kernel
// stay on the scalar path.

#include <immintrin.h>

#include <cmath>

#include "perikit/simd/kernels.hpp"

namespace perikit::kernels {
namespace detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);  // (l0+l2, l1+l3)
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                           _mm256_loadu_pd(b + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yi, _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void spmv_rows_avx2(const offset_t* rowptr, const index_t* col,
                    const double* val, const double* x, double* y,
                    std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const offset_t b = rowptr[r];
    const offset_t e = rowptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(val + k), xv));
    }
    double s = hsum(acc);
    for (; k < e; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

// ---- bond kernels ----------------------------------------------------------

void bond_lp_d1(const BondRows& a, double fpref, double epref, double psi0,
                double* f, double* U, std::size_t r0, std::size_t r1) {
  const __m256d psi0v = _mm256_set1_pd(psi0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[i]);
    const __m256d uix = _mm256_set1_pd(a.u[i]);
    __m256d facc = _mm256_setzero_pd();
    __m256d uacc = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m256d xj = _mm256_i32gather_pd(a.pos, idx, 8);
      const __m256d uj = _mm256_i32gather_pd(a.u, idx, 8);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d xi = _mm256_sub_pd(xj, pix);
      const __m256d du = _mm256_sub_pd(uj, uix);
      const __m256d S = _mm256_div_pd(_mm256_mul_pd(du, xi), _mm256_mul_pd(r, r));
      const __m256d wp = _mm256_mul_pd(w, psi0v);
      const __m256d coef = _mm256_div_pd(_mm256_mul_pd(wp, S), r);
      facc = _mm256_add_pd(facc, _mm256_mul_pd(coef, xi));
      uacc = _mm256_add_pd(uacc, _mm256_mul_pd(wp, _mm256_mul_pd(r, _mm256_mul_pd(S, S))));
    }
    double fi = hsum(facc);
    double ui = hsum(uacc);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double w = a.weight[k];
      const double xi = a.pos[j] - a.pos[i];
      const double S = (a.u[j] - a.u[i]) * xi / (r * r);
      fi += w * psi0 * S / r * xi;
      ui += w * psi0 * r * S * S;
    }
    f[i] = fpref * fi;
    if (U) U[i] = epref * ui;
  }
}

void bond_lp_d2(const BondRows& a, double fpref, double epref, double psi0,
                double* f, double* U, std::size_t r0, std::size_t r1) {
  const __m256d psi0v = _mm256_set1_pd(psi0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[2 * i]);
    const __m256d piy = _mm256_set1_pd(a.pos[2 * i + 1]);
    const __m256d uix = _mm256_set1_pd(a.u[2 * i]);
    const __m256d uiy = _mm256_set1_pd(a.u[2 * i + 1]);
    __m256d fx = _mm256_setzero_pd();
    __m256d fy = _mm256_setzero_pd();
    __m256d uacc = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m128i idx2 = _mm_slli_epi32(idx, 1);
      const __m256d xjx = _mm256_i32gather_pd(a.pos, idx2, 8);
      const __m256d xjy = _mm256_i32gather_pd(a.pos + 1, idx2, 8);
      const __m256d ujx = _mm256_i32gather_pd(a.u, idx2, 8);
      const __m256d ujy = _mm256_i32gather_pd(a.u + 1, idx2, 8);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d xix = _mm256_sub_pd(xjx, pix);
      const __m256d xiy = _mm256_sub_pd(xjy, piy);
      const __m256d num = _mm256_add_pd(
          _mm256_mul_pd(_mm256_sub_pd(ujx, uix), xix),
          _mm256_mul_pd(_mm256_sub_pd(ujy, uiy), xiy));
      const __m256d S = _mm256_div_pd(num, _mm256_mul_pd(r, r));
      const __m256d wp = _mm256_mul_pd(w, psi0v);
      const __m256d coef = _mm256_div_pd(_mm256_mul_pd(wp, S), r);
      fx = _mm256_add_pd(fx, _mm256_mul_pd(coef, xix));
      fy = _mm256_add_pd(fy, _mm256_mul_pd(coef, xiy));
      uacc = _mm256_add_pd(uacc, _mm256_mul_pd(wp, _mm256_mul_pd(r, _mm256_mul_pd(S, S))));
    }
    double fxs = hsum(fx);
    double fys = hsum(fy);
    double ui = hsum(uacc);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double w = a.weight[k];
      const double xix = a.pos[2 * j] - a.pos[2 * i];
      const double xiy = a.pos[2 * j + 1] - a.pos[2 * i + 1];
      const double num = (a.u[2 * j] - a.u[2 * i]) * xix +
                         (a.u[2 * j + 1] - a.u[2 * i + 1]) * xiy;
      const double S = num / (r * r);
      const double coef = w * psi0 * S / r;
      fxs += coef * xix;
      fys += coef * xiy;
      ui += w * psi0 * r * S * S;
    }
    f[2 * i] = fpref * fxs;
    f[2 * i + 1] = fpref * fys;
    if (U) U[i] = epref * ui;
  }
}

// ---- state kernels ---------------------------------------------------------

// Extensions use (2 xi.eta + |eta|^2)/(|xi+eta| + |xi|); see the scalar
// reference for why the plain difference is unusable.
void state_theta_d1(const BondRows& a, const double* m, double* theta,
                    std::size_t r0, std::size_t r1) {
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[i]);
    const __m256d uix = _mm256_set1_pd(a.u[i]);
    __m256d acc = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m256d xj = _mm256_i32gather_pd(a.pos, idx, 8);
      const __m256d uj = _mm256_i32gather_pd(a.u, idx, 8);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d xi = _mm256_sub_pd(xj, pix);
      const __m256d eta = _mm256_sub_pd(uj, uix);
      const __m256d q = _mm256_add_pd(xi, eta);
      const __m256d cross =
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xi), eta), eta);
      const __m256d len = _mm256_sqrt_pd(_mm256_mul_pd(q, q));
      const __m256d ext = _mm256_div_pd(cross, _mm256_add_pd(len, r));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(r, ext), w));
    }
    double s = hsum(acc);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double xi = a.pos[j] - a.pos[i];
      const double eta = a.u[j] - a.u[i];
      const double q = xi + eta;
      const double ext = (2.0 * xi + eta) * eta / (std::sqrt(q * q) + r);
      s += r * ext * a.weight[k];
    }
    theta[i] = 3.0 / m[i] * s;
  }
}

void state_theta_d2(const BondRows& a, const double* m, double* theta,
                    std::size_t r0, std::size_t r1) {
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[2 * i]);
    const __m256d piy = _mm256_set1_pd(a.pos[2 * i + 1]);
    const __m256d uix = _mm256_set1_pd(a.u[2 * i]);
    const __m256d uiy = _mm256_set1_pd(a.u[2 * i + 1]);
    __m256d acc = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m128i idx2 = _mm_slli_epi32(idx, 1);
      const __m256d xix = _mm256_sub_pd(_mm256_i32gather_pd(a.pos, idx2, 8), pix);
      const __m256d xiy = _mm256_sub_pd(_mm256_i32gather_pd(a.pos + 1, idx2, 8), piy);
      const __m256d etx = _mm256_sub_pd(_mm256_i32gather_pd(a.u, idx2, 8), uix);
      const __m256d ety = _mm256_sub_pd(_mm256_i32gather_pd(a.u + 1, idx2, 8), uiy);
      const __m256d qx = _mm256_add_pd(xix, etx);
      const __m256d qy = _mm256_add_pd(xiy, ety);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d cross = _mm256_add_pd(
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xix), etx), etx),
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xiy), ety), ety));
      const __m256d len = _mm256_sqrt_pd(
          _mm256_add_pd(_mm256_mul_pd(qx, qx), _mm256_mul_pd(qy, qy)));
      const __m256d ext = _mm256_div_pd(cross, _mm256_add_pd(len, r));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(r, ext), w));
    }
    double s = hsum(acc);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double xix = a.pos[2 * j] - a.pos[2 * i];
      const double xiy = a.pos[2 * j + 1] - a.pos[2 * i + 1];
      const double etx = a.u[2 * j] - a.u[2 * i];
      const double ety = a.u[2 * j + 1] - a.u[2 * i + 1];
      const double qx = xix + etx;
      const double qy = xiy + ety;
      const double cross = (2.0 * xix + etx) * etx + (2.0 * xiy + ety) * ety;
      const double ext = cross / (std::sqrt(qx * qx + qy * qy) + r);
      s += r * ext * a.weight[k];
    }
    theta[i] = 3.0 / m[i] * s;
  }
}

void state_force_d1(const BondRows& a, const double* m, const double* theta,
                    double K, double mu, double* f, std::size_t r0,
                    std::size_t r1) {
  const __m256d threeK = _mm256_set1_pd(3.0 * K);
  const __m256d mu15 = _mm256_set1_pd(15.0 * mu);
  const __m256d third = _mm256_set1_pd(1.0 / 3.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[i]);
    const __m256d uix = _mm256_set1_pd(a.u[i]);
    const __m256d mi_inv = _mm256_set1_pd(1.0 / m[i]);
    const __m256d th_i = _mm256_set1_pd(theta[i]);
    __m256d acc = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m256d xj = _mm256_i32gather_pd(a.pos, idx, 8);
      const __m256d uj = _mm256_i32gather_pd(a.u, idx, 8);
      const __m256d mj = _mm256_i32gather_pd(m, idx, 8);
      const __m256d th_j = _mm256_i32gather_pd(theta, idx, 8);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d xi = _mm256_sub_pd(xj, pix);
      const __m256d eta = _mm256_sub_pd(uj, uix);
      const __m256d q = _mm256_add_pd(xi, eta);
      const __m256d cross =
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xi), eta), eta);
      const __m256d len = _mm256_sqrt_pd(_mm256_mul_pd(q, q));
      const __m256d ext = _mm256_div_pd(cross, _mm256_add_pd(len, r));
      const __m256d mj_inv = _mm256_div_pd(one, mj);
      const __m256d ed_i = _mm256_sub_pd(ext, _mm256_mul_pd(_mm256_mul_pd(th_i, r), third));
      const __m256d ed_j = _mm256_sub_pd(ext, _mm256_mul_pd(_mm256_mul_pd(th_j, r), third));
      const __m256d t_i = _mm256_add_pd(
          _mm256_mul_pd(_mm256_mul_pd(threeK, mi_inv), _mm256_mul_pd(th_i, r)),
          _mm256_mul_pd(_mm256_mul_pd(mu15, mi_inv), ed_i));
      const __m256d t_j = _mm256_add_pd(
          _mm256_mul_pd(_mm256_mul_pd(threeK, mj_inv), _mm256_mul_pd(th_j, r)),
          _mm256_mul_pd(_mm256_mul_pd(mu15, mj_inv), ed_j));
      const __m256d coef = _mm256_div_pd(_mm256_mul_pd(_mm256_add_pd(t_i, t_j), w), len);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(coef, q));
    }
    double fi = hsum(acc);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double w = a.weight[k];
      const double xi = a.pos[j] - a.pos[i];
      const double eta = a.u[j] - a.u[i];
      const double q = xi + eta;
      const double len = std::sqrt(q * q);
      const double ext = (2.0 * xi + eta) * eta / (len + r);
      const double t_i = 3.0 * K / m[i] * theta[i] * r +
                         15.0 * mu / m[i] * (ext - theta[i] * r / 3.0);
      const double t_j = 3.0 * K / m[j] * theta[j] * r +
                         15.0 * mu / m[j] * (ext - theta[j] * r / 3.0);
      fi += (t_i + t_j) * w / len * q;
    }
    f[i] = fi;
  }
}

void state_force_d2(const BondRows& a, const double* m, const double* theta,
                    double K, double mu, double* f, std::size_t r0,
                    std::size_t r1) {
  const __m256d threeK = _mm256_set1_pd(3.0 * K);
  const __m256d mu15 = _mm256_set1_pd(15.0 * mu);
  const __m256d third = _mm256_set1_pd(1.0 / 3.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = r0; i < r1; ++i) {
    const __m256d pix = _mm256_set1_pd(a.pos[2 * i]);
    const __m256d piy = _mm256_set1_pd(a.pos[2 * i + 1]);
    const __m256d uix = _mm256_set1_pd(a.u[2 * i]);
    const __m256d uiy = _mm256_set1_pd(a.u[2 * i + 1]);
    const __m256d mi_inv = _mm256_set1_pd(1.0 / m[i]);
    const __m256d th_i = _mm256_set1_pd(theta[i]);
    __m256d fx = _mm256_setzero_pd();
    __m256d fy = _mm256_setzero_pd();
    const offset_t b = a.offsets[i];
    const offset_t e = a.offsets[i + 1];
    offset_t k = b;
    for (; k + 4 <= e; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.nbr + k));
      const __m128i idx2 = _mm_slli_epi32(idx, 1);
      const __m256d xix = _mm256_sub_pd(_mm256_i32gather_pd(a.pos, idx2, 8), pix);
      const __m256d xiy = _mm256_sub_pd(_mm256_i32gather_pd(a.pos + 1, idx2, 8), piy);
      const __m256d etx = _mm256_sub_pd(_mm256_i32gather_pd(a.u, idx2, 8), uix);
      const __m256d ety = _mm256_sub_pd(_mm256_i32gather_pd(a.u + 1, idx2, 8), uiy);
      const __m256d qx = _mm256_add_pd(xix, etx);
      const __m256d qy = _mm256_add_pd(xiy, ety);
      const __m256d mj = _mm256_i32gather_pd(m, idx, 8);
      const __m256d th_j = _mm256_i32gather_pd(theta, idx, 8);
      const __m256d r = _mm256_loadu_pd(a.bond_len + k);
      const __m256d w = _mm256_loadu_pd(a.weight + k);
      const __m256d cross = _mm256_add_pd(
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xix), etx), etx),
          _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, xiy), ety), ety));
      const __m256d len = _mm256_sqrt_pd(
          _mm256_add_pd(_mm256_mul_pd(qx, qx), _mm256_mul_pd(qy, qy)));
      const __m256d ext = _mm256_div_pd(cross, _mm256_add_pd(len, r));
      const __m256d mj_inv = _mm256_div_pd(one, mj);
      const __m256d ed_i = _mm256_sub_pd(ext, _mm256_mul_pd(_mm256_mul_pd(th_i, r), third));
      const __m256d ed_j = _mm256_sub_pd(ext, _mm256_mul_pd(_mm256_mul_pd(th_j, r), third));
      const __m256d t_i = _mm256_add_pd(
          _mm256_mul_pd(_mm256_mul_pd(threeK, mi_inv), _mm256_mul_pd(th_i, r)),
          _mm256_mul_pd(_mm256_mul_pd(mu15, mi_inv), ed_i));
      const __m256d t_j = _mm256_add_pd(
          _mm256_mul_pd(_mm256_mul_pd(threeK, mj_inv), _mm256_mul_pd(th_j, r)),
          _mm256_mul_pd(_mm256_mul_pd(mu15, mj_inv), ed_j));
      const __m256d coef = _mm256_div_pd(_mm256_mul_pd(_mm256_add_pd(t_i, t_j), w), len);
      fx = _mm256_add_pd(fx, _mm256_mul_pd(coef, qx));
      fy = _mm256_add_pd(fy, _mm256_mul_pd(coef, qy));
    }
    double fxs = hsum(fx);
    double fys = hsum(fy);
    for (; k < e; ++k) {
      const index_t j = a.nbr[k];
      const double r = a.bond_len[k];
      const double w = a.weight[k];
      const double xix = a.pos[2 * j] - a.pos[2 * i];
      const double xiy = a.pos[2 * j + 1] - a.pos[2 * i + 1];
      const double etx = a.u[2 * j] - a.u[2 * i];
      const double ety = a.u[2 * j + 1] - a.u[2 * i + 1];
      const double qx = xix + etx;
      const double qy = xiy + ety;
      const double len = std::sqrt(qx * qx + qy * qy);
      const double cross = (2.0 * xix + etx) * etx + (2.0 * xiy + ety) * ety;
      const double ext = cross / (len + r);
      const double t_i = 3.0 * K / m[i] * theta[i] * r +
                         15.0 * mu / m[i] * (ext - theta[i] * r / 3.0);
      const double t_j = 3.0 * K / m[j] * theta[j] * r +
                         15.0 * mu / m[j] * (ext - theta[j] * r / 3.0);
      const double coef = (t_i + t_j) * w / len;
      fxs += coef * qx;
      fys += coef * qy;
    }
    f[2 * i] = fxs;
    f[2 * i + 1] = fys;
  }
}

}  // namespace

const Kernels* avx2_impl() {
  static const Kernels table = [] {
    Kernels k = scalar();  // d=3 and nonlinear-bond slots stay scalar
    k.name = "avx2";
    k.dot = dot_avx2;
    k.axpy = axpy_avx2;
    k.spmv_rows = spmv_rows_avx2;
    k.bond_lp[1] = bond_lp_d1;
    k.bond_lp[2] = bond_lp_d2;
    k.state_theta[1] = state_theta_d1;
    k.state_theta[2] = state_theta_d2;
    k.state_force[1] = state_force_d1;
    k.state_force[2] = state_force_d2;
    return k;
  }();
  return &table;
}

}  // namespace detail
}  // namespace perikit::kernels
