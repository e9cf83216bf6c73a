#pragma once

// Arithmetic inner loops behind the force, solver, and norm paths.
//
// Every kernel exists as a scalar reference implementation; on x86-64 an AVX2
// variant of the hot ones is compiled into a second table and selected at run
// time (override with PERIKIT_SIMD=scalar|avx2). All kernels are serial over
// the row range they are given; callers parallelize over disjoint row ranges.

#include <cstddef>

#include "perikit/core/common.hpp"

namespace perikit::kernels {

// Shared view of one mesh + displacement field for the bond loops.
// weight[e] holds the per-bond constant J(|xi|) * V_j * V_ij (bond-based) or
// V_j * V_ij (state-based); bond_len[e] holds |xi|.
struct BondRows {
  const offset_t* offsets = nullptr;
  const index_t* nbr = nullptr;
  const double* bond_len = nullptr;
  const double* weight = nullptr;
  const double* pos = nullptr;  // n*dim
  const double* u = nullptr;    // n*dim
};

// Linearized bond force and energy, rows [r0, r1):
//   f_i   = fpref * sum_e w_e * psi0 * S * xi/|xi|
//   U_i   = epref * sum_e w_e * psi0 * |xi| * S^2
// with S = ((u_j - u_i) . xi) / |xi|^2. U output may be null.
using BondLpFn = void (*)(const BondRows&, double fpref, double epref,
                          double psi0, double* f, double* U,
                          std::size_t r0, std::size_t r1);

// Nonlinear (softening) bond force and energy:
//   f_i = fpref * sum_e w_e * C*beta*exp(-beta*|xi|*S^2) * S * xi/|xi|
//   U_i = epref * sum_e w_e * C*(1 - exp(-beta*|xi|*S^2))
using BondNpFn = void (*)(const BondRows&, double fpref, double epref,
                          double C, double beta, double* f, double* U,
                          std::size_t r0, std::size_t r1);

// Dilatation rows: theta_i = (3/m_i) * sum_e |xi| * e * w_e,
// e = |xi + eta| - |xi|.
using StateThetaFn = void (*)(const BondRows&, const double* m, double* theta,
                              std::size_t r0, std::size_t r1);

// Gather-form state force rows:
//   f_i = sum_e (t_i<xi> + t_j<-xi>) * M * w_e
//   t_k<xi> = (3K/m_k) theta_k |xi| + (15mu/m_k) (e - theta_k |xi| / 3)
//   M = (xi + eta)/|xi + eta|
using StateForceFn = void (*)(const BondRows&, const double* m,
                              const double* theta, double K, double mu,
                              double* f, std::size_t r0, std::size_t r1);

// CSR mat-vec over rows [r0, r1): y_r = sum K_re x_col(e).
using SpmvFn = void (*)(const offset_t* rowptr, const index_t* col,
                        const double* val, const double* x, double* y,
                        std::size_t r0, std::size_t r1);

using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);

struct Kernels {
  const char* name;
  DotFn dot;
  AxpyFn axpy;
  SpmvFn spmv_rows;
  BondLpFn bond_lp[kMaxDim + 1];        // index by dim (1..3)
  BondNpFn bond_np[kMaxDim + 1];
  StateThetaFn state_theta[kMaxDim + 1];
  StateForceFn state_force[kMaxDim + 1];
};

// Reference table (always available, used as the equivalence oracle).
const Kernels& scalar();

// AVX2 table, or nullptr when unsupported by the build or the CPU.
const Kernels* avx2();

// Table picked at first use: PERIKIT_SIMD env override, else best supported.
const Kernels& active();

}  // namespace perikit::kernels
