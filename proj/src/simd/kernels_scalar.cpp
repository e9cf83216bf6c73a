#include <cmath>

#include "perikit/simd/kernels.hpp"

// Reference kernels. Plain loops, one bond at a time, accumulating in source
// order. These define the semantics the SIMD variants are tested against.

namespace perikit::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void spmv_rows_scalar(const offset_t* rowptr, const index_t* col,
                      const double* val, const double* x, double* y,
                      std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double s = 0.0;
    for (offset_t e = rowptr[r]; e < rowptr[r + 1]; ++e) {
      s += val[e] * x[col[e]];
    }
    y[r] = s;
  }
}

template <int Dim>
void bond_lp_scalar(const BondRows& a, double fpref, double epref, double psi0,
                    double* f, double* U, std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double fi[Dim] = {};
    double ui = 0.0;
    const double* xi_i = a.pos + i * Dim;
    const double* u_i = a.u + i * Dim;
    for (offset_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const index_t j = a.nbr[e];
      const double r = a.bond_len[e];
      const double w = a.weight[e];
      const double* xi_j = a.pos + static_cast<std::size_t>(j) * Dim;
      const double* u_j = a.u + static_cast<std::size_t>(j) * Dim;
      double num = 0.0;
      double xi[Dim];
      for (int d = 0; d < Dim; ++d) {
        xi[d] = xi_j[d] - xi_i[d];
        num += (u_j[d] - u_i[d]) * xi[d];
      }
      const double S = num / (r * r);
      const double coef = w * psi0 * S / r;
      for (int d = 0; d < Dim; ++d) fi[d] += coef * xi[d];
      if (U) ui += w * psi0 * r * S * S;
    }
    for (int d = 0; d < Dim; ++d) f[i * Dim + d] = fpref * fi[d];
    if (U) U[i] = epref * ui;
  }
}

template <int Dim>
void bond_np_scalar(const BondRows& a, double fpref, double epref, double C,
                    double beta, double* f, double* U, std::size_t r0,
                    std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double fi[Dim] = {};
    double ui = 0.0;
    const double* xi_i = a.pos + i * Dim;
    const double* u_i = a.u + i * Dim;
    for (offset_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const index_t j = a.nbr[e];
      const double r = a.bond_len[e];
      const double w = a.weight[e];
      const double* xi_j = a.pos + static_cast<std::size_t>(j) * Dim;
      const double* u_j = a.u + static_cast<std::size_t>(j) * Dim;
      double num = 0.0;
      double xi[Dim];
      for (int d = 0; d < Dim; ++d) {
        xi[d] = xi_j[d] - xi_i[d];
        num += (u_j[d] - u_i[d]) * xi[d];
      }
      const double S = num / (r * r);
      const double ex = std::exp(-beta * r * S * S);
      const double coef = w * C * beta * ex * S / r;
      for (int d = 0; d < Dim; ++d) fi[d] += coef * xi[d];
      if (U) ui += w * C * (1.0 - ex);
    }
    for (int d = 0; d < Dim; ++d) f[i * Dim + d] = fpref * fi[d];
    if (U) U[i] = epref * ui;
  }
}

// Extension e = |xi+eta| - |xi| evaluated as (2 xi.eta + |eta|^2)/(|xi+eta| + |xi|):
// the direct difference cancels catastrophically for |eta| << |xi| and would
// put a noise floor ~sqrt(eps)*|xi| under every quasi-static residual.
template <int Dim>
void state_theta_scalar(const BondRows& a, const double* m, double* theta,
                        std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double s = 0.0;
    const double* xi_i = a.pos + i * Dim;
    const double* u_i = a.u + i * Dim;
    for (offset_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const index_t j = a.nbr[e];
      const double r = a.bond_len[e];
      const double* xi_j = a.pos + static_cast<std::size_t>(j) * Dim;
      const double* u_j = a.u + static_cast<std::size_t>(j) * Dim;
      double q2 = 0.0;
      double cross = 0.0;  // 2 xi.eta + |eta|^2
      for (int d = 0; d < Dim; ++d) {
        const double xi = xi_j[d] - xi_i[d];
        const double eta = u_j[d] - u_i[d];
        const double q = xi + eta;
        q2 += q * q;
        cross += (2.0 * xi + eta) * eta;
      }
      const double ext = cross / (std::sqrt(q2) + r);
      s += r * ext * a.weight[e];
    }
    theta[i] = 3.0 / m[i] * s;
  }
}

template <int Dim>
void state_force_scalar(const BondRows& a, const double* m, const double* theta,
                        double K, double mu, double* f, std::size_t r0,
                        std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double fi[Dim] = {};
    const double* xi_i = a.pos + i * Dim;
    const double* u_i = a.u + i * Dim;
    const double mi_inv = 1.0 / m[i];
    const double th_i = theta[i];
    for (offset_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const index_t j = a.nbr[e];
      const double r = a.bond_len[e];
      const double w = a.weight[e];
      const double* xi_j = a.pos + static_cast<std::size_t>(j) * Dim;
      const double* u_j = a.u + static_cast<std::size_t>(j) * Dim;
      double q[Dim];
      double q2 = 0.0;
      double cross = 0.0;
      for (int d = 0; d < Dim; ++d) {
        const double xi = xi_j[d] - xi_i[d];
        const double eta = u_j[d] - u_i[d];
        q[d] = xi + eta;
        q2 += q[d] * q[d];
        cross += (2.0 * xi + eta) * eta;
      }
      const double len = std::sqrt(q2);  // |xi+eta|; 0 only on node collision
      const double ext = cross / (len + r);
      const double mj_inv = 1.0 / m[j];
      const double th_j = theta[j];
      // t_i<xi> and t_j<-xi>; same bond length and extension on both sides.
      const double t_i = 3.0 * K * mi_inv * th_i * r +
                         15.0 * mu * mi_inv * (ext - th_i * r / 3.0);
      const double t_j = 3.0 * K * mj_inv * th_j * r +
                         15.0 * mu * mj_inv * (ext - th_j * r / 3.0);
      const double coef = (t_i + t_j) * w / len;
      for (int d = 0; d < Dim; ++d) fi[d] += coef * q[d];
    }
    for (int d = 0; d < Dim; ++d) f[i * Dim + d] = fi[d];
  }
}

constexpr Kernels make_scalar_table() {
  Kernels k{};
  k.name = "scalar";
  k.dot = dot_scalar;
  k.axpy = axpy_scalar;
  k.spmv_rows = spmv_rows_scalar;
  k.bond_lp[1] = bond_lp_scalar<1>;
  k.bond_lp[2] = bond_lp_scalar<2>;
  k.bond_lp[3] = bond_lp_scalar<3>;
  k.bond_np[1] = bond_np_scalar<1>;
  k.bond_np[2] = bond_np_scalar<2>;
  k.bond_np[3] = bond_np_scalar<3>;
  k.state_theta[1] = state_theta_scalar<1>;
  k.state_theta[2] = state_theta_scalar<2>;
  k.state_theta[3] = state_theta_scalar<3>;
  k.state_force[1] = state_force_scalar<1>;
  k.state_force[2] = state_force_scalar<2>;
  k.state_force[3] = state_force_scalar<3>;
  return k;
}

const Kernels scalar_table = make_scalar_table();

}  // namespace

const Kernels& scalar() { return scalar_table; }

}  // namespace perikit::kernels
