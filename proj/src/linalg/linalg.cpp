#include "perikit/linalg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "perikit/runtime/runtime.hpp"
#include "perikit/simd/kernels.hpp"

namespace perikit::linalg {

namespace {

void check_dim(const SparseMatrix& K, std::size_t xsize, const char* who) {
  if (K.row_offsets.size() != static_cast<std::size_t>(K.dim) + 1 ||
      xsize != static_cast<std::size_t>(K.dim)) {
    std::ostringstream os;
    os << who << ": dimension mismatch (matrix " << K.dim << ", vector " << xsize << ")";
    throw Error(os.str());
  }
}

double norm2(const std::vector<double>& x) {
  return std::sqrt(kernels::active().dot(x.data(), x.data(), x.size()));
}

}  // namespace

SparseMatrix SparseMatrix::from_column_batches(
    offset_t dim, const std::vector<std::vector<std::pair<index_t, double>>>& columns,
    bool symmetric_hint) {
  if (columns.size() != static_cast<std::size_t>(dim)) {
    throw Error("from_column_batches: need one batch per column");
  }
  SparseMatrix K;
  K.dim = dim;
  K.symmetric_hint = symmetric_hint;
  K.row_offsets.assign(dim + 1, 0);
  for (const auto& col : columns) {
    for (const auto& [row, value] : col) {
      (void)value;
      if (row < 0 || row >= dim) throw Error("from_column_batches: row out of range");
      ++K.row_offsets[row + 1];
    }
  }
  for (offset_t r = 0; r < dim; ++r) K.row_offsets[r + 1] += K.row_offsets[r];
  K.col_indices.resize(static_cast<std::size_t>(K.row_offsets[dim]));
  K.values.resize(K.col_indices.size());
  std::vector<offset_t> cursor(K.row_offsets.begin(), K.row_offsets.end() - 1);
  // Columns visited in ascending order, so per-row column indices come out
  // sorted and duplicate-free by construction.
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (const auto& [row, value] : columns[c]) {
      const offset_t at = cursor[row]++;
      K.col_indices[at] = static_cast<index_t>(c);
      K.values[at] = value;
    }
  }
  return K;
}

void spmv(const SparseMatrix& K, const std::vector<double>& x, std::vector<double>& y) {
  check_dim(K, x.size(), "spmv");
  y.resize(x.size());
  const auto& k = kernels::active();
  const auto n = static_cast<std::size_t>(K.dim);
  rt::parallel_for(0, n, [&](std::size_t r) {
    k.spmv_rows(K.row_offsets.data(), K.col_indices.data(), K.values.data(), x.data(),
                y.data(), r, r + 1);
  });
}

std::vector<double> spmv(const SparseMatrix& K, const std::vector<double>& x) {
  std::vector<double> y;
  spmv(K, x, y);
  return y;
}

std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& K,
                                                     const std::vector<double>& rhs,
                                                     double tol, int max_iters) {
  check_dim(K, rhs.size(), "cg_solve");
  const auto& kr = kernels::active();
  const std::size_t n = rhs.size();
  std::vector<double> x(n, 0.0);
  std::vector<double> r = rhs;  // r = rhs - K*0
  std::vector<double> p = r;
  std::vector<double> q(n);
  SolveReport rep;

  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    rep.converged = true;
    return {x, rep};
  }
  double rr = kr.dot(r.data(), r.data(), n);
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= tol * rhs_norm) break;
    spmv(K, p, q);
    const double pq = kr.dot(p.data(), q.data(), n);
    if (pq == 0.0) break;
    const double alpha = rr / pq;
    kr.axpy(alpha, p.data(), x.data(), n);
    kr.axpy(-alpha, q.data(), r.data(), n);
    const double rr_new = kr.dot(r.data(), r.data(), n);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rep.iterations = it + 1;
  }
  // True residual decides convergence.
  std::vector<double> check = spmv(K, x);
  for (std::size_t i = 0; i < n; ++i) check[i] -= rhs[i];
  rep.final_residual = norm2(check);
  rep.converged = rep.final_residual <= tol * rhs_norm;
  return {x, rep};
}

std::pair<std::vector<double>, SolveReport> bicgstab_solve(const SparseMatrix& K,
                                                           const std::vector<double>& rhs,
                                                           double tol, int max_iters) {
  check_dim(K, rhs.size(), "bicgstab_solve");
  const auto& kr = kernels::active();
  const std::size_t n = rhs.size();
  std::vector<double> x(n, 0.0);
  std::vector<double> r = rhs;
  std::vector<double> r0 = rhs;
  std::vector<double> p(n, 0.0), v(n, 0.0), s(n), t(n);
  SolveReport rep;

  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    rep.converged = true;
    return {x, rep};
  }
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    if (norm2(r) <= tol * rhs_norm) break;
    const double rho_new = kr.dot(r0.data(), r.data(), n);
    if (std::abs(rho_new) < 1e-30) {
      rep.breakdown = true;
      break;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    spmv(K, p, v);
    const double r0v = kr.dot(r0.data(), v.data(), n);
    if (std::abs(r0v) < 1e-30) {
      rep.breakdown = true;
      break;
    }
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    spmv(K, s, t);
    const double tt = kr.dot(t.data(), t.data(), n);
    omega = tt > 0.0 ? kr.dot(t.data(), s.data(), n) / tt : 0.0;
    kr.axpy(alpha, p.data(), x.data(), n);
    kr.axpy(omega, s.data(), x.data(), n);
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rep.iterations = it + 1;
    if (omega == 0.0) break;
  }
  std::vector<double> check = spmv(K, x);
  for (std::size_t i = 0; i < n; ++i) check[i] -= rhs[i];
  rep.final_residual = norm2(check);
  rep.converged = rep.final_residual <= tol * rhs_norm;
  if (rep.breakdown && !rep.converged) {
    throw NumericalError("bicgstab: rho breakdown before convergence");
  }
  return {x, rep};
}

void write_matrix_market(const SparseMatrix& K, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_matrix_market: cannot open " + path);
  out.precision(17);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << K.dim << ' ' << K.dim << ' ' << K.nnz() << '\n';
  for (offset_t r = 0; r < K.dim; ++r) {
    for (offset_t e = K.row_offsets[r]; e < K.row_offsets[r + 1]; ++e) {
      out << (r + 1) << ' ' << (K.col_indices[e] + 1) << ' ' << K.values[e] << '\n';
    }
  }
  if (!out) throw Error("write_matrix_market: write failed for " + path);
}

}  // namespace perikit::linalg
