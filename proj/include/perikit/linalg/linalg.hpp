#pragma once

// Compressed-sparse-row storage and unpreconditioned iterative solvers for the
// tangent systems K u = r.

#include <string>
#include <vector>

#include "perikit/core/common.hpp"

namespace perikit::linalg {

struct SparseMatrix {
  offset_t dim = 0;  // N (square)
  std::vector<offset_t> row_offsets;  // N+1
  std::vector<index_t> col_indices;   // sorted, duplicate-free per row
  std::vector<double> values;
  bool symmetric_hint = false;

  std::size_t nnz() const { return values.size(); }

  // Builds CSR from per-column entry batches (col -> list of (row, value)),
  // merged in ascending DOF order. Batches may be produced in parallel.
  static SparseMatrix from_column_batches(
      offset_t dim, const std::vector<std::vector<std::pair<index_t, double>>>& columns,
      bool symmetric_hint);
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  // |K x - rhs|
  bool converged = false;
  bool breakdown = false;  // BiCGSTAB rho collapse
};

// y = K x. Parallel over rows.
void spmv(const SparseMatrix& K, const std::vector<double>& x, std::vector<double>& y);
std::vector<double> spmv(const SparseMatrix& K, const std::vector<double>& x);

// Conjugate gradients; K must be symmetric positive definite.
std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& K,
                                                     const std::vector<double>& rhs,
                                                     double tol, int max_iters);

// BiCGSTAB; K nonsingular. Breakdown (|rho| < 1e-30) is reported distinctly
// from running out of iterations.
std::pair<std::vector<double>, SolveReport> bicgstab_solve(const SparseMatrix& K,
                                                           const std::vector<double>& rhs,
                                                           double tol, int max_iters);

// MatrixMarket coordinate text format.
void write_matrix_market(const SparseMatrix& K, const std::string& path);

}  // namespace perikit::linalg
