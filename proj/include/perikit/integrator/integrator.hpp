#pragma once

// Explicit velocity-Verlet / central-difference stepping and quasi-static
// Newton load stepping with a central-finite-difference tangent stiffness.

#include <functional>
#include <utility>
#include <vector>

#include "perikit/linalg/linalg.hpp"
#include "perikit/material/material.hpp"

namespace perikit {

enum class ExplicitScheme { kVelocityVerlet, kCentralDifference };
enum class SolverKind { kCg, kBicgstab };

struct ExplicitConfig {
  double dt = 0.0;
  long n_steps = 0;
  ExplicitScheme scheme = ExplicitScheme::kVelocityVerlet;
  long output_stride = 1;
  bool with_energy = true;  // strain-energy accumulation can be skipped in benchmarks
};

struct ImplicitConfig {
  int n_load_steps = 1;
  double tolerance = 1e-9;   // tau on the volume-weighted residual norm
  double fd_epsilon = 0.0;   // upsilon; 0 selects the default 1e-6*h
  int max_newton_iters = 25;
  SolverKind solver = SolverKind::kBicgstab;
  double solver_tol = 1e-12;
  int solver_max_iters = 100000;
};

// Per-DOF clamp mask derived from the cloud's bc_tags.
struct Constraints {
  int dim = 0;
  std::vector<std::uint8_t> clamped;  // n*dim

  static Constraints from_cloud(const NodeCloud& cloud);
  bool is_clamped(std::size_t dof) const { return clamped[dof] != 0; }
  void zero_clamped(std::vector<double>& field) const;
  std::size_t free_count() const;
};

// One velocity-Verlet step. Requires state.f consistent with state.u; leaves
// state.f recomputed at the new displacement (and state.energy updated when
// with_energy). Throws NumericalError with the step index on blow-up.
void velocity_verlet_step(FieldState& state, const ForceModel& model,
                          const NodeCloud& cloud, const Constraints& bc, double dt,
                          long step_index, bool with_energy);

// One central-difference step; u_prev holds u^{k-1} and is promoted in place.
void central_difference_step(FieldState& state, std::vector<double>& u_prev,
                             const ForceModel& model, const NodeCloud& cloud,
                             const Constraints& bc, double dt, long step_index,
                             bool with_energy);

using SnapshotSink = std::function<void(const FieldState&, long step)>;

// Drives the explicit loop: BC update, force, step, output. Emits the initial
// state, then every output_stride steps and the final step.
void run_explicit(const NodeCloud& cloud, const ForceModel& model, const Constraints& bc,
                  FieldState& state, const ExplicitConfig& cfg,
                  const SnapshotSink& sink = {});

// Volume-weighted residual r_dof = (f + b) * V_node on free DOFs, 0 on clamped
// DOFs, plus its Euclidean norm.
std::pair<std::vector<double>, double> compute_residual(const NodeCloud& cloud,
                                                        const Constraints& bc,
                                                        const FieldState& state);

// Tangent stiffness by central finite differences of the volume-weighted
// internal force: K_sr = -V_s [f_s(u + eps^r) - f_s(u - eps^r)] / (2 eps),
// restricted to DOF pairs within two neighborhood hops. Clamped DOFs carry
// identity rows/columns. Symmetric positive (semi)definite for the linear
// state material, so Newton solves K du = r directly.
linalg::SparseMatrix assemble_tangent_stiffness(const NodeCloud& cloud,
                                                const NeighborList& nbrs,
                                                const ForceModel& model,
                                                const Constraints& bc,
                                                const std::vector<double>& u,
                                                double upsilon);

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_trace;  // |r| before and after each iteration
  int solver_iterations = 0;
};

// One quasi-static load step: iterate assemble/solve/update until |r| < tau.
// state.f must be consistent with state.u and the current state.b on entry.
NewtonReport newton_load_step(const NodeCloud& cloud, const NeighborList& nbrs,
                              const ForceModel& model, const Constraints& bc,
                              FieldState& state, const ImplicitConfig& cfg);

using NewtonReporter = std::function<void(int load_step, const NewtonReport&)>;

// Load ramp: scales the full external force linearly over n_load_steps and
// emits a snapshot after each converged step.
void run_implicit(const NodeCloud& cloud, const NeighborList& nbrs,
                  const ForceModel& model, const Constraints& bc, FieldState& state,
                  const ImplicitConfig& cfg, const SnapshotSink& sink = {},
                  const NewtonReporter& reporter = {});

}  // namespace perikit
