#include "perikit/integrator/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perikit/runtime/runtime.hpp"
#include "perikit/simd/kernels.hpp"

namespace perikit {

Constraints Constraints::from_cloud(const NodeCloud& cloud) {
  Constraints bc;
  bc.dim = cloud.dim;
  bc.clamped.assign(cloud.n * cloud.dim, 0);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (int a = 0; a < cloud.dim; ++a) {
      if (cloud.axis_clamped(i, a)) bc.clamped[i * cloud.dim + a] = 1;
    }
  }
  return bc;
}

void Constraints::zero_clamped(std::vector<double>& field) const {
  for (std::size_t d = 0; d < clamped.size(); ++d) {
    if (clamped[d]) field[d] = 0.0;
  }
}

std::size_t Constraints::free_count() const {
  std::size_t n = 0;
  for (const auto c : clamped) n += c == 0;
  return n;
}

namespace {

void check_finite(const std::vector<double>& f, long step) {
  for (const double v : f) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "explicit integration blew up: non-finite force at step " << step;
      throw NumericalError(os.str());
    }
  }
}

void recompute_forces(FieldState& state, const ForceModel& model, bool with_energy,
                      long step) {
  if (with_energy) {
    model.forces_and_energy(state.u, state.f, state.energy);
  } else {
    model.forces(state.u, state.f);
  }
  check_finite(state.f, step);
}

}  // namespace

void velocity_verlet_step(FieldState& state, const ForceModel& model,
                          const NodeCloud& cloud, const Constraints& bc, double dt,
                          long step_index, bool with_energy) {
  const int d = cloud.dim;
  // Half kick + drift; clamped DOFs hold their prescribed (zero-velocity) value.
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    const double c = 0.5 * dt / cloud.densities[i];
    for (int a = 0; a < d; ++a) {
      const std::size_t dof = i * d + a;
      if (bc.clamped[dof]) {
        state.v[dof] = 0.0;
        continue;
      }
      state.v[dof] += c * (state.f[dof] + state.b[dof]);
      state.u[dof] += dt * state.v[dof];
    }
  });
  recompute_forces(state, model, with_energy, step_index);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    const double c = 0.5 * dt / cloud.densities[i];
    for (int a = 0; a < d; ++a) {
      const std::size_t dof = i * d + a;
      if (bc.clamped[dof]) continue;
      state.v[dof] += c * (state.f[dof] + state.b[dof]);
    }
  });
  state.time += dt;
}

void central_difference_step(FieldState& state, std::vector<double>& u_prev,
                             const ForceModel& model, const NodeCloud& cloud,
                             const Constraints& bc, double dt, long step_index,
                             bool with_energy) {
  const int d = cloud.dim;
  const double inv2dt = 1.0 / (2.0 * dt);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    const double c = dt * dt / cloud.densities[i];
    for (int a = 0; a < d; ++a) {
      const std::size_t dof = i * d + a;
      if (bc.clamped[dof]) {
        u_prev[dof] = state.u[dof];
        state.v[dof] = 0.0;
        continue;
      }
      const double next =
          2.0 * state.u[dof] - u_prev[dof] + c * (state.f[dof] + state.b[dof]);
      state.v[dof] = (next - u_prev[dof]) * inv2dt;  // reported, not integrated
      u_prev[dof] = state.u[dof];
      state.u[dof] = next;
    }
  });
  recompute_forces(state, model, with_energy, step_index);
  state.time += dt;
}

void run_explicit(const NodeCloud& cloud, const ForceModel& model, const Constraints& bc,
                  FieldState& state, const ExplicitConfig& cfg,
                  const SnapshotSink& sink) {
  if (!(cfg.dt > 0)) throw DeckError("explicit: time step must be positive");
  if (cfg.n_steps < 0) throw DeckError("explicit: negative step count");
  const long stride = std::max<long>(1, cfg.output_stride);

  bc.zero_clamped(state.u);
  bc.zero_clamped(state.v);
  recompute_forces(state, model, cfg.with_energy, 0);
  if (sink) sink(state, 0);

  std::vector<double> u_prev;
  if (cfg.scheme == ExplicitScheme::kCentralDifference) {
    // Second-order bootstrap: u^{-1} = u^0 - dt v^0 + (dt^2/2) a^0, which makes
    // the two-level recurrence coincide with velocity-Verlet from the start.
    u_prev = state.u;
    const int d = cloud.dim;
    for (std::size_t i = 0; i < cloud.n; ++i) {
      const double c = 0.5 * cfg.dt * cfg.dt / cloud.densities[i];
      for (int a = 0; a < d; ++a) {
        const std::size_t dof = i * d + a;
        if (bc.clamped[dof]) continue;
        u_prev[dof] -= cfg.dt * state.v[dof] - c * (state.f[dof] + state.b[dof]);
      }
    }
  }

  for (long k = 1; k <= cfg.n_steps; ++k) {
    const bool snapshot = sink && (k % stride == 0 || k == cfg.n_steps);
    const bool energy = cfg.with_energy && snapshot;
    if (cfg.scheme == ExplicitScheme::kVelocityVerlet) {
      velocity_verlet_step(state, model, cloud, bc, cfg.dt, k, energy);
    } else {
      central_difference_step(state, u_prev, model, cloud, bc, cfg.dt, k, energy);
    }
    if (snapshot) sink(state, k);
  }
}

std::pair<std::vector<double>, double> compute_residual(const NodeCloud& cloud,
                                                        const Constraints& bc,
                                                        const FieldState& state) {
  const int d = cloud.dim;
  std::vector<double> r(cloud.n * d, 0.0);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    for (int a = 0; a < d; ++a) {
      const std::size_t dof = i * d + a;
      if (bc.clamped[dof]) continue;
      r[dof] = (state.f[dof] + state.b[dof]) * cloud.volumes[i];
    }
  });
  const double norm =
      std::sqrt(kernels::active().dot(r.data(), r.data(), r.size()));
  return {std::move(r), norm};
}

namespace {

// Sorted nodes within two neighborhood hops of each node (self included).
std::vector<std::vector<index_t>> two_hop_sets(const NeighborList& nbrs) {
  const std::size_t n = nbrs.rows();
  std::vector<std::vector<index_t>> sets(n);
  rt::parallel_for(0, n, [&](std::size_t i) {
    auto& set = sets[i];
    set.push_back(static_cast<index_t>(i));
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      const index_t j = nbrs.neighbors[e];
      set.push_back(j);
      for (offset_t g = nbrs.offsets[j]; g < nbrs.offsets[j + 1]; ++g) {
        set.push_back(nbrs.neighbors[g]);
      }
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  });
  return sets;
}

}  // namespace

linalg::SparseMatrix assemble_tangent_stiffness(const NodeCloud& cloud,
                                                const NeighborList& nbrs,
                                                const ForceModel& model,
                                                const Constraints& bc,
                                                const std::vector<double>& u,
                                                double upsilon) {
  if (!(upsilon > 0)) throw Error("tangent: perturbation must be positive");
  const int d = cloud.dim;
  const auto N = static_cast<offset_t>(cloud.n * d);
  const auto reach = two_hop_sets(nbrs);

  std::vector<std::vector<std::pair<index_t, double>>> columns(N);
  // Each column is an independent perturbation; force evaluations nest inside
  // the parallel loop and therefore run serially per column.
  rt::parallel_for(0, static_cast<std::size_t>(N), [&](std::size_t r) {
    auto& col = columns[r];
    if (bc.is_clamped(r)) {
      col.emplace_back(static_cast<index_t>(r), 1.0);
      return;
    }
    const std::size_t node = r / d;
    std::vector<double> up = u;
    std::vector<double> fplus, fminus;
    up[r] = u[r] + upsilon;
    model.forces(up, fplus);
    up[r] = u[r] - upsilon;
    model.forces(up, fminus);
    col.reserve(reach[node].size() * d + 1);
    for (const index_t s : reach[node]) {
      for (int a = 0; a < d; ++a) {
        const std::size_t row = static_cast<std::size_t>(s) * d + a;
        if (bc.is_clamped(row)) continue;
        const double value =
            -cloud.volumes[s] * (fplus[row] - fminus[row]) / (2.0 * upsilon);
        if (value != 0.0) col.emplace_back(static_cast<index_t>(row), value);
      }
    }
  });
  return linalg::SparseMatrix::from_column_batches(N, columns, /*symmetric_hint=*/true);
}

NewtonReport newton_load_step(const NodeCloud& cloud, const NeighborList& nbrs,
                              const ForceModel& model, const Constraints& bc,
                              FieldState& state, const ImplicitConfig& cfg) {
  const double upsilon =
      cfg.fd_epsilon > 0 ? cfg.fd_epsilon : 1e-6 * cloud.spacing;
  NewtonReport report;

  auto [r, rnorm] = compute_residual(cloud, bc, state);
  report.residual_trace.push_back(rnorm);
  if (rnorm < cfg.tolerance) return report;  // already converged, zero iterations

  int non_descent = 0;
  for (int it = 1; it <= cfg.max_newton_iters; ++it) {
    const auto K = assemble_tangent_stiffness(cloud, nbrs, model, bc, state.u, upsilon);
    auto [du, solve] = cfg.solver == SolverKind::kCg
                           ? linalg::cg_solve(K, r, cfg.solver_tol, cfg.solver_max_iters)
                           : linalg::bicgstab_solve(K, r, cfg.solver_tol,
                                                    cfg.solver_max_iters);
    report.solver_iterations += solve.iterations;
    if (!solve.converged) {
      std::ostringstream os;
      os << "newton: linear solver failed at iteration " << it << " (residual "
         << solve.final_residual << " after " << solve.iterations << " iterations)";
      throw NumericalError(os.str());
    }
    for (std::size_t dof = 0; dof < state.u.size(); ++dof) {
      if (!bc.is_clamped(dof)) state.u[dof] += du[dof];
    }
    model.forces(state.u, state.f);

    const double prev = rnorm;
    std::tie(r, rnorm) = compute_residual(cloud, bc, state);
    report.residual_trace.push_back(rnorm);
    report.iterations = it;
    if (rnorm < cfg.tolerance) return report;
    non_descent = rnorm >= prev ? non_descent + 1 : 0;
    if (non_descent >= 3) {
      std::ostringstream os;
      os << "newton: residual stagnated; trace:";
      for (const double t : report.residual_trace) os << ' ' << t;
      throw NumericalError(os.str());
    }
  }
  std::ostringstream os;
  os << "newton: no convergence after " << cfg.max_newton_iters << " iterations; trace:";
  for (const double t : report.residual_trace) os << ' ' << t;
  throw NumericalError(os.str());
}

void run_implicit(const NodeCloud& cloud, const NeighborList& nbrs,
                  const ForceModel& model, const Constraints& bc, FieldState& state,
                  const ImplicitConfig& cfg, const SnapshotSink& sink,
                  const NewtonReporter& reporter) {
  if (cfg.n_load_steps < 1) throw DeckError("implicit: need at least one load step");
  const std::vector<double> b_full = state.b;
  bc.zero_clamped(state.u);

  for (int s = 1; s <= cfg.n_load_steps; ++s) {
    const double scale = static_cast<double>(s) / cfg.n_load_steps;
    for (std::size_t dof = 0; dof < state.b.size(); ++dof) {
      state.b[dof] = scale * b_full[dof];
    }
    model.forces(state.u, state.f);  // initial guess: previous load step's u
    const auto report = newton_load_step(cloud, nbrs, model, bc, state, cfg);
    if (reporter) reporter(s, report);
    state.time = static_cast<double>(s);
    if (sink) {
      model.forces_and_energy(state.u, state.f, state.energy);
      sink(state, s);
    }
  }
}

}  // namespace perikit
