#include "perikit/material/material.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "perikit/runtime/runtime.hpp"
#include "perikit/simd/kernels.hpp"

namespace perikit {

FieldState FieldState::zeros(std::size_t n, int dim) {
  FieldState s;
  s.u.assign(n * dim, 0.0);
  s.v.assign(n * dim, 0.0);
  s.f.assign(n * dim, 0.0);
  s.b.assign(n * dim, 0.0);
  s.energy.assign(n, 0.0);
  return s;
}

double bond_strain(const double* u_i, const double* u_j, const double* x_i,
                   const double* x_j, int dim) {
  double num = 0.0;
  double len2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double xi = x_j[a] - x_i[a];
    num += (u_j[a] - u_i[a]) * xi;
    len2 += xi * xi;
  }
  if (len2 == 0.0) throw Error("bond_strain: zero-length bond");
  return num / len2;
}

double psi(double r, double C, double beta) { return C * (1.0 - std::exp(-beta * r)); }

double psi_prime(double r, double C, double beta) { return C * beta * std::exp(-beta * r); }

double influence(double r_scaled, const BondBasedParams& p) {
  if (p.influence == Influence::kConstant) return r_scaled < 1.0 ? 1.0 : 0.0;
  return p.c1 * r_scaled * std::exp(-r_scaled * r_scaled / p.c2);
}

double ball_volume(int dim, double delta) {
  switch (dim) {
    case 1:
      return 2.0 * delta;
    case 2:
      return std::numbers::pi * delta * delta;
    case 3:
      return 4.0 / 3.0 * std::numbers::pi * delta * delta * delta;
    default:
      throw Error("ball_volume: dim must be 1, 2, or 3");
  }
}

namespace {

kernels::BondRows make_rows(const NodeCloud& cloud, const NeighborList& nbrs,
                            const std::vector<double>& weights,
                            const std::vector<double>& u) {
  kernels::BondRows rows;
  rows.offsets = nbrs.offsets.data();
  rows.nbr = nbrs.neighbors.data();
  rows.bond_len = nbrs.bond_lengths.data();
  rows.weight = weights.data();
  rows.pos = cloud.positions.data();
  rows.u = u.data();
  return rows;
}

void check_sizes(const NodeCloud& cloud, const std::vector<double>& u,
                 const char* who) {
  if (u.size() != cloud.n * static_cast<std::size_t>(cloud.dim)) {
    std::ostringstream os;
    os << who << ": displacement size " << u.size() << " does not match " << cloud.n
       << " nodes x dim " << cloud.dim;
    throw Error(os.str());
  }
}

}  // namespace

BondForceModel::BondForceModel(const NodeCloud& cloud, const NeighborList& nbrs,
                               const BondBasedParams& params)
    : cloud_(&cloud), nbrs_(&nbrs), params_(params) {
  if (!(params.C > 0) || !(params.beta > 0) || !(params.delta > 0)) {
    throw DeckError("bond material: C, beta, delta must be positive");
  }
  const double ball = ball_volume(cloud.dim, params.delta);
  fpref_ = 4.0 / (params.delta * ball);
  epref_ = 1.0 / (ball * params.delta);
  weights_.resize(nbrs.bonds());
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      const double r = nbrs.bond_lengths[e];
      weights_[e] = influence(r / params.delta, params) *
                    cloud.volumes[nbrs.neighbors[e]] * nbrs.vol_corrections[e];
    }
  });
}

void BondForceModel::run(const std::vector<double>& u, std::vector<double>& f,
                         std::vector<double>* energy) const {
  check_sizes(*cloud_, u, "bond forces");
  f.resize(u.size());
  if (energy) energy->resize(cloud_->n);
  const auto rows = make_rows(*cloud_, *nbrs_, weights_, u);
  const auto& k = kernels::active();
  const int d = cloud_->dim;
  double* U = energy ? energy->data() : nullptr;
  if (params_.linearized) {
    const double psi0 = params_.C * params_.beta;
    rt::parallel_for(0, cloud_->n, [&, U](std::size_t i) {
      k.bond_lp[d](rows, fpref_, epref_, psi0, f.data(), U, i, i + 1);
    });
  } else {
    rt::parallel_for(0, cloud_->n, [&, U](std::size_t i) {
      k.bond_np[d](rows, fpref_, epref_, params_.C, params_.beta, f.data(), U, i, i + 1);
    });
  }
}

void BondForceModel::forces(const std::vector<double>& u, std::vector<double>& f) const {
  run(u, f, nullptr);
}

void BondForceModel::forces_and_energy(const std::vector<double>& u,
                                       std::vector<double>& f,
                                       std::vector<double>& energy) const {
  run(u, f, &energy);
}

StateForceModel::StateForceModel(const NodeCloud& cloud, const NeighborList& nbrs,
                                 const StateBasedParams& params)
    : cloud_(&cloud), nbrs_(&nbrs), params_(params) {
  if (!(params.K > 0) || !(params.mu > 0)) {
    throw DeckError("state material: K and mu must be positive");
  }
  weights_.resize(nbrs.bonds());
  m_.resize(cloud.n);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    double mi = 0.0;
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      const double w = cloud.volumes[nbrs.neighbors[e]] * nbrs.vol_corrections[e];
      weights_[e] = w;
      const double r = nbrs.bond_lengths[e];
      mi += r * r * w;
    }
    m_[i] = mi;
  });
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (!(m_[i] > 0)) {
      std::ostringstream os;
      os << "state material: node " << i << " has no neighbors (weighted volume 0)";
      throw DeckError(os.str());
    }
  }
}

void StateForceModel::dilatation(const std::vector<double>& u,
                                 std::vector<double>& theta) const {
  check_sizes(*cloud_, u, "dilatation");
  theta.resize(cloud_->n);
  const auto rows = make_rows(*cloud_, *nbrs_, weights_, u);
  const auto& k = kernels::active();
  const int d = cloud_->dim;
  rt::parallel_for(0, cloud_->n, [&](std::size_t i) {
    k.state_theta[d](rows, m_.data(), theta.data(), i, i + 1);
  });
}

void StateForceModel::force_from_dilatation(const std::vector<double>& u,
                                            const std::vector<double>& theta,
                                            std::vector<double>& f) const {
  check_sizes(*cloud_, u, "state forces");
  f.resize(u.size());
  const auto rows = make_rows(*cloud_, *nbrs_, weights_, u);
  const auto& k = kernels::active();
  const int d = cloud_->dim;
  rt::parallel_for(0, cloud_->n, [&](std::size_t i) {
    k.state_force[d](rows, m_.data(), theta.data(), params_.K, params_.mu, f.data(), i,
                     i + 1);
  });
  // The hot kernel divides by |xi + eta| unguarded; a collision shows up as a
  // non-finite entry. Name the offending bond on the slow path.
  for (std::size_t i = 0; i < cloud_->n; ++i) {
    for (int a = 0; a < d; ++a) {
      if (std::isfinite(f[i * d + a])) continue;
      for (offset_t e = nbrs_->offsets[i]; e < nbrs_->offsets[i + 1]; ++e) {
        const index_t j = nbrs_->neighbors[e];
        double q2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double q = (cloud_->pos(j)[c] - cloud_->pos(i)[c]) +
                           (u[j * d + c] - u[i * d + c]);
          q2 += q * q;
        }
        if (q2 == 0.0) {
          std::ostringstream os;
          os << "state force: bond (" << i << ", " << j
             << ") has |xi + eta| = 0 (node collision)";
          throw NumericalError(os.str());
        }
      }
      std::ostringstream os;
      os << "state force: non-finite force at node " << i;
      throw NumericalError(os.str());
    }
  }
}

void StateForceModel::energy_from_dilatation(const std::vector<double>& u,
                                             const std::vector<double>& theta,
                                             std::vector<double>& energy) const {
  check_sizes(*cloud_, u, "state energy");
  energy.resize(cloud_->n);
  const int d = cloud_->dim;
  rt::parallel_for(0, cloud_->n, [&](std::size_t i) {
    double dev = 0.0;
    for (offset_t e = nbrs_->offsets[i]; e < nbrs_->offsets[i + 1]; ++e) {
      const index_t j = nbrs_->neighbors[e];
      const double r = nbrs_->bond_lengths[e];
      double q2 = 0.0;
      double cross = 0.0;  // cancellation-free extension, as in the kernels
      for (int a = 0; a < d; ++a) {
        const double xi = cloud_->pos(j)[a] - cloud_->pos(i)[a];
        const double eta = u[j * d + a] - u[i * d + a];
        const double q = xi + eta;
        q2 += q * q;
        cross += (2.0 * xi + eta) * eta;
      }
      const double ext = cross / (std::sqrt(q2) + r);
      const double ed = ext - theta[i] * r / 3.0;
      dev += ed * ed * weights_[e];
    }
    energy[i] = 0.5 * params_.K * theta[i] * theta[i] +
                15.0 * params_.mu / (2.0 * m_[i]) * dev;
  });
}

void StateForceModel::forces(const std::vector<double>& u, std::vector<double>& f) const {
  std::vector<double> theta;
  dilatation(u, theta);
  force_from_dilatation(u, theta, f);
}

void StateForceModel::forces_and_energy(const std::vector<double>& u,
                                        std::vector<double>& f,
                                        std::vector<double>& energy) const {
  auto theta = std::make_shared<std::vector<double>>();
  dilatation(u, *theta);
  f.resize(u.size());
  energy.resize(cloud_->n);
  // Force and energy depend on theta but not on each other; run both as tasks.
  std::vector<rt::TaskHandle> deps;
  deps.push_back(rt::parallel_for_async(
      0, 1, [this, &u, &f, theta](std::size_t) { force_from_dilatation(u, *theta, f); },
      "state-force"));
  deps.push_back(rt::parallel_for_async(
      0, 1,
      [this, &u, &energy, theta](std::size_t) { energy_from_dilatation(u, *theta, energy); },
      "state-energy"));
  rt::wait_all(deps);
}

std::vector<double> compute_weighted_volumes(const NodeCloud& cloud,
                                             const NeighborList& nbrs) {
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (nbrs.offsets[i + 1] == nbrs.offsets[i]) {
      std::ostringstream os;
      os << "weighted volumes: node " << i << " is isolated (empty neighbor row)";
      throw Error(os.str());
    }
  }
  std::vector<double> m(cloud.n);
  rt::parallel_for(0, cloud.n, [&](std::size_t i) {
    double mi = 0.0;
    for (offset_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
      const double r = nbrs.bond_lengths[e];
      mi += r * r * cloud.volumes[nbrs.neighbors[e]] * nbrs.vol_corrections[e];
    }
    m[i] = mi;
  });
  return m;
}

std::vector<double> compute_dilatation(const NodeCloud& cloud, const NeighborList& nbrs,
                                       const std::vector<double>& m,
                                       const std::vector<double>& u) {
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (!(m[i] > 0)) throw Error("dilatation: zero weighted volume");
  }
  StateBasedParams p;
  p.K = 1.0;
  p.mu = 1.0;
  StateForceModel model(cloud, nbrs, p);
  std::vector<double> theta;
  model.dilatation(u, theta);
  return theta;
}

void compute_bond_forces(const NodeCloud& cloud, const NeighborList& nbrs,
                         const BondBasedParams& params, const std::vector<double>& u,
                         std::vector<double>& f, std::vector<double>& energy) {
  BondForceModel(cloud, nbrs, params).forces_and_energy(u, f, energy);
}

void compute_state_forces(const NodeCloud& cloud, const NeighborList& nbrs,
                          const std::vector<double>& m, const std::vector<double>& theta,
                          const StateBasedParams& params, const std::vector<double>& u,
                          std::vector<double>& f) {
  StateForceModel model(cloud, nbrs, params);
  (void)m;  // the model recomputes m from the same inputs
  model.force_from_dilatation(u, theta, f);
}

}  // namespace perikit
