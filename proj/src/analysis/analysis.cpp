#include "perikit/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace perikit::analysis {

double l2_field_norm(const std::vector<double>& field, const NodeCloud& cloud) {
  const int d = cloud.dim;
  if (field.size() != cloud.n * static_cast<std::size_t>(d)) {
    throw Error("l2_field_norm: field size does not match cloud");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    double mag2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double v = field[i * d + a];
      mag2 += v * v;
    }
    s += mag2 * cloud.volumes[i];
  }
  return std::sqrt(s);
}

namespace {

// Maps every node of `coarse` to the coincident node of `fine`.
std::vector<index_t> coincidence_map(const NodeCloud& coarse, const NodeCloud& fine) {
  const int d = coarse.dim;
  const double tol = 1e-9 * coarse.spacing;
  // Key fine nodes by their rounded lattice coordinates in units of the fine
  // spacing; nested dyadic grids land exactly on these keys.
  std::map<std::array<long, kMaxDim>, index_t> lookup;
  auto key_of = [&](const double* p, double h0) {
    std::array<long, kMaxDim> key{};
    for (int a = 0; a < d; ++a) key[a] = std::lround(p[a] / h0 * 2.0);
    return key;
  };
  const double h0 = fine.spacing;
  for (std::size_t j = 0; j < fine.n; ++j) {
    lookup[key_of(fine.pos(j), h0)] = static_cast<index_t>(j);
  }
  std::vector<index_t> map(coarse.n);
  for (std::size_t i = 0; i < coarse.n; ++i) {
    const auto it = lookup.find(key_of(coarse.pos(i), h0));
    bool ok = it != lookup.end();
    if (ok) {
      ok = distance(coarse.pos(i), fine.pos(it->second), d) <= tol;
    }
    if (!ok) {
      std::ostringstream os;
      os << "convergence_rate: meshes are not nested (coarse node " << i
         << " has no coincident fine node)";
      throw Error(os.str());
    }
    map[i] = it->second;
  }
  return map;
}

// ||u_c - u_f|| over coincident nodes, weighted by coarse volumes.
double difference_norm(const NodeCloud& coarse, const std::vector<double>& uc,
                       const std::vector<double>& uf,
                       const std::vector<index_t>& map, int d) {
  double s = 0.0;
  for (std::size_t i = 0; i < coarse.n; ++i) {
    double mag2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double v = uc[i * d + a] - uf[static_cast<std::size_t>(map[i]) * d + a];
      mag2 += v * v;
    }
    s += mag2 * coarse.volumes[i];
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<RatePoint> convergence_rate(const ConvergenceInput& input) {
  if (input.meshes.size() < 3) {
    throw Error("convergence_rate: need at least three meshes");
  }
  if (!(input.ratio > 1.0)) throw Error("convergence_rate: ratio must exceed 1");
  const auto& m1 = input.meshes[0];
  const auto& m2 = input.meshes[1];
  const auto& m3 = input.meshes[2];
  const int d = m1.cloud->dim;
  const std::size_t nt = input.times.size();
  if (m1.fields.size() != nt || m2.fields.size() != nt || m3.fields.size() != nt) {
    throw Error("convergence_rate: field count does not match evaluation times");
  }

  const auto map12 = coincidence_map(*m1.cloud, *m2.cloud);
  const auto map23 = coincidence_map(*m2.cloud, *m3.cloud);

  std::vector<RatePoint> rates(nt);
  const double logr = std::log(input.ratio);
  for (std::size_t t = 0; t < nt; ++t) {
    auto& pt = rates[t];
    pt.time = input.times[t];
    const double d12 =
        difference_norm(*m1.cloud, m1.fields[t], m2.fields[t], map12, d);
    const double d23 =
        difference_norm(*m2.cloud, m2.fields[t], m3.fields[t], map23, d);
    if (d12 == 0.0 || d23 == 0.0) {
      pt.valid = false;
      continue;
    }
    pt.alpha = (std::log(d12) - std::log(d23)) / logr;
    pt.valid = std::isfinite(pt.alpha);
  }
  return rates;
}

Tensile1dReference ccm_1d_tensile(double F, double A, double E) {
  Tensile1dReference out;
  const double sigma = F / A;
  out.stress = sigma;
  out.strain = sigma / E;
  out.energy_density = sigma * sigma / (2.0 * E);
  return out;
}

PlateDisplacement ccm_2d_tensile(double F, double E, double nu, double W, double H,
                                 double T, const double* X) {
  (void)H;  // enters only through the load distribution, not the fields
  PlateDisplacement out;
  out.ux = F / (E * W * T) * (W - X[0]);
  out.uy = nu * F / (E * T) * (X[1] / W - 0.5);
  return out;
}

void gaussian_ic(const std::vector<GaussianPulse>& pulses, const NodeCloud& cloud,
                 std::vector<double>& u0, std::vector<double>& v0) {
  const int d = cloud.dim;
  u0.assign(cloud.n * d, 0.0);
  v0.assign(cloud.n * d, 0.0);
  for (const auto& pulse : pulses) {
    if (static_cast<int>(pulse.center.size()) != d ||
        static_cast<int>(pulse.amplitude.size()) != d || !(pulse.width > 0)) {
      throw DeckError("gaussian_ic: pulse center/amplitude must have dim entries, width > 0");
    }
  }
  for (std::size_t i = 0; i < cloud.n; ++i) {
    const double* X = cloud.pos(i);
    for (const auto& pulse : pulses) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double t = X[a] - pulse.center[a];
        r2 += t * t;
      }
      const double g = std::exp(-r2 / pulse.width);
      for (int a = 0; a < d; ++a) u0[i * d + a] += g * pulse.amplitude[a];
    }
  }
}

}  // namespace perikit::analysis
