#include "perikit/deck/deck.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace perikit::deck {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw DeckError("deck: " + path + ": " + what);
}

YAML::Node require(const YAML::Node& node, const char* key, const std::string& path) {
  const auto child = node[key];
  if (!child) fail(path + "." + key, "missing required field");
  return child;
}

template <class T>
T as(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, "invalid value");
  }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& path) {
  return as<T>(require(node, key, path), path + "." + key);
}

template <class T>
T get_or(const YAML::Node& node, const char* key, const std::string& path, T fallback) {
  const auto child = node[key];
  if (!child) return fallback;
  return as<T>(child, path + "." + key);
}

// Unit conversion factors into SI. Lengths divide (exact for decimal deck
// values like 500 mm), pressures multiply.
struct UnitScale {
  double length_div = 1.0;    // value / length_div -> m
  double pressure_mul = 1.0;  // value * pressure_mul -> Pa

  double length(double v) const { return v / length_div; }
  double area2(double v) const { return v / (length_div * length_div); }
  double pressure(double v) const { return v * pressure_mul; }
};

Bounds read_bounds(const YAML::Node& node, int dim, const UnitScale& us,
                   const std::string& path) {
  if (!node.IsSequence() || static_cast<int>(node.size()) != dim) {
    fail(path, "expected one [lo, hi] pair per axis");
  }
  Bounds bounds;
  for (int a = 0; a < dim; ++a) {
    const auto pair = node[a];
    if (!pair.IsSequence() || pair.size() != 2) fail(path, "expected [lo, hi] pairs");
    bounds.push_back({us.length(as<double>(pair[0], path)),
                      us.length(as<double>(pair[1], path))});
  }
  return bounds;
}

std::uint8_t parse_axes(const YAML::Node& node, int dim, const std::string& path) {
  std::uint8_t mask = 0;
  if (!node.IsSequence() || node.size() == 0) fail(path, "expected a list of axes");
  for (const auto& item : node) {
    const auto s = as<std::string>(item, path);
    int axis;
    if (s == "x") {
      axis = 0;
    } else if (s == "y") {
      axis = 1;
    } else if (s == "z") {
      axis = 2;
    } else {
      fail(path, "unknown axis '" + s + "'");
    }
    if (axis >= dim) fail(path, "axis '" + s + "' exceeds deck dimension");
    mask |= static_cast<std::uint8_t>(1u << axis);
  }
  return mask;
}

Deck parse(const YAML::Node& root, const std::string& src) {
  Deck deck;

  const auto units_str = get<std::string>(root, "units", src);
  UnitScale us;
  if (units_str == "si" || units_str == "m_pa") {
    us = UnitScale{};
  } else if (units_str == "mm_mpa") {
    us = UnitScale{1000.0, 1e6};
  } else {
    fail(src + ".units", "unknown unit system '" + units_str + "' (si | mm_mpa)");
  }

  // geometry
  {
    const auto g = require(root, "geometry", src);
    const std::string path = src + ".geometry";
    deck.geometry.dim = get<int>(g, "dim", path);
    if (deck.geometry.dim < 1 || deck.geometry.dim > kMaxDim) {
      fail(path + ".dim", "dimension must be 1, 2, or 3");
    }
    deck.geometry.bounds =
        read_bounds(require(g, "bounds", path), deck.geometry.dim, us, path + ".bounds");
    deck.geometry.spacing = us.length(get<double>(g, "spacing", path));
    if (!(deck.geometry.spacing > 0)) fail(path + ".spacing", "must be positive");
    const auto placement = get_or<std::string>(g, "placement", path, "lattice");
    if (placement == "lattice") {
      deck.geometry.placement = Placement::kLattice;
    } else if (placement == "cell_center") {
      deck.geometry.placement = Placement::kCellCenter;
    } else {
      fail(path + ".placement", "expected lattice | cell_center");
    }
    deck.geometry.density = get_or<double>(g, "density", path, 1.0);
    if (!(deck.geometry.density > 0)) fail(path + ".density", "must be positive");
    deck.geometry.thickness = us.length(get_or<double>(g, "thickness", path, us.length_div));
    if (!(deck.geometry.thickness > 0)) fail(path + ".thickness", "must be positive");
  }

  // horizon: delta or m_d
  {
    const auto h = require(root, "horizon", src);
    const std::string path = src + ".horizon";
    if (h["delta"]) {
      deck.delta = us.length(as<double>(h["delta"], path + ".delta"));
    } else if (h["m_d"]) {
      deck.delta = as<double>(h["m_d"], path + ".m_d") * deck.geometry.spacing;
    } else {
      fail(path, "need either delta or m_d");
    }
    if (!(deck.delta >= deck.geometry.spacing)) {
      fail(path, "horizon must be at least the nodal spacing");
    }
  }

  // material
  {
    const auto m = require(root, "material", src);
    const std::string path = src + ".material";
    const auto kind = get<std::string>(m, "kind", path);
    if (kind == "bond") {
      deck.material.kind = MaterialKind::kBond;
      auto& b = deck.material.bond;
      b.C = get_or<double>(m, "c", path, 1.0);
      b.beta = get_or<double>(m, "beta", path, 1.0);
      b.delta = deck.delta;
      b.linearized = get_or<bool>(m, "linearized", path, false);
      const auto infl = get_or<std::string>(m, "influence", path, "gaussian");
      if (infl == "gaussian") {
        b.influence = Influence::kGaussian;
        b.c1 = get_or<double>(m, "c1", path, 1.0);
        b.c2 = get_or<double>(m, "c2", path, 0.4);
      } else if (infl == "constant") {
        b.influence = Influence::kConstant;
      } else {
        fail(path + ".influence", "expected gaussian | constant");
      }
      if (!(b.C > 0) || !(b.beta > 0)) fail(path, "C and beta must be positive");
    } else if (kind == "state") {
      deck.material.kind = MaterialKind::kState;
      auto& s = deck.material.state;
      s.delta = deck.delta;
      if (m["E"] || m["nu"]) {
        deck.material.from_elastic = true;
        deck.material.E = us.pressure(get<double>(m, "E", path));
        deck.material.nu = get<double>(m, "nu", path);
        if (!(deck.material.E > 0)) fail(path + ".E", "must be positive");
        if (!(deck.material.nu > -1.0 && deck.material.nu < 0.5)) {
          fail(path + ".nu", "must be in (-1, 0.5)");
        }
        const auto derived = state_params_from_elastic(deck.material.E, deck.material.nu,
                                                       deck.geometry.dim, deck.delta);
        s.K = derived.K;
        s.mu = derived.mu;
      } else {
        s.K = us.pressure(get<double>(m, "K", path));
        s.mu = us.pressure(get<double>(m, "mu", path));
        if (!(s.K > 0) || !(s.mu > 0)) fail(path, "K and mu must be positive");
      }
    } else {
      fail(path + ".kind", "expected bond | state");
    }
  }

  // integrator
  {
    const auto n = require(root, "integrator", src);
    const std::string path = src + ".integrator";
    const auto kind = get<std::string>(n, "kind", path);
    if (kind == "explicit") {
      deck.integrator = IntegratorKind::kExplicit;
      auto& e = deck.explicit_cfg;
      e.dt = get<double>(n, "dt", path);
      e.n_steps = get<long>(n, "steps", path);
      if (!(e.dt > 0)) fail(path + ".dt", "must be positive");
      if (e.n_steps < 0) fail(path + ".steps", "must be non-negative");
      const auto scheme = get_or<std::string>(n, "scheme", path, "velocity_verlet");
      if (scheme == "velocity_verlet") {
        e.scheme = ExplicitScheme::kVelocityVerlet;
      } else if (scheme == "central_difference") {
        e.scheme = ExplicitScheme::kCentralDifference;
      } else {
        fail(path + ".scheme", "expected velocity_verlet | central_difference");
      }
    } else if (kind == "implicit") {
      deck.integrator = IntegratorKind::kImplicit;
      auto& im = deck.implicit_cfg;
      im.n_load_steps = get_or<int>(n, "load_steps", path, 1);
      im.tolerance = get<double>(n, "tolerance", path);
      im.fd_epsilon = us.length(get_or<double>(n, "fd_epsilon", path, 0.0));
      im.max_newton_iters = get_or<int>(n, "max_newton_iters", path, 25);
      im.solver_tol = get_or<double>(n, "solver_tol", path, 1e-12);
      im.solver_max_iters = get_or<int>(n, "solver_max_iters", path, 100000);
      const auto solver = get_or<std::string>(n, "solver", path, "bicgstab");
      if (solver == "cg") {
        im.solver = SolverKind::kCg;
      } else if (solver == "bicgstab") {
        im.solver = SolverKind::kBicgstab;
      } else {
        fail(path + ".solver", "expected cg | bicgstab");
      }
      if (im.n_load_steps < 1) fail(path + ".load_steps", "must be at least 1");
      if (!(im.tolerance > 0)) fail(path + ".tolerance", "must be positive");
      if (im.max_newton_iters < 1) fail(path + ".max_newton_iters", "must be at least 1");
    } else {
      fail(path + ".kind", "expected explicit | implicit");
    }
  }

  // boundary conditions
  if (const auto b = root["boundary_conditions"]) {
    const std::string path = src + ".boundary_conditions";
    if (const auto clamps = b["clamps"]) {
      for (std::size_t c = 0; c < clamps.size(); ++c) {
        const std::string cp = path + ".clamps[" + std::to_string(c) + "]";
        Clamp clamp;
        clamp.box = read_bounds(require(clamps[c], "box", cp), deck.geometry.dim, us,
                                cp + ".box");
        clamp.axes_mask = parse_axes(require(clamps[c], "axes", cp), deck.geometry.dim,
                                     cp + ".axes");
        deck.clamps.push_back(std::move(clamp));
      }
    }
    if (const auto loads = b["loads"]) {
      for (std::size_t c = 0; c < loads.size(); ++c) {
        const std::string lp = path + ".loads[" + std::to_string(c) + "]";
        Load load;
        load.box = read_bounds(require(loads[c], "box", lp), deck.geometry.dim, us,
                               lp + ".box");
        const auto force = require(loads[c], "force", lp);
        if (!force.IsSequence() ||
            static_cast<int>(force.size()) != deck.geometry.dim) {
          fail(lp + ".force", "expected one component per axis");
        }
        for (const auto& f : force) load.force.push_back(as<double>(f, lp + ".force"));
        deck.loads.push_back(std::move(load));
      }
    }
  }

  // initial conditions
  {
    const auto ic = root["initial_conditions"];
    const std::string path = src + ".initial_conditions";
    const auto kind = ic ? get<std::string>(ic, "kind", path) : std::string("zero");
    if (kind == "zero") {
      // nothing
    } else if (kind == "gaussian") {
      const auto pulses = require(ic, "pulses", path);
      for (std::size_t c = 0; c < pulses.size(); ++c) {
        const std::string pp = path + ".pulses[" + std::to_string(c) + "]";
        analysis::GaussianPulse pulse;
        for (const auto& v : require(pulses[c], "center", pp)) {
          pulse.center.push_back(us.length(as<double>(v, pp + ".center")));
        }
        for (const auto& v : require(pulses[c], "amplitude", pp)) {
          pulse.amplitude.push_back(us.length(as<double>(v, pp + ".amplitude")));
        }
        pulse.width = us.area2(get<double>(pulses[c], "width", pp));
        if (static_cast<int>(pulse.center.size()) != deck.geometry.dim ||
            static_cast<int>(pulse.amplitude.size()) != deck.geometry.dim) {
          fail(pp, "center and amplitude need one entry per axis");
        }
        if (!(pulse.width > 0)) fail(pp + ".width", "must be positive");
        deck.pulses.push_back(std::move(pulse));
      }
    } else {
      fail(path + ".kind", "expected zero | gaussian");
    }
  }

  // output
  if (const auto o = root["output"]) {
    const std::string path = src + ".output";
    deck.output.directory = get_or<std::string>(o, "directory", path, "out");
    deck.output.stride = get_or<long>(o, "stride", path, 1);
    if (deck.output.stride < 1) fail(path + ".stride", "must be at least 1");
    const auto format = get_or<std::string>(o, "format", path, "csv");
    if (format == "csv") {
      deck.output.format = SnapshotFormat::kCsv;
    } else if (format == "vtk") {
      deck.output.format = SnapshotFormat::kVtk;
    } else {
      fail(path + ".format", "expected csv | vtk");
    }
    deck.output.with_energy = get_or<bool>(o, "with_energy", path, true);
  }
  deck.explicit_cfg.output_stride = deck.output.stride;
  deck.explicit_cfg.with_energy = deck.output.with_energy;
  return deck;
}

void apply_overrides(YAML::Node root,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, value] : overrides) {
    YAML::Node node = root;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (start <= key.size()) {
      const auto dot = key.find('.', start);
      if (dot == std::string::npos) {
        parts.push_back(key.substr(start));
        break;
      }
      parts.push_back(key.substr(start, dot - start));
      start = dot + 1;
    }
    for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
      YAML::Node next = node[parts[p]];
      node.reset(next);
    }
    node[parts.back()] = value;
  }
}

}  // namespace

StateBasedParams state_params_from_elastic(double E, double nu, int dim, double delta) {
  StateBasedParams p;
  p.delta = delta;
  p.K = dim == 1 ? E / 9.0 : E / (3.0 * (1.0 - 2.0 * nu));
  p.mu = E / (2.0 * (1.0 + nu));
  return p;
}

Deck load_deck(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeckError("deck: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_deck_text(buf.str(), path);
}

Deck parse_deck_text(const std::string& text, const std::string& source_name,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw DeckError("deck: " + source_name + ": parse error at line " +
                    std::to_string(ex.mark.line + 1) + ": " + ex.msg);
  }
  if (!root.IsMap()) throw DeckError("deck: " + source_name + ": expected a mapping");
  apply_overrides(root, overrides);
  return parse(root, source_name);
}

NodeCloud Deck::build_cloud() const {
  NodeCloud cloud = generate_uniform_grid(geometry.bounds, geometry.spacing,
                                          geometry.dim, geometry.placement);
  for (auto& rho : cloud.densities) rho = geometry.density;

  auto in_box = [&](const double* p, const Bounds& box) {
    for (int a = 0; a < geometry.dim; ++a) {
      if (p[a] < box[a][0] || p[a] > box[a][1]) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (const auto& clamp : clamps) {
      if (in_box(cloud.pos(i), clamp.box)) cloud.bc_tags[i] |= clamp.axes_mask;
    }
    for (const auto& load : loads) {
      if (in_box(cloud.pos(i), load.box)) cloud.bc_tags[i] |= kBcLoaded;
    }
  }
  return cloud;
}

FieldState Deck::build_state(const NodeCloud& cloud) const {
  FieldState state = FieldState::zeros(cloud.n, cloud.dim);
  if (!pulses.empty()) analysis::gaussian_ic(pulses, cloud, state.u, state.v);

  const double t_eff = geometry.dim == 2 ? geometry.thickness : 1.0;
  auto in_box = [&](const double* p, const Bounds& box) {
    for (int a = 0; a < geometry.dim; ++a) {
      if (p[a] < box[a][0] || p[a] > box[a][1]) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (const auto& load : loads) {
      if (!in_box(cloud.pos(i), load.box)) continue;
      for (int a = 0; a < geometry.dim; ++a) {
        state.b[i * geometry.dim + a] +=
            load.force[a] / (cloud.volumes[i] * t_eff);
      }
    }
  }
  return state;
}

std::unique_ptr<ForceModel> Deck::build_model(const NodeCloud& cloud,
                                              const NeighborList& nbrs) const {
  if (material.kind == MaterialKind::kBond) {
    return std::make_unique<BondForceModel>(cloud, nbrs, material.bond);
  }
  return std::make_unique<StateForceModel>(cloud, nbrs, material.state);
}

namespace {

// Shortest round-trip decimal form.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string serialize_deck(const Deck& d) {
  std::ostringstream os;
  os << "units: si\n";
  os << "geometry:\n";
  os << "  dim: " << d.geometry.dim << "\n";
  os << "  bounds: [";
  for (int a = 0; a < d.geometry.dim; ++a) {
    os << (a ? ", " : "") << "[" << fmt(d.geometry.bounds[a][0]) << ", "
       << fmt(d.geometry.bounds[a][1]) << "]";
  }
  os << "]\n";
  os << "  spacing: " << fmt(d.geometry.spacing) << "\n";
  os << "  placement: "
     << (d.geometry.placement == Placement::kLattice ? "lattice" : "cell_center") << "\n";
  os << "  density: " << fmt(d.geometry.density) << "\n";
  os << "  thickness: " << fmt(d.geometry.thickness) << "\n";
  os << "horizon:\n  delta: " << fmt(d.delta) << "\n";
  os << "material:\n";
  if (d.material.kind == MaterialKind::kBond) {
    const auto& b = d.material.bond;
    os << "  kind: bond\n";
    os << "  c: " << fmt(b.C) << "\n  beta: " << fmt(b.beta) << "\n";
    os << "  linearized: " << (b.linearized ? "true" : "false") << "\n";
    if (b.influence == Influence::kGaussian) {
      os << "  influence: gaussian\n  c1: " << fmt(b.c1) << "\n  c2: " << fmt(b.c2)
         << "\n";
    } else {
      os << "  influence: constant\n";
    }
  } else if (d.material.from_elastic) {
    os << "  kind: state\n  E: " << fmt(d.material.E) << "\n  nu: " << fmt(d.material.nu)
       << "\n";
  } else {
    os << "  kind: state\n  K: " << fmt(d.material.state.K)
       << "\n  mu: " << fmt(d.material.state.mu) << "\n";
  }
  os << "integrator:\n";
  if (d.integrator == IntegratorKind::kExplicit) {
    const auto& e = d.explicit_cfg;
    os << "  kind: explicit\n";
    os << "  dt: " << fmt(e.dt) << "\n  steps: " << e.n_steps << "\n";
    os << "  scheme: "
       << (e.scheme == ExplicitScheme::kVelocityVerlet ? "velocity_verlet"
                                                       : "central_difference")
       << "\n";
  } else {
    const auto& im = d.implicit_cfg;
    os << "  kind: implicit\n";
    os << "  load_steps: " << im.n_load_steps << "\n";
    os << "  tolerance: " << fmt(im.tolerance) << "\n";
    if (im.fd_epsilon > 0) os << "  fd_epsilon: " << fmt(im.fd_epsilon) << "\n";
    os << "  max_newton_iters: " << im.max_newton_iters << "\n";
    os << "  solver: " << (im.solver == SolverKind::kCg ? "cg" : "bicgstab") << "\n";
    os << "  solver_tol: " << fmt(im.solver_tol) << "\n";
    os << "  solver_max_iters: " << im.solver_max_iters << "\n";
  }
  if (!d.clamps.empty() || !d.loads.empty()) {
    os << "boundary_conditions:\n";
    if (!d.clamps.empty()) {
      os << "  clamps:\n";
      for (const auto& c : d.clamps) {
        os << "    - box: [";
        for (int a = 0; a < d.geometry.dim; ++a) {
          os << (a ? ", " : "") << "[" << fmt(c.box[a][0]) << ", " << fmt(c.box[a][1])
             << "]";
        }
        os << "]\n      axes: [";
        bool first = true;
        for (int a = 0; a < d.geometry.dim; ++a) {
          if (c.axes_mask & (1u << a)) {
            os << (first ? "" : ", ") << "xyz"[a];
            first = false;
          }
        }
        os << "]\n";
      }
    }
    if (!d.loads.empty()) {
      os << "  loads:\n";
      for (const auto& l : d.loads) {
        os << "    - box: [";
        for (int a = 0; a < d.geometry.dim; ++a) {
          os << (a ? ", " : "") << "[" << fmt(l.box[a][0]) << ", " << fmt(l.box[a][1])
             << "]";
        }
        os << "]\n      force: [";
        for (int a = 0; a < d.geometry.dim; ++a) {
          os << (a ? ", " : "") << fmt(l.force[a]);
        }
        os << "]\n";
      }
    }
  }
  if (!d.pulses.empty()) {
    os << "initial_conditions:\n  kind: gaussian\n  pulses:\n";
    for (const auto& p : d.pulses) {
      os << "    - center: [";
      for (int a = 0; a < d.geometry.dim; ++a) os << (a ? ", " : "") << fmt(p.center[a]);
      os << "]\n      amplitude: [";
      for (int a = 0; a < d.geometry.dim; ++a)
        os << (a ? ", " : "") << fmt(p.amplitude[a]);
      os << "]\n      width: " << fmt(p.width) << "\n";
    }
  } else {
    os << "initial_conditions:\n  kind: zero\n";
  }
  os << "output:\n";
  os << "  directory: " << d.output.directory << "\n";
  os << "  stride: " << d.output.stride << "\n";
  os << "  format: " << (d.output.format == SnapshotFormat::kCsv ? "csv" : "vtk") << "\n";
  os << "  with_energy: " << (d.output.with_energy ? "true" : "false") << "\n";
  return os.str();
}

namespace {

void write_csv(std::ostream& out, const FieldState& state, const NodeCloud& cloud) {
  out << "id,x,y,z,ux,uy,uz,vx,vy,vz,fx,fy,fz,energy\n";
  const int d = cloud.dim;
  auto put3 = [&](const std::vector<double>& field, std::size_t i) {
    for (int a = 0; a < 3; ++a) {
      out << ',' << (a < d ? fmt(field[i * d + a]) : "0");
    }
  };
  for (std::size_t i = 0; i < cloud.n; ++i) {
    out << i;
    put3(cloud.positions, i);
    put3(state.u, i);
    put3(state.v, i);
    put3(state.f, i);
    out << ',' << (state.energy.empty() ? "0" : fmt(state.energy[i]));
    out << '\n';
  }
}

void write_vtk(std::ostream& out, const FieldState& state, const NodeCloud& cloud,
               long step) {
  const int d = cloud.dim;
  const std::size_t n = cloud.n;
  out << "# vtk DataFile Version 3.0\n";
  out << "perikit snapshot step " << step << " time " << fmt(state.time) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  auto row3 = [&](const std::vector<double>& field, std::size_t i) {
    for (int a = 0; a < 3; ++a) {
      out << (a ? " " : "") << (a < d ? fmt(field[i * d + a]) : "0");
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < n; ++i) row3(cloud.positions, i);
  out << "CELLS " << n << ' ' << 2 * n << '\n';
  for (std::size_t i = 0; i < n; ++i) out << "1 " << i << '\n';
  out << "CELL_TYPES " << n << '\n';
  for (std::size_t i = 0; i < n; ++i) out << "1\n";
  out << "POINT_DATA " << n << '\n';
  out << "VECTORS displacement double\n";
  for (std::size_t i = 0; i < n; ++i) row3(state.u, i);
  out << "VECTORS velocity double\n";
  for (std::size_t i = 0; i < n; ++i) row3(state.v, i);
  out << "VECTORS force double\n";
  for (std::size_t i = 0; i < n; ++i) row3(state.f, i);
  out << "SCALARS energy double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << (state.energy.empty() ? "0" : fmt(state.energy[i])) << '\n';
  }
}

}  // namespace

std::filesystem::path write_snapshot(const FieldState& state, const NodeCloud& cloud,
                                     long step, SnapshotFormat format,
                                     const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  char name[64];
  std::snprintf(name, sizeof(name), "snapshot_%06ld.%s", step,
                format == SnapshotFormat::kCsv ? "csv" : "vtk");
  const fs::path path = fs::path(directory) / name;
  std::ofstream out(path);
  if (!out) throw Error("write_snapshot: cannot open " + path.string());
  if (format == SnapshotFormat::kCsv) {
    write_csv(out, state, cloud);
  } else {
    write_vtk(out, state, cloud, step);
  }
  out.flush();
  if (!out) throw Error("write_snapshot: write failed for " + path.string());
  return path;
}

std::vector<std::vector<double>> read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_snapshot_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("read_snapshot_csv: empty file");
  if (line.rfind("id,", 0) != 0) throw Error("read_snapshot_csv: bad header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      double v = 0.0;
      const auto res = std::from_chars(line.data() + start, line.data() + end, v);
      if (res.ec != std::errc()) throw Error("read_snapshot_csv: bad number");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace perikit::deck
