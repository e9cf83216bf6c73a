// perikit command line: run decks, drive convergence studies, validate against
// reference solutions, and benchmark thread scaling.
//
// Exit codes: 0 ok, 1 usage, 2 deck error, 3 numerical failure,
// 4 validation failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "perikit/deck/deck.hpp"
#include "perikit/runtime/runtime.hpp"
#include "perikit/simd/kernels.hpp"
#include "perikit/validation/cases.hpp"

namespace {

namespace fs = std::filesystem;
using namespace perikit;

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw CLI::ValidationError("--override expects key=value, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

deck::Deck load_with_overrides(const std::string& path,
                               const std::vector<std::string>& raw_overrides) {
  std::ifstream in(path);
  if (!in) throw DeckError("deck: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deck::parse_deck_text(buf.str(), path, parse_overrides(raw_overrides));
}

struct CommonOpts {
  std::string deck_path;
  std::string out_dir;
  std::string format;
  unsigned threads = 0;
  std::vector<std::string> overrides;
};

void apply_common(const CommonOpts& opts, deck::Deck& d) {
  if (!opts.out_dir.empty()) d.output.directory = opts.out_dir;
  if (opts.format == "csv") d.output.format = deck::SnapshotFormat::kCsv;
  if (opts.format == "vtk") d.output.format = deck::SnapshotFormat::kVtk;
  if (opts.threads > 0) rt::set_thread_count(opts.threads);
}

int cmd_run(const CommonOpts& opts) {
  deck::Deck d = load_with_overrides(opts.deck_path, opts.overrides);
  apply_common(opts, d);

  const NodeCloud cloud = d.build_cloud();
  const NeighborList nbrs = build_neighborhoods(cloud, d.delta);
  const auto model = d.build_model(cloud, nbrs);
  const Constraints bc = Constraints::from_cloud(cloud);
  FieldState state = d.build_state(cloud);
  std::printf("deck: %zu nodes, dim %d, %zu bonds, %u threads, %s kernels\n", cloud.n,
              cloud.dim, nbrs.bonds(), rt::thread_count(), kernels::active().name);

  // Snapshots go out as asynchronous tasks, joined before exit.
  std::vector<rt::TaskHandle> writes;
  auto sink = [&](const FieldState& s, long step) {
    auto copy = std::make_shared<FieldState>(s);
    writes.push_back(rt::parallel_for_async(
        0, 1,
        [copy, &cloud, &d, step](std::size_t) {
          deck::write_snapshot(*copy, cloud, step, d.output.format, d.output.directory);
        },
        "snapshot-" + std::to_string(step)));
  };

  if (d.integrator == deck::IntegratorKind::kExplicit) {
    run_explicit(cloud, *model, bc, state, d.explicit_cfg, sink);
  } else {
    run_implicit(cloud, nbrs, *model, bc, state, d.implicit_cfg, sink,
                 [](int step, const NewtonReport& rep) {
                   std::printf("load step %d: %d newton iteration(s), %d solver "
                               "iteration(s)\n",
                               step, rep.iterations, rep.solver_iterations);
                   for (std::size_t i = 0; i < rep.residual_trace.size(); ++i) {
                     std::printf("  |r|[%zu] = %.6e\n", i, rep.residual_trace[i]);
                   }
                 });
  }
  rt::wait_all(writes);
  std::printf("done: %s\n", d.output.directory.c_str());
  return 0;
}

int cmd_converge(const CommonOpts& opts, const std::vector<double>& h_values,
                 double ratio, const std::vector<std::string>& mask_specs) {
  deck::Deck d = load_with_overrides(opts.deck_path, opts.overrides);
  apply_common(opts, d);
  if (h_values.size() < 3) {
    throw DeckError("converge: need at least three mesh spacings (--h)");
  }
  std::vector<std::pair<double, double>> masks;
  for (const auto& spec : mask_specs) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw DeckError("converge: --mask expects t0:t1, got '" + spec + "'");
    }
    masks.emplace_back(std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1)));
  }

  const auto study = cases::run_convergence_study(d, h_values, ratio);
  fs::create_directories(d.output.directory);
  for (std::size_t s = 0; s < study.sets.size(); ++s) {
    const fs::path path =
        fs::path(d.output.directory) / ("rates_set" + std::to_string(s + 1) + ".csv");
    std::ofstream out(path);
    out.precision(17);
    out << "time,alpha\n";
    for (const auto& pt : study.sets[s]) {
      if (!pt.valid) continue;
      out << pt.time << ',' << pt.alpha << '\n';
    }
    const double avg = cases::averaged_rate(study.sets[s], masks);
    std::printf("set %zu (h = %g..%g): time-averaged rate %.4f -> %s\n", s + 1,
                study.h_values[s], study.h_values[s + 2], avg, path.c_str());
  }
  return 0;
}

int cmd_validate(const CommonOpts& opts, const std::string& case_name) {
  if (opts.threads > 0) rt::set_thread_count(opts.threads);
  const std::string dir = opts.out_dir.empty() ? "out" : opts.out_dir;
  fs::create_directories(dir);

  auto write_rows = [&](const std::vector<cases::QuantityRow>& rows,
                        const fs::path& path) {
    std::ofstream out(path);
    out.precision(17);
    out << "node,quantity,pd,ccm,rel_error\n";
    for (const auto& row : rows) {
      out << row.node << ',' << row.quantity << ',' << row.pd << ',' << row.ccm << ','
          << row.rel_error << '\n';
    }
  };

  if (case_name == "1d-tensile") {
    const auto res = cases::run_tensile_1d();
    write_rows(res.rows, fs::path(dir) / "validate_1d_tensile.csv");
    std::printf("1d-tensile: %d interior nodes\n", res.interior_nodes);
    std::printf("  strain: max rel error %.3e (tol 5e-2) -> %s\n",
                res.max_interior_strain_error, res.strain_ok ? "PASS" : "FAIL");
    std::printf("  stress: max rel error %.3e (tol 5e-2) -> %s\n",
                res.max_interior_stress_error, res.stress_ok ? "PASS" : "FAIL");
    std::printf("  energy: max rel error %.3e (tol 1e-1) -> %s\n",
                res.max_interior_energy_error, res.energy_ok ? "PASS" : "FAIL");
    if (!res.passed()) throw ValidationError("1d-tensile validation failed");
    return 0;
  }
  if (case_name == "2d-tensile") {
    const auto res =
        cases::run_tensile_2d((fs::path(dir) / "tangent_2d_tensile.mtx").string());
    write_rows(res.rows, fs::path(dir) / "validate_2d_tensile.csv");
    std::printf("2d-tensile: center node position\n");
    std::printf("  x: pd %.6f m, reference %.6f m, rel error %.3e (tol 5e-4) -> %s\n",
                res.center_x_pd, res.center_x_ccm, res.x_rel_error,
                res.x_ok ? "PASS" : "FAIL");
    std::printf("  y: pd %.6f m, reference %.6f m, abs error %.3e (tol 1e-12) -> %s\n",
                res.center_y_pd, res.center_y_ccm, res.y_abs_error,
                res.y_ok ? "PASS" : "FAIL");
    std::printf("  tangent: %lld x %lld, %zu nonzeros, %d solver iterations\n",
                static_cast<long long>(res.tangent_dim),
                static_cast<long long>(res.tangent_dim), res.tangent_nnz,
                res.solver_iterations);
    if (!res.passed()) throw ValidationError("2d-tensile validation failed");
    return 0;
  }
  throw CLI::ValidationError("unknown case '" + case_name +
                             "' (expected 1d-tensile | 2d-tensile)");
}

int cmd_bench(const CommonOpts& opts, std::vector<unsigned> thread_list) {
  deck::Deck d = load_with_overrides(opts.deck_path, opts.overrides);
  if (!opts.out_dir.empty()) d.output.directory = opts.out_dir;
  if (thread_list.empty()) thread_list = {1, 2, 4};

  const NodeCloud cloud = d.build_cloud();
  const NeighborList nbrs = build_neighborhoods(cloud, d.delta);
  const auto model = d.build_model(cloud, nbrs);
  const Constraints bc = Constraints::from_cloud(cloud);
  fs::create_directories(d.output.directory);

  std::vector<double> walls;
  for (const unsigned p : thread_list) {
    rt::set_thread_count(p);
    rt::reset_counters();
    FieldState state = d.build_state(cloud);
    const auto t0 = std::chrono::steady_clock::now();
    if (d.integrator == deck::IntegratorKind::kExplicit) {
      ExplicitConfig cfg = d.explicit_cfg;
      cfg.with_energy = false;
      run_explicit(cloud, *model, bc, state, cfg);
    } else {
      run_implicit(cloud, nbrs, *model, bc, state, d.implicit_cfg);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    walls.push_back(wall);
    const auto counters = rt::collect_counters();
    std::ofstream out(fs::path(d.output.directory) /
                      ("counters_" + std::to_string(p) + ".csv"));
    out << rt::counters_csv(counters);
    std::printf("threads %u: wall %.3f s\n", p, wall);
  }

  const fs::path path = fs::path(d.output.directory) / "bench.csv";
  std::ofstream out(path);
  out.precision(17);
  out << "threads,wall_s,speedup,efficiency,model_wall_s\n";
  for (std::size_t k = 0; k < thread_list.size(); ++k) {
    const double speedup = walls[0] / walls[k];
    const double eff = speedup / thread_list[k];
    // Complexity model: work/p with fixed n, normalized to the 1-thread run.
    const double model_wall = walls[0] / thread_list[k];
    out << thread_list[k] << ',' << walls[k] << ',' << speedup << ',' << eff << ','
        << model_wall << '\n';
  }
  std::printf("bench table: %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perikit: meshfree peridynamics toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<double> h_values;
  double ratio = 2.0;
  std::vector<std::string> masks;
  std::string case_name;
  std::vector<unsigned> thread_list;

  auto add_common = [&](CLI::App* cmd, bool needs_deck) {
    if (needs_deck) {
      cmd->add_option("--deck", opts.deck_path, "deck file (YAML)")->required();
    }
    cmd->add_option("--threads", opts.threads, "worker thread count");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "snapshot format (csv | vtk)")
        ->check(CLI::IsMember({"csv", "vtk"}));
    cmd->add_option("--override", opts.overrides,
                    "deck override key=value (repeatable), e.g. integrator.dt=1e-5");
  };

  auto* run = app.add_subcommand("run", "run a simulation deck");
  add_common(run, true);

  auto* converge = app.add_subcommand("converge", "mesh convergence-rate study");
  add_common(converge, true);
  converge->add_option("--spacings", h_values, "mesh spacings, coarse to fine (>= 3)")
      ->required()
      ->delimiter(',');
  converge->add_option("--ratio", ratio, "refinement ratio (default 2)");
  converge->add_option("--mask", masks, "time window t0:t1 excluded from the average");

  auto* validate = app.add_subcommand("validate", "compare against reference solutions");
  validate->add_option("--case", case_name, "1d-tensile | 2d-tensile")->required();
  validate->add_option("--threads", opts.threads, "worker thread count");
  validate->add_option("--out", opts.out_dir, "report directory");

  auto* bench = app.add_subcommand("bench", "thread-scaling benchmark");
  add_common(bench, true);
  bench->add_option("--threads-list", thread_list, "thread counts, e.g. 1,2,4")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(opts);
    if (converge->parsed()) return cmd_converge(opts, h_values, ratio, masks);
    if (validate->parsed()) return cmd_validate(opts, case_name);
    if (bench->parsed()) return cmd_bench(opts, thread_list);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 4;
  } catch (const DeckError& e) {
    std::cerr << "deck error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
