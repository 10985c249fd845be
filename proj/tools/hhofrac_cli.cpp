// Command-line front end: solve, resume, mesh-info, cut-notch.

#include <hhofrac/hhofrac.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, not_converged = 3, io_error = 4 };

struct Overrides {
  int threads = 0;
  std::string output_dir;
  int snapshot_every = -1;
  bool quiet = false;
  bool no_wall_time = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads for local assembly")->check(CLI::PositiveNumber);
    cmd->add_option("--output-dir", output_dir, "Output directory (overrides the config)");
    cmd->add_option("--snapshot-every", snapshot_every, "Write a VTK snapshot every K steps (0: off)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", quiet, "Suppress progress messages");
    cmd->add_flag("--no-wall-time", no_wall_time, "Write 0 in the wall-time column for reproducible tables");
  }

  void apply(hhofrac::RunConfig& c) const {
    if (threads > 0) c.solver.threads = threads;
    if (!output_dir.empty()) c.output.directory = output_dir;
    if (snapshot_every >= 0) c.output.snapshot_every = snapshot_every;
  }

  hhofrac::RunOptions options() const {
    hhofrac::RunOptions o;
    o.log = quiet ? nullptr : &std::cerr;
    o.record_wall_time = !no_wall_time;
    return o;
  }
};

void report(const hhofrac::BenchmarkRun& run) {
  const auto& r = run.result();
  std::cout << "steps " << run.state().step << "\n"
            << "peak_force " << hhofrac::format_double(r.peak_force) << "\n"
            << "peak_load " << hhofrac::format_double(r.peak_load) << "\n"
            << "stopped_on_drop " << (r.stop == hhofrac::StopReason::force_drop ? "yes" : "no") << "\n"
            << "csv " << run.output_path(run.config().output.csv) << "\n";
}

int mesh_info(const std::string& path) {
  const hhofrac::Mesh mesh = hhofrac::read_mesh_file(path);
  std::map<std::size_t, std::size_t> sides;
  for (const auto& c : mesh.cells()) ++sides[c.num_faces()];
  std::map<int, std::size_t> markers;
  std::map<int, double> lengths;
  std::size_t internal = 0;
  for (const auto& f : mesh.faces()) {
    if (!f.is_boundary()) {
      ++internal;
      continue;
    }
    ++markers[f.marker];
    lengths[f.marker] += f.measure;
  }
  double area = 0.;
  for (const auto& c : mesh.cells()) area += c.measure;
  std::cout << "vertices " << mesh.num_vertices() << "\ncells " << mesh.num_cells() << "\nfaces " << mesh.num_faces()
            << "\ninternal_faces " << internal << "\nboundary_faces " << mesh.num_boundary_faces() << "\narea "
            << hhofrac::format_double(area) << "\nboundary_length " << hhofrac::format_double(mesh.boundary_measure())
            << "\nh_min " << hhofrac::format_double(mesh.min_diameter()) << "\nh_max "
            << hhofrac::format_double(mesh.max_diameter()) << "\n";
  for (const auto& [k, n] : sides) std::cout << "cells_with_" << k << "_faces " << n << "\n";
  for (const auto& [m, n] : markers)
    std::cout << "marker " << m << " faces " << n << " length " << hhofrac::format_double(lengths[m]) << "\n";
  return ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"HHO phase-field brittle fracture solver"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, mesh_path, out_path;
  double segment[4] = {0., 0., 0., 0.};
  Overrides solve_flags, resume_flags;

  auto* solve = app.add_subcommand("solve", "Run a configured simulation");
  solve->add_option("config", config_path, "Configuration file")->required();
  solve_flags.add_to(solve);

  auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  resume_flags.add_to(resume);

  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics");
  info->add_option("mesh", mesh_path, "Mesh file")->required();

  auto* cut = app.add_subcommand("cut-notch", "Cut a notch along mesh edges");
  cut->add_option("mesh", mesh_path, "Input mesh file")->required();
  for (int i = 0; i < 4; ++i)
    cut->add_option(std::string(i % 2 ? "y" : "x") + std::to_string(i / 2), segment[i], "Notch segment coordinate")
        ->required();
  cut->add_option("out", out_path, "Output mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*solve) {
      hhofrac::RunConfig config = hhofrac::read_config_file(config_path);
      solve_flags.apply(config);
      hhofrac::BenchmarkRun run(std::move(config));
      run.run(solve_flags.options());
      report(run);
    } else if (*resume) {
      hhofrac::BenchmarkRun run =
          hhofrac::BenchmarkRun::from_checkpoint(checkpoint_path, [&](hhofrac::RunConfig& c) { resume_flags.apply(c); });
      run.run(resume_flags.options());
      report(run);
    } else if (*info) {
      return mesh_info(mesh_path);
    } else if (*cut) {
      const hhofrac::Mesh mesh = hhofrac::read_mesh_file(mesh_path);
      const hhofrac::Mesh notched =
          hhofrac::cut_notch(mesh, hhofrac::Point(segment[0], segment[1]), hhofrac::Point(segment[2], segment[3]));
      hhofrac::write_mesh_file(notched, out_path);
      std::cout << "vertices " << mesh.num_vertices() << " -> " << notched.num_vertices() << "\n";
    }
  } catch (const hhofrac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const hhofrac::MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return config_error;
  } catch (const hhofrac::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return config_error;
  } catch (const hhofrac::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return not_converged;
  } catch (const hhofrac::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  return ok;
}
