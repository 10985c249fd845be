#pragma once

// Pseudo-time loop for a configured run: load stepping, reactions, CSV rows,
// VTK snapshots and restartable checkpoints.

#include "common.hpp"
#include "config.hpp"
#include "output.hpp"
#include "solver.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hhofrac {

struct RunOptions {
  /// Write CSV, snapshots and checkpoints below the output directory.
  bool write_files = true;
  /// Record elapsed seconds in the CSV; when false the column is 0 so that
  /// repeated runs give byte-identical tables.
  bool record_wall_time = true;
  /// Progress messages (nullptr: silent).
  std::ostream* log = nullptr;
  int log_every = 50;
  /// Called after every accepted step.
  std::function<void(const StateFields&, const LoadRow&, const StepReport&)> on_step;
};

enum class StopReason { completed, force_drop };

struct RunResult {
  std::vector<LoadRow> rows;
  double peak_force = 0.;
  double peak_load = 0.;
  int peak_step = 0;
  StopReason stop = StopReason::completed;
  /// Accepted steps at which some cell's maximal history value decreased.
  int history_violations = 0;
  int phase_range_warnings = 0;
};

class BenchmarkRun {
public:
  explicit BenchmarkRun(RunConfig config) : BenchmarkRun(std::move(config), std::nullopt) {}

  const RunConfig& config() const { return config_; }
  RunConfig& config() { return config_; }
  const FractureProblem& problem() const { return *problem_; }
  FractureProblem& problem() { return *problem_; }
  const StateFields& state() const { return state_; }
  const RunResult& result() const { return result_; }

  std::string output_path(const std::string& name) const {
    return (std::filesystem::path(config_.output.directory) / name).string();
  }

  /// Advances until `loading.steps` steps are done or the force-drop stop
  /// fires. Solver failures propagate after flushing outputs and writing a
  /// checkpoint of the last accepted step.
  const RunResult& run(const RunOptions& opt = {}) {
    if (opt.write_files) prepare_output();
    std::ofstream csv;
    if (opt.write_files) {
      csv.open(output_path(config_.output.csv), std::ios::binary | std::ios::trunc);
      if (!csv) throw IoError("cannot open '" + output_path(config_.output.csv) + "' for writing");
      csv << csv_header() << '\n';
      for (const auto& r : result_.rows) csv << format_csv_row(r) << '\n';
      csv.flush();
      if (state_.step == 0 && config_.output.snapshot_every > 0) write_snapshot();
    }
    const auto start = std::chrono::steady_clock::now();
    const std::vector<int> loaded = config_.loading.loaded_markers;
    const double length = problem_->boundary_length(loaded);
    while (state_.step < config_.loading.steps && result_.stop == StopReason::completed) {
      const int n = state_.step + 1;
      const double load = config_.loading.schedule.load(n);
      StepReport report;
      try {
        report = problem_->staggered_step(state_, load);
      } catch (const SolverError&) {
        if (opt.write_files) {
          csv.flush();
          write_checkpoint(output_path("checkpoint.json"));
        }
        throw;
      }
      LoadRow row;
      row.step = state_.step;
      row.time = state_.time;
      row.load = load;
      row.force = problem_->reaction_force(state_, loaded);
      row.force_average = row.force.norm() / length;
      row.iterations = report.iterations;
      row.wall_time =
          opt.record_wall_time ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.;
      result_.rows.push_back(row);
      track_history();
      if (report.phase_out_of_range) {
        ++result_.phase_range_warnings;
        if (opt.log)
          *opt.log << "warning: step " << row.step << " phase field range [" << report.phase_min << ", "
                   << report.phase_max << "]\n";
      }
      const double f = row.force.norm();
      if (f > result_.peak_force) {
        result_.peak_force = f;
        result_.peak_load = load;
        result_.peak_step = row.step;
      } else if (config_.loading.stop_drop_ratio > 0. && f < config_.loading.stop_drop_ratio * result_.peak_force) {
        result_.stop = StopReason::force_drop;
      }
      if (opt.write_files) {
        csv << format_csv_row(row) << '\n';
        csv.flush();
        if (config_.output.snapshot_every > 0 && row.step % config_.output.snapshot_every == 0) write_snapshot();
        if (config_.output.checkpoint_every > 0 && row.step % config_.output.checkpoint_every == 0)
          write_checkpoint(output_path("checkpoint.json"));
      }
      if (opt.log && (opt.log_every <= 1 || row.step % opt.log_every == 0 || result_.stop != StopReason::completed))
        *opt.log << "step " << row.step << " load " << format_double(load) << " |F| " << format_double(f)
                 << " iterations " << report.iterations << (report.converged ? "" : " (not converged)") << '\n';
      if (opt.on_step) opt.on_step(state_, row, report);
    }
    if (opt.write_files) {
      if (config_.output.snapshot_every > 0 && state_.step % config_.output.snapshot_every != 0) write_snapshot();
      write_checkpoint(output_path("checkpoint.json"));
    }
    return result_;
  }

  void write_snapshot() const {
    char name[64];
    std::snprintf(name, sizeof name, "_%06d.vtk", state_.step);
    write_vtk(make_snapshot(*problem_, state_), output_path(config_.output.prefix + name));
  }

  nlohmann::json checkpoint_json() const {
    nlohmann::json j;
    j["format"] = "hhofrac-checkpoint";
    j["version"] = 1;
    j["config"] = config_.source;
    j["mesh"] = format_mesh(problem_->mesh());
    j["step"] = state_.step;
    j["time"] = state_.time;
    j["load"] = state_.load;
    j["displacement"] = std::vector<double>(state_.displacement.data(), state_.displacement.data() + state_.displacement.size());
    j["phase"] = std::vector<double>(state_.phase.data(), state_.phase.data() + state_.phase.size());
    j["history_storage"] = std::string(to_string(state_.history.storage()));
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& h : state_.history.cells())
      cells.push_back({{"strain", std::vector<double>(h.strain.data(), h.strain.data() + h.strain.size())},
                       {"nodes", h.nodes},
                       {"seed", h.seed}});
    j["history"] = std::move(cells);
    std::vector<std::string> rows;
    for (const auto& r : result_.rows) rows.push_back(format_csv_row(r));
    j["rows"] = rows;
    j["peak"] = {{"force", result_.peak_force}, {"load", result_.peak_load}, {"step", result_.peak_step}};
    j["history_violations"] = result_.history_violations;
    j["stopped_on_drop"] = result_.stop == StopReason::force_drop;
    return j;
  }

  void write_checkpoint(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    write_text_file(tmp, checkpoint_json().dump());
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
  }

  /// Restores a run from a checkpoint; `adjust` may override configuration
  /// fields (threads, output directory, cadence) before the problem is built.
  static BenchmarkRun from_checkpoint(const std::string& path, const std::function<void(RunConfig&)>& adjust = {}) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("cannot parse checkpoint '" + path + "': " + e.what());
    }
    try {
      if (j.at("format") != "hhofrac-checkpoint" || j.at("version") != 1)
        throw IoError("unsupported checkpoint format in '" + path + "'");
      RunConfig config = parse_config(j.at("config").get<std::string>());
      if (adjust) adjust(config);
      BenchmarkRun run(std::move(config), parse_mesh(j.at("mesh").get<std::string>()));
      run.load_state(j);
      return run;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed checkpoint '" + path + "': " + e.what());
    }
  }

private:
  BenchmarkRun(RunConfig config, std::optional<Mesh> mesh) : config_(std::move(config)) {
    config_.validate();
    Mesh m = mesh ? std::move(*mesh) : build_mesh(config_);
    problem_ = std::make_unique<FractureProblem>(std::move(m), config_.material, config_.solver,
                                                 config_.dirichlet_conditions());
    state_ = problem_->initial_state();
    if (config_.notch.mode == NotchMode::history_seed)
      state_.history = init_history_notch(problem_->mesh(), problem_->history_geometry(), config_.notch.a,
                                          config_.notch.b, config_.notch.seed_amplitude, config_.material,
                                          config_.solver.history_storage, config_.notch.seed_halfwidth);
    snapshot_history();
  }

  void prepare_output() const {
    std::error_code ec;
    std::filesystem::create_directories(config_.output.directory, ec);
    if (ec) throw IoError("cannot create output directory '" + config_.output.directory + "': " + ec.message());
  }

  void snapshot_history() {
    previous_max_.resize(state_.history.num_cells());
    for (std::size_t i = 0; i < previous_max_.size(); ++i) previous_max_[i] = state_.history.max_value(static_cast<Index>(i));
  }

  void track_history() {
    bool decreased = false;
    for (std::size_t i = 0; i < previous_max_.size(); ++i) {
      const double v = state_.history.max_value(static_cast<Index>(i));
      if (v < previous_max_[i]) decreased = true;
      previous_max_[i] = v;
    }
    if (decreased) ++result_.history_violations;
  }

  void load_state(const nlohmann::json& j) {
    auto vec = [](const nlohmann::json& a) {
      const auto v = a.get<std::vector<double>>();
      return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    };
    state_.step = j.at("step").get<int>();
    state_.time = j.at("time").get<double>();
    state_.load = j.at("load").get<double>();
    state_.displacement = vec(j.at("displacement"));
    state_.phase = vec(j.at("phase"));
    if (state_.displacement.size() != problem_->dofs().displacement_size() ||
        state_.phase.size() != problem_->dofs().phase_size())
      throw IoError("checkpoint field sizes do not match the mesh");
    state_.history = HistoryState(problem_->history_geometry(), parse_history_storage(j.at("history_storage").get<std::string>()));
    const auto& cells = j.at("history");
    if (cells.size() != state_.history.num_cells()) throw IoError("checkpoint history size does not match the mesh");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CellHistory& h = state_.history.cell(static_cast<Index>(i));
      const auto strain = cells[i].at("strain").get<std::vector<double>>();
      if (strain.size() != static_cast<std::size_t>(elastic_dofs::strain)) throw IoError("bad strain record in checkpoint");
      h.strain = Eigen::Map<const Vector>(strain.data(), elastic_dofs::strain);
      h.nodes = cells[i].at("nodes").get<std::vector<double>>();
      if (h.nodes.size() != problem_->history_geometry().quadrature(static_cast<Index>(i)).size())
        throw IoError("bad history record in checkpoint");
      h.seed = cells[i].at("seed").get<double>();
      detail::refresh_cell_summary(problem_->history_geometry(), static_cast<Index>(i), h);
    }
    for (const auto& r : j.at("rows")) result_.rows.push_back(parse_csv_row(r.get<std::string>()));
    result_.peak_force = j.at("peak").at("force").get<double>();
    result_.peak_load = j.at("peak").at("load").get<double>();
    result_.peak_step = j.at("peak").at("step").get<int>();
    result_.history_violations = j.at("history_violations").get<int>();
    if (j.at("stopped_on_drop").get<bool>()) result_.stop = StopReason::force_drop;
    snapshot_history();
  }

  RunConfig config_;
  std::unique_ptr<FractureProblem> problem_;
  StateFields state_;
  RunResult result_;
  std::vector<double> previous_max_;
};

} // namespace hhofrac
