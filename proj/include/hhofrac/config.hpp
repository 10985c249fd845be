#pragma once

// Run configuration: a flat `key = value` format with `[section]` headers,
// benchmark presets and the piecewise-constant load schedule.

#include "common.hpp"
#include "energy.hpp"
#include "history.hpp"
#include "mesh.hpp"
#include "meshgen.hpp"
#include "solver.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hhofrac {

// ---------------------------------------------------------------------------
// INI document
// ---------------------------------------------------------------------------

/// Parsed `section.key -> value` entries with line numbers for messages.
class IniDocument {
public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(std::string_view text) {
    IniDocument doc;
    std::istringstream in{std::string(text)};
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = raw.substr(0, raw.find_first_of("#;"));
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' outside a section");
      const std::string full = section + "." + key;
      if (doc.entries_.count(full)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
      doc.entries_[full] = {trim(line.substr(eq + 1)), line_no};
    }
    return doc;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const { return get(key).value_or(fallback); }

  double number(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_number(key, *v) : fallback;
  }

  int integer(const std::string& key, int fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const double d = parse_number(key, *v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("'" + key + "' must be an integer, got '" + *v + "'");
    return static_cast<int>(d);
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    throw ConfigError("'" + key + "' must be true or false, got '" + *v + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const auto v = get(key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(parse_number(key, tok));
    return out;
  }

  /// Throws on any entry that was never read.
  void reject_unknown() const {
    for (const auto& [key, entry] : entries_)
      if (!used_.count(key)) throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double parse_number(const std::string& key, const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(d))
      throw ConfigError("'" + key + "' expects a number, got '" + s + "'");
    return d;
  }

private:
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Load schedule
// ---------------------------------------------------------------------------

/// Piecewise-constant increments, e.g. "500:1e-5, *:1e-6": the first 500
/// steps add 1e-5 each, later steps 1e-6.
class LoadSchedule {
public:
  struct Segment {
    int steps = 0; ///< 0 means "all remaining steps"
    double increment = 0.;
  };

  LoadSchedule() = default;
  explicit LoadSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) { validate(); }

  static LoadSchedule parse(std::string_view text) {
    std::vector<Segment> segs;
    std::string s(text);
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = IniDocument::trim(item);
      if (item.empty()) throw ConfigError("empty load schedule entry in '" + s + "'");
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("load schedule entry '" + item + "' lacks ':'");
      const std::string count = IniDocument::trim(item.substr(0, colon));
      Segment seg;
      if (count == "*") {
        seg.steps = 0;
      } else {
        const double n = IniDocument::parse_number("schedule", count);
        if (n < 1 || n != std::floor(n)) throw ConfigError("load schedule step count must be a positive integer");
        seg.steps = static_cast<int>(n);
      }
      seg.increment = IniDocument::parse_number("schedule", IniDocument::trim(item.substr(colon + 1)));
      segs.push_back(seg);
    }
    return LoadSchedule(std::move(segs));
  }

  const std::vector<Segment>& segments() const { return segments_; }

  /// Increment applied at step n (1-based).
  double increment(int n) const {
    int start = 0;
    for (const auto& seg : segments_) {
      if (seg.steps == 0 || n <= start + seg.steps) return seg.increment;
      start += seg.steps;
    }
    throw ConfigError("load schedule exhausted at step " + std::to_string(n));
  }

  /// Imposed load after n steps.
  double load(int n) const {
    double u = 0.;
    for (int k = 1; k <= n; ++k) u += increment(k);
    return u;
  }

  /// Number of steps covered by finite segments (or max int if open ended).
  int capacity() const {
    int total = 0;
    for (const auto& seg : segments_) {
      if (seg.steps == 0) return std::numeric_limits<int>::max();
      total += seg.steps;
    }
    return total;
  }

  std::string to_string() const {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (i) out << ", ";
      if (segments_[i].steps == 0) out << "*";
      else out << segments_[i].steps;
      out << ":" << segments_[i].increment;
    }
    return out.str();
  }

private:
  void validate() const {
    if (segments_.empty()) throw ConfigError("load schedule is empty");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (!(segments_[i].increment >= 0.)) throw ConfigError("load increments must be non-negative");
      if (segments_[i].steps == 0 && i + 1 != segments_.size())
        throw ConfigError("'*' may only appear in the last load schedule entry");
    }
  }

  std::vector<Segment> segments_;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class NotchMode { mesh_cut, history_seed, none };

inline NotchMode parse_notch_mode(std::string_view s) {
  if (s == "mesh-cut") return NotchMode::mesh_cut;
  if (s == "history-seed") return NotchMode::history_seed;
  if (s == "none") return NotchMode::none;
  throw ConfigError("unknown notch mode '" + std::string(s) + "' (mesh-cut | history-seed | none)");
}

inline std::string_view to_string(NotchMode m) {
  switch (m) {
  case NotchMode::mesh_cut: return "mesh-cut";
  case NotchMode::history_seed: return "history-seed";
  case NotchMode::none: return "none";
  }
  return "?";
}

struct MeshSpec {
  /// structured-triangles | hexagonal | quadtree | file
  std::string kind = "structured-triangles";
  std::string file;
  int divisions = 50;
  int quadtree_base = 8;
  int quadtree_levels = 4;
  /// Boxes refined to the finest quadtree level.
  std::vector<Box> refine;
};

struct NotchSpec {
  NotchMode mode = NotchMode::mesh_cut;
  Point a = Point(0.5, 0.);
  Point b = Point(0.5, 0.5);
  double seed_amplitude = 1000.;
  /// <= 0: half of ell.
  double seed_halfwidth = 0.;
};

struct LoadingSpec {
  std::string preset = "mode-I";
  std::vector<int> loaded_markers{marker::left};
  Vector2 direction = Vector2(-1., 0.);
  std::vector<int> fixed_markers{marker::right};
  LoadSchedule schedule = LoadSchedule({{500, 1e-5}, {0, 1e-6}});
  int steps = 100;
  /// Stop once the force falls below this fraction of its running peak (0: off).
  double stop_drop_ratio = 0.;
};

struct OutputSpec {
  std::string directory = "output";
  std::string csv = "load_displacement.csv";
  std::string prefix = "state";
  int snapshot_every = 0;
  int checkpoint_every = 0;
};

struct RunConfig {
  MeshSpec mesh;
  MaterialParams material;
  SolverConfig solver;
  NotchSpec notch;
  LoadingSpec loading;
  OutputSpec output;
  /// Directory against which relative paths in the file are resolved.
  std::string base_directory;
  /// Text the configuration was parsed from (kept for checkpoints).
  std::string source;

  void validate() const {
    material.validate();
    solver.validate();
    if (loading.steps < 1) throw ConfigError("loading.steps must be at least 1");
    if (loading.steps > loading.schedule.capacity()) throw ConfigError("loading.steps exceeds the load schedule");
    if (std::abs(loading.direction.norm() - 1.) > 1e-12) throw ConfigError("load direction must be a unit vector");
    if (loading.loaded_markers.empty()) throw ConfigError("no loaded boundary markers");
    for (int m : loading.loaded_markers)
      for (int f : loading.fixed_markers)
        if (m == f) throw ConfigError("marker " + std::to_string(m) + " is both loaded and fixed");
    if (!(loading.stop_drop_ratio >= 0. && loading.stop_drop_ratio < 1.))
      throw ConfigError("stop_drop_ratio must lie in [0, 1)");
    if (output.snapshot_every < 0 || output.checkpoint_every < 0) throw ConfigError("output cadence must be >= 0");
    if (notch.mode != NotchMode::none && (notch.b - notch.a).norm() == 0.) throw ConfigError("zero-length notch");
    if (notch.mode == NotchMode::history_seed && !(notch.seed_amplitude > 0.))
      throw ConfigError("seed amplitude must be positive");
    if (mesh.kind == "file" && mesh.file.empty()) throw ConfigError("mesh.file is required for kind = file");
  }

  std::vector<DirichletCondition> dirichlet_conditions() const {
    std::vector<DirichletCondition> out;
    out.push_back(translation_condition("loaded", loading.loaded_markers, loading.direction));
    if (!loading.fixed_markers.empty())
      out.push_back(translation_condition("fixed", loading.fixed_markers, Vector2::Zero()));
    return out;
  }
};

inline void apply_loading_preset(LoadingSpec& l, const std::string& name) {
  if (name == "mode-I") {
    l.loaded_markers = {marker::left};
    l.direction = Vector2(-1., 0.);
    l.fixed_markers = {marker::right};
    l.schedule = LoadSchedule({{500, 1e-5}, {0, 1e-6}});
  } else if (name == "mode-II") {
    l.loaded_markers = {marker::left};
    l.direction = Vector2(0., 1.);
    l.fixed_markers = {marker::right};
    l.schedule = LoadSchedule({{0, 1e-5}});
  } else if (name != "custom") {
    throw ConfigError("unknown loading preset '" + name + "' (mode-I | mode-II | custom)");
  }
  l.preset = name;
}

/// Default refinement of the mode-II quadtree: the notch tip and the quadrant
/// the shear crack runs through.
inline std::vector<Box> mode_two_refinement() { return {Box{0.45, 0.45, 1., 1.}, Box{0.4, 0.35, 0.6, 0.55}}; }

inline std::vector<Box> parse_boxes(const std::string& key, const std::string& text) {
  std::vector<Box> boxes;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream nums(item);
    std::vector<double> v;
    std::string tok;
    while (nums >> tok) v.push_back(IniDocument::parse_number(key, tok));
    if (v.size() != 4 || !(v[0] < v[2]) || !(v[1] < v[3]))
      throw ConfigError("'" + key + "' expects comma-separated boxes 'x0 y0 x1 y1'");
    boxes.push_back({v[0], v[1], v[2], v[3]});
  }
  return boxes;
}

inline std::vector<int> parse_markers(const IniDocument& doc, const std::string& key, std::vector<int> fallback) {
  if (!doc.has(key)) return fallback;
  std::vector<int> out;
  for (double d : doc.numbers(key)) {
    if (d != std::floor(d)) throw ConfigError("'" + key + "' expects integer markers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

inline RunConfig parse_config(std::string_view text, const std::string& base_directory = "") {
  const IniDocument doc = IniDocument::parse(text);
  RunConfig c;
  c.base_directory = base_directory;
  c.source = std::string(text);

  c.mesh.kind = doc.get_or("mesh.kind", c.mesh.kind);
  if (c.mesh.kind != "structured-triangles" && c.mesh.kind != "hexagonal" && c.mesh.kind != "quadtree" &&
      c.mesh.kind != "file")
    throw ConfigError("unknown mesh kind '" + c.mesh.kind + "' (structured-triangles | hexagonal | quadtree | file)");
  c.mesh.file = doc.get_or("mesh.file", "");
  c.mesh.divisions = doc.integer("mesh.divisions", c.mesh.divisions);
  c.mesh.quadtree_base = doc.integer("mesh.base", c.mesh.quadtree_base);
  c.mesh.quadtree_levels = doc.integer("mesh.levels", c.mesh.quadtree_levels);
  if (const auto r = doc.get("mesh.refine")) c.mesh.refine = parse_boxes("mesh.refine", *r);
  else if (c.mesh.kind == "quadtree") c.mesh.refine = mode_two_refinement();
  if (c.mesh.divisions < 1) throw ConfigError("mesh.divisions must be positive");

  auto& m = c.material;
  m.lambda = doc.number("material.lambda", m.lambda);
  m.mu = doc.number("material.mu", m.mu);
  m.gc = doc.number("material.gc", m.gc);
  m.ell = doc.number("material.ell", m.ell);
  m.eta = doc.number("material.eta", m.eta);
  m.g_min = doc.number("material.g_min", m.g_min);
  if (const auto f = doc.get("material.formulation")) m.formulation = parse_formulation(*f);

  auto& s = c.solver;
  s.tau = doc.number("solver.tau", s.tau);
  s.tolerance = doc.number("solver.tolerance", s.tolerance);
  s.max_iterations = doc.integer("solver.max_iterations", s.max_iterations);
  if (const auto v = doc.get("solver.linear_solver")) s.linear_solver = parse_linear_solver(*v);
  s.linear_tolerance = doc.number("solver.linear_tolerance", s.linear_tolerance);
  if (const auto v = doc.get("solver.comparison")) s.comparison = parse_comparison(*v);
  if (const auto v = doc.get("solver.stabilization")) s.stabilization = parse_stabilization(*v);
  if (const auto v = doc.get("solver.history_storage")) s.history_storage = parse_history_storage(*v);
  s.accept_on_max = doc.boolean("solver.accept_on_max", s.accept_on_max);
  s.threads = doc.integer("solver.threads", s.threads);

  auto& n = c.notch;
  if (const auto v = doc.get("notch.mode")) n.mode = parse_notch_mode(*v);
  if (doc.has("notch.segment")) {
    const auto v = doc.numbers("notch.segment");
    if (v.size() != 4) throw ConfigError("'notch.segment' expects 'x0 y0 x1 y1'");
    n.a = Point(v[0], v[1]);
    n.b = Point(v[2], v[3]);
  }
  n.seed_amplitude = doc.number("notch.seed_amplitude", n.seed_amplitude);
  n.seed_halfwidth = doc.number("notch.seed_halfwidth", n.seed_halfwidth);

  auto& l = c.loading;
  apply_loading_preset(l, doc.get_or("loading.preset", "mode-I"));
  l.loaded_markers = parse_markers(doc, "loading.loaded_markers", l.loaded_markers);
  l.fixed_markers = parse_markers(doc, "loading.fixed_markers", l.fixed_markers);
  if (doc.has("loading.direction")) {
    const auto v = doc.numbers("loading.direction");
    if (v.size() != 2) throw ConfigError("'loading.direction' expects 'dx dy'");
    l.direction = Vector2(v[0], v[1]);
  }
  if (const auto v = doc.get("loading.schedule")) l.schedule = LoadSchedule::parse(*v);
  l.steps = doc.integer("loading.steps", l.steps);
  l.stop_drop_ratio = doc.number("loading.stop_drop_ratio", l.stop_drop_ratio);

  auto& o = c.output;
  o.directory = doc.get_or("output.directory", o.directory);
  o.csv = doc.get_or("output.csv", o.csv);
  o.prefix = doc.get_or("output.prefix", o.prefix);
  o.snapshot_every = doc.integer("output.snapshot_every", o.snapshot_every);
  o.checkpoint_every = doc.integer("output.checkpoint_every", o.checkpoint_every);

  doc.reject_unknown();
  c.validate();
  return c;
}

inline RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return parse_config(text.str(), slash == std::string::npos ? "" : path.substr(0, slash));
}

inline std::string resolve_path(const RunConfig& c, const std::string& path) {
  if (path.empty() || path.front() == '/' || c.base_directory.empty()) return path;
  return c.base_directory + "/" + path;
}

/// Mesh described by the configuration, before any notch is cut.
inline Mesh build_base_mesh(const RunConfig& c) {
  const auto& m = c.mesh;
  if (m.kind == "structured-triangles") return structured_triangles(m.divisions, m.divisions);
  if (m.kind == "hexagonal") return hexagonal_mesh(m.divisions);
  if (m.kind == "quadtree") {
    const auto boxes = m.refine;
    return quadtree_mesh(m.quadtree_base, m.quadtree_levels, [boxes](const Box& b, int) {
      for (const Box& r : boxes)
        if (b.intersects(r)) return true;
      return false;
    });
  }
  return read_mesh_file(resolve_path(c, m.file));
}

/// Mesh used in the computation (notch cut applied when requested).
inline Mesh build_mesh(const RunConfig& c) {
  Mesh m = build_base_mesh(c);
  if (c.notch.mode == NotchMode::mesh_cut) m = cut_notch(m, c.notch.a, c.notch.b);
  return m;
}

} // namespace hhofrac
