#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hls::cli {

using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands{
    {"energy", Command::energy},
    {"transform", Command::transform},
    {"positivity", Command::positivity},
    {"represent", Command::represent},
    {"symmetrize", Command::symmetrize},
    {"hemiball", Command::hemiball},
    {"lizhu-check", Command::lizhu_check},
    {"counterexample", Command::counterexample},
    {"sharp-constant", Command::sharp_constant},
};

// A JSON object read with its path; keys never read are rejected on close().
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where() + ": " + what); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(path_ + "/" + key + ": " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  Node child(const std::string& key) {
    seen_.insert(key);
    return Node(j_.at(key), path_ + "/" + key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(key, "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  /// A number broadcast to `dim` entries, or an array of exactly `dim` numbers.
  std::vector<double> vec(const std::string& key, int dim, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    return as_vector(j_.at(key), key, dim);
  }

  std::vector<std::vector<double>> vec_list(const std::string& key, int dim) {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of points");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_vector(v[i], key + "/" + std::to_string(i), dim));
    return out;
  }

  void close() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path_ + "/" + it.key() + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "/" : path_; }

  std::vector<double> as_vector(const json& v, const std::string& key, int dim) const {
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(dim), v.get<double>());
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      fail(key, "expected a number or an array of " + std::to_string(dim) + " numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) fail(key, "expected numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

void read_grid(Node node, RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  const int default_points = n == 1 ? 256 : (n == 2 ? 64 : 24);
  cfg.grid.min = node.vec("min", n, std::vector<double>(static_cast<std::size_t>(n), -10.0));
  cfg.grid.max = node.vec("max", n, std::vector<double>(static_cast<std::size_t>(n), 10.0));
  const std::vector<double> pts = node.vec("points", n, std::vector<double>(static_cast<std::size_t>(n), default_points));
  node.close();
  cfg.grid.points.clear();
  for (double p : pts) {
    if (p != std::floor(p) || p < 8 || p > 4096) node.fail("points", "points per axis must be an integer in [8, 4096]");
    cfg.grid.points.push_back(static_cast<int>(p));
  }
  double h0 = 0.0;
  for (int d = 0; d < n; ++d) {
    if (!(cfg.grid.max[d] > cfg.grid.min[d])) node.fail("max", "max must exceed min on every axis");
    const double h = (cfg.grid.max[d] - cfg.grid.min[d]) / cfg.grid.points[d];
    if (d == 0) h0 = h;
    if (std::abs(h - h0) > 1e-9 * h0) node.fail("points", "the spacing (max - min) / points must agree on all axes");
  }
}

void read_function(Node node, RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  FunctionSpec& f = cfg.function;
  f.family = node.string("family", f.family);
  static const std::set<std::string> families{"extremizer", "density", "gaussian", "indicator", "file"};
  if (!families.count(f.family)) node.fail("family", "unknown family '" + f.family + "'");
  f.alpha = node.number("alpha", 1.0);
  f.beta = node.number("beta", 1.0);
  f.amplitude = node.number("amplitude", 1.0);
  f.width = node.number("width", 1.0);
  f.center = node.vec("center", n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  f.lo = node.vec("lo", n, std::vector<double>(static_cast<std::size_t>(n), -1.0));
  f.hi = node.vec("hi", n, std::vector<double>(static_cast<std::size_t>(n), 1.0));
  f.file = node.string("file", "");
  node.close();
  if (!(f.alpha > 0.0)) node.fail("alpha", "alpha must be positive");
  if (!(f.beta > 0.0)) node.fail("beta", "beta must be positive");
  if (!(f.width > 0.0)) node.fail("width", "width must be positive");
  if (f.family == "file" && f.file.empty()) node.fail("file", "family 'file' needs a path");
  if (f.family != "file" && !f.file.empty()) node.fail("file", "a file path requires family 'file'");
  for (int d = 0; d < n; ++d)
    if (!(f.hi[d] > f.lo[d])) node.fail("hi", "hi must exceed lo on every axis");
}

void read_region(Node node, RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  RegionSpec r;
  r.kind = node.string("kind", "");
  if (r.kind != "ball" && r.kind != "halfspace" && r.kind != "cayley")
    node.fail("kind", "expected 'ball', 'halfspace' or 'cayley'");
  if (r.kind == "ball") {
    r.center = node.vec("center", n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    r.radius = node.number("radius", 1.0);
    if (!(r.radius > 0.0)) node.fail("radius", "radius must be positive");
  } else if (r.kind == "halfspace") {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    e.back() = 1.0;
    r.normal = node.vec("normal", n, e);
    r.offset = node.number("offset", 0.0);
    if (!(to_point(r.normal).norm() > 0.0)) node.fail("normal", "normal must be nonzero");
  }
  node.close();
  cfg.region = r;
}

void read_tolerances(Node node, Tolerances& t) {
  auto positive = [&](const char* key, double& slot) {
    slot = node.number(key, slot);
    if (!(slot > 0.0)) node.fail(key, "tolerance must be positive");
  };
  positive("defect_sigma", t.defect_sigma);
  positive("strict_factor", t.strict_factor);
  positive("quotient_slack", t.quotient_slack);
  positive("fit_error", t.fit_error);
  positive("hemiball", t.hemiball);
  positive("invariance", t.invariance);
  positive("mass_identity", t.mass_identity);
  positive("invariant_fit", t.invariant_fit);
  node.close();
}

void read_schedule(Node node, Schedule& s) {
  s.max_sweeps = static_cast<int>(node.integer("max_sweeps", s.max_sweeps));
  s.tol_stop = node.number("tol_stop", s.tol_stop);
  s.min_gain = node.number("min_gain", s.min_gain);
  s.randomized = node.boolean("randomized", s.randomized);
  node.close();
  if (s.max_sweeps < 1) node.fail("max_sweeps", "must be at least 1");
  if (!(s.tol_stop >= 0.0)) node.fail("tol_stop", "must be nonnegative");
  if (!(s.min_gain >= 0.0)) node.fail("min_gain", "must be nonnegative");
}

void read_hemiball(Node node, RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  cfg.hemiball.center = node.vec("center", n, {});
  cfg.hemiball.direction = node.vec("direction", n, {});
  cfg.hemiball.u = node.number("u", 1.0);
  node.close();
  if (cfg.hemiball.center.empty() == cfg.hemiball.direction.empty())
    node.fail("give either 'center' or 'direction' (with 'u')");
  if (!cfg.hemiball.direction.empty() && !(cfg.hemiball.u > 0.0)) node.fail("u", "u must be positive");
}

void read_lizhu(Node node, RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  cfg.lizhu.centers = node.vec_list("centers", n);
  cfg.lizhu.probes = node.vec_list("probes", n);
  cfg.lizhu.origin = node.vec("origin", n, {});
  node.close();
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "?";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + line_column(text, e.byte) + ": " + e.what());
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  Node root(doc, "");

  const std::string cmd = root.string("command", "");
  const auto it = kCommands.find(cmd);
  if (it == kCommands.end()) root.fail("command", cmd.empty() ? "missing" : "unknown command '" + cmd + "'");
  cfg.command = it->second;

  if (!root.has("kernel")) root.fail("kernel", "missing");
  {
    Node k = root.child("kernel");
    const long long dim = k.integer("dim", 0);
    const double lambda = k.number("lambda", 0.0);
    if (!k.has("lambda")) k.fail("lambda", "missing");
    k.close();
    try {
      cfg.kernel = KernelParams(static_cast<int>(dim), lambda);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("/kernel: ") + e.what());
    }
  }

  cfg.function.family = (cfg.command == Command::hemiball || cfg.command == Command::lizhu_check) ? "density"
                                                                                                   : "extremizer";
  if (root.has("function")) {
    read_function(root.child("function"), cfg);
  } else {
    read_function(Node(json::object(), "/function"), cfg);
  }
  const bool from_file = cfg.function.family == "file";
  if (root.has("grid")) {
    if (from_file) root.fail("grid", "a field file carries its own grid");
    read_grid(root.child("grid"), cfg);
  } else {
    read_grid(Node(json::object(), "/grid"), cfg);
  }
  if (root.has("region")) read_region(root.child("region"), cfg);
  if (root.has("tolerances")) read_tolerances(root.child("tolerances"), cfg.tol);
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 0));
  if (root.has("schedule")) read_schedule(root.child("schedule"), cfg.schedule);
  cfg.schedule.seed = cfg.seed;
  if (root.has("hemiball")) read_hemiball(root.child("hemiball"), cfg);
  if (root.has("lizhu")) read_lizhu(root.child("lizhu"), cfg);
  cfg.example = root.string("example", cfg.example);
  root.close();

  // per-command requirements
  const bool needs_region = cfg.command == Command::transform || cfg.command == Command::positivity;
  if (needs_region && !cfg.region) root.fail("region", "required by '" + cmd + "'");
  if (cfg.command == Command::positivity && cfg.region && cfg.region->kind == "cayley")
    root.fail("region", "positivity needs a ball or a half-space");
  if (cfg.command == Command::hemiball && !doc.contains("hemiball")) root.fail("hemiball", "required by 'hemiball'");
  if (cfg.command == Command::counterexample) {
    if (cfg.kernel.dim != 3) root.fail("kernel", "counterexamples live in dimension 3");
    if (cfg.example != "bumps" && cfg.example != "newton") root.fail("example", "expected 'bumps' or 'newton'");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

Grid make_grid(const RunConfig& cfg) {
  const int n = cfg.kernel.dim;
  Point origin(n);
  std::array<int, 3> extent{1, 1, 1};
  for (int d = 0; d < n; ++d) {
    origin[d] = cfg.grid.min[static_cast<std::size_t>(d)];
    extent[static_cast<std::size_t>(d)] = cfg.grid.points[static_cast<std::size_t>(d)];
  }
  return Grid(origin, (cfg.grid.max[0] - cfg.grid.min[0]) / cfg.grid.points[0], extent);
}

Field make_function(const RunConfig& cfg) {
  const FunctionSpec& f = cfg.function;
  const KernelParams& kp = cfg.kernel;
  if (f.family == "file") {
    std::filesystem::path p(f.file);
    if (p.is_relative() && !cfg.base_dir.empty()) p = cfg.base_dir / p;
    Field v = load_field_csv(p.string());
    if (v.dim() != kp.dim) throw ConfigError("/function/file: field dimension does not match kernel.dim");
    return v;
  }
  const Grid g = make_grid(cfg);
  const Point c = to_point(f.center);
  if (f.family == "extremizer") return make_extremizer(ExtremizerSpec(f.alpha, f.beta, c), kp, g);
  if (f.family == "density")
    return make_extremizer(ExtremizerSpec(f.alpha, f.beta, c, ExtremizerSpec::Role::density), kp, g);
  std::vector<double> vals(g.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const Point x = g.point(i);
    if (f.family == "gaussian") {
      vals[i] = f.amplitude * std::exp(-(x - c).norm2() / (f.width * f.width));
    } else {
      bool inside = true;
      for (int d = 0; d < kp.dim; ++d)
        inside = inside && x[d] > f.lo[static_cast<std::size_t>(d)] && x[d] < f.hi[static_cast<std::size_t>(d)];
      vals[i] = inside ? f.amplitude : 0.0;
    }
  }
  return Field(g, std::move(vals));
}

Region make_region(const RunConfig& cfg) {
  if (!cfg.region || cfg.region->kind == "cayley") throw ConfigError("/region: a ball or half-space is required");
  const RegionSpec& r = *cfg.region;
  if (r.kind == "ball") return Ball(to_point(r.center), r.radius);
  return HalfSpace::from_direction(to_point(r.normal), r.offset);
}

}  // namespace hls::cli
