#include "boltz/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace boltz {

namespace {

const char* kKeys[] = {
    "dim",           "gamma",          "nu",
    "b.kind",        "b.table",        "grid.n",
    "grid.L",        "f0.kind",        "f0.mass",
    "f0.temperature", "f0.center",     "f0.separation",
    "f0.radius",     "f0.height",      "f0.components",
    "solver.dt",     "solver.t_end",   "solver.scheme",
    "solver.stride", "solver.sigma_cfl", "solver.project_moments",
    "solver.record_max", "solver.monitor_radius",
    "quad.preset",   "quad.y_min",     "quad.n_dir",
    "quad.n_rad",    "seed",           "threads",
    "bounds.probes",
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string env_name(const std::string& key) {
  std::string out = "BOLTZLAB_";
  for (char c : key) out += c == '.' ? '_' : char(std::toupper((unsigned char)c));
  return out;
}

struct Reader {
  const std::map<std::string, std::string>& kv;
  std::vector<std::string>& errors;

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  template <class F>
  void with(const std::string& k, F f) {
    auto it = kv.find(k);
    if (it == kv.end()) return;
    if (!f(it->second)) errors.push_back(k + " = '" + it->second + "' is not a valid value");
  }

  void num(const std::string& k, double& dst) {
    with(k, [&](const std::string& v) {
      char* end = nullptr;
      double x = std::strtod(v.c_str(), &end);
      if (end == v.c_str() || *end != '\0') return false;
      dst = x;
      return true;
    });
  }
  void integer(const std::string& k, int& dst) {
    double x = dst;
    num(k, x);
    dst = int(x);
    if (double(dst) != x) errors.push_back(k + " must be an integer");
  }
  void boolean(const std::string& k, bool& dst) {
    with(k, [&](const std::string& v) {
      if (v == "true" || v == "1") dst = true;
      else if (v == "false" || v == "0") dst = false;
      else return false;
      return true;
    });
  }
  void word(const std::string& k, std::string& dst) {
    with(k, [&](const std::string& v) {
      dst = v;
      return true;
    });
  }
  void numbers(const std::string& k, std::vector<double>& dst) {
    with(k, [&](const std::string& v) {
      std::istringstream in(v);
      std::vector<double> xs;
      double x;
      while (in >> x) xs.push_back(x);
      if (!in.eof() || xs.empty()) return false;
      dst = xs;
      return true;
    });
  }
};

ConfigResult finish(std::map<std::string, std::string> kv) {
  ConfigResult res;
  for (const char* k : kKeys)
    if (const char* v = std::getenv(env_name(k).c_str())) kv[k] = v;
  res.raw = kv;

  for (const auto& [k, v] : kv) {
    bool known = false;
    for (const char* known_key : kKeys) known |= k == known_key;
    if (!known) res.errors.push_back("unknown key '" + k + "'");
  }

  RunConfig& c = res.cfg;
  Reader r{kv, res.errors};
  r.integer("dim", c.dim);
  r.num("gamma", c.gamma);
  r.num("nu", c.nu);
  r.word("b.kind", c.b_kind);
  r.word("b.table", c.b_table);
  r.integer("grid.n", c.grid_n);
  r.num("grid.L", c.grid_L);
  r.word("f0.kind", c.f0_kind);
  r.num("f0.mass", c.f0_mass);
  r.num("f0.temperature", c.f0_temperature);
  std::vector<double> center;
  r.numbers("f0.center", center);
  r.num("f0.separation", c.f0_separation);
  r.num("f0.radius", c.f0_radius);
  r.num("f0.height", c.f0_height);
  r.integer("f0.components", c.f0_components);
  r.num("solver.dt", c.solver.dt);
  r.num("solver.t_end", c.solver.t_end);
  std::string scheme = "ssprk2";
  r.word("solver.scheme", scheme);
  r.integer("solver.stride", c.solver.stride);
  r.num("solver.sigma_cfl", c.solver.sigma_cfl);
  r.boolean("solver.project_moments", c.solver.project_moments);
  r.boolean("solver.record_max", c.solver.record_max);
  r.num("solver.monitor_radius", c.solver.monitor_radius);
  std::string preset = "stepping";
  r.word("quad.preset", preset);
  int seed = 1;
  r.integer("seed", seed);
  c.seed = unsigned(seed);
  r.integer("threads", c.threads);
  r.numbers("bounds.probes", c.probe_speeds);

  auto fail = [&](const std::string& msg) { res.errors.push_back(msg); };

  if (c.dim != 2 && c.dim != 3) fail("dim must be 2 or 3");
  if (!(c.nu > 0 && c.nu < 2))
    fail("nu = " + std::to_string(c.nu) +
         " outside (0, 2); the angular singularity must stay integrable after "
         "the even-part cancellation");
  if (c.dim == 2 || c.dim == 3) {
    if (!(c.gamma > -c.dim)) fail("gamma must exceed -dim for the kernel moment to exist");
  }
  if (c.b_kind != "reference" && c.b_kind != "tabulated")
    fail("b.kind must be reference or tabulated");
  if (c.b_kind == "tabulated" && c.b_table.empty())
    fail("b.kind = tabulated requires b.table");
  if (c.grid_n < 8) fail("grid.n must be at least 8");
  if (!(c.grid_L > 0)) fail("grid.L must be positive");

  if (c.f0_kind != "maxwellian" && c.f0_kind != "bimodal" && c.f0_kind != "indicator" &&
      c.f0_kind != "mixture")
    fail("f0.kind must be maxwellian, bimodal, indicator or mixture");
  if (!(c.f0_mass > 0)) fail("f0.mass must be positive");
  if (!(c.f0_temperature > 0)) fail("f0.temperature must be positive");
  if (!(c.f0_radius > 0)) fail("f0.radius must be positive");
  if (!(c.f0_height > 0)) fail("f0.height must be positive");
  if (c.f0_components < 1) fail("f0.components must be at least 1");
  if (c.f0_separation < 0) fail("f0.separation must be nonnegative");
  if (!center.empty()) {
    if (int(center.size()) != c.dim) {
      fail("f0.center needs exactly dim components");
    } else {
      for (std::size_t i = 0; i < center.size(); ++i) c.f0_center[i] = center[i];
    }
  }

  if (!(c.solver.dt > 0)) fail("solver.dt must be positive");
  if (!(c.solver.t_end > 0)) fail("solver.t_end must be positive");
  if (scheme == "euler") c.solver.scheme = Scheme::euler;
  else if (scheme == "ssprk2") c.solver.scheme = Scheme::ssprk2;
  else fail("solver.scheme must be euler or ssprk2");
  if (c.solver.stride < 1) fail("solver.stride must be at least 1");
  if (!(c.solver.sigma_cfl > 0)) fail("solver.sigma_cfl must be positive");
  if (c.solver.monitor_radius < 0) fail("solver.monitor_radius must be nonnegative");

  if (c.dim == 2 || c.dim == 3) {
    if (preset == "stepping") c.solver.quad = solver_quad(c.dim);
    else if (preset == "accurate") c.solver.quad = QuadParams::defaults(c.dim);
    else fail("quad.preset must be stepping or accurate");
  }
  r.num("quad.y_min", c.solver.quad.y_min);
  r.integer("quad.n_dir", c.solver.quad.n_dir);
  r.integer("quad.n_rad", c.solver.quad.n_rad);
  if (!(c.solver.quad.y_min > 0 && c.solver.quad.y_min < 1))
    fail("quad.y_min must lie in (0, 1)");
  if (c.solver.quad.n_dir < 4) fail("quad.n_dir must be at least 4");
  if (c.solver.quad.n_rad < 4) fail("quad.n_rad must be at least 4");

  if (c.threads < 1) fail("threads must be at least 1");
  for (double s : c.probe_speeds)
    if (s < 0) fail("bounds.probes entries must be nonnegative speeds");

  c.solver.threads = c.threads;
  res.ok = res.errors.empty();
  return res;
}

}  // namespace

ConfigResult config_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  ConfigResult bad;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bad.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      bad.errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    kv[key] = val;
  }
  if (!bad.errors.empty()) return bad;
  return finish(std::move(kv));
}

ConfigResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult res;
    res.errors.push_back("cannot open config '" + path + "'");
    return res;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str());
}

AngularTable load_angular_table(const std::string& path, std::string* err) {
  AngularTable t;
  std::ifstream in(path);
  if (!in) {
    if (err) *err = "cannot open b.table '" + path + "'";
    return t;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double theta, b;
    if (!(row >> theta >> b)) {
      if (err) *err = path + ":" + std::to_string(lineno) + ": expected 'theta,b'";
      return AngularTable{};
    }
    t.theta.push_back(theta);
    t.b.push_back(b);
  }
  if (t.theta.size() < 4 && err) *err = path + ": fewer than 4 samples";
  return t;
}

CrossSection make_xsection(const RunConfig& cfg, std::string* err) {
  if (cfg.b_kind == "reference") return reference_b(cfg.gamma, cfg.nu, cfg.dim);
  std::string load_err;
  AngularTable t = load_angular_table(cfg.b_table, &load_err);
  if (!load_err.empty()) {
    if (err) *err = load_err;
    return CrossSection{};
  }
  return tabulated_b(cfg.gamma, cfg.nu, cfg.dim, std::move(t));
}

DistributionFunction make_initial(const RunConfig& cfg, const VelocityGrid& g) {
  if (cfg.f0_kind == "bimodal")
    return bimodal(g, cfg.f0_mass, cfg.f0_temperature, cfg.f0_separation);
  if (cfg.f0_kind == "indicator")
    return ball_indicator(g, cfg.f0_center, cfg.f0_radius, cfg.f0_height);
  if (cfg.f0_kind == "mixture") return gaussian_mixture(g, cfg.seed, cfg.f0_components);
  return maxwellian(g, cfg.f0_mass, cfg.f0_temperature, cfg.f0_center);
}

}  // namespace boltz
