#include "chd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace chd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  if (!std::isfinite(out)) throw std::invalid_argument("value must be finite");
  return out;
}

long long to_integer(const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

double positive(const std::string& v) {
  const double x = to_double(v);
  if (!(x > 0.0)) throw std::invalid_argument("must be positive");
  return x;
}

double non_negative(const std::string& v) {
  const double x = to_double(v);
  if (!(x >= 0.0)) throw std::invalid_argument("must be non-negative");
  return x;
}

int node_count(const std::string& v) {
  const long long x = to_integer(v);
  if (x < 3 || x > 100000) throw std::invalid_argument("must be at least 3");
  return static_cast<int>(x);
}

BoundaryTag face(const std::string& v) {
  const std::string s = lower(v);
  if (s == "dirichlet") return BoundaryTag::Dirichlet;
  if (s == "neumann") return BoundaryTag::Neumann;
  throw std::invalid_argument("expected dirichlet or neumann, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.dimension",
       [](RunConfig& c, const std::string& v) {
         const long long d = to_integer(v);
         if (d != 1 && d != 2) throw std::invalid_argument("must be 1 or 2");
         c.grid.dimension = static_cast<int>(d);
       }},
      {"grid.length", [](RunConfig& c, const std::string& v) { c.grid.lengths = {positive(v), positive(v)}; }},
      {"grid.length_x", [](RunConfig& c, const std::string& v) { c.grid.lengths[0] = positive(v); }},
      {"grid.length_y", [](RunConfig& c, const std::string& v) { c.grid.lengths[1] = positive(v); }},
      {"grid.nodes", [](RunConfig& c, const std::string& v) { c.grid.nodes = {node_count(v), node_count(v)}; }},
      {"grid.nodes_x", [](RunConfig& c, const std::string& v) { c.grid.nodes[0] = node_count(v); }},
      {"grid.nodes_y", [](RunConfig& c, const std::string& v) { c.grid.nodes[1] = node_count(v); }},
      {"grid.left", [](RunConfig& c, const std::string& v) { c.grid.faces[0] = face(v); }},
      {"grid.right", [](RunConfig& c, const std::string& v) { c.grid.faces[1] = face(v); }},
      {"grid.bottom", [](RunConfig& c, const std::string& v) { c.grid.faces[2] = face(v); }},
      {"grid.top", [](RunConfig& c, const std::string& v) { c.grid.faces[3] = face(v); }},

      {"material.eta", [](RunConfig& c, const std::string& v) { c.material.eta = positive(v); }},
      {"material.lame_lambda", [](RunConfig& c, const std::string& v) { c.material.lame_lambda = non_negative(v); }},
      {"material.lame_mu", [](RunConfig& c, const std::string& v) { c.material.lame_mu = positive(v); }},
      {"material.eigenstrain_xx", [](RunConfig& c, const std::string& v) { c.material.eigenstrain_xx = to_double(v); }},
      {"material.eigenstrain_xy", [](RunConfig& c, const std::string& v) { c.material.eigenstrain_xy = to_double(v); }},
      {"material.eigenstrain_yy", [](RunConfig& c, const std::string& v) { c.material.eigenstrain_yy = to_double(v); }},
      {"material.alpha", [](RunConfig& c, const std::string& v) { c.material.alpha = non_negative(v); }},
      {"material.mobility",
       [](RunConfig& c, const std::string& v) {
         const std::string s = lower(v);
         if (s == "constant")
           c.material.mobility = MobilityLaw::Constant;
         else if (s == "affine")
           c.material.mobility = MobilityLaw::Affine;
         else
           throw std::invalid_argument("expected constant or affine, got '" + v + "'");
       }},
      {"material.m0", [](RunConfig& c, const std::string& v) { c.material.m0 = positive(v); }},
      {"material.m1", [](RunConfig& c, const std::string& v) { c.material.m1 = non_negative(v); }},
      {"material.p", [](RunConfig& c, const std::string& v) { c.material.p = non_negative(v); }},
      {"material.stiffness",
       [](RunConfig& c, const std::string& v) {
         const std::string s = lower(v);
         if (s == "increasing")
           c.material.stiffness = StiffnessLaw::Increasing;
         else if (s == "decreasing")
           c.material.stiffness = StiffnessLaw::Decreasing;
         else
           throw std::invalid_argument("expected increasing or decreasing, got '" + v + "'");
       }},
      {"material.seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = to_integer(v);
         if (s < 0) throw std::invalid_argument("must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},

      {"stepper.tau", [](RunConfig& c, const std::string& v) { c.stepper.tau = positive(v); }},
      {"stepper.delta", [](RunConfig& c, const std::string& v) { c.stepper.delta = non_negative(v); }},
      {"stepper.final_time", [](RunConfig& c, const std::string& v) { c.stepper.final_time = positive(v); }},
      {"stepper.outer_tol", [](RunConfig& c, const std::string& v) { c.stepper.outer_tol = positive(v); }},
      {"stepper.sweep_tol", [](RunConfig& c, const std::string& v) { c.stepper.sweep_tol = positive(v); }},
      {"stepper.inner_tol", [](RunConfig& c, const std::string& v) { c.stepper.inner_tol = positive(v); }},
      {"stepper.metric_tol", [](RunConfig& c, const std::string& v) { c.stepper.metric_tol = positive(v); }},
      {"stepper.max_outer",
       [](RunConfig& c, const std::string& v) {
         const long long x = to_integer(v);
         if (x < 1 || x > 1000000) throw std::invalid_argument("must be at least 1");
         c.stepper.max_outer = static_cast<int>(x);
       }},
      {"stepper.max_inner",
       [](RunConfig& c, const std::string& v) {
         const long long x = to_integer(v);
         if (x < 1 || x > 1000000) throw std::invalid_argument("must be at least 1");
         c.stepper.max_inner = static_cast<int>(x);
       }},
      {"stepper.armijo",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > 0.0 && x < 0.5)) throw std::invalid_argument("must lie in (0, 0.5)");
         c.stepper.armijo = x;
       }},
      {"stepper.backtrack",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("must lie in (0, 1)");
         c.stepper.backtrack = x;
       }},

      {"scenario.name",
       [](RunConfig& c, const std::string& v) {
         if (v != "equilibrium" && v != "stretch" && v != "phase-separation")
           throw std::invalid_argument("unknown scenario '" + v + "'");
         c.scenario.name = v;
       }},
      {"scenario.c_mean", [](RunConfig& c, const std::string& v) { c.scenario.c_mean = to_double(v); }},
      {"scenario.c_amplitude", [](RunConfig& c, const std::string& v) { c.scenario.c_amplitude = to_double(v); }},
      {"scenario.stretch_rate", [](RunConfig& c, const std::string& v) { c.scenario.stretch_rate = to_double(v); }},
      {"scenario.z_initial",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("must lie in [0, 1]");
         c.scenario.z_initial = x;
       }},

      {"output.directory",
       [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.output_dir = v;
       }},
      {"output.snapshot_stride",
       [](RunConfig& c, const std::string& v) {
         const long long x = to_integer(v);
         if (x < 1 || x > 1000000000) throw std::invalid_argument("must be at least 1");
         c.snapshot_stride = static_cast<int>(x);
       }},
  };
  return table;
}

std::string describe_errors(const std::vector<std::string>& errors) {
  std::string out = "config: ";
  for (std::size_t i = 0; i < errors.size(); ++i) out += (i ? "; " : "") + errors[i];
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(describe_errors(errors)), errors_(std::move(errors)) {}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  std::vector<std::string> errors;
  std::set<std::string> sections;
  static const std::set<std::string> known = {"grid", "material", "stepper", "scenario", "output"};

  auto assign = [&](const std::string& section, const std::string& key, const std::string& value,
                    const std::string& where) {
    const std::string full = section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) {
      errors.push_back(where + ": unknown key '" + key + "' in section [" + section + "]");
      return;
    }
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      errors.push_back(where + ": " + full + " " + e.what());
    }
  };

  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number);
    const auto hash = line.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        errors.push_back(where + ": malformed section header");
        continue;
      }
      section = trim(s.substr(1, s.size() - 2));
      if (!known.count(section)) {
        errors.push_back(where + ": unknown section [" + section + "]");
        section.clear();
        continue;
      }
      sections.insert(section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      errors.push_back(where + ": key outside of a known section");
      continue;
    }
    assign(section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), where);
  }

  for (const auto& o : overrides) {
    const std::string where = "override '" + o + "'";
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      errors.push_back(where + ": expected section.key=value");
      continue;
    }
    assign(trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), trim(o.substr(eq + 1)), where);
  }

  for (const char* required : {"grid", "material", "stepper", "scenario"})
    if (!sections.count(required)) errors.push_back(std::string("missing section [") + required + "]");

  if (errors.empty()) {
    try {
      build_grid(cfg.grid);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
    try {
      validate_params(cfg.stepper);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  auto num = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  auto tag = [](BoundaryTag t) { return t == BoundaryTag::Dirichlet ? "dirichlet" : "neumann"; };
  os << "[grid]\n"
     << "dimension = " << c.grid.dimension << "\n"
     << "length_x = " << num(c.grid.lengths[0]) << "\n"
     << "length_y = " << num(c.grid.lengths[1]) << "\n"
     << "nodes_x = " << c.grid.nodes[0] << "\n"
     << "nodes_y = " << c.grid.nodes[1] << "\n"
     << "left = " << tag(c.grid.faces[0]) << "\n"
     << "right = " << tag(c.grid.faces[1]) << "\n"
     << "bottom = " << tag(c.grid.faces[2]) << "\n"
     << "top = " << tag(c.grid.faces[3]) << "\n\n";
  const MaterialParams& m = c.material;
  os << "[material]\n"
     << "eta = " << num(m.eta) << "\n"
     << "lame_lambda = " << num(m.lame_lambda) << "\n"
     << "lame_mu = " << num(m.lame_mu) << "\n"
     << "eigenstrain_xx = " << num(m.eigenstrain_xx) << "\n"
     << "eigenstrain_xy = " << num(m.eigenstrain_xy) << "\n"
     << "eigenstrain_yy = " << num(m.eigenstrain_yy) << "\n"
     << "alpha = " << num(m.alpha) << "\n"
     << "mobility = " << (m.mobility == MobilityLaw::Constant ? "constant" : "affine") << "\n"
     << "m0 = " << num(m.m0) << "\n"
     << "m1 = " << num(m.m1) << "\n"
     << "p = " << num(m.p) << "\n"
     << "stiffness = " << (m.stiffness == StiffnessLaw::Increasing ? "increasing" : "decreasing") << "\n"
     << "seed = " << c.seed << "\n\n";
  const StepperParams& s = c.stepper;
  os << "[stepper]\n"
     << "tau = " << num(s.tau) << "\n"
     << "delta = " << num(s.delta) << "\n"
     << "final_time = " << num(s.final_time) << "\n"
     << "outer_tol = " << num(s.outer_tol) << "\n"
     << "sweep_tol = " << num(s.sweep_tol) << "\n"
     << "inner_tol = " << num(s.inner_tol) << "\n"
     << "metric_tol = " << num(s.metric_tol) << "\n"
     << "max_outer = " << s.max_outer << "\n"
     << "max_inner = " << s.max_inner << "\n"
     << "armijo = " << num(s.armijo) << "\n"
     << "backtrack = " << num(s.backtrack) << "\n\n";
  os << "[scenario]\n"
     << "name = " << c.scenario.name << "\n"
     << "c_mean = " << num(c.scenario.c_mean) << "\n"
     << "c_amplitude = " << num(c.scenario.c_amplitude) << "\n"
     << "stretch_rate = " << num(c.scenario.stretch_rate) << "\n"
     << "z_initial = " << num(c.scenario.z_initial) << "\n\n";
  os << "[output]\n"
     << "directory = " << c.output_dir << "\n"
     << "snapshot_stride = " << c.snapshot_stride << "\n";
  return os.str();
}

}  // namespace chd
