#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fsi/io.hpp"
#include "json.hpp"

namespace fsi {

using nlohmann::ordered_json;

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const ordered_json& j, const std::string& key) {
  require(j.is_array() && j.size() == 3, "scenario: '" + key + "' must be an array of three numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void check_keys(const ordered_json& j, const std::string& where, const std::set<std::string>& allowed) {
  require(j.is_object(), "scenario: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error(ErrorKind::InvalidInput, "scenario: unknown key '" + k + "' in " + where);
}

template <class T>
void read(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read(const ordered_json& j, const char* key, Vec3& out) {
  if (j.contains(key)) out = json_vec(j.at(key), key);
}

ordered_json to_json(const Scenario& s) {
  const SolverConfig& c = s.solver;
  ordered_json j;
  j["schema"] = kScenarioSchema;
  j["name"] = s.name;
  j["geometry"] = {{"r_in", s.r_in},         {"r_out", s.r_out},       {"center", vec_json(s.center)},
                   {"mesh_level", s.mesh_level}, {"delta_in", s.delta_in}, {"delta_out", s.delta_out}};
  j["body"] = {{"force", vec_json(s.body_force)}};
  j["initial"] = {{"preset", s.preset},
                  {"A0", vec_json(s.A0)},
                  {"Omega0", vec_json(s.Omega0)},
                  {"coefficients", s.coefficients}};
  j["mode"] = s.mode;
  j["linearization"] = s.linearization;
  j["solver"] = {{"dt", c.dt},
                 {"T", c.T},
                 {"fp_tol", c.fp_tol},
                 {"max_fp_iterations", c.max_fp_iterations},
                 {"linear_tol", c.linear_tol},
                 {"picard_tol", c.picard_tol},
                 {"max_picard_iterations", c.max_picard_iterations},
                 {"split_threshold", c.split_threshold},
                 {"s", c.s},
                 {"r", c.r},
                 {"gap_delta", c.gap_delta},
                 {"fd_h", c.fd_h},
                 {"dt_ode", c.dt_ode},
                 {"max_bisection", c.max_bisection}};
  const DiagnosticsSelection& d = s.diagnostics;
  j["diagnostics"] = {{"energy", d.energy},         {"momentum", d.momentum},     {"traces", d.traces},
                      {"prodi_serrin", d.prodi_serrin}, {"uniqueness", d.uniqueness}, {"hypothesis", d.hypothesis}};
  const Contracts& k = s.contracts;
  j["contracts"] = {{"slack", k.slack},
                    {"uniqueness", k.uniqueness},
                    {"trace", k.trace},
                    {"divergence", k.divergence},
                    {"energy_decreasing", k.energy_decreasing}};
  j["output"] = {{"dir", s.output_dir}, {"vtk_stride", s.vtk_stride}, {"state_stride", s.state_stride}};
  return j;
}

Scenario from_json(const ordered_json& j) {
  check_keys(j, "scenario",
             {"schema", "name", "geometry", "body", "initial", "mode", "linearization", "solver", "diagnostics",
              "contracts", "output"});
  if (j.contains("schema") && j["schema"].get<std::string>() != kScenarioSchema)
    throw Error(ErrorKind::InvalidInput, "scenario: unsupported schema '" + j["schema"].get<std::string>() + "'");
  std::string base = "rest";
  if (j.contains("initial") && j["initial"].is_object() && j["initial"].contains("preset")) {
    const std::string p = j["initial"]["preset"].get<std::string>();
    if (p != "file") base = p;
  }
  Scenario s = preset_scenario(base);
  read(j, "name", s.name);
  read(j, "mode", s.mode);
  read(j, "linearization", s.linearization);
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    check_keys(g, "geometry", {"r_in", "r_out", "center", "mesh_level", "delta_in", "delta_out"});
    read(g, "r_in", s.r_in);
    read(g, "r_out", s.r_out);
    read(g, "center", s.center);
    read(g, "mesh_level", s.mesh_level);
    read(g, "delta_in", s.delta_in);
    read(g, "delta_out", s.delta_out);
  }
  if (j.contains("body")) {
    check_keys(j["body"], "body", {"force"});
    read(j["body"], "force", s.body_force);
  }
  if (j.contains("initial")) {
    const auto& i = j["initial"];
    check_keys(i, "initial", {"preset", "A0", "Omega0", "coefficients"});
    read(i, "preset", s.preset);
    read(i, "A0", s.A0);
    read(i, "Omega0", s.Omega0);
    read(i, "coefficients", s.coefficients);
  }
  if (j.contains("solver")) {
    const auto& c = j["solver"];
    check_keys(c, "solver",
               {"dt", "T", "fp_tol", "max_fp_iterations", "linear_tol", "picard_tol", "max_picard_iterations",
                "split_threshold", "s", "r", "gap_delta", "fd_h", "dt_ode", "max_bisection"});
    SolverConfig& o = s.solver;
    read(c, "dt", o.dt);
    read(c, "T", o.T);
    read(c, "fp_tol", o.fp_tol);
    read(c, "max_fp_iterations", o.max_fp_iterations);
    read(c, "linear_tol", o.linear_tol);
    read(c, "picard_tol", o.picard_tol);
    read(c, "max_picard_iterations", o.max_picard_iterations);
    read(c, "split_threshold", o.split_threshold);
    read(c, "s", o.s);
    read(c, "r", o.r);
    read(c, "gap_delta", o.gap_delta);
    read(c, "fd_h", o.fd_h);
    read(c, "dt_ode", o.dt_ode);
    read(c, "max_bisection", o.max_bisection);
  }
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    check_keys(d, "diagnostics", {"energy", "momentum", "traces", "prodi_serrin", "uniqueness", "hypothesis"});
    read(d, "energy", s.diagnostics.energy);
    read(d, "momentum", s.diagnostics.momentum);
    read(d, "traces", s.diagnostics.traces);
    read(d, "prodi_serrin", s.diagnostics.prodi_serrin);
    read(d, "uniqueness", s.diagnostics.uniqueness);
    read(d, "hypothesis", s.diagnostics.hypothesis);
  }
  if (j.contains("contracts")) {
    const auto& k = j["contracts"];
    check_keys(k, "contracts", {"slack", "uniqueness", "trace", "divergence", "energy_decreasing"});
    read(k, "slack", s.contracts.slack);
    read(k, "uniqueness", s.contracts.uniqueness);
    read(k, "trace", s.contracts.trace);
    read(k, "divergence", s.contracts.divergence);
    read(k, "energy_decreasing", s.contracts.energy_decreasing);
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    check_keys(o, "output", {"dir", "vtk_stride", "state_stride"});
    read(o, "dir", s.output_dir);
    read(o, "vtk_stride", s.vtk_stride);
    read(o, "state_stride", s.state_stride);
  }
  s.validate();
  return s;
}

}  // namespace

void Scenario::validate() const {
  require(!name.empty(), "scenario: empty name");
  require(r_in > 0.0 && r_out > r_in, "scenario: need 0 < r_in < r_out");
  require(mesh_level >= 0 && mesh_level <= 4, "scenario: mesh level must be in [0, 4]");
  require(delta_in > 0.0 && delta_out > 0.0 && delta_in + delta_out < r_out - r_in,
          "scenario: cutoff transition distances must be positive and fit inside the shell");
  require(preset == "rest" || preset == "spin-down" || preset == "wall-approach" || preset == "file",
          "scenario: unknown initial preset '" + preset + "'");
  require(preset != "file" || !coefficients.empty(), "scenario: preset 'file' needs a coefficients path");
  require(mode == "nonlinear" || mode == "linearized", "scenario: mode must be nonlinear or linearized");
  require(mode != "linearized" || !linearization.empty(), "scenario: linearized mode needs a states file");
  require(vtk_stride >= 1 && state_stride >= 1, "scenario: output strides must be at least 1");
  require(!output_dir.empty(), "scenario: empty output directory");
  require(contracts.slack >= 0.0 && contracts.uniqueness > 0.0 && contracts.trace > 0.0 && contracts.divergence > 0.0,
          "scenario: contract bounds must be positive");
  solver.validate();
}

bool Scenario::operator==(const Scenario& o) const { return to_json(*this) == to_json(o); }

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.preset = name;
  s.output_dir = "runs/" + name;
  if (name == "rest") {
    s.solver.T = 0.1;
  } else if (name == "spin-down") {
    s.Omega0 = Vec3(0, 0, 1);
    s.solver.T = 1.0;
  } else if (name == "wall-approach") {
    s.body_force = Vec3(0, 0, -20);
    s.solver.T = 2.0;
    s.solver.gap_delta = 1.25;
    s.diagnostics.uniqueness = false;
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown preset '" + name + "' (rest, spin-down, wall-approach)");
  }
  return s;
}

Scenario parse_scenario(const std::string& text) {
  try {
    return from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "scenario: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

std::filesystem::path resolve_output_dir(const std::string& dir) {
  const std::filesystem::path p(dir);
  const char* root = std::getenv("FSI_OUTPUT_ROOT");
  if (root && *root && p.is_relative()) return std::filesystem::path(root) / p;
  return p;
}

RunSetup make_setup(const Scenario& s) {
  s.validate();
  RunSetup out;
  out.space = std::make_unique<CoupledSpace>(build_shell_mesh(s.r_in, s.r_out, s.mesh_level, s.center),
                                             BodyCoupling::Rigid);
  Problem& pb = out.problem;
  pb.space = out.space.get();
  pb.shell = ShellGeometry{s.r_in, s.r_out, s.center};
  pb.delta_in = s.delta_in;
  pb.delta_out = s.delta_out;
  // Unit-density ball.
  pb.J = Mat3::Identity() * (8.0 * std::numbers::pi / 15.0 * std::pow(s.r_in, 5));
  pb.body_force = s.body_force;
  return out;
}

}  // namespace fsi
