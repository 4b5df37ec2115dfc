#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fsi/io.hpp"
#include "json.hpp"

namespace fsi {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return os;
}

ordered_json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + p.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, p.string() + ": " + e.what());
  }
}

double dt_ode_of(const SolverConfig& c) { return c.dt_ode > 0.0 ? c.dt_ode : c.dt; }

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::GapViolation: return "gap-violation";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

DiagnosticsReport selected_diagnostics(const Scenario& sc, const Problem& pb, const Trajectory& tr) {
  const SolverConfig& c = sc.solver;
  const DiagnosticsSelection& d = sc.diagnostics;
  DiagnosticsReport r;
  if (d.energy) {
    r.energy = energy_report(tr);
    const double E0 = r.energy.empty() ? 0.0 : r.energy[0].energy;
    for (std::size_t n = 0; n < r.energy.size(); ++n) {
      if (E0 > 0.0) r.min_slack_relative = std::min(r.min_slack_relative, r.energy[n].slack / E0);
      if (n > 0 && r.energy[n - 1].energy > 0.0 && !(r.energy[n].energy < r.energy[n - 1].energy))
        r.energy_decreasing = false;
    }
  }
  if (d.momentum) r.momentum = momentum_residual(pb, tr);
  if (d.hypothesis) r.hypothesis = hypothesis_monitor(pb, tr, c.gap_delta, c.s, c.r);
  if (d.traces) r.traces = boundary_traces(pb, tr, dt_ode_of(c));
  if (d.prodi_serrin) {
    r.prodi_serrin = prodi_serrin(pb, tr, c.s, c.r, prodi_serrin_rule(), dt_ode_of(c));
    r.prodi_serrin_refined = prodi_serrin(pb, tr, c.s, c.r, prodi_serrin_check_rule(), dt_ode_of(c));
  }
  if (d.uniqueness) r.uniqueness_gap = uniqueness_gap(pb, tr, c);
  for (const auto& s : tr.steps) r.max_divergence = std::max(r.max_divergence, s.divergence);
  return r;
}

double max_trace(const DiagnosticsReport& r) {
  double m = 0.0;
  for (const auto& t : r.traces) m = std::max({m, t.outer, t.body});
  return m;
}

ordered_json summary_json(const Scenario& sc, const DiagnosticsReport& r) {
  ordered_json j;
  j["schema"] = kDiagnosticsSchema;
  double mom = 0.0;
  for (const auto& m : r.momentum) mom = std::max({mom, m.r_a.norm(), m.r_omega.norm()});
  j["values"] = {{"min_slack_relative", r.min_slack_relative},
                 {"energy_decreasing", r.energy_decreasing},
                 {"uniqueness_gap", r.uniqueness_gap},
                 {"max_divergence", r.max_divergence},
                 {"max_trace", max_trace(r)},
                 {"max_momentum_residual", mom},
                 {"prodi_serrin", r.prodi_serrin},
                 {"prodi_serrin_refined", r.prodi_serrin_refined},
                 {"min_gap", r.hypothesis.min_gap},
                 {"max_da_dt", r.hypothesis.max_da_dt},
                 {"max_domega_dt", r.hypothesis.max_domega_dt},
                 {"exponents_admissible", r.hypothesis.exponents_admissible},
                 {"first_gap_violation", r.hypothesis.first_violation}};
  bool all = true;
  ordered_json cs = ordered_json::array();
  for (const auto& c : check_contracts(sc, r)) {
    cs.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
    all = all && c.pass;
  }
  j["contracts"] = cs;
  j["pass"] = all;
  return j;
}

void write_diagnostics(const fs::path& dir, const Scenario& sc, const DiagnosticsReport& r) {
  const DiagnosticsSelection& d = sc.diagnostics;
  if (d.energy) {
    auto os = open_out(dir / "energy.csv");
    write_energy_csv(os, r.energy);
  }
  if (d.momentum) {
    auto os = open_out(dir / "momentum.csv");
    write_momentum_csv(os, r.momentum);
  }
  if (d.hypothesis) {
    auto os = open_out(dir / "hypothesis.csv");
    write_hypothesis_csv(os, r.hypothesis);
  }
  if (d.traces) {
    auto os = open_out(dir / "traces.csv");
    write_traces_csv(os, r.traces);
  }
  auto os = open_out(dir / "summary.json");
  os << summary_json(sc, r).dump(2) << '\n';
}

struct LoadedRun {
  Scenario scenario;
  RunSetup setup;
  StatesFile states;
};

LoadedRun load_run(const fs::path& dir) {
  const ordered_json m = read_json(dir / "manifest.json");
  if (m.value("schema", "") != kManifestSchema) throw Error(ErrorKind::InvalidInput, "manifest: unsupported schema");
  LoadedRun r;
  r.scenario = parse_scenario(m.at("scenario").dump());
  r.setup = make_setup(r.scenario);
  std::ifstream in(dir / "states.bin", std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "run directory has no states.bin");
  r.states = read_states(in, r.scenario.center);
  require(r.states.traj.size() > 0, "states file is empty");
  require(r.states.traj.states[0].size() == r.setup.space->size(), "states file does not match the scenario mesh");
  return r;
}

}  // namespace

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return 2;
    case ErrorKind::GapViolation: return 3;
    case ErrorKind::SolverFailure: return 4;
    case ErrorKind::Io: return 5;
  }
  return 5;
}

std::vector<ContractResult> check_contracts(const Scenario& sc, const DiagnosticsReport& r) {
  const Contracts& k = sc.contracts;
  const DiagnosticsSelection& d = sc.diagnostics;
  std::vector<ContractResult> out;
  if (d.energy) {
    out.push_back({"slack", r.min_slack_relative, -k.slack, r.min_slack_relative >= -k.slack});
    if (k.energy_decreasing)
      out.push_back({"energy_decreasing", r.energy_decreasing ? 1.0 : 0.0, 1.0, r.energy_decreasing});
  }
  if (d.uniqueness) out.push_back({"uniqueness", r.uniqueness_gap, k.uniqueness, r.uniqueness_gap <= k.uniqueness});
  if (d.traces) {
    const double m = max_trace(r);
    out.push_back({"trace", m, k.trace, m <= k.trace});
  }
  out.push_back({"divergence", r.max_divergence, k.divergence, r.max_divergence <= k.divergence});
  if (d.hypothesis) {
    out.push_back({"exponents", r.hypothesis.exponents_admissible ? 1.0 : 0.0, 1.0, r.hypothesis.exponents_admissible});
    out.push_back({"gap", r.hypothesis.min_gap, sc.solver.gap_delta, r.hypothesis.first_violation < 0});
  }
  return out;
}

RunOutcome run_scenario(const Scenario& sc) {
  RunOutcome out;
  out.dir = resolve_output_dir(sc.output_dir);
  const auto start = std::chrono::steady_clock::now();
  ordered_json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["scenario"] = ordered_json::parse(dump_scenario(sc));
  std::vector<std::string> files;

  Trajectory partial(0.0, sc.center);
  std::unique_ptr<RunSetup> setup;
  try {
    sc.validate();
    fs::create_directories(out.dir);
    setup = std::make_unique<RunSetup>(make_setup(sc));
    const Problem& pb = setup->problem;
    const CoupledSpace& space = *setup->space;
    manifest["mesh"] = {{"level", sc.mesh_level},
                        {"vertices", space.num_vertices()},
                        {"elements", space.num_elements()},
                        {"nodes", space.num_nodes()},
                        {"unknowns", space.size()},
                        {"volume", space.mesh().volume()}};

    Trajectory traj(0.0, sc.center);
    if (sc.mode == "nonlinear") {
      Eigen::VectorXd x0;
      if (sc.preset == "file") {
        std::ifstream in(sc.coefficients);
        if (!in) throw Error(ErrorKind::InvalidInput, "cannot read coefficients " + sc.coefficients);
        std::vector<double> v;
        for (double d; in >> d;) v.push_back(d);
        require(static_cast<int>(v.size()) == space.size(),
                "coefficients: expected " + std::to_string(space.size()) + " values, got " + std::to_string(v.size()));
        x0 = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      } else {
        x0 = initial_state(pb, [](const Vec3&) -> Vec3 { return Vec3::Zero(); }, sc.A0, sc.Omega0);
      }
      traj = solve_nonlinear(pb, x0, sc.solver, [&](const Trajectory& t) {
        partial.states.push_back(t.states.back());
        partial.steps.push_back(t.steps.back());
        partial.motion = t.motion;
      });
    } else {
      std::ifstream in(sc.linearization, std::ios::binary);
      if (!in) throw Error(ErrorKind::InvalidInput, "cannot read linearization states " + sc.linearization);
      StatesFile base = read_states(in, sc.center);
      require(base.stride == 1, "linearization states must be stored with stride 1");
      require(base.traj.size() >= 2 && base.traj.states[0].size() == space.size(),
              "linearization states do not match the scenario mesh");
      refresh_records(pb, base.traj, sc.solver);
      traj = solve_linearized(pb, base.traj, base.traj.states, sc.solver);
    }
    partial = traj;

    const DiagnosticsReport rep = selected_diagnostics(sc, pb, traj);
    write_diagnostics(out.dir, sc, rep);
    for (const char* f : {"energy.csv", "momentum.csv", "hypothesis.csv", "traces.csv", "summary.json"})
      if (fs::exists(out.dir / f)) files.emplace_back(f);
    fs::create_directories(out.dir / "vtk");
    for (std::size_t n = 0; n < traj.size(); ++n)
      if (n % static_cast<std::size_t>(sc.vtk_stride) == 0 || n + 1 == traj.size()) {
        char name[32];
        std::snprintf(name, sizeof name, "vtk/state_%05zu.vtk", n);
        auto os = open_out(out.dir / name);
        write_vtk(os, pb, traj, n, dt_ode_of(sc.solver));
        files.emplace_back(name);
      }
    bool pass = true;
    for (const auto& c : check_contracts(sc, rep)) pass = pass && c.pass;
    out.exit_code = pass ? 0 : 1;
    out.message = pass ? "all contracts pass" : "contract failure (see summary.json)";
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.kind());
    out.message = std::string(kind_name(e.kind())) + ": " + e.what();
  } catch (const fs::filesystem_error& e) {
    out.exit_code = exit_code_for(ErrorKind::Io);
    out.message = std::string("io: ") + e.what();
  }

  out.steps = partial.size() ? partial.size() - 1 : 0;
  out.last_gap = partial.size() ? partial.steps.back().gap : 0.0;
  if (out.exit_code == 2 && !fs::exists(out.dir)) return out;  // nothing sensible to write
  try {
    fs::create_directories(out.dir);
    if (partial.size()) {
      auto tc = open_out(out.dir / "trajectory.csv");
      write_trajectory_csv(tc, partial);
      auto sb = open_out(out.dir / "states.bin", true);
      write_states(sb, partial, sc.state_stride);
      files.insert(files.begin(), {"trajectory.csv", "states.bin"});
      if (out.exit_code >= 2 && setup) {
        // Hypothesis rows of the partial run show how the abort was approached.
        auto hc = open_out(out.dir / "hypothesis.csv");
        write_hypothesis_csv(hc, hypothesis_monitor(setup->problem, partial, sc.solver.gap_delta, sc.solver.s,
                                                    sc.solver.r));
        files.emplace_back("hypothesis.csv");
      }
    }
    manifest["status"] = {{"exit_code", out.exit_code}, {"message", out.message}};
    manifest["run"] = {{"steps", out.steps},
                       {"final_t", partial.size() ? partial.steps.back().t : 0.0},
                       {"last_gap", out.last_gap},
                       {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    manifest["files"] = files;
    auto mf = open_out(out.dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    if (out.exit_code == 0 || out.exit_code == 1) {
      out.exit_code = exit_code_for(ErrorKind::Io);
      out.message = std::string("io: ") + e.what();
    }
  }
  return out;
}

// ---- verify ------------------------------------------------------------------------------------

namespace {

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + p.string());
  Csv c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (c.columns.empty()) {
      while (std::getline(ss, cell, ',')) c.columns.push_back(cell);
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    c.rows.push_back(std::move(row));
  }
  return c;
}

void compare_numbers(VerifyReport& rep, const std::string& file, const std::string& field, const std::vector<double>& a,
                     const std::vector<double>& b, double abs_tol, double rel_tol) {
  VerifyEntry e{file, field, 0.0, 0.0, true};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    e.max_abs = std::max(e.max_abs, d);
    if (a[i] != 0.0) e.max_rel = std::max(e.max_rel, d / std::abs(a[i]));
    if (!(d <= abs_tol + rel_tol * std::abs(a[i]))) e.pass = false;
  }
  rep.entries.push_back(e);
}

void flatten(const ordered_json& j, const std::string& prefix, std::map<std::string, ordered_json>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out[prefix] = j;
  }
}

void compare_json(VerifyReport& rep, const std::string& file, const ordered_json& a, const ordered_json& b,
                  double abs_tol, double rel_tol, const std::set<std::string>& skip) {
  std::map<std::string, ordered_json> fa, fb;
  flatten(a, "", fa);
  flatten(b, "", fb);
  for (const auto& [k, va] : fa) {
    if (skip.count(k)) continue;
    const auto it = fb.find(k);
    if (it == fb.end()) {
      rep.problems.push_back(file + ": missing field " + k);
      continue;
    }
    if (va.is_number() && it->second.is_number())
      compare_numbers(rep, file, k, {va.get<double>()}, {it->second.get<double>()}, abs_tol, rel_tol);
    else if (va != it->second)
      rep.problems.push_back(file + ": field " + k + " differs");
  }
}

}  // namespace

bool VerifyReport::pass() const {
  if (!problems.empty()) return false;
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

VerifyReport verify_runs(const fs::path& base, const fs::path& run, double abs_tol, double rel_tol) {
  require(abs_tol >= 0.0 && rel_tol >= 0.0, "verify: tolerances must be non-negative");
  VerifyReport rep;
  compare_json(rep, "manifest.json", read_json(base / "manifest.json"), read_json(run / "manifest.json"), abs_tol,
               rel_tol, {"scenario.output.dir", "run.wall_seconds"});
  if (fs::exists(base / "summary.json")) {
    if (!fs::exists(run / "summary.json"))
      rep.problems.push_back("summary.json missing in run");
    else
      compare_json(rep, "summary.json", read_json(base / "summary.json"), read_json(run / "summary.json"), abs_tol,
                   rel_tol, {});
  }
  for (const auto& entry : fs::directory_iterator(base)) {
    if (entry.path().extension() != ".csv") continue;
    const std::string name = entry.path().filename().string();
    if (!fs::exists(run / name)) {
      rep.problems.push_back(name + " missing in run");
      continue;
    }
    const Csv a = read_csv(entry.path()), b = read_csv(run / name);
    if (a.columns != b.columns || a.rows.size() != b.rows.size()) {
      rep.problems.push_back(name + ": shape or columns differ");
      continue;
    }
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      std::vector<double> ca, cb;
      for (std::size_t r = 0; r < a.rows.size(); ++r) {
        if (c >= a.rows[r].size() || c >= b.rows[r].size()) {
          rep.problems.push_back(name + ": ragged row " + std::to_string(r));
          break;
        }
        ca.push_back(a.rows[r][c]);
        cb.push_back(b.rows[r][c]);
      }
      compare_numbers(rep, name, a.columns[c], ca, cb, abs_tol, rel_tol);
    }
  }
  return rep;
}

// ---- derive / diag -----------------------------------------------------------------------------

DerivativeResult derive_run(const fs::path& dir, int l) {
  LoadedRun r = load_run(dir);
  require(r.states.stride == 1, "derive: the base run must store every step (state_stride 1)");
  require(r.states.traj.size() >= 2, "derive: the base run has no steps");
  const Problem& pb = r.setup.problem;
  DerivativeResult d = solve_time_derivative(l, pb, r.states.traj, r.scenario.solver);
  const Trajectory& base = r.states.traj;
  StokesRigidSystem sys(*r.setup.space, pb.J);
  auto os = open_out(dir / "derive.csv");
  os << "# schema: " << kDiagnosticsSchema << "\n# order: " << l << "\n# fd_consistency: " << d.fd_consistency << "\n";
  os << "t,norm_Z,norm_rate,rate_mismatch\n";
  os.precision(17);
  for (std::size_t n = 0; n < base.size(); ++n) {
    double rate = 0.0, mismatch = 0.0;
    if (n > 0) {
      const Eigen::VectorXd fd = (base.states[n] - base.states[n - 1]) / base.steps[n].dt;
      rate = sys.norm(fd);
      mismatch = sys.norm(d.states[n] / base.steps[n].t - fd);
    }
    os << base.steps[n].t << ',' << sys.norm(d.states[n]) << ',' << rate << ',' << mismatch << '\n';
  }
  Trajectory z = base;
  z.states = d.states;
  auto bs = open_out(dir / "derivative_states.bin", true);
  write_states(bs, z, 1);
  return d;
}

DiagnosticsReport diagnose_run(const fs::path& dir) {
  LoadedRun r = load_run(dir);
  require(r.states.stride == 1, "diag: the run must store every step (state_stride 1)");
  refresh_records(r.setup.problem, r.states.traj, r.scenario.solver);
  const DiagnosticsReport rep = selected_diagnostics(r.scenario, r.setup.problem, r.states.traj);
  write_diagnostics(dir, r.scenario, rep);
  return rep;
}

}  // namespace fsi
