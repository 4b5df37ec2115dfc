// Command-line front end: run, verify, derive, mesh-info, diag.
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fsi/io.hpp"

using namespace fsi;

namespace {

struct RunFlags {
  std::string file, preset;
  std::optional<int> level, vtk_stride, state_stride;
  std::optional<double> dt, T, s, r, gap_delta, fp_tol, linear_tol, picard_tol, split_threshold, fd_h;
  std::vector<double> force, A0, Omega0;
  std::string out, mode, linearization, coefficients;
  bool dump = false, no_uniqueness = false;
};

Vec3 vec(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

Scenario build(const RunFlags& f) {
  if (!f.file.empty() && !f.preset.empty()) throw Error(ErrorKind::InvalidInput, "give a scenario file or --preset");
  Scenario s = f.file.empty() ? preset_scenario(f.preset.empty() ? "rest" : f.preset) : load_scenario(f.file);
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(s.mesh_level, f.level);
  set(s.vtk_stride, f.vtk_stride);
  set(s.state_stride, f.state_stride);
  set(s.solver.dt, f.dt);
  set(s.solver.T, f.T);
  set(s.solver.s, f.s);
  set(s.solver.r, f.r);
  set(s.solver.gap_delta, f.gap_delta);
  set(s.solver.fp_tol, f.fp_tol);
  set(s.solver.linear_tol, f.linear_tol);
  set(s.solver.picard_tol, f.picard_tol);
  set(s.solver.split_threshold, f.split_threshold);
  set(s.solver.fd_h, f.fd_h);
  if (!f.force.empty()) s.body_force = vec(f.force);
  if (!f.A0.empty()) s.A0 = vec(f.A0);
  if (!f.Omega0.empty()) s.Omega0 = vec(f.Omega0);
  if (!f.out.empty()) s.output_dir = f.out;
  if (!f.mode.empty()) s.mode = f.mode;
  if (!f.linearization.empty()) s.linearization = f.linearization;
  if (!f.coefficients.empty()) {
    s.preset = "file";
    s.coefficients = f.coefficients;
  }
  if (f.no_uniqueness) s.diagnostics.uniqueness = false;
  s.validate();
  return s;
}

int cmd_run(const RunFlags& f) {
  const Scenario s = build(f);
  if (f.dump) {
    std::cout << dump_scenario(s);
    return 0;
  }
  const RunOutcome o = run_scenario(s);
  std::printf("%s: %zu steps, last gap %.6g, output %s\n", o.message.c_str(), o.steps, o.last_gap,
              o.dir.string().c_str());
  return o.exit_code;
}

int cmd_verify(const std::string& base, const std::string& run, double abs_tol, double rel_tol) {
  const VerifyReport rep = verify_runs(base, run, abs_tol, rel_tol);
  for (const auto& p : rep.problems) std::printf("PROBLEM %s\n", p.c_str());
  for (const auto& e : rep.entries)
    if (!e.pass || e.max_abs > 0.0)
      std::printf("%s %s:%s max_abs %.3e max_rel %.3e\n", e.pass ? "ok  " : "DIFF", e.file.c_str(), e.field.c_str(),
                  e.max_abs, e.max_rel);
  std::printf("%s (%zu fields compared)\n", rep.pass() ? "identical within tolerance" : "runs differ",
              rep.entries.size());
  return rep.pass() ? 0 : 1;
}

int cmd_derive(const std::string& dir, int l) {
  const DerivativeResult d = derive_run(dir, l);
  std::printf("order %d: %zu states, fd consistency %.3e\n", l, d.states.size(), d.fd_consistency);
  return 0;
}

int cmd_mesh_info(int level, double r_in, double r_out, bool inf_sup) {
  const ShellMesh m = build_shell_mesh(r_in, r_out, level);
  validate_mesh(m);
  const CoupledSpace s(m, BodyCoupling::Rigid);
  std::printf("level %d: %zu vertices, %zu tetrahedra, %zu boundary faces, %zu P2 nodes, %d unknowns\n", level,
              m.vertices.size(), m.tets.size(), m.boundary.size(), s.num_nodes(), s.size());
  std::printf("volume %.10g, max edge %.6g, body inscribed radius %.6g\n", m.volume(), m.max_edge(),
              m.body_inscribed_radius());
  if (inf_sup) std::printf("inf-sup constant %.6g\n", inf_sup_constant(s, assemble_stokes_block(s)));
  return 0;
}

int cmd_diag(const std::string& dir) {
  const DiagnosticsReport r = diagnose_run(dir);
  std::printf("min slack/E0 %.3e, energy decreasing %s, uniqueness gap %.3e, max divergence %.3e\n",
              r.min_slack_relative, r.energy_decreasing ? "yes" : "no", r.uniqueness_gap, r.max_divergence);
  std::printf("integrability norm %.6g (refined %.6g), min gap %.6g\n", r.prodi_serrin, r.prodi_serrin_refined,
              r.hypothesis.min_gap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid and rigid body solver on a fixed reference shell"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Solve a scenario and write its artifacts");
  run->add_option("scenario", rf.file, "Scenario JSON file");
  run->add_option("--preset", rf.preset, "Built-in scenario: rest, spin-down, wall-approach");
  run->add_option("--level", rf.level, "Mesh refinement level");
  run->add_option("--dt", rf.dt, "Time step");
  run->add_option("--T", rf.T, "Final time");
  run->add_option("--s", rf.s, "Spatial integrability exponent");
  run->add_option("--r", rf.r, "Temporal integrability exponent");
  run->add_option("--gap-delta", rf.gap_delta, "Abort below this body-wall distance");
  run->add_option("--fp-tol", rf.fp_tol, "Fixed-point tolerance");
  run->add_option("--linear-tol", rf.linear_tol, "Linear solve tolerance");
  run->add_option("--picard-tol", rf.picard_tol, "Picard tolerance");
  run->add_option("--split-threshold", rf.split_threshold, "Window norm bound before splitting");
  run->add_option("--fd-h", rf.fd_h, "Label stencil step");
  run->add_option("--force", rf.force, "Body force")->expected(3);
  run->add_option("--A0", rf.A0, "Initial body-frame translational velocity")->expected(3);
  run->add_option("--Omega0", rf.Omega0, "Initial body-frame angular velocity")->expected(3);
  run->add_option("--coefficients", rf.coefficients, "Text file with the initial reduced vector");
  run->add_option("--mode", rf.mode, "nonlinear or linearized");
  run->add_option("--linearization", rf.linearization, "States file of the linearization trajectory");
  run->add_option("--out", rf.out, "Output directory (FSI_OUTPUT_ROOT prefixes relative paths)");
  run->add_option("--vtk-stride", rf.vtk_stride, "Steps between VTK snapshots");
  run->add_option("--state-stride", rf.state_stride, "Steps between stored states");
  run->add_flag("--no-uniqueness", rf.no_uniqueness, "Skip the uniqueness re-solve");
  run->add_flag("--dump", rf.dump, "Print the effective scenario and exit");

  std::string base_dir, run_dir;
  double abs_tol = 1e-12, rel_tol = 1e-9;
  auto* verify = app.add_subcommand("verify", "Compare two run directories");
  verify->add_option("baseline", base_dir)->required();
  verify->add_option("run", run_dir)->required();
  verify->add_option("--abs-tol", abs_tol, "Absolute tolerance");
  verify->add_option("--rel-tol", rel_tol, "Relative tolerance");

  std::string derive_dir;
  int order = 1;
  auto* derive = app.add_subcommand("derive", "Time-derivative solve on a finished run");
  derive->add_option("run", derive_dir)->required();
  derive->add_option("-l,--order", order, "Derivative order");

  int level = 1;
  double r_in = 0.5, r_out = 2.0;
  bool inf_sup = false;
  auto* mesh = app.add_subcommand("mesh-info", "Shell mesh statistics");
  mesh->add_option("--level", level, "Refinement level");
  mesh->add_option("--r-in", r_in, "Body radius");
  mesh->add_option("--r-out", r_out, "Container radius");
  mesh->add_flag("--inf-sup", inf_sup, "Compute the discrete inf-sup constant");

  std::string diag_dir;
  auto* diag = app.add_subcommand("diag", "Recompute diagnostics of a finished run");
  diag->add_option("run", diag_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(rf);
    if (*verify) return cmd_verify(base_dir, run_dir, abs_tol, rel_tol);
    if (*derive) return cmd_derive(derive_dir, order);
    if (*mesh) return cmd_mesh_info(level, r_in, r_out, inf_sup);
    if (*diag) return cmd_diag(diag_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(ErrorKind::Io);
  }
  return 2;
}
