#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fsi/diagnostics.hpp"

namespace fsi {

inline constexpr const char* kScenarioSchema = "fsi-scenario/1";
inline constexpr const char* kManifestSchema = "fsi-manifest/1";
inline constexpr const char* kTrajectorySchema = "fsi-trajectory/1";
inline constexpr const char* kDiagnosticsSchema = "fsi-diagnostics/1";
inline constexpr const char* kVtkSchema = "fsi-vtk/1";
inline constexpr const char* kStatesMagic = "FSISTAT1";

struct DiagnosticsSelection {
  bool energy = true, momentum = true, traces = true, prodi_serrin = true, uniqueness = true, hypothesis = true;
};

/// Bounds a run must meet for exit code 0.
struct Contracts {
  double slack = 1e-8;       // slack >= -slack * E(0)
  double uniqueness = 1e-8;
  double trace = 1e-8;       // body and wall trace residuals
  double divergence = 1e-9;
  bool energy_decreasing = true;
};

struct Scenario {
  std::string name = "rest";
  double r_in = 0.5, r_out = 2.0;
  Vec3 center = Vec3::Zero();
  int mesh_level = 1;
  double delta_in = 0.1, delta_out = 0.3;
  Vec3 body_force = Vec3::Zero();
  std::string preset = "rest";          // initial data: rest, spin-down, wall-approach or file
  Vec3 A0 = Vec3::Zero(), Omega0 = Vec3::Zero();
  std::string coefficients;             // reduced initial vector, text, when preset = file
  std::string mode = "nonlinear";       // or linearized
  std::string linearization;            // states file of the linearization trajectory
  SolverConfig solver;
  DiagnosticsSelection diagnostics;
  Contracts contracts;
  std::string output_dir = "runs/rest";
  int vtk_stride = 10, state_stride = 1;

  /// Throws InvalidInput when any field is out of range.
  void validate() const;
  bool operator==(const Scenario& o) const;
};

/// Built-in scenarios: rest, spin-down, wall-approach.
Scenario preset_scenario(const std::string& name);

/// Fields absent from the document take the values of the named preset (default rest).
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& s);

/// Output directory with FSI_OUTPUT_ROOT prepended to relative paths when set.
std::filesystem::path resolve_output_dir(const std::string& dir);

struct RunSetup {
  std::unique_ptr<CoupledSpace> space;
  Problem problem;
};
RunSetup make_setup(const Scenario& s);

// ---- artifacts --------------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_energy_csv(std::ostream& os, const std::vector<EnergyRow>& rows);
void write_momentum_csv(std::ostream& os, const std::vector<MomentumRow>& rows);
void write_hypothesis_csv(std::ostream& os, const HypothesisReport& rep);
void write_traces_csv(std::ostream& os, const std::vector<TraceRow>& rows);

/// Legacy VTK ASCII: physical vertex positions, physical velocity and pressure at vertices.
void write_vtk(std::ostream& os, const Problem& problem, const Trajectory& traj, std::size_t step, double dt_ode);

/// Binary states: magic, version, count, size, stride, then per record
/// t, dt, q, Q (row-major), a, omega, x as little-endian 64-bit floats.
void write_states(std::ostream& os, const Trajectory& traj, int stride);
struct StatesFile {
  int stride = 1;
  Trajectory traj{0.0, Vec3::Zero()};
};
/// Rebuilds states, records (t, dt, body) and the piecewise motion.
StatesFile read_states(std::istream& is, const Vec3& q0);

/// Pass/fail of each configured contract.
struct ContractResult {
  std::string name;
  double value, bound;
  bool pass;
};
std::vector<ContractResult> check_contracts(const Scenario& s, const DiagnosticsReport& r);

/// Outcome of a run; artifacts are written even on failure.
struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::size_t steps = 0;
  double last_gap = 0.0;
  std::filesystem::path dir;
};
/// Exit codes: 0 all contracts pass, 1 a contract fails, 2 invalid input, 3 gap violation, 4 solver failure.
int exit_code_for(ErrorKind k);
RunOutcome run_scenario(const Scenario& s);

/// Field-by-field comparison of two run directories (manifest scalars and every CSV).
struct VerifyEntry {
  std::string file, field;
  double max_abs, max_rel;
  bool pass;
};
struct VerifyReport {
  std::vector<VerifyEntry> entries;
  std::vector<std::string> problems;  // missing files, shape mismatches
  bool pass() const;
};
VerifyReport verify_runs(const std::filesystem::path& baseline, const std::filesystem::path& run, double abs_tol,
                         double rel_tol);

/// Time-derivative solve on a finished run; writes derive.csv and derivative_states.bin into the run directory.
DerivativeResult derive_run(const std::filesystem::path& run_dir, int l);

/// Recomputes diagnostics CSVs and the summary of a finished run.
DiagnosticsReport diagnose_run(const std::filesystem::path& run_dir);

}  // namespace fsi
