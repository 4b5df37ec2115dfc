#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "fsi/io.hpp"

namespace fsi {

static_assert(std::endian::native == std::endian::little, "binary artifacts assume a little-endian host");

namespace {

void csv_header(std::ostream& os, const char* schema, const char* columns) {
  os << "# schema: " << schema << "\n" << columns << "\n";
  os.precision(17);
}

void put(std::ostream& os, const Vec3& v) { os << ',' << v.x() << ',' << v.y() << ',' << v.z(); }

template <class T>
void write_raw(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T read_raw(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorKind::Io, "states file: truncated");
  return v;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  csv_header(os, kTrajectorySchema,
             "t,dt,q_x,q_y,q_z,a_x,a_y,a_z,omega_x,omega_y,omega_z,Q00,Q01,Q02,Q10,Q11,Q12,Q20,Q21,Q22,"
             "energy,dissipation,divergence,gap,picard_iterations,fp_iterations,bisection_depth,mu_hat");
  for (const StepRecord& s : traj.steps) {
    os << s.t << ',' << s.dt;
    put(os, s.body.q);
    put(os, s.body.a);
    put(os, s.body.omega);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << ',' << s.body.Q(i, j);
    os << ',' << s.energy << ',' << s.dissipation << ',' << s.divergence << ',' << s.gap << ','
       << s.picard_iterations << ',' << s.fp_iterations << ',' << s.bisection_depth << ',' << s.mu_hat << '\n';
  }
}

void write_energy_csv(std::ostream& os, const std::vector<EnergyRow>& rows) {
  csv_header(os, kDiagnosticsSchema, "t,energy,dissipation,slack");
  for (const auto& r : rows) os << r.t << ',' << r.energy << ',' << r.dissipation << ',' << r.slack << '\n';
}

void write_momentum_csv(std::ostream& os, const std::vector<MomentumRow>& rows) {
  csv_header(os, kDiagnosticsSchema, "t,r_a_x,r_a_y,r_a_z,r_omega_x,r_omega_y,r_omega_z");
  for (const auto& r : rows) {
    os << r.t;
    put(os, r.r_a);
    put(os, r.r_omega);
    os << '\n';
  }
}

void write_hypothesis_csv(std::ostream& os, const HypothesisReport& rep) {
  csv_header(os, kDiagnosticsSchema, "t,gap,da_dt,domega_dt,gap_ok");
  for (const auto& r : rep.rows)
    os << r.t << ',' << r.gap << ',' << r.da_dt << ',' << r.domega_dt << ',' << (r.gap_ok ? 1 : 0) << '\n';
}

void write_traces_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  csv_header(os, kDiagnosticsSchema, "t,outer,body");
  for (const auto& r : rows) os << r.t << ',' << r.outer << ',' << r.body << '\n';
}

void write_vtk(std::ostream& os, const Problem& pb, const Trajectory& traj, std::size_t step, double dt_ode) {
  require(step < traj.size(), "vtk: step out of range");
  const CoupledSpace& s = *pb.space;
  const ShellMesh& m = s.mesh();
  const double t = traj.steps[step].t;
  TransformSweep sweep(pb, traj.motion, m.vertices, 0.0, dt_ode);
  const TransformSnapshot td = sweep.at(t);
  const auto nodal = s.nodal_velocity(traj.states[step]);
  const Eigen::VectorXd& x = traj.states[step];
  os.precision(12);
  os << "# vtk DataFile Version 3.0\n" << kVtkSchema << " t=" << t << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.vertices.size() << " double\n";
  for (const Vec3& X : td.X) os << X.x() << ' ' << X.y() << ' ' << X.z() << '\n';
  os << "CELLS " << m.tets.size() << ' ' << 5 * m.tets.size() << '\n';
  for (const auto& c : m.tets) os << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  os << "CELL_TYPES " << m.tets.size() << '\n';
  for (std::size_t e = 0; e < m.tets.size(); ++e) os << "10\n";
  os << "POINT_DATA " << m.vertices.size() << "\nVECTORS velocity double\n";
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    const Vec3 u = td.gradX[v] * nodal[v];
    os << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
  }
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (std::size_t v = 0; v < m.vertices.size(); ++v) os << x[s.pressure_offset() + static_cast<int>(v)] << '\n';
}

void write_states(std::ostream& os, const Trajectory& traj, int stride) {
  require(stride >= 1, "states file: stride must be at least 1");
  const std::uint64_t size = traj.size() ? traj.states[0].size() : 0;
  std::vector<std::size_t> keep;
  for (std::size_t n = 0; n < traj.size(); n += stride) keep.push_back(n);
  if (traj.size() && keep.back() != traj.size() - 1) keep.push_back(traj.size() - 1);
  os.write(kStatesMagic, 8);
  write_raw<std::uint32_t>(os, 1);
  write_raw<std::uint64_t>(os, keep.size());
  write_raw<std::uint64_t>(os, size);
  write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(stride));
  for (std::size_t n : keep) {
    const StepRecord& s = traj.steps[n];
    write_raw(os, s.t);
    write_raw(os, s.dt);
    for (int i = 0; i < 3; ++i) write_raw(os, s.body.q[i]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) write_raw(os, s.body.Q(i, j));
    for (int i = 0; i < 3; ++i) write_raw(os, s.body.a[i]);
    for (int i = 0; i < 3; ++i) write_raw(os, s.body.omega[i]);
    os.write(reinterpret_cast<const char*>(traj.states[n].data()), static_cast<std::streamsize>(size * 8));
  }
  if (!os) throw Error(ErrorKind::Io, "states file: write failed");
}

StatesFile read_states(std::istream& is, const Vec3& q0) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kStatesMagic, 8) != 0) throw Error(ErrorKind::Io, "states file: bad magic");
  if (read_raw<std::uint32_t>(is) != 1) throw Error(ErrorKind::Io, "states file: unsupported version");
  const auto count = read_raw<std::uint64_t>(is), size = read_raw<std::uint64_t>(is);
  StatesFile out;
  out.stride = static_cast<int>(read_raw<std::uint64_t>(is));
  if (count > (1u << 24) || size > (1u << 28)) throw Error(ErrorKind::Io, "states file: implausible header");
  out.traj = Trajectory(0.0, q0);
  for (std::uint64_t n = 0; n < count; ++n) {
    StepRecord s;
    s.t = read_raw<double>(is);
    s.dt = read_raw<double>(is);
    for (int i = 0; i < 3; ++i) s.body.q[i] = read_raw<double>(is);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s.body.Q(i, j) = read_raw<double>(is);
    for (int i = 0; i < 3; ++i) s.body.a[i] = read_raw<double>(is);
    for (int i = 0; i < 3; ++i) s.body.omega[i] = read_raw<double>(is);
    s.body.t = s.t;
    Eigen::VectorXd x(static_cast<Eigen::Index>(size));
    is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(size * 8));
    if (!is) throw Error(ErrorKind::Io, "states file: truncated");
    if (n > 0) out.traj.motion.push(s.t, s.body.a, s.body.omega);
    out.traj.steps.push_back(s);
    out.traj.states.push_back(std::move(x));
  }
  return out;
}

}  // namespace fsi
