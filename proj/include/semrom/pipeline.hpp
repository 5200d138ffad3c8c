#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semrom/io.hpp"
#include "semrom/reduced_model.hpp"

namespace semrom {

/// Flat key=value run configuration; every key is optional and falls back to
/// the full-scale default. Unknown keys are rejected.
struct RunConfig {
  GeometryConfig geom;
  MeshConfig mesh{2, 1};
  int p = 8;
  double viscosity = 1.0;
  int num_snapshots = 40;
  int num_verification = 40;
  double energy_threshold = 0.9999;
  double oseen_tol = 1e-9;
  int oseen_max_iter = 100;
  unsigned seed = 12345;
  std::string output_dir = "archive";
};

inline RunConfig parse_run_config(const std::filesystem::path& path) {
  auto kv = parse_key_value_file(path);
  RunConfig cfg;
  auto take = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto as_double = [&](const char* key, double& target) {
    std::string v = take(key);
    if (v.empty()) return;
    std::size_t used = 0;
    target = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(std::string("config: bad number for ") + key);
  };
  auto as_int = [&](const char* key, int& target) {
    std::string v = take(key);
    if (v.empty()) return;
    std::size_t used = 0;
    target = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(std::string("config: bad integer for ") + key);
  };
  as_double("channel_length", cfg.geom.channel_length);
  as_double("channel_height", cfg.geom.channel_height);
  as_double("narrowing_x0", cfg.geom.narrowing_x0);
  as_double("narrowing_x1", cfg.geom.narrowing_x1);
  as_double("mu_min", cfg.geom.mu_min);
  as_double("mu_max", cfg.geom.mu_max);
  as_int("elems_per_unit_x", cfg.mesh.elems_per_unit_x);
  as_int("elems_per_unit_y", cfg.mesh.elems_per_unit_y);
  as_int("p", cfg.p);
  as_double("viscosity", cfg.viscosity);
  as_int("num_snapshots", cfg.num_snapshots);
  as_int("num_verification", cfg.num_verification);
  as_double("energy_threshold", cfg.energy_threshold);
  as_double("oseen_tol", cfg.oseen_tol);
  as_int("oseen_max_iter", cfg.oseen_max_iter);
  int seed = static_cast<int>(cfg.seed);
  as_int("seed", seed);
  cfg.seed = static_cast<unsigned>(seed);
  std::string dir = take("output_dir");
  if (!dir.empty()) cfg.output_dir = dir;
  if (!kv.empty()) throw std::invalid_argument("config: unknown key " + kv.begin()->first);
  if (cfg.p < 3) throw std::invalid_argument("config: p must be at least 3");
  if (cfg.num_snapshots < 1) throw std::invalid_argument("config: num_snapshots must be positive");
  if (cfg.num_verification < 1) throw std::invalid_argument("config: num_verification must be positive");
  cfg.geom.validate();
  return cfg;
}

inline std::vector<double> snapshot_parameters(const RunConfig& cfg) {
  std::vector<double> params;
  const double lo = cfg.geom.mu_min, hi = cfg.geom.mu_max;
  if (cfg.num_snapshots == 1) return {0.5 * (lo + hi)};
  for (int i = 0; i < cfg.num_snapshots; ++i)
    params.push_back(lo + (hi - lo) * i / (cfg.num_snapshots - 1.0));
  return params;
}

inline std::vector<double> verification_parameters(const RunConfig& cfg) {
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(cfg.geom.mu_min, cfg.geom.mu_max);
  std::vector<double> params;
  for (int i = 0; i < cfg.num_verification; ++i) params.push_back(dist(rng));
  return params;
}

// ---------------------------------------------------------------------------
// Archive layout. Reduced (N-sized) files, loadable online:
//   manifest.txt, rom_linear.bin, rom_linear_lift.bin, rom_advection.bin,
//   rom_advection_lift.bin, singular_values.bin, velocity_spectrum.bin,
//   pressure_spectrum.bin
// Full-order (N_delta-sized) files, offline/study only:
//   snapshots.bin, snapshot_params.bin, pod_modes.bin
// ---------------------------------------------------------------------------

inline std::string manifest_text(const RunConfig& cfg, const ReducedModel& m) {
  std::ostringstream out;
  out.precision(17);
  out << "format_version=1\n"
      << "n_delta=" << m.n_delta << "\n"
      << "p=" << m.p << "\n"
      << "elems_per_unit_x=" << cfg.mesh.elems_per_unit_x << "\n"
      << "elems_per_unit_y=" << cfg.mesh.elems_per_unit_y << "\n"
      << "viscosity=" << m.viscosity << "\n"
      << "channel_length=" << m.geom.channel_length << "\n"
      << "channel_height=" << m.geom.channel_height << "\n"
      << "narrowing_x0=" << m.geom.narrowing_x0 << "\n"
      << "narrowing_x1=" << m.geom.narrowing_x1 << "\n"
      << "mu_min=" << m.geom.mu_min << "\n"
      << "mu_max=" << m.geom.mu_max << "\n"
      << "energy_threshold=" << m.energy_threshold << "\n"
      << "num_snapshots=" << cfg.num_snapshots << "\n"
      << "num_verification=" << cfg.num_verification << "\n"
      << "seed=" << cfg.seed << "\n"
      << "oseen_tol=" << cfg.oseen_tol << "\n"
      << "oseen_max_iter=" << cfg.oseen_max_iter << "\n"
      << "pairs=" << m.pairs << "\n"
      << "num_pod_modes=" << (m.pairs > 0 ? 2 * m.pairs : m.num_modes) << "\n"
      << "basis_columns=" << m.num_modes << "\n"
      << "q_linear=" << m.linear_descs.size() << "\n"
      << "q_advection=" << m.adv_descs.size() << "\n"
      << "wind_slots=" << m.num_wind_slots() << "\n";
  return out.str();
}

inline void save_reduced_model(const std::filesystem::path& dir, const RunConfig& cfg,
                               const ReducedModel& m) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const int n = m.num_modes;
  const int ql = static_cast<int>(m.linear_descs.size());
  const int qa = static_cast<int>(m.adv_descs.size());
  const int slots = m.num_wind_slots();

  Eigen::MatrixXd lin(ql * n, n), lin_lift(ql * n, kNumLiftingTerms);
  for (int i = 0; i < ql; ++i) {
    lin.middleRows(i * n, n) = m.A_hat[i];
    for (int j = 0; j < kNumLiftingTerms; ++j) lin_lift.block(i * n, j, n, 1) = m.f_hat[i][j];
  }
  Eigen::MatrixXd adv(qa * slots * n, n), adv_lift(qa * slots * n, kNumLiftingTerms);
  for (int k = 0; k < qa; ++k)
    for (int s = 0; s < slots; ++s) {
      int row = (k * slots + s) * n;
      adv.middleRows(row, n) = m.G_hat[k][s];
      for (int j = 0; j < kNumLiftingTerms; ++j) adv_lift.block(row, j, n, 1) = m.g_hat[k][s][j];
    }
  write_matrix(dir / "rom_linear.bin", lin, "reduced-linear");
  write_matrix(dir / "rom_linear_lift.bin", lin_lift, "reduced-linear-lift");
  write_matrix(dir / "rom_advection.bin", adv, "reduced-advection");
  write_matrix(dir / "rom_advection_lift.bin", adv_lift, "reduced-advection-lift");
  write_vector(dir / "singular_values.bin", m.singular_values, "singular-values");
  write_file_atomic(dir / "manifest.txt", manifest_text(cfg, m));
}

inline RunConfig config_from_manifest(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  auto need = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("manifest: missing key ") + key);
    return it->second;
  };
  cfg.geom.channel_length = std::stod(need("channel_length"));
  cfg.geom.channel_height = std::stod(need("channel_height"));
  cfg.geom.narrowing_x0 = std::stod(need("narrowing_x0"));
  cfg.geom.narrowing_x1 = std::stod(need("narrowing_x1"));
  cfg.geom.mu_min = std::stod(need("mu_min"));
  cfg.geom.mu_max = std::stod(need("mu_max"));
  cfg.mesh.elems_per_unit_x = std::stoi(need("elems_per_unit_x"));
  cfg.mesh.elems_per_unit_y = std::stoi(need("elems_per_unit_y"));
  cfg.p = std::stoi(need("p"));
  cfg.viscosity = std::stod(need("viscosity"));
  cfg.num_snapshots = std::stoi(need("num_snapshots"));
  cfg.num_verification = std::stoi(need("num_verification"));
  cfg.energy_threshold = std::stod(need("energy_threshold"));
  cfg.oseen_tol = std::stod(need("oseen_tol"));
  cfg.oseen_max_iter = std::stoi(need("oseen_max_iter"));
  cfg.seed = static_cast<unsigned>(std::stoul(need("seed")));
  return cfg;
}

/// Loads the reduced model from its archive; touches only N-sized files.
inline ReducedModel load_reduced_model(const std::filesystem::path& dir) {
  auto kv = parse_key_value_file(dir / "manifest.txt");
  RunConfig cfg = config_from_manifest(kv);
  ReducedModel m;
  m.geom = cfg.geom;
  m.viscosity = cfg.viscosity;
  m.n_delta = std::stoi(kv.at("n_delta"));
  m.p = cfg.p;
  m.num_modes = std::stoi(kv.at("basis_columns"));
  m.pairs = std::stoi(kv.at("pairs"));
  m.energy_threshold = cfg.energy_threshold;
  m.singular_values = read_vector(dir / "singular_values.bin");

  m.linear_descs.clear();
  for (const auto& d : affine_term_descriptors())
    if (!is_advection(d.kind)) m.linear_descs.push_back(d);
  m.adv_descs = advection_descriptors();
  const int n = m.num_modes;
  const int ql = static_cast<int>(m.linear_descs.size());
  const int qa = static_cast<int>(m.adv_descs.size());
  const int slots = m.num_wind_slots();
  if (ql != std::stoi(kv.at("q_linear")) || qa != std::stoi(kv.at("q_advection")) ||
      slots != std::stoi(kv.at("wind_slots")))
    throw std::runtime_error("manifest: affine term layout does not match this build");

  Eigen::MatrixXd lin = read_matrix(dir / "rom_linear.bin");
  Eigen::MatrixXd lin_lift = read_matrix(dir / "rom_linear_lift.bin");
  Eigen::MatrixXd adv = read_matrix(dir / "rom_advection.bin");
  Eigen::MatrixXd adv_lift = read_matrix(dir / "rom_advection_lift.bin");
  if (lin.rows() != ql * n || lin.cols() != n || adv.rows() != qa * slots * n || adv.cols() != n)
    throw std::runtime_error("archive: reduced tensor dimensions do not match the manifest");
  m.A_hat.resize(ql);
  m.f_hat.resize(ql);
  for (int i = 0; i < ql; ++i) {
    m.A_hat[i] = lin.middleRows(i * n, n);
    for (int j = 0; j < kNumLiftingTerms; ++j) m.f_hat[i][j] = lin_lift.block(i * n, j, n, 1);
  }
  m.G_hat.assign(qa, {});
  m.g_hat.assign(qa, {});
  for (int k = 0; k < qa; ++k) {
    m.G_hat[k].resize(slots);
    m.g_hat[k].resize(slots);
    for (int s = 0; s < slots; ++s) {
      int row = (k * slots + s) * n;
      m.G_hat[k][s] = adv.middleRows(row, n);
      for (int j = 0; j < kNumLiftingTerms; ++j)
        m.g_hat[k][s][j] = adv_lift.block(row, j, n, 1);
    }
  }
  return m;
}

/// Loads the POD basis back for reconstruction / studies (full-order file).
inline PodBasis load_pod_basis(const std::filesystem::path& dir) {
  auto kv = parse_key_value_file(dir / "manifest.txt");
  PodBasis pod;
  pod.modes = read_matrix(dir / "pod_modes.bin");
  pod.pairs = std::stoi(kv.at("pairs"));
  pod.energy_threshold = std::stod(kv.at("energy_threshold"));
  pod.singular_values = read_vector(dir / "singular_values.bin");
  pod.velocity_spectrum = read_vector(dir / "velocity_spectrum.bin");
  pod.pressure_spectrum = read_vector(dir / "pressure_spectrum.bin");
  return pod;
}

// ---------------------------------------------------------------------------

struct OfflineResult {
  int n_delta = 0;
  int num_pod_modes = 0;
  int basis_columns = 0;
  int pairs = 0;
  std::filesystem::path archive;
};

inline OfflineResult cmd_offline(const RunConfig& cfg, std::ostream& out = std::cout) {
  FomContext ctx(cfg.geom, cfg.mesh, cfg.p, cfg.viscosity);
  std::vector<double> params = snapshot_parameters(cfg);
  SnapshotSet snaps;
  try {
    snaps = snapshot_sweep(ctx, params, cfg.oseen_tol, cfg.oseen_max_iter);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("snapshot sweep failed: ") + e.what());
  }
  PodBasis pod = compute_state_pod(ctx, snaps.states, cfg.energy_threshold);
  ReducedModel model = build_reduced_model(ctx.dofmap, pod, cfg.viscosity);

  const std::filesystem::path dir = cfg.output_dir;
  save_reduced_model(dir, cfg, model);
  write_matrix(dir / "snapshots.bin", snaps.states, "snapshot-states");
  write_vector(dir / "snapshot_params.bin",
               Eigen::Map<const Eigen::VectorXd>(snaps.parameters.data(), snaps.parameters.size()),
               "parameters");
  write_matrix(dir / "pod_modes.bin", pod.modes, "pod-modes");
  write_vector(dir / "velocity_spectrum.bin", pod.velocity_spectrum, "velocity-spectrum");
  write_vector(dir / "pressure_spectrum.bin", pod.pressure_spectrum, "pressure-spectrum");

  OfflineResult res{ctx.dofmap.n_delta(), pod.num_pod_modes(), pod.num_modes(), pod.pairs, dir};
  out << "offline summary\n"
      << "  " << std::left << std::setw(24) << "quantity" << std::right << std::setw(12) << "value"
      << "\n";
  auto row = [&](const char* name, auto value) {
    out << "  " << std::left << std::setw(24) << name << std::right << std::setw(12) << value
        << "\n";
  };
  row("N_delta", res.n_delta);
  row("snapshots", cfg.num_snapshots);
  row("POD modes (N)", res.num_pod_modes);
  row("basis columns", res.basis_columns);
  row("mode pairs", res.pairs);
  row("Q linear", model.linear_descs.size());
  row("Q advection", model.adv_descs.size());
  row("energy threshold", cfg.energy_threshold);
  return res;
}

inline ReducedState cmd_online(const std::filesystem::path& archive, double mu,
                               const std::filesystem::path& dump_field = {},
                               std::ostream& out = std::cout) {
  ReducedModel model = load_reduced_model(archive);
  auto kv = parse_key_value_file(archive / "manifest.txt");
  const double tol = std::stod(kv.at("oseen_tol"));
  const int max_iter = std::stoi(kv.at("oseen_max_iter"));
  ReducedState s = online_solve(model, mu, tol, max_iter);
  if (!s.converged)
    throw std::runtime_error("online solve did not converge at mu = " + std::to_string(mu));

  out << "online summary\n"
      << "  " << std::left << std::setw(24) << "mu" << std::right << std::setw(14) << mu << "\n"
      << "  " << std::left << std::setw(24) << "iterations" << std::right << std::setw(14)
      << s.iterations << "\n"
      << "  " << std::left << std::setw(24) << "final increment" << std::right << std::setw(14)
      << std::scientific << std::setprecision(3)
      << (s.residual_history.empty() ? 0.0 : s.residual_history.back()) << std::defaultfloat
      << "\n";
  out << "  reduced coordinates\n";
  for (int i = 0; i < s.alpha.size(); ++i)
    out << "  " << std::left << std::setw(24) << ("  alpha[" + std::to_string(i) + "]")
        << std::right << std::setw(14) << std::scientific << std::setprecision(6) << s.alpha(i)
        << std::defaultfloat << "\n";

  if (!dump_field.empty()) {
    // reconstruction is inherently full-order: this is the one online path
    // that reads an N_delta-sized file
    Eigen::MatrixXd modes = read_matrix(archive / "pod_modes.bin");
    if (modes.cols() != s.alpha.size())
      throw std::runtime_error("archive: pod_modes.bin does not match the reduced model");
    write_matrix(dump_field, modes * s.alpha, "state-vector");
  }
  return s;
}

struct StudyReport {
  std::vector<ErrorRow> errors;
  double fom_step_seconds = 0.0;
  double rom_step_seconds = 0.0;
  double speedup = 0.0;
  int rom_dimension = 0;
  double reynolds_min = 0.0;
  double reynolds_max = 0.0;
};

inline double median_seconds(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

inline StudyReport cmd_study(const RunConfig& cfg, const std::filesystem::path& archive,
                             std::ostream& out = std::cout) {
  namespace fs = std::filesystem;
  if (!fs::exists(archive / "manifest.txt"))
    throw std::runtime_error("missing archive: " + archive.string());
  ReducedModel model = load_reduced_model(archive);
  PodBasis pod = load_pod_basis(archive);
  FomContext ctx(cfg.geom, cfg.mesh, cfg.p, cfg.viscosity);
  if (ctx.dofmap.n_delta() != model.n_delta)
    throw std::runtime_error("config does not match the archive discretization");

  std::vector<double> params = verification_parameters(cfg);
  Eigen::MatrixXd truths(model.n_delta, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    FlowState fs_state = oseen_solve(ctx, params[i], Eigen::VectorXd(), cfg.oseen_tol,
                                     cfg.oseen_max_iter);
    if (!fs_state.converged)
      throw std::runtime_error("verification solve did not converge at mu = " +
                               std::to_string(params[i]));
    truths.col(i) = fs_state.x;
  }

  StudyReport rep;
  rep.errors = error_study(ctx, model, pod, params, truths, cfg.oseen_tol);

  // Reynolds range over the stored snapshot sweep
  {
    Eigen::MatrixXd snaps = read_matrix(archive / "snapshots.bin");
    Eigen::VectorXd sp = read_vector(archive / "snapshot_params.bin");
    rep.reynolds_min = std::numeric_limits<double>::infinity();
    rep.reynolds_max = 0.0;
    for (int i = 0; i < sp.size(); ++i) {
      FlowState st;
      st.mu = sp(i);
      st.x = snaps.col(i);
      double re = reynolds_estimate(ctx, st);
      rep.reynolds_min = std::min(rep.reynolds_min, re);
      rep.reynolds_max = std::max(rep.reynolds_max, re);
    }
  }

  // timing: median of 11 single fixed-point steps, warm caches, mu = 1
  {
    const double mu = 1.0;
    FlowState fom = oseen_solve(ctx, mu, Eigen::VectorXd(), cfg.oseen_tol, cfg.oseen_max_iter);
    Eigen::MatrixX2d wind = ctx.dofmap.expand_velocity(fom.x, mu);
    std::vector<double> fom_t, rom_t;
    for (int rep_i = 0; rep_i < 11; ++rep_i) {
      auto t0 = std::chrono::steady_clock::now();
      MonolithicSystem sys = assemble_direct(ctx.dofmap, mu, cfg.viscosity, &wind);
      Eigen::VectorXd x = solve_sparse(sys.A, sys.rhs(cfg.geom, mu));
      auto t1 = std::chrono::steady_clock::now();
      fom_t.push_back(std::chrono::duration<double>(t1 - t0).count());
      if (x.hasNaN()) throw std::runtime_error("timed FOM step produced NaN");
    }
    ReducedState rs = online_solve(model, mu, cfg.oseen_tol, cfg.oseen_max_iter);
    for (int rep_i = 0; rep_i < 11; ++rep_i) {
      auto t0 = std::chrono::steady_clock::now();
      ReducedOperator op = reduced_operator(model, mu, rs.alpha);
      Eigen::VectorXd a = solve_dense(op.A, op.b);
      auto t1 = std::chrono::steady_clock::now();
      rom_t.push_back(std::chrono::duration<double>(t1 - t0).count());
      if (a.hasNaN()) throw std::runtime_error("timed ROM step produced NaN");
    }
    rep.fom_step_seconds = median_seconds(fom_t);
    rep.rom_step_seconds = median_seconds(rom_t);
    rep.speedup = rep.fom_step_seconds / rep.rom_step_seconds;
    rep.rom_dimension = model.num_modes;
  }

  // CSV outputs
  {
    std::ostringstream csv;
    csv.precision(17);
    if (pod.pairs > 0) {
      csv << "mode_index,velocity_sigma,pressure_sigma\n";
      for (int i = 0; i < pod.velocity_spectrum.size() && i < pod.pressure_spectrum.size(); ++i)
        csv << (i + 1) << "," << pod.velocity_spectrum(i) << "," << pod.pressure_spectrum(i)
            << "\n";
    } else {
      csv << "mode_index,sigma\n";
      for (int i = 0; i < pod.singular_values.size(); ++i)
        csv << (i + 1) << "," << pod.singular_values(i) << "\n";
    }
    write_file_atomic(archive / "pod_energy.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv.precision(17);
    csv << "pod_modes,basis_columns,max_error,mean_error\n";
    for (const auto& r : rep.errors)
      csv << r.n << "," << (model.pairs > 0 ? 3 * (r.n / 2) : r.n) << "," << r.max_error << ","
          << r.mean_error << "\n";
    write_file_atomic(archive / "errors_vs_N.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv.precision(17);
    csv << "metric,value\n"
        << "fom_step_seconds," << rep.fom_step_seconds << "\n"
        << "rom_step_seconds," << rep.rom_step_seconds << "\n"
        << "rom_dimension," << rep.rom_dimension << "\n"
        << "speedup," << rep.speedup << "\n"
        << "reynolds_min," << rep.reynolds_min << "\n"
        << "reynolds_max," << rep.reynolds_max << "\n";
    write_file_atomic(archive / "timing.csv", csv.str());
  }

  out << "error study (" << params.size() << " verification points)\n";
  out << "  " << std::right << std::setw(10) << "POD modes" << std::setw(16) << "max error"
      << std::setw(16) << "mean error" << "\n";
  for (const auto& r : rep.errors)
    out << "  " << std::right << std::setw(10) << r.n << std::setw(16) << std::scientific
        << std::setprecision(4) << r.max_error << std::setw(16) << r.mean_error
        << std::defaultfloat << "\n";
  out << "timing (median of 11 fixed-point steps)\n";
  auto trow = [&](const char* name, double value) {
    out << "  " << std::left << std::setw(24) << name << std::right << std::setw(16)
        << std::scientific << std::setprecision(4) << value << std::defaultfloat << "\n";
  };
  trow("FOM step [s]", rep.fom_step_seconds);
  trow("ROM step [s]", rep.rom_step_seconds);
  trow("speedup", rep.speedup);
  trow("Reynolds min", rep.reynolds_min);
  trow("Reynolds max", rep.reynolds_max);
  return rep;
}

}  // namespace semrom
