#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Core>
#include <fmt/format.h>

#include "fieldelim/errors.hpp"
#include "fieldelim/scenario.hpp"
#include "fieldelim/snapshot.hpp"

#ifndef FIELDELIM_VERSION
#define FIELDELIM_VERSION "unknown"
#endif

namespace fieldelim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot read file", {{"path", path.string()}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) {
    throw Error(ErrorKind::IoError, "cannot write file", {{"path", path.string()}});
  }
}

double min_real(const GridField& f) {
  double lo = f[0].real();
  for (const auto& z : f.values()) lo = std::min(lo, z.real());
  return lo;
}

class RunWriter {
 public:
  RunWriter(fs::path dir, const Scenario& sc) : dir_(std::move(dir)), sc_(sc) {}

  bool diag_step(std::size_t step) const {
    return step % sc_.cadence == 0 || step == sc_.steps;
  }
  bool snapshot_step(std::size_t step) const {
    return step == 0 || step == sc_.steps ||
           (sc_.snapshot_cadence > 0 && step % sc_.snapshot_cadence == 0);
  }

  void diag(std::size_t step, double t, const std::string& name, double v) {
    samples_.push_back({t, name, v});
    summary_[name] = v;
    steps_taken_ = step;
  }

  void snapshot(std::size_t step, double t, const std::string& group,
                std::span<const GridField> components) {
    const auto rel = fmt::format("snapshots/{}_{:06d}.fld", group, step);
    fs::create_directories(dir_ / "snapshots");
    write_snapshot(dir_ / rel, components, group);
    files_.push_back(rel);
    snapshots_.push_back({{"step", step}, {"t", t}, {"group", group}, {"file", rel}});
    steps_taken_ = step;
  }

  void write_diagnostics() {
    std::ostringstream csv;
    write_observer_csv(csv, samples_);
    write_file(dir_ / "diagnostics.csv", csv.str());
    files_.push_back("diagnostics.csv");
  }

  json files() const { return files_; }
  json snapshots() const { return snapshots_; }
  json summary() const { return summary_; }
  std::size_t steps_taken() const { return steps_taken_; }

 private:
  fs::path dir_;
  const Scenario& sc_;
  std::vector<Sample> samples_;
  std::vector<std::string> files_;
  json snapshots_ = json::array();
  json summary_ = json::object();
  std::size_t steps_taken_ = 0;
};

void run_scalar(const Scenario& sc, RunWriter& w) {
  const auto lat = sc.lattice();
  const auto& ss = *sc.scalar;
  const auto init = make_scalar_initial_data(ss.initial, lat, ss.params);
  const auto p = init.params;
  EvolutionProblem prob;
  if (ss.coupled) {
    prob.state = pack(init.coupled);
    prob.rhs = [&](const State& x) { return scalar_coupled_rhs(x, lat, p); };
  } else {
    prob.state = pack(init.field_only);
    prob.rhs = [&](const State& x) { return scalar_field_only_rhs(x, lat, p); };
  }
  auto hook = [&](std::size_t step, double t, const State& x) {
    const bool diag = w.diag_step(step), snap = w.snapshot_step(step);
    if (!diag && !snap) return;
    std::optional<ScalarCoupledState> cs;
    if (ss.coupled) cs = complete_coupled(x, lat, p);
    const ScalarFieldOnlyState fo =
        cs ? to_field_only(*cs) : unpack_scalar_field_only(x, lat);
    GridField Phi(lat), Phi_dot(lat);
    if (cs) {
      Phi = cs->phi * cs->phi;
      Phi_dot = 2.0 * cs->phi * cs->phi_dot;
    } else {
      auto c = scalar_closure(fo, p);
      Phi = std::move(c.Phi);
      Phi_dot = std::move(c.Phi_dot);
    }
    if (diag) {
      const GridField J0_dot = fo.B_dot[0] * Phi + fo.B[0] * Phi_dot;
      const std::array<GridField, 3> J{fo.B[1] * Phi, fo.B[2] * Phi, fo.B[3] * Phi};
      w.diag(step, t, "min_Phi", min_real(Phi));
      w.diag(step, t, "min_abs_B0", std::abs(min_abs(fo.B[0]).value));
      w.diag(step, t, "norm_B", l2_norm(fo.B));
      w.diag(step, t, "norm_B_dot", l2_norm(fo.B_dot));
      w.diag(step, t, "current_law", norms(current_divergence(J0_dot, J)).linf);
      if (cs) w.diag(step, t, "gauss_residual", gauss_residual(*cs, p));
    }
    if (snap) {
      w.snapshot(step, t, "B", fo.B);
      w.snapshot(step, t, "B_dot", fo.B_dot);
      if (cs) {
        const std::array<GridField, 2> phi{cs->phi, cs->phi_dot};
        w.snapshot(step, t, "phi", phi);
      }
    }
  };
  evolve(std::move(prob), sc.dt, sc.steps, 1, hook);
}

void run_spinor(const Scenario& sc, RunWriter& w) {
  const auto lat = sc.lattice();
  const auto& ss = *sc.spinor;
  const auto init = make_spinor_initial_data(ss.initial, lat, ss.params);
  const auto p = init.params;
  EvolutionProblem prob;
  if (ss.coupled) {
    prob.state = pack(init.coupled);
    prob.rhs = [&](const State& x) { return spinor_coupled_rhs(x, lat, p); };
  } else {
    prob.state = pack(init.transformed.B);
    prob.rhs = [&](const State& x) { return spinor_field_only_rhs(x, lat, p); };
  }
  auto hook = [&](std::size_t step, double t, const State& x) {
    const bool diag = w.diag_step(step), snap = w.snapshot_step(step);
    if (!diag && !snap) return;
    std::optional<SpinorCoupledState> cs;
    if (ss.coupled) cs = complete_spinor(x, lat, p);
    const SpinorFieldOnlyState fo =
        cs ? gauge_to_B(*cs, p).B : unpack_spinor_field_only(x, lat);
    const GridField kappa = cs ? p.e * p.e * abs2(cs->psi[0])
                               : reconstruct_chain(fo, p).delta_factor;
    if (diag) {
      w.diag(step, t, "norm_B", l2_norm(fo.B));
      w.diag(step, t, "min_abs_delta_factor", std::abs(min_abs(kappa).value));
      if (cs) {
        double charge = 0.0;
        for (const auto& c : cs->psi) charge += std::pow(norms(c).l2, 2);
        w.diag(step, t, "charge", charge);
        w.diag(step, t, "min_abs_psi1", std::abs(min_abs(cs->psi[0]).value));
      }
    }
    if (snap) {
      w.snapshot(step, t, "B", fo.B);
      w.snapshot(step, t, "B_dot", fo.B_dot);
      w.snapshot(step, t, "B_ddot", fo.B_ddot);
      if (cs) {
        w.snapshot(step, t, "psi", cs->psi);
        const std::array<GridField, 4> A{cs->A0, cs->A_sp[0], cs->A_sp[1], cs->A_sp[2]};
        w.snapshot(step, t, "A", A);
      }
    }
  };
  evolve(std::move(prob), sc.dt, sc.steps, 1, hook);
}

void run_fock(const Scenario& sc, RunWriter& w) {
  const auto& fk = *sc.fock;
  const FockSpace space(fk.system.k, fk.cutoff);
  const auto op = carleman_hamiltonian(fk.system, space);
  FockOptions opts;
  opts.max_norm_growth = fk.max_norm_growth;
  opts.cadence = sc.cadence;
  auto hook = [&](std::size_t step, double t, const FockState& s) {
    const Eigen::Map<const Eigen::VectorXcd> v(s.data(), Eigen::Index(s.size()));
    w.diag(step, t, "norm", fock_norm(s));
    w.diag(step, t, "leak", (op.leak * v).norm());
    w.diag(step, t, "vacuum_abs", std::abs(s[space.vacuum()]));
    const auto xi = readout(space, s, fk.eps_vac);
    for (int i = 0; i < fk.system.k; ++i) {
      w.diag(step, t, fmt::format("xi{}_re", i), xi[i].real());
      w.diag(step, t, fmt::format("xi{}_im", i), xi[i].imag());
    }
  };
  evolve_fock(coherent_state(space, fk.xi0, fk.tail_tol), op, sc.dt, sc.steps,
              opts, hook);
}

json lattice_json(const Scenario& sc) {
  if (sc.engine == Engine::Fock) return nullptr;
  const auto lat = sc.lattice();
  return {{"dims", lat.dims()}, {"spacings", lat.spacings()}};
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Scalar: return "scalar";
    case Engine::Spinor: return "spinor";
    case Engine::Fock: return "fock";
  }
  return "?";
}

}  // namespace

RunOutcome run_scenario(const fs::path& config, const fs::path& out_dir) {
  RunOutcome outcome;
  json manifest = {{"status", "ok"},
                   {"config", config.string()},
                   {"code_version", FIELDELIM_VERSION},
                   {"started", utc_now()},
                   {"error", nullptr}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    const Error e(ErrorKind::IoError, "cannot create output directory",
                  {{"path", out_dir.string()}, {"reason", ec.message()}});
    return {exit_code(e.kind()), e.to_json()};
  }

  std::optional<Scenario> sc;
  std::optional<RunWriter> w;
  auto fail = [&](json err, int code) {
    outcome = {code, std::move(err)};
    manifest["status"] = "error";
    manifest["error"] = outcome.error;
  };
  try {
    const std::string text = read_file(config);
    manifest["config_hash"] = config_hash(text);
    sc = parse_scenario(text);
    manifest["engine"] = engine_name(sc->engine);
    manifest["seed"] = sc->seed;
    manifest["lattice"] = lattice_json(*sc);
    manifest["dt"] = sc->dt;
    manifest["steps"] = sc->steps;
    manifest["cadence"] = sc->cadence;
    manifest["snapshot_cadence"] = sc->snapshot_cadence;
    w.emplace(out_dir, *sc);
    switch (sc->engine) {
      case Engine::Scalar: run_scalar(*sc, *w); break;
      case Engine::Spinor: run_spinor(*sc, *w); break;
      case Engine::Fock: run_fock(*sc, *w); break;
    }
  } catch (const Error& e) {
    fail(e.to_json(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    fail({{"error", "Internal"}, {"message", e.what()}, {"detail", json::object()}}, 3);
  }

  try {
    json files = json::array();
    if (w) {
      w->write_diagnostics();
      files = w->files();
      manifest["snapshots"] = w->snapshots();
      manifest["summary"] = w->summary();
      manifest["steps_taken"] = w->steps_taken();
    }
    if (!outcome.error.is_null()) {
      write_file(out_dir / "error.json", outcome.error.dump(2) + "\n");
      files.push_back("error.json");
    }
    manifest["files"] = files;
    manifest["finished"] = utc_now();
    const auto tmp = out_dir / "manifest.json.tmp";
    write_file(tmp, manifest.dump(2) + "\n");
    fs::rename(tmp, out_dir / "manifest.json");
  } catch (const std::exception& e) {
    if (outcome.error.is_null()) {
      const Error err(ErrorKind::IoError, "cannot write run outputs",
                      {{"reason", e.what()}});
      outcome = {exit_code(err.kind()), err.to_json()};
    }
  }
  return outcome;
}

// ---- comparison -----------------------------------------------------------

namespace {

json load_manifest(const fs::path& dir) {
  try {
    return json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, "manifest is not valid JSON",
                {{"path", (dir / "manifest.json").string()}, {"reason", e.what()}});
  }
}

// name -> (t -> value)
std::map<std::string, std::map<double, double>> load_diagnostics(const fs::path& dir) {
  std::istringstream in(read_file(dir / "diagnostics.csv"));
  std::map<std::string, std::map<double, double>> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) continue;
    out[line.substr(a + 1, b - a - 1)][std::stod(line.substr(0, a))] =
        std::stod(line.substr(b + 1));
  }
  return out;
}

}  // namespace

Comparison compare_runs(const fs::path& a, const fs::path& b,
                        const std::string& quantity) {
  const json ma = load_manifest(a), mb = load_manifest(b);
  for (const char* key : {"lattice", "dt", "cadence", "snapshot_cadence"}) {
    if (ma.value(key, json()) != mb.value(key, json())) {
      throw Error(ErrorKind::Mismatch, fmt::format("runs differ in {}", key),
                  {{"field", key}, {"a", ma.value(key, json())}, {"b", mb.value(key, json())}});
    }
  }
  const double dt = ma.value("dt", 1.0);
  Comparison out;
  out.quantity = quantity;

  std::map<std::size_t, std::string> snaps_a, snaps_b;
  for (const auto& s : ma.value("snapshots", json::array())) {
    if (s["group"] == quantity) snaps_a[s["step"].get<std::size_t>()] = s["file"];
  }
  for (const auto& s : mb.value("snapshots", json::array())) {
    if (s["group"] == quantity) snaps_b[s["step"].get<std::size_t>()] = s["file"];
  }
  if (!snaps_a.empty() || !snaps_b.empty()) {
    for (const auto& [step, file] : snaps_a) {
      const auto it = snaps_b.find(step);
      if (it == snaps_b.end()) {
        throw Error(ErrorKind::MissingQuantity, "snapshot missing in second run",
                    {{"quantity", quantity}, {"step", step}});
      }
      const auto fa = read_snapshot(a / file), fb = read_snapshot(b / it->second);
      if (fa.components.size() != fb.components.size()) {
        throw Error(ErrorKind::Mismatch, "snapshot component counts differ",
                    {{"quantity", quantity}, {"step", step}});
      }
      double d = 0.0;
      try {
        d = rel_diff(std::span<const GridField>(fa.components),
                     std::span<const GridField>(fb.components));
      } catch (const Error& e) {
        throw Error(ErrorKind::Mismatch, "snapshot lattices differ",
                    {{"quantity", quantity}, {"step", step}, {"reason", e.what()}});
      }
      out.rows.push_back({step, step * dt, d});
    }
    if (snaps_a.size() != snaps_b.size()) {
      throw Error(ErrorKind::MissingQuantity, "snapshot missing in first run",
                  {{"quantity", quantity}});
    }
  } else {
    const auto da = load_diagnostics(a), db = load_diagnostics(b);
    const auto ia = da.find(quantity), ib = db.find(quantity);
    if (ia == da.end() || ib == db.end()) {
      throw Error(ErrorKind::MissingQuantity, "no snapshot group or diagnostic of that name",
                  {{"quantity", quantity},
                   {"missing_in", ia == da.end() ? a.string() : b.string()}});
    }
    if (ia->second.size() != ib->second.size()) {
      throw Error(ErrorKind::Mismatch, "diagnostic sample times differ",
                  {{"quantity", quantity}});
    }
    for (const auto& [t, va] : ia->second) {
      const auto it = ib->second.find(t);
      if (it == ib->second.end()) {
        throw Error(ErrorKind::Mismatch, "diagnostic sample times differ",
                    {{"quantity", quantity}, {"t", t}});
      }
      const double vb = it->second;
      const double d = va == vb ? 0.0 : std::abs(va - vb) / std::max(std::abs(vb), 1e-300);
      out.rows.push_back({static_cast<std::size_t>(std::llround(t / dt)), t, d});
    }
  }
  for (const auto& r : out.rows) out.max_rel_diff = std::max(out.max_rel_diff, r.rel_diff);
  return out;
}

}  // namespace fieldelim
