#include "fieldelim/integrator.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace fieldelim {

namespace {

void check_stage(const State& k, int stage) {
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!std::isfinite(k[i].real()) || !std::isfinite(k[i].imag())) {
      throw Error(ErrorKind::NonFinite, "non-finite RK4 stage derivative",
                  {{"stage", stage}, {"index", i}});
    }
  }
}

State axpy(const State& x, cplx a, const State& y) {
  State out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

}  // namespace

State rk4_step(const EvolutionProblem& p, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::PreconditionViolated, "time step must be positive",
                {{"dt", dt}});
  }
  const State& x = p.state;
  const State k1 = p.rhs(x);
  check_stage(k1, 1);
  const State k2 = p.rhs(axpy(x, 0.5 * dt, k1));
  check_stage(k2, 2);
  const State k3 = p.rhs(axpy(x, 0.5 * dt, k2));
  check_stage(k3, 3);
  const State k4 = p.rhs(axpy(x, dt, k3));
  check_stage(k4, 4);
  State out(x.size());
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

EvolutionAborted::EvolutionAborted(const Error& cause, Trajectory partial)
    : Error(cause.kind(),
            std::string(cause.what()) +
                fmt::format(" (after {} steps, t = {})", partial.steps_taken,
                            partial.final_time),
            cause.detail()),
      partial_(std::move(partial)) {}

Trajectory evolve(EvolutionProblem p, double dt, std::size_t steps,
                  std::size_t cadence, const SampleHook& hook) {
  if (cadence == 0) {
    throw Error(ErrorKind::PreconditionViolated, "cadence must be positive");
  }
  Trajectory tr;
  auto sample = [&](std::size_t step) {
    const double t = step * dt;
    for (const auto& obs : p.observers) {
      tr.samples.push_back({t, obs.name, obs.fn(p.state)});
    }
    if (hook) hook(step, t, p.state);
  };
  try {
    sample(0);
    for (std::size_t n = 1; n <= steps; ++n) {
      p.state = rk4_step(p, dt);
      tr.steps_taken = n;
      tr.final_time = n * dt;
      if (n % cadence == 0 || n == steps) sample(n);
    }
  } catch (const Error& e) {
    tr.final_state = std::move(p.state);
    throw EvolutionAborted(e, std::move(tr));
  }
  tr.final_state = std::move(p.state);
  return tr;
}

void write_observer_csv(std::ostream& out, std::span<const Sample> samples) {
  out << "t,name,value\n";
  for (const auto& s : samples) {
    out << fmt::format("{:.17g},{},{:.17g}\n", s.t, s.name, s.value);
  }
}

State FieldLayout::pack(std::span<const GridField> fields) const {
  if (fields.size() != components_) {
    throw Error(ErrorKind::PreconditionViolated, "wrong component count",
                {{"expected", components_}, {"got", fields.size()}});
  }
  State s;
  s.reserve(state_size());
  for (const auto& f : fields) {
    if (!(f.lattice() == lattice_)) {
      throw Error(ErrorKind::LatticeMismatch, "field on foreign lattice");
    }
    s.insert(s.end(), f.values().begin(), f.values().end());
  }
  return s;
}

GridField FieldLayout::component(const State& s, std::size_t c) const {
  const std::size_t n = lattice_.size();
  if (s.size() != state_size()) {
    throw Error(ErrorKind::PreconditionViolated, "state size mismatch",
                {{"expected", state_size()}, {"got", s.size()}});
  }
  return GridField(lattice_, State(s.begin() + c * n, s.begin() + (c + 1) * n),
                   false);
}

std::vector<GridField> FieldLayout::unpack(const State& s) const {
  std::vector<GridField> out;
  out.reserve(components_);
  for (std::size_t c = 0; c < components_; ++c) out.push_back(component(s, c));
  return out;
}

}  // namespace fieldelim
