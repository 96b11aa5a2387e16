#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fieldelim/errors.hpp"
#include "fieldelim/grid.hpp"

namespace fieldelim {

using State = std::vector<cplx>;
using Rhs = std::function<State(const State&)>;

struct Observer {
  std::string name;
  std::function<double(const State&)> fn;
};

struct EvolutionProblem {
  State state;
  Rhs rhs;
  std::vector<Observer> observers;
};

/// One classical RK4 step from p.state. Throws NonFinite naming the stage.
State rk4_step(const EvolutionProblem& p, double dt);

struct Sample {
  double t;
  std::string name;
  double value;
};

struct Trajectory {
  State final_state;
  double final_time = 0.0;
  std::size_t steps_taken = 0;
  std::vector<Sample> samples;
};

/// Called at t = 0 and after every `cadence` steps.
using SampleHook = std::function<void(std::size_t step, double t, const State&)>;

/// Thrown by `evolve` when a step fails. Carries everything up to the last
/// good state; `cause()` is the original error.
class EvolutionAborted : public Error {
 public:
  EvolutionAborted(const Error& cause, Trajectory partial);
  const Trajectory& partial() const noexcept { return partial_; }
  ErrorKind cause() const noexcept { return kind(); }

 private:
  Trajectory partial_;
};

Trajectory evolve(EvolutionProblem p, double dt, std::size_t steps,
                  std::size_t cadence, const SampleHook& hook = {});

/// Rows "t,name,value" with a header; values printed round-trip exact.
void write_observer_csv(std::ostream& out, std::span<const Sample> samples);

/// Flattens field groups into one state vector and back.
class FieldLayout {
 public:
  FieldLayout(Lattice lattice, std::size_t components)
      : lattice_(std::move(lattice)), components_(components) {}

  const Lattice& lattice() const { return lattice_; }
  std::size_t components() const { return components_; }
  std::size_t state_size() const { return components_ * lattice_.size(); }

  State pack(std::span<const GridField> fields) const;
  std::vector<GridField> unpack(const State& s) const;
  GridField component(const State& s, std::size_t c) const;

 private:
  Lattice lattice_;
  std::size_t components_;
};

}  // namespace fieldelim
