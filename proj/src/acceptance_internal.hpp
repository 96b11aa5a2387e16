#pragma once

#include <chrono>
#include <cstdint>

#include "fieldelim/acceptance.hpp"

namespace fieldelim::acceptance_detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// ---- scalar ---------------------------------------------------------------

struct ScalarTrajectory {
  int n = 0;
  double dt = 0.0;
  int steps = 0;
  double max_rel_diff = 0.0, final_rel_diff = 0.0;
  double min_Phi = 0.0, min_abs_B0 = 0.0;  // at t = 0
  /// max over interior steps of the centred current-law residual (linf)
  double conservation_field_only = 0.0, conservation_coupled = 0.0;
  double seconds = 0.0;
};

/// Field-only and coupled runs in lock-step from the built-in A1 data.
ScalarTrajectory scalar_trajectory(int n, double dt, int steps, bool mutate,
                                   bool conservation = false);

/// Relative error of the closure's second derivatives against the oracle's
/// at t = 0 on an n^3 lattice.
double scalar_closure_error(int n, bool mutate);

// ---- spinor ---------------------------------------------------------------

struct SpinorTrajectory {
  int n = 0;
  double max_rel_diff = 0.0, final_rel_diff = 0.0;
  double max_offset_deviation = 0.0;  // max |psi - offset| at t = 0
  double conservation = 0.0;
  double seconds = 0.0;
};

SpinorTrajectory spinor_trajectory(int n, double dt, int steps, int every,
                                   bool conservation = false);

}  // namespace fieldelim::acceptance_detail
