#include <cmath>
#include <numbers>
#include <optional>

#include "acceptance_internal.hpp"
#include "fieldelim/scalar_ed.hpp"

namespace fieldelim {

namespace acceptance_detail {

namespace {

ScalarInitialData scalar_data(int n, bool mutate) {
  const auto lat = Lattice::cube(n, 2 * std::numbers::pi);
  ScalarInitialSpec spec;
  spec.seed = 7;
  spec.amp_phi = spec.amp_phi_dot = spec.amp_B = spec.amp_B_dot = 0.2;
  ScalarParams p;
  p.mutate_spatial_sign = mutate;
  return make_scalar_initial_data(spec, lat, p);
}

// centred d_t J^0 + div J at the middle of three time levels
struct CurrentLaw {
  std::optional<GridField> J0_prev, J0_curr;
  std::optional<std::array<GridField, 3>> J_sp_curr;
  double worst = 0.0;

  void push(const std::array<GridField, 4>& J, double dt) {
    if (J0_prev) {
      const GridField r = current_divergence(
          (J[0] - *J0_prev) * (0.5 / dt), *J_sp_curr);
      worst = std::max(worst, norms(r).linf);
    }
    J0_prev = J0_curr;
    J0_curr = J[0];
    J_sp_curr = std::array<GridField, 3>{J[1], J[2], J[3]};
  }
};

}  // namespace

ScalarTrajectory scalar_trajectory(int n, double dt, int steps, bool mutate,
                                   bool conservation) {
  Stopwatch clock;
  const auto init = scalar_data(n, mutate);
  const auto& lat = init.coupled.phi.lattice();
  const auto p = init.params;

  ScalarTrajectory out;
  out.n = n;
  out.dt = dt;
  out.steps = steps;
  out.min_Phi = min_abs(init.coupled.phi * init.coupled.phi).value.real();
  out.min_abs_B0 = std::abs(min_abs(init.coupled.B0).value);

  EvolutionProblem fo{pack(init.field_only),
                      [&](const State& x) {
                        return scalar_field_only_rhs(x, lat, p);
                      },
                      {}};
  EvolutionProblem co{pack(init.coupled),
                      [&](const State& x) {
                        return scalar_coupled_rhs(x, lat, p);
                      },
                      {}};
  CurrentLaw law_fo, law_co;
  auto observe = [&](const ScalarCoupledState& cs) {
    const auto fs = unpack_scalar_field_only(fo.state, lat);
    if (conservation) {
      law_fo.push(scalar_current(fs.B, phi_from_gauss(fs, p)), dt);
      law_co.push(scalar_current({cs.B0, cs.B_sp[0], cs.B_sp[1], cs.B_sp[2]},
                                 cs.phi * cs.phi),
                  dt);
    }
    return fs;
  };
  observe(init.coupled);
  for (int s = 1; s <= steps; ++s) {
    fo.state = rk4_step(fo, dt);
    co.state = rk4_step(co, dt);
    const auto cs = complete_coupled(co.state, lat, p);
    const auto fs = observe(cs);
    const std::array<GridField, 4> ob{cs.B0, cs.B_sp[0], cs.B_sp[1],
                                      cs.B_sp[2]};
    out.final_rel_diff = rel_diff(std::span<const GridField>(fs.B),
                                  std::span<const GridField>(ob));
    out.max_rel_diff = std::max(out.max_rel_diff, out.final_rel_diff);
  }
  out.conservation_field_only = law_fo.worst;
  out.conservation_coupled = law_co.worst;
  out.seconds = clock.seconds();
  return out;
}

double scalar_closure_error(int n, bool mutate) {
  const auto init = scalar_data(n, mutate);
  const auto c = scalar_closure(init.field_only, init.params);
  const auto o = scalar_oracle_derivatives(init.coupled, init.params);
  return rel_diff(std::span<const GridField>(c.B_ddot),
                  std::span<const GridField>(o.B_ddot));
}

}  // namespace acceptance_detail

using namespace acceptance_detail;

CriterionResult criterion_a1(const SuiteOptions& o) {
  Stopwatch clock;
  CriterionResult r{"A1", "scalar trajectory equivalence"};
  constexpr double dt = 1e-3;
  constexpr int steps = 100;
  const auto base = scalar_trajectory(16, dt, steps, o.mutate_scalar);
  // halving dt, first with the step count fixed, then with the final time fixed
  const auto half_steps = scalar_trajectory(16, dt / 2, steps, o.mutate_scalar);
  const auto half_time =
      scalar_trajectory(16, dt / 2, 2 * steps, o.mutate_scalar);
  const auto fine = scalar_trajectory(32, dt, steps, o.mutate_scalar);

  const double dt_ratio_steps = base.final_rel_diff / half_steps.final_rel_diff;
  const double dt_ratio_time = base.final_rel_diff / half_time.final_rel_diff;
  const double h_ratio = base.final_rel_diff / fine.final_rel_diff;
  const bool data_ok = base.min_Phi >= 0.5 && base.min_abs_B0 >= 0.5;
  const bool tracks = base.max_rel_diff <= 1e-4;
  const bool dt_ok = dt_ratio_steps >= 8.0 && dt_ratio_time >= 8.0;
  const bool h_ok = h_ratio >= 3.0;
  const bool fast = base.seconds <= 120.0;
  r.passed = data_ok && tracks && dt_ok && h_ok && fast;
  r.measured = {
      {"max_rel_diff", base.max_rel_diff},
      {"max_rel_diff_limit", 1e-4},
      {"final_rel_diff", base.final_rel_diff},
      {"dt_halving_ratio_same_steps", dt_ratio_steps},
      {"dt_halving_ratio_same_time", dt_ratio_time},
      {"dt_halving_ratio_limit", 8.0},
      {"h_halving_ratio", h_ratio},
      {"h_halving_ratio_limit", 3.0},
      {"min_Phi", base.min_Phi},
      {"min_abs_B0", base.min_abs_B0},
      {"runtime_16_s", base.seconds},
  };
  r.seconds = clock.seconds();
  return r;
}

CriterionResult criterion_a2(const SuiteOptions& o) {
  Stopwatch clock;
  CriterionResult r{"A2", "scalar instantaneous closure"};
  std::vector<double> errors, scales;
  for (int n : {16, 32, 64}) {
    errors.push_back(scalar_closure_error(n, o.mutate_scalar));
    const double h = 2 * std::numbers::pi / n;
    scales.push_back(h * h);
  }
  std::vector<double> constants;
  constants_stable(errors, scales, 1e300, &constants);
  const auto orders = pair_orders(errors);
  r.passed = true;
  for (double q : orders) r.passed = r.passed && q >= 1.8 && q <= 2.2;
  r.measured = {{"n", {16, 32, 64}},
                {"rel_error", errors},
                {"C", constants},
                {"orders", orders},
                {"order_range", {1.8, 2.2}}};
  r.seconds = clock.seconds();
  return r;
}

}  // namespace fieldelim
