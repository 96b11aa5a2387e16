#include <cmath>
#include <numbers>
#include <optional>

#include "acceptance_internal.hpp"
#include "fieldelim/spectra.hpp"
#include "fieldelim/spinor_ed.hpp"

namespace fieldelim {

namespace acceptance_detail {

namespace {

SpinorInitialSpec spinor_spec() {
  SpinorInitialSpec spec;
  spec.seed = 5;
  spec.amp_psi = spec.amp_A = spec.amp_A_dot = 0.1;
  return spec;
}

SpinorInitialData spinor_data(int n) {
  return make_spinor_initial_data(
      spinor_spec(), Lattice::cube(n, 2 * std::numbers::pi), SpinorParams{});
}

std::vector<GridField> flatten(const SpinorFieldOnlyState& s) {
  std::vector<GridField> v;
  for (const auto* g : {&s.B, &s.B_dot, &s.B_ddot}) {
    v.insert(v.end(), g->begin(), g->end());
  }
  return v;
}

double h_of(int n) { return 2 * std::numbers::pi / n; }

}  // namespace

SpinorTrajectory spinor_trajectory(int n, double dt, int steps, int every,
                                   bool conservation) {
  Stopwatch clock;
  const auto init = spinor_data(n);
  const auto& lat = init.coupled.psi[0].lattice();
  const auto p = init.params;
  const auto spec = spinor_spec();

  SpinorTrajectory out;
  out.n = n;
  for (int c = 0; c < 4; ++c) {
    out.max_offset_deviation =
        std::max(out.max_offset_deviation,
                 norms(init.coupled.psi[c] - spec.psi_offset[c]).linf);
  }

  EvolutionProblem fo{pack(init.transformed.B),
                      [&](const State& x) {
                        return spinor_field_only_rhs(x, lat, p);
                      },
                      {}};
  EvolutionProblem co{pack(init.coupled),
                      [&](const State& x) {
                        return spinor_coupled_rhs(x, lat, p);
                      },
                      {}};
  // centred d_t rho + div J at the middle of three levels
  std::optional<GridField> rho_prev, rho_curr;
  std::optional<std::array<GridField, 3>> J_curr;
  auto push_current = [&](const Spinor& psi) {
    const auto J = bilinear_current(psi, psi);
    const GridField rho = real_part(J[0]);
    if (rho_prev) {
      const GridField r = (rho - *rho_prev) * (0.5 / dt) + divergence(*J_curr);
      out.conservation = std::max(out.conservation, norms(r).linf);
    }
    rho_prev = rho_curr;
    rho_curr = rho;
    J_curr = std::array<GridField, 3>{real_part(J[1]), real_part(J[2]),
                                      real_part(J[3])};
  };
  if (conservation) push_current(init.coupled.psi);

  for (int s = 1; s <= steps; ++s) {
    fo.state = rk4_step(fo, dt);
    co.state = rk4_step(co, dt);
    const bool sample = s % every == 0 || s == steps;
    if (!sample && !conservation) continue;
    const auto cs = complete_spinor(co.state, lat, p);
    if (conservation) push_current(cs.psi);
    if (!sample) continue;
    const auto g = gauge_to_B(cs, p);
    const auto a = flatten(unpack_spinor_field_only(fo.state, lat));
    const auto b = flatten(g.B);
    out.final_rel_diff = rel_diff(std::span<const GridField>(a),
                                  std::span<const GridField>(b));
    out.max_rel_diff = std::max(out.max_rel_diff, out.final_rel_diff);
  }
  out.seconds = clock.seconds();
  return out;
}

}  // namespace acceptance_detail

using namespace acceptance_detail;

CriterionResult criterion_a3(const SuiteOptions&) {
  Stopwatch clock;
  CriterionResult r{"A3", "spinor trajectory equivalence"};
  constexpr double dt = 5e-4;
  constexpr int steps = 50;
  std::vector<double> finals, maxima, runtimes;
  double offset_dev = 0.0;
  for (int n : {8, 16, 32}) {
    const auto t = spinor_trajectory(n, dt, steps, 10);
    finals.push_back(t.final_rel_diff);
    maxima.push_back(t.max_rel_diff);
    runtimes.push_back(t.seconds);
    if (n == 8) offset_dev = t.max_offset_deviation;
  }
  const auto orders = pair_orders(finals);
  const double q = orders.back();
  r.passed = offset_dev <= 0.1 && maxima[0] <= 1e-3 && q >= 1.8 && q <= 2.2 &&
             runtimes[0] <= 600.0;
  r.measured = {{"max_rel_diff_8", maxima[0]},
                {"max_rel_diff_limit", 1e-3},
                {"n", {8, 16, 32}},
                {"final_rel_diff", finals},
                {"orders", orders},
                {"finest_order_range", {1.8, 2.2}},
                {"max_psi_offset_deviation", offset_dev},
                {"runtime_8_s", runtimes[0]}};
  r.seconds = clock.seconds();
  return r;
}

CriterionResult criterion_a4(const SuiteOptions&) {
  Stopwatch clock;
  CriterionResult r{"A4", "spinor reconstruction"};
  const char* names[] = {"phi2",     "phi3",     "phi4",
                         "phi2_dot", "phi3_dot", "phi4_dot"};
  std::array<std::vector<double>, 6> errors;
  std::vector<double> scales;
  const std::vector<int> levels{16, 32, 64};
  for (int n : levels) {
    const auto init = spinor_data(n);
    const auto& tr = init.transformed;
    const auto c = reconstruct_chain(tr.B, init.params);
    const GridField* got[] = {&c.phi2,     &c.phi3,     &c.phi4,
                              &c.phi2_dot, &c.phi3_dot, &c.phi4_dot};
    for (int q = 0; q < 6; ++q) {
      const auto& want = tr.phi[q / 3][q % 3 + 1];
      errors[q].push_back(norms(*got[q] - want).linf);
    }
    // instantaneous data: no time-step contribution
    scales.push_back(h_of(n) * h_of(n));
  }
  r.passed = true;
  r.measured = {{"n", levels}, {"C_growth_limit", 1.25}};
  for (int q = 0; q < 6; ++q) {
    std::vector<double> C;
    const bool ok = constants_stable(errors[q], scales, 1.25, &C);
    r.passed = r.passed && ok;
    r.measured[names[q]] = {{"linf_error", errors[q]},
                            {"C", C},
                            {"orders", pair_orders(errors[q])}};
  }
  r.seconds = clock.seconds();
  return r;
}

CriterionResult criterion_a5(const SuiteOptions&) {
  Stopwatch clock;
  CriterionResult r{"A5", "fourth-order residual detects non-solutions"};
  std::vector<double> clean;
  double perturbed = 0.0;
  const std::vector<int> levels{16, 32, 64};
  for (int n : levels) {
    const auto init = spinor_data(n);
    const auto& tr = init.transformed;
    clean.push_back(
        norms(fourth_order_residual(tr.B, tr.B_dddot, init.params)).l2);
    if (n != levels.back()) continue;
    // 1% multiplicative noise on every slice quantity
    SpectrumSampler rng(99);
    const auto& lat = tr.B.B[0].lattice();
    auto perturb = [&](FourVector v) {
      for (auto& c : v) c = c + 0.01 * c * rng.real_field(lat, 1.0);
      return v;
    };
    SpinorFieldOnlyState s = tr.B;
    s.B = perturb(s.B);
    s.B_dot = perturb(s.B_dot);
    s.B_ddot = perturb(s.B_ddot);
    const auto b3 = perturb(tr.B_dddot);
    perturbed = norms(fourth_order_residual(s, b3, init.params)).l2;
  }
  const auto orders = pair_orders(clean);
  const double q = orders.back();
  const double ratio = perturbed / clean.back();
  r.passed = q >= 1.8 && q <= 2.2 && ratio >= 100.0;
  r.measured = {{"n", levels},
                {"residual_l2", clean},
                {"orders", orders},
                {"finest_order_range", {1.8, 2.2}},
                {"perturbed_residual_l2", perturbed},
                {"perturbed_over_clean", ratio},
                {"ratio_limit", 100.0}};
  r.seconds = clock.seconds();
  return r;
}

}  // namespace fieldelim
