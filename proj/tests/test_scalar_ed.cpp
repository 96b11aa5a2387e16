#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fieldelim/errors.hpp"
#include "fieldelim/scalar_ed.hpp"

using namespace fieldelim;
using std::numbers::pi;

namespace {

const double kTwoPi = 2 * pi;

GridField fn(const Lattice& lat, std::function<double(double, double, double)> f) {
  return GridField::from_function(
      lat, [&](double x, double y, double z) { return cplx(f(x, y, z)); });
}

ScalarFieldOnlyState uniform_state(const Lattice& lat, double b0) {
  const GridField zero(lat);
  return {{GridField::constant(lat, b0), zero, zero, zero},
          {zero, zero, zero, zero}};
}

ScalarInitialSpec random_spec(std::uint64_t seed = 7) {
  ScalarInitialSpec s;
  s.seed = seed;
  s.amp_phi = s.amp_phi_dot = s.amp_B = s.amp_B_dot = 0.2;
  return s;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Continuum closure value for the fields in "closure on trigonometric data",
// generated symbolically (e = 1, m = 3/2, background 2).
double b0_ddot_symbolic(double x, double y, double z) {
  return (-3.0/5.0*std::sin(x) - 4)*(-1.0/5.0*(-1.0/5.0*(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))*std::cos(y) - 1.0/10.0*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/(-3.0/5.0*std::sin(x) - 4))*std::cos(x)/((3.0/10.0)*std::sin(x) + 2) - 1.0/5.0*(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))*std::sin(x) - 1.0/50.0*(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))*std::sin(y)*std::sin(z)/((3.0/10.0)*std::sin(x) + 2) - 1.0/5.0*(-3.0/10.0*(-1.0/5.0*(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))*std::cos(y) - 1.0/10.0*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/(-3.0/5.0*std::sin(x) - 4))*std::cos(x)/std::pow((3.0/10.0)*std::sin(x) + 2, 2) + (-1.0/5.0*((-3.0/10.0*std::sin(x) + (1.0/5.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (6.0/5.0)*((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2) - 3.0/5.0*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::sin(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2) + (18.0/25.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::pow(std::cos(x), 2)/std::pow(-3.0/5.0*std::sin(x) - 4, 3))*std::cos(y) - 1.0/10.0*((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))*std::cos(x)/(-3.0/5.0*std::sin(x) - 4) + (1.0/10.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::sin(x)/(-3.0/5.0*std::sin(x) - 4) - 3.0/50.0*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::pow(std::cos(x), 2)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))/((3.0/10.0)*std::sin(x) + 2))*std::cos(y) - ((3.0/10.0)*std::sin(x) + 2)*((-3.0/5.0*std::sin(x) - 4)*((1.0/2.0)*std::pow(-1.0/5.0*(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))*std::cos(y) - 1.0/10.0*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/(-3.0/5.0*std::sin(x) - 4), 2)/std::pow((3.0/10.0)*std::sin(x) + 2, 2) - 1.0/2.0*std::pow(((1.0/5.0)*std::sin(x) + (3.0/10.0)*std::cos(x))/(-3.0/5.0*std::sin(x) - 4) + (3.0/5.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)*std::cos(x)/std::pow(-3.0/5.0*std::sin(x) - 4, 2), 2) - 1.0/200.0*std::pow(std::cos(z), 2)/std::pow(-3.0/5.0*std::sin(x) - 4, 2))/((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2) + (-3.0/2.0*(std::sin(x) + 6*std::pow(std::cos(x), 2)/(3*std::sin(x) + 20))*(3*std::sin(x) + std::sin(z) - 2*std::cos(x) - 20)/(3*std::sin(x) + 20) + 3*(2*std::sin(x) + 3*std::cos(x))*std::cos(x)/(3*std::sin(x) + 20) + (3.0/2.0)*std::sin(x) - std::cos(x))/(3*std::sin(x) + 20) + (1.0/10.0)*std::sin(z)/((3.0/5.0)*std::sin(x) + 4) + (2*std::pow((3.0/10.0)*std::sin(x) + 2, 2) - 1.0/50.0*std::pow(std::sin(z), 2) - 2.0/25.0*std::pow(std::cos(y), 2) - 9.0/2.0)*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)/(-3.0/5.0*std::sin(x) - 4)) - (-1.0/10.0*std::sin(z) + (1.0/5.0)*std::cos(x))*((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2)/(-3.0/5.0*std::sin(x) - 4) - 1.0/100.0*std::pow(std::cos(z), 2)/(-3.0/5.0*std::sin(x) - 4))/((3.0/10.0)*std::sin(x) + (1.0/10.0)*std::sin(z) - 1.0/5.0*std::cos(x) - 2);
}

ScalarFieldOnlyState trig_state(const Lattice& lat) {
  return {{fn(lat, [](double x, double, double) { return 2 + 0.3 * std::sin(x); }),
           fn(lat, [](double, double y, double) { return 0.2 * std::cos(y); }),
           fn(lat, [](double, double, double z) { return 0.1 * std::sin(z); }),
           GridField(lat)},
          {fn(lat, [](double x, double, double) { return 0.1 * std::cos(x); }),
           fn(lat, [](double x, double, double) { return 0.2 * std::sin(x); }),
           GridField(lat),
           fn(lat, [](double, double, double z) { return 0.1 * std::cos(z); })}};
}

}  // namespace

TEST_CASE("Phi from the Gauss law") {
  const auto lat = Lattice::cube(16, kTwoPi);
  const double h = lat.h(1);
  auto s = uniform_state(lat, 1.0);
  s.B_dot[1] = fn(lat, [](double x, double, double) { return std::sin(x); });
  const auto Phi = phi_from_gauss(s, ScalarParams{});
  const auto expect = fn(lat, [&](double x, double, double) {
    return 0.5 * std::sin(h) / h * std::cos(x);
  });
  CHECK(norms(Phi - expect).linf < 1e-14);
  CHECK(Phi.is_real());

  const auto still = uniform_state(lat, 0.7);
  CHECK(norms(phi_from_gauss(still, ScalarParams{})).linf == 0.0);
}

TEST_CASE("singular B0 names the site") {
  const auto lat = Lattice::cube(8, 1.0);
  auto s = uniform_state(lat, 1.0);
  s.B[0][lat.index(2, 3, 4)] = 1e-9;
  try {
    phi_from_gauss(s, ScalarParams{});
    FAIL("expected SingularB0");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularB0);
    CHECK(e.detail().at("site") == nlohmann::json::array({2, 3, 4}));
  }
  CHECK_THROWS_AS(b_ddot_spatial(s, ScalarParams{}), Error);
}

TEST_CASE("spatial closure: uniform and pure-gradient data") {
  const auto lat = Lattice::cube(8, kTwoPi);
  auto s = uniform_state(lat, 1.0);
  s.B[1] = GridField::constant(lat, 0.3);
  for (const auto& f : b_ddot_spatial(s, ScalarParams{})) {
    CHECK(norms(f).linf == 0.0);
  }

  // B_i = d_i chi vanishes in the continuum; the lattice leaves O(h^2).
  auto gradient_error = [](int n) {
    const auto l = Lattice::cube(n, kTwoPi);
    auto st = uniform_state(l, 1.0);
    st.B[1] = fn(l, [](double x, double y, double) {
      return -std::cos(x) * std::sin(y);
    });
    st.B[2] = fn(l, [](double x, double y, double) {
      return -std::sin(x) * std::cos(y);
    });
    const auto bdd = b_ddot_spatial(st, ScalarParams{});
    return norms(bdd[0]).linf + norms(bdd[1]).linf + norms(bdd[2]).linf;
  };
  const double e1 = gradient_error(16), e2 = gradient_error(32),
               e3 = gradient_error(64);
  CHECK(order(e1, e2) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(order(e2, e3) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Phi_dot from current conservation") {
  const auto lat = Lattice::cube(16, kTwoPi);
  const double h = lat.h(1), c = 0.4;
  auto s = uniform_state(lat, 1.0);
  s.B[1] = GridField::constant(lat, c);
  const auto Phi = fn(lat, [](double x, double, double) { return std::sin(x); });
  const auto expect = fn(lat, [&](double x, double, double) {
    return -c * std::sin(h) / h * std::cos(x);
  });
  CHECK(norms(phi_dot_from_current(s, Phi, ScalarParams{}) - expect).linf < 1e-14);
  const auto flat = GridField::constant(lat, 2.0);
  CHECK(norms(phi_dot_from_current(uniform_state(lat, 1.0), flat, ScalarParams{})).linf == 0.0);
}

TEST_CASE("Phi_ddot from the wave equation") {
  const auto lat = Lattice::cube(8, 1.0);
  const double k = 0.8;
  const auto Phi = GridField::constant(lat, k);
  const GridField zero(lat);
  ScalarParams p;
  p.m = 1.0;
  const auto vac = ScalarFieldOnlyState{{zero, zero, zero, zero}, {zero, zero, zero, zero}};
  CHECK(norms(phi_ddot_from_wave(vac, Phi, zero, p) + 2 * k).linf < 1e-15);
  p.e = 2.0;
  p.m = 1.0;
  const auto tuned = uniform_state(lat, 0.5);  // e^2 B.B = m^2
  CHECK(norms(phi_ddot_from_wave(tuned, Phi, zero, p)).linf < 1e-15);
  auto bad = Phi;
  bad[3] = -0.1;
  CHECK_THROWS_WITH_AS(phi_ddot_from_wave(vac, bad, zero, p),
                       doctest::Contains("SingularPhi"), Error);
}

TEST_CASE("temporal closure on a static uniform state vanishes") {
  const auto lat = Lattice::cube(8, 1.0);
  ScalarParams p;
  p.e = p.m = 1.0;
  const double Phi = 0.6;
  p.background = 2.0 * Phi;  // Phi = (0 - q) / (-2 e^2 B0) with B0 = 1
  const auto s = uniform_state(lat, 1.0);
  CHECK(norms(phi_from_gauss(s, p) - Phi).linf < 1e-15);
  CHECK(norms(b_ddot_temporal(s, p)).linf < 1e-15);
}

TEST_CASE("temporal closure converges to the symbolic value") {
  ScalarParams p;
  p.e = 1.0;
  p.m = 1.5;
  p.background = 2.0;
  auto err = [&](int n) {
    const auto lat = Lattice::cube(n, kTwoPi);
    const auto got = b_ddot_temporal(trig_state(lat), p);
    return norms(got - fn(lat, b0_ddot_symbolic)).linf;
  };
  const double e1 = err(16), e2 = err(32), e3 = err(64);
  CHECK(e3 < 0.1);
  CHECK(order(e1, e2) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(order(e2, e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("closure against the coupled oracle") {
  ScalarParams base;
  auto check = [&](int n) {
    const auto lat = Lattice::cube(n, kTwoPi);
    const auto init = make_scalar_initial_data(random_spec(), lat, base);
    const auto& p = init.params;
    const auto& c = init.coupled;
    const auto cl = scalar_closure(init.field_only, p);
    const auto orc = scalar_oracle_derivatives(c, p);
    // Gauss law and spatial Maxwell agree with the oracle identically.
    CHECK(rel_diff(cl.Phi, c.phi * c.phi) < 1e-8);
    for (int i = 1; i <= 3; ++i) CHECK(rel_diff(cl.B_ddot[i], orc.B_ddot[i]) < 1e-8);
    const GridField phi2_dot = 2.0 * c.phi * c.phi_dot;
    const GridField phi2_ddot =
        2.0 * c.phi_dot * c.phi_dot + 2.0 * c.phi * orc.phi_ddot;
    return std::array<double, 3>{rel_diff(cl.Phi_dot, phi2_dot),
                                 rel_diff(cl.Phi_ddot, phi2_ddot),
                                 rel_diff(cl.B_ddot[0], orc.B_ddot[0])};
  };
  const auto a = check(16), b = check(32);
  for (int q = 0; q < 3; ++q) {
    CAPTURE(q);
    CHECK(order(a[q], b[q]) > 1.7);
    CHECK(order(a[q], b[q]) < 2.3);
  }
}

TEST_CASE("mutation fixture changes the spatial closure") {
  const auto lat = Lattice::cube(8, kTwoPi);
  ScalarParams p;
  const auto init = make_scalar_initial_data(random_spec(), lat, p);
  auto mutated = init.params;
  mutated.mutate_spatial_sign = true;
  const auto a = b_ddot_spatial(init.field_only, init.params);
  const auto b = b_ddot_spatial(init.field_only, mutated);
  CHECK(rel_diff(b[0], a[0]) > 0.1);
}

TEST_CASE("field-only rhs passes the velocities through") {
  const auto lat = Lattice::cube(8, kTwoPi);
  const auto init = make_scalar_initial_data(random_spec(), lat, ScalarParams{});
  const State x = pack(init.field_only);
  const State d = scalar_field_only_rhs(x, lat, init.params);
  const std::size_t n = lat.size();
  for (std::size_t i = 0; i < 4 * n; ++i) REQUIRE(d[i] == x[4 * n + i]);
}

TEST_CASE("time reversal of the field-only evolution") {
  const auto lat = Lattice::cube(8, kTwoPi);
  const auto init = make_scalar_initial_data(random_spec(), lat, ScalarParams{});
  const auto& p = init.params;
  auto roundtrip = [&](double dt) {
    EvolutionProblem fwd{pack(init.field_only),
                         [&](const State& x) { return scalar_field_only_rhs(x, lat, p); },
                         {}};
    EvolutionProblem back{rk4_step(fwd, dt), [&](const State& x) {
                            State d = scalar_field_only_rhs(x, lat, p);
                            for (auto& v : d) v = -v;
                            return d;
                          },
                          {}};
    const State r = rk4_step(back, dt);
    double err = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
      err = std::max(err, std::abs(r[i] - fwd.state[i]));
    return err;
  };
  const double e1 = roundtrip(0.02), e2 = roundtrip(0.01);
  CHECK(e1 < 1e-6);
  CHECK(order(e1, e2) > 4.5);
}

TEST_CASE("coupled oracle: vacuum and free mode") {
  const auto lat = Lattice::cube(8, 1.0);
  const GridField zero(lat);
  ScalarParams p;
  p.m = 1.3;
  const ScalarCoupledState vac{zero, zero, {zero, zero, zero}, {zero, zero, zero}, zero, zero};
  for (const auto& v : scalar_coupled_rhs(pack(vac), lat, p)) REQUIRE(v == cplx(0.0));

  const double A = 0.7;
  ScalarCoupledState mode = vac;
  mode.phi = GridField::constant(lat, A);
  const State d = scalar_coupled_rhs(pack(mode), lat, p);
  const std::size_t n = lat.size();
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(std::abs(d[n + i] + p.m * p.m * A) < 1e-14);
  }
}

TEST_CASE("oracle constraint derivatives match its own time series") {
  const auto lat = Lattice::cube(8, kTwoPi);
  const auto init = make_scalar_initial_data(random_spec(3), lat, ScalarParams{});
  const auto& p = init.params;
  const double dt = 1e-3;
  const Rhs f = [&](const State& x) { return scalar_coupled_rhs(x, lat, p); };
  const Rhs b = [&](const State& x) {
    State d = f(x);
    for (auto& v : d) v = -v;
    return d;
  };
  const State x0 = pack(init.coupled);
  const auto plus = complete_coupled(rk4_step({x0, f, {}}, dt), lat, p);
  const auto minus = complete_coupled(rk4_step({x0, b, {}}, dt), lat, p);
  const auto& c = init.coupled;
  const GridField b0_dot_fd = (plus.B0 - minus.B0) * (0.5 / dt);
  const GridField b0_ddot_fd = (plus.B0 - 2.0 * c.B0 + minus.B0) * (1.0 / (dt * dt));
  CHECK(rel_diff(b0_dot_fd, c.B0_dot) < 1e-5);
  const auto orc = scalar_oracle_derivatives(c, p);
  CHECK(rel_diff(b0_ddot_fd, orc.B_ddot[0]) < 1e-4);
}

TEST_CASE("current conservation along the oracle trajectory is second order") {
  auto residual = [](int n) {
    const auto lat = Lattice::cube(n, kTwoPi);
    const auto init = make_scalar_initial_data(random_spec(), lat, ScalarParams{});
    const auto& p = init.params;
    const auto& c = init.coupled;
    const GridField Phi = c.phi * c.phi;
    const GridField J0_dot = c.B0_dot * Phi + c.B0 * (2.0 * c.phi * c.phi_dot);
    const auto J = scalar_current(to_field_only(c).B, Phi);
    const GridField r = current_divergence(J0_dot, {J[1], J[2], J[3]});
    (void)p;
    return norms(r).l2 / norms(J0_dot).l2;
  };
  const double r1 = residual(16), r2 = residual(32);
  CHECK(order(r1, r2) > 1.7);
}

TEST_CASE("initial data") {
  const auto lat = Lattice::cube(8, kTwoPi);
  ScalarInitialSpec stat;
  const auto s = make_scalar_initial_data(stat, lat, ScalarParams{});
  CHECK(gauss_residual(s.coupled, s.params) < 1e-10);
  CHECK(norms(s.coupled.B0 - 1.0).linf < 1e-12);

  const auto a = make_scalar_initial_data(random_spec(11), lat, ScalarParams{});
  const auto b = make_scalar_initial_data(random_spec(11), lat, ScalarParams{});
  CHECK(pack(a.coupled) == pack(b.coupled));
  CHECK(pack(a.field_only) == pack(b.field_only));
  CHECK(gauss_residual(a.coupled, a.params) < 1e-9);
  CHECK(rel_diff(phi_from_gauss(a.field_only, a.params),
                 a.coupled.phi * a.coupled.phi) < 1e-8);

  ScalarInitialSpec bad;
  bad.b0_offset = 0.0;
  CHECK_THROWS_WITH_AS(make_scalar_initial_data(bad, lat, ScalarParams{}),
                       doctest::Contains("SingularB0"), Error);
}
