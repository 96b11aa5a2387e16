#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fieldelim/errors.hpp"
#include "fieldelim/fock.hpp"

using namespace fieldelim;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IoError;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double binom(int n, int k) { return std::round(factorial(n) / factorial(k) / factorial(n - k)); }

ModeSystem single(std::vector<Monomial> f) { return {1, {std::move(f)}, {}}; }

// F1 = -i x1 + 0.1 x2^2 + c x1^2, F2 = -1.3 i x2. With c = 0 the one-particle
// amplitudes only see the (0, 2) sector and the truncation never reaches them.
ModeSystem quadratic_pair(cplx c = 0.0) {
  ModeSystem ms{2, {{{-kI, {1, 0}}, {0.1, {0, 2}}}, {{-1.3 * kI, {0, 1}}}}, {}};
  if (c != 0.0) ms.F[0].push_back({c, {2, 0}});
  return ms;
}

// Independent oracle: hand-coded right-hand side, plain RK4.
std::array<cplx, 2> quadratic_ode(std::array<cplx, 2> x, double dt, int steps,
                                  cplx c = 0.0) {
  auto f = [c](const std::array<cplx, 2>& y) {
    return std::array<cplx, 2>{-kI * y[0] + 0.1 * y[1] * y[1] + c * y[0] * y[0],
                               -1.3 * kI * y[1]};
  };
  for (int s = 0; s < steps; ++s) {
    auto k1 = f(x);
    auto k2 = f({x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]});
    auto k3 = f({x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]});
    auto k4 = f({x[0] + dt * k3[0], x[1] + dt * k3[1]});
    for (int i = 0; i < 2; ++i) x[i] += dt / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return x;
}

double quadratic_readout_error(int N, double dt, int steps, int every,
                               cplx c = 0.0, double scale = 1.0) {
  const FockSpace fs(2, N);
  const std::vector<cplx> xi0{0.12 * scale, 0.16 * kI * scale};  // |xi| = 0.2 scale
  const auto op = carleman_hamiltonian(quadratic_pair(c), fs);
  FockOptions opts;
  opts.cadence = every;
  double worst = 0.0;
  evolve_fock(coherent_state(fs, xi0), op, dt, steps, opts,
              [&](std::size_t step, double, const FockState& s) {
                const auto x = readout(fs, s);
                const auto ref = quadratic_ode({xi0[0], xi0[1]}, dt, int(step), c);
                for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(x[i] - ref[i]));
              });
  return worst;
}

}  // namespace

TEST_CASE("basis size and graded lexicographic order") {
  for (int k = 1; k <= 3; ++k) {
    for (int N : {0, 1, 4, 9}) {
      CHECK(FockSpace(k, N).dimension() == std::size_t(binom(N + k, k)));
    }
  }
  const FockSpace fs(2, 2);
  const std::vector<std::vector<int>> expect{{0, 0}, {1, 0}, {0, 1},
                                             {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(fs.occupation(i) == expect[i]);
    CHECK(*fs.index_of(expect[i]) == i);
  }
  CHECK_FALSE(fs.index_of(std::vector<int>{3, 0}).has_value());
}

TEST_CASE("ladder operators") {
  const FockSpace fs(2, 5);
  FockState vac(fs.dimension(), 0.0);
  vac[0] = 1.0;
  CHECK(fock_norm(apply_annihilate(fs, 0, vac)) == 0.0);
  // number operator on every basis vector
  for (std::size_t idx = 0; idx < fs.dimension(); ++idx) {
    FockState e(fs.dimension(), 0.0);
    e[idx] = 1.0;
    for (int i = 0; i < 2; ++i) {
      const auto n = apply_create(fs, i, apply_annihilate(fs, i, e));
      CHECK(n[idx].real() == doctest::Approx(fs.occupation(idx)[i]));
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(commutator_defect(fs, i, j) < 1e-14);
  }
  // a^dagger drops the top shell, so on |N, 0> the commutator is -N, not 1
  FockState top(fs.dimension(), 0.0);
  top[*fs.index_of(std::vector<int>{5, 0})] = 1.0;
  const auto ac = apply_annihilate(fs, 0, apply_create(fs, 0, top));
  CHECK(fock_norm(ac) == 0.0);
  CHECK(kind_of([&] { apply_create(fs, 2, vac); }) == ErrorKind::PreconditionViolated);
}

TEST_CASE("coherent state amplitudes") {
  const FockSpace fs(1, 8);
  const std::vector<cplx> xi{0.5};
  const auto s = coherent_state(fs, xi, 1e-6);
  for (int n = 0; n <= 8; ++n) {
    CHECK(std::abs(s[n] - std::exp(-0.125) * std::pow(0.5, n) / std::sqrt(factorial(n))) <
          1e-15);
  }
  const std::vector<cplx> zero{0.0};
  const auto v = coherent_state(fs, zero);
  CHECK(v[0] == cplx(1.0));
  CHECK(fock_norm(v) == 1.0);
  CHECK(readout(fs, v)[0] == cplx(0.0));

  const FockSpace big(3, 6);
  const std::vector<cplx> x3{0.1, -0.05 * kI, cplx(0.03, 0.04)};
  const auto r = readout(big, coherent_state(big, x3));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r[i] - x3[i]) < 1e-15);
}

TEST_CASE("coherent tail against the explicit complement") {
  for (double r2 : {0.04, 0.3, 1.5}) {
    for (int N : {2, 5, 8}) {
      double inside = 0.0;
      for (int m = 0; m <= N; ++m) inside += std::exp(-r2) * std::pow(r2, m) / factorial(m);
      const double tail = coherent_tail(r2, N);
      CHECK(std::abs(tail - (1.0 - inside)) < 1e-14);
      if (tail > 1e-10) CHECK(tail == doctest::Approx(1.0 - inside).epsilon(1e-6));
    }
  }
  // the truncated norm is the complement of the tail
  const FockSpace fs(2, 6);
  const std::vector<cplx> xi{0.4, 0.3 * kI};
  const auto s = coherent_state(fs, xi, 1e-6);
  CHECK(1.0 - std::pow(fock_norm(s), 2) == doctest::Approx(coherent_tail(0.25, 6)).epsilon(1e-6));
}

TEST_CASE("coherent state refuses a severe truncation") {
  const FockSpace fs(1, 4);
  const std::vector<cplx> xi{1.0};
  try {
    coherent_state(fs, xi);
    FAIL("expected TruncationTooSevere");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationTooSevere);
    const int need = e.detail()["required_N"];
    CHECK(coherent_tail(1.0, need) <= 1e-12);
    CHECK(coherent_tail(1.0, need - 1) > 1e-12);
  }
}

TEST_CASE("eigenproperty error equals the missing-shell mass") {
  const std::vector<cplx> xi{0.4, 0.3 * kI};
  double prev = 1.0;
  for (int N = 6; N <= 14; ++N) {
    const FockSpace fs(2, N);
    const auto s = coherent_state(fs, xi, 1e-6);
    // explicit sum over the |n| = N shell
    double shell = 0.0;
    for (int n1 = 0; n1 <= N; ++n1) {
      const int n2 = N - n1;
      shell += std::exp(-0.25) * std::pow(0.16, n1) * std::pow(0.09, n2) /
               (factorial(n1) * factorial(n2));
    }
    for (int i = 0; i < 2; ++i) {
      const double err = eigenproperty_error(fs, s, i, xi[i]);
      const double oracle = std::abs(xi[i]) * std::sqrt(shell);
      CHECK(err == doctest::Approx(oracle).epsilon(1e-6));
      CHECK(eigenproperty_bound(xi, i, N) == doctest::Approx(oracle).epsilon(1e-10));
    }
    const double e0 = eigenproperty_error(fs, s, 0, xi[0]);
    CHECK(e0 < prev);
    prev = e0;
  }
}

TEST_CASE("Carleman operator matrix elements") {
  const FockSpace fs(1, 8);
  CHECK(carleman_hamiltonian(single({}), fs).M.nonZeros() == 0);

  const double w = 0.7;
  const auto lin = carleman_hamiltonian(single({{-kI * w, {1}}}), fs).M;
  for (int n = 0; n <= 8; ++n) CHECK(std::abs(lin.coeff(n, n) - (-kI * w * double(n))) < 1e-15);
  CHECK(lin.nonZeros() == 8);

  const cplx c(0.3, -0.2);
  const auto quad = carleman_hamiltonian(single({{c, {2}}}), fs).M;
  CHECK(std::abs(quad.coeff(1, 2) - c * std::sqrt(2.0)) < 1e-15);
  for (int n = 0; n < 8; ++n) {
    CHECK(std::abs(quad.coeff(n, n + 1) - c * double(n) * std::sqrt(n + 1.0)) < 1e-14);
  }
  CHECK(quad.nonZeros() == 7);  // n = 0 row vanishes

  CHECK(kind_of([&] { carleman_hamiltonian(single({{1.0, {8}}}), fs); }) ==
        ErrorKind::DegreeVsCutoff);
}

TEST_CASE("constant forcing leaks through the cutoff") {
  const FockSpace fs(1, 4);
  const auto op = carleman_hamiltonian(single({{0.5, {0}}}), fs);
  // M = 0.5 a^dagger; only |4> pushes into |5>
  CHECK(op.leak.nonZeros() == 1);
  CHECK(op.leak.coeff(5, 4).real() == doctest::Approx(0.5 * std::sqrt(5.0)));
  FockState s(fs.dimension(), 0.0);
  s[4] = 1.0;
  const auto ev = evolve_fock(s, op, 1e-3, 2);
  CHECK(ev.diagnostics.front().leak == doctest::Approx(0.5 * std::sqrt(5.0)));
}

TEST_CASE("zero operator evolves to the identity") {
  const FockSpace fs(2, 5);
  const std::vector<cplx> xi{0.1, 0.05};
  const auto s = coherent_state(fs, xi);
  const auto ev = evolve_fock(s, carleman_hamiltonian({2, {{}, {}}, {}}, fs), 0.01, 10);
  CHECK(ev.state == s);
  CHECK(ev.diagnostics.size() == 11);
}

TEST_CASE("linear mode reads out the analytic phase") {
  const double w = 1.7, dt = 1e-3;
  const int steps = 2000;
  const FockSpace fs(1, 10);
  const std::vector<cplx> xi{cplx(0.15, 0.1)};
  const auto ev = evolve_fock(coherent_state(fs, xi),
                              carleman_hamiltonian(single({{-kI * w, {1}}}), fs), dt, steps);
  const cplx exact = xi[0] * std::exp(-kI * w * (dt * steps));
  CHECK(std::abs(readout(fs, ev.state)[0] - exact) < 1e-12);
}

TEST_CASE("independent modes factorise") {
  const double dt = 2e-3;
  const int steps = 500, N = 8;
  const FockSpace fs(2, N), f1(1, N), f2(1, N);
  const std::vector<cplx> x{0.2, 0.1 * kI};
  const ModeSystem both{2, {{{-kI, {1, 0}}}, {{-2.1 * kI, {0, 1}}}}, {}};
  const auto joint = evolve_fock(coherent_state(fs, x), carleman_hamiltonian(both, fs), dt, steps);
  const std::vector<cplx> a{x[0]}, b{x[1]};
  const auto s1 = evolve_fock(coherent_state(f1, a), carleman_hamiltonian(single({{-kI, {1}}}), f1),
                              dt, steps).state;
  const auto s2 = evolve_fock(coherent_state(f2, b),
                              carleman_hamiltonian(single({{-2.1 * kI, {1}}}), f2), dt, steps).state;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < fs.dimension(); ++idx) {
    const auto& n = fs.occupation(idx);
    worst = std::max(worst, std::abs(joint.state[idx] - s1[n[0]] * s2[n[1]]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("periodic stencil chain matches its Fourier solution") {
  // i d/dt xi = -c (xi_{j+1} - 2 xi_j + xi_{j-1}) on four sites
  const int k = 4;
  const double c = 0.6, dt = 1e-3;
  const int steps = 1000;
  ModeSystem ms{k, std::vector<std::vector<Monomial>>(k), StencilCoupling{}};
  ms.stencil->taps = {{-1, kI * c}, {0, -2.0 * kI * c}, {1, kI * c}};
  CHECK(ms.degree() == 1);
  const FockSpace fs(k, 5);
  const std::vector<cplx> x0{0.1, 0.05 * kI, -0.02, 0.03};
  const auto ev = evolve_fock(coherent_state(fs, x0), carleman_hamiltonian(ms, fs), dt, steps);
  const auto got = readout(fs, ev.state);
  const double T = dt * steps, pi = std::numbers::pi;
  for (int j = 0; j < k; ++j) {
    cplx exact = 0.0;
    for (int q = 0; q < k; ++q) {
      cplx hat = 0.0;
      for (int l = 0; l < k; ++l) hat += x0[l] * std::exp(-kI * (2 * pi * q * l / k));
      const double lam = c * (2 * std::cos(2 * pi * q / k) - 2);
      exact += hat * std::exp(kI * lam * T) * std::exp(kI * (2 * pi * q * j / k)) / double(k);
    }
    CHECK(std::abs(got[j] - exact) < 1e-12);
  }
}

TEST_CASE("quadratic system: readout follows the nonlinear ODE") {
  CHECK(quadratic_readout_error(10, 1e-3, 5000, 100) <= 1e-6);
}

TEST_CASE("quadratic system: fidelity improves with the cutoff") {
  double prev = 1.0;
  for (int N : {6, 8, 10, 12}) {
    const double err = quadratic_readout_error(N, 1e-3, 5000, 100, 1.0, 1.0);
    MESSAGE("N = " << N << " error " << err);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("stability and norm guards") {
  const FockSpace fs(1, 10);
  const std::vector<cplx> xi{0.1};
  const auto s = coherent_state(fs, xi);
  const auto fast = carleman_hamiltonian(single({{-50.0 * kI, {1}}}), fs);
  CHECK(operator_norm_estimate(fast.M) == doctest::Approx(500.0).epsilon(1e-6));
  CHECK(kind_of([&] { evolve_fock(s, fast, 0.01, 1); }) == ErrorKind::Instability);

  const auto grow = carleman_hamiltonian(single({{3.0, {1}}}), fs);
  FockOptions opts;
  opts.max_norm_growth = 2.0;
  try {
    evolve_fock(s, grow, 1e-3, 5000, opts);
    FAIL("expected Instability");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Instability);
    CHECK(e.detail()["norm"].get<double>() > 2.0 * fock_norm(s));
  }
}

TEST_CASE("readout guards the vacuum") {
  const FockSpace fs(1, 3);
  FockState s(fs.dimension(), 0.0);
  s[1] = 1.0;
  CHECK(kind_of([&] { readout(fs, s); }) == ErrorKind::VacuumDepleted);
}

TEST_CASE("weak superposition") {
  const FockSpace fs(2, 12);
  const std::vector<cplx> z{0.0, 0.0};
  CHECK(weak_superposition(fs, z, z, 0.3, 0.7).deviation == 0.0);
  const std::vector<cplx> xi{0.3, -0.2 * kI}, psi{0.1 * kI, 0.25};
  CHECK(weak_superposition(fs, xi, psi, 1.0, 0.0).deviation < 1e-16);

  std::vector<double> eps{0.2, 0.1, 0.05}, dev;
  for (double e : eps) {
    const std::vector<cplx> a{e * xi[0], e * xi[1]}, b{e * psi[0], e * psi[1]};
    dev.push_back(weak_superposition(fs, a, b, 0.6, cplx(0.3, 0.4)).deviation);
  }
  for (int i = 0; i < 2; ++i) {
    const double slope = std::log(dev[i] / dev[i + 1]) / std::log(eps[i] / eps[i + 1]);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("mode system validation") {
  CHECK(kind_of([] { ModeSystem{2, {{}}, {}}.validate(); }) == ErrorKind::PreconditionViolated);
  CHECK(kind_of([] { ModeSystem{1, {{{1.0, {-1}}}}, {}}.validate(); }) ==
        ErrorKind::PreconditionViolated);
  const auto ms = quadratic_pair();
  const std::vector<cplx> x{0.5, 2.0};
  const auto f = ms.evaluate(x);
  CHECK(std::abs(f[0] - (-kI * 0.5 + 0.4)) < 1e-15);
  CHECK(std::abs(f[1] - (-2.6 * kI)) < 1e-15);
}
