#include <cmath>
#include <deque>
#include <numbers>

#include "fieldelim/errors.hpp"
#include "fieldelim/spectra.hpp"
#include "fieldelim/spinor_ed.hpp"

namespace fieldelim {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

GridField density(const Spinor& a, const Spinor& b) {
  return conj(a[0]) * b[0] + conj(a[1]) * b[1] + conj(a[2]) * b[2] +
         conj(a[3]) * b[3];
}

/// e^2 (-lap)^-1 (rho - mean rho)
GridField coulomb(const GridField& rho, const SpinorParams& p) {
  GridField src = real_part(rho);
  // twice: the first pass leaves a rounding residue of order |mean| * eps
  src += -mean(src);
  src += -mean(src);
  const GridField zero(rho.lattice());
  return (p.e * p.e * solve_helmholtz(zero, src, p.solver)).make_real();
}

/// The part of dirac_rhs that is linear in the potential.
Spinor coupling(const Spinor& psi, const FourVector& X) {
  const GridField zero(psi[0].lattice());
  Spinor with = dirac_rhs(psi, X);
  const Spinor without = dirac_rhs(psi, {zero, zero, zero, zero});
  for (int c = 0; c < 4; ++c) with[c] -= without[c];
  return with;
}

Spinor spinor_zero(const Lattice& lat) {
  return {GridField(lat), GridField(lat), GridField(lat), GridField(lat)};
}

}  // namespace

FieldLayout spinor_coupled_layout(const Lattice& lattice) {
  return FieldLayout(lattice, 10);
}

State pack(const SpinorCoupledState& s) {
  const std::vector<GridField> f{s.psi[0],      s.psi[1],      s.psi[2],
                                 s.psi[3],      s.A_sp[0],     s.A_sp[1],
                                 s.A_sp[2],     s.A_sp_dot[0], s.A_sp_dot[1],
                                 s.A_sp_dot[2]};
  return spinor_coupled_layout(s.psi[0].lattice()).pack(f);
}

SpinorCoupledState complete_spinor(const State& x, const Lattice& lattice,
                                   const SpinorParams& p) {
  auto f = spinor_coupled_layout(lattice).unpack(x);
  for (int c = 4; c < 10; ++c) f[c].make_real();
  SpinorCoupledState s{{f[0], f[1], f[2], f[3]},
                       {f[4], f[5], f[6]},
                       {f[7], f[8], f[9]},
                       GridField(lattice),
                       GridField(lattice)};
  s.A0 = coulomb(density(s.psi, s.psi), p).with_label("A0");
  const Spinor psi_dot = dirac_rhs(s.psi, {s.A0, s.A_sp[0], s.A_sp[1], s.A_sp[2]});
  const GridField rho_dot = 2.0 * real_part(density(s.psi, psi_dot));
  s.A0_dot = coulomb(rho_dot, p).with_label("A0_dot");
  return s;
}

State spinor_coupled_rhs(const State& x, const Lattice& lattice,
                         const SpinorParams& p) {
  const auto s = complete_spinor(x, lattice, p);
  const Spinor psi_dot = dirac_rhs(s.psi, {s.A0, s.A_sp[0], s.A_sp[1], s.A_sp[2]});
  const FourVector J = bilinear_current(s.psi, s.psi);
  const GridField gauge = s.A0_dot + divergence(s.A_sp);
  std::vector<GridField> out(psi_dot.begin(), psi_dot.end());
  for (int i = 0; i < 3; ++i) out.push_back(s.A_sp_dot[i]);
  for (int i = 1; i <= 3; ++i) {
    out.push_back((laplacian(s.A_sp[i - 1]) - partial(gauge, i) +
                   p.e * p.e * real_part(J[i]))
                      .make_real());
  }
  return spinor_coupled_layout(lattice).pack(out);
}

SpinorTaylor spinor_taylor(const SpinorCoupledState& s, const SpinorParams& p) {
  const Lattice& lat = s.psi[0].lattice();
  const double e2 = p.e * p.e;
  SpinorTaylor t{{s.psi, spinor_zero(lat), spinor_zero(lat), spinor_zero(lat),
                  spinor_zero(lat)},
                 {spinor_zero(lat), spinor_zero(lat), spinor_zero(lat),
                  spinor_zero(lat)}};
  t.A[0] = {GridField(lat), s.A_sp[0], s.A_sp[1], s.A_sp[2]};
  t.A[1] = {GridField(lat), s.A_sp_dot[0], s.A_sp_dot[1], s.A_sp_dot[2]};

  auto leibniz_current = [&](int n) {
    FourVector j = spinor_zero(lat);
    for (int k = 0; k <= n; ++k) {
      const auto c = bilinear_current(t.psi[k], t.psi[n - k]);
      for (int m = 0; m < 4; ++m) j[m] += binomial(n, k) * c[m];
    }
    return j;
  };

  const GridField zero(lat);
  for (int n = 0; n <= 3; ++n) {
    const FourVector j = leibniz_current(n);
    t.A[n][0] = coulomb(j[0], p);
    if (n >= 2) {
      const FourVector jm = leibniz_current(n - 2);
      const GridField gauge =
          t.A[n - 1][0] + divergence({t.A[n - 2][1], t.A[n - 2][2], t.A[n - 2][3]});
      for (int i = 1; i <= 3; ++i) {
        t.A[n][i] = (laplacian(t.A[n - 2][i]) - partial(gauge, i) +
                     e2 * real_part(jm[i]))
                        .make_real();
      }
    }
    Spinor next = dirac_rhs(t.psi[n], {zero, zero, zero, zero});
    for (int k = 0; k <= n; ++k) {
      const Spinor c = coupling(t.psi[n - k], t.A[k]);
      for (int m = 0; m < 4; ++m) next[m] += binomial(n, k) * c[m];
    }
    t.psi[n + 1] = next;
  }
  return t;
}

GaugeFunction gauge_function(const GridField& psi1, const SpinorParams& p) {
  const Lattice& lat = psi1.lattice();
  const auto worst = min_abs(psi1);
  if (!(std::abs(worst.value) >= p.eps_psi)) {
    throw Error(ErrorKind::SingularPsi1, "|psi_1| below guard",
                {{"site", lat.coords(worst.index)},
                 {"abs", std::abs(worst.value)},
                 {"guard", p.eps_psi}});
  }
  // Breadth-first phase unwrap from site 0; every lattice edge must agree.
  const double pi = std::numbers::pi;
  std::vector<double> theta(lat.size(), 0.0);
  std::vector<char> seen(lat.size(), 0);
  auto step = [&](std::size_t from, std::size_t to) {
    double d = std::arg(psi1[to]) - std::arg(psi1[from]);
    d -= 2.0 * pi * std::round(d / (2.0 * pi));
    if (std::abs(d) > 0.5 * pi) {
      throw Error(ErrorKind::BranchCutAmbiguity,
                  "phase of psi_1 jumps by more than pi/2 between neighbours",
                  {{"site", lat.coords(from)}, {"neighbour", lat.coords(to)}});
    }
    return theta[from] + d;
  };
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  theta[0] = std::arg(psi1[0]);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    const auto c = lat.coords(u);
    for (int axis = 0; axis < 3; ++axis) {
      for (int dir : {-1, 1}) {
        auto nc = c;
        nc[axis] = (nc[axis] + dir + lat.dims()[axis]) % lat.dims()[axis];
        const std::size_t v = lat.index(nc[0], nc[1], nc[2]);
        const double expect = step(u, v);
        if (!seen[v]) {
          seen[v] = 1;
          theta[v] = expect;
          queue.push_back(v);
        } else if (std::abs(theta[v] - expect) > 1e-9) {
          throw Error(ErrorKind::BranchCutAmbiguity,
                      "phase of psi_1 winds around a lattice loop",
                      {{"site", lat.coords(u)}, {"neighbour", nc}});
        }
      }
    }
  }
  std::vector<cplx> alpha(lat.size());
  for (std::size_t s = 0; s < lat.size(); ++s) {
    alpha[s] = cplx(theta[s], -std::log(std::abs(psi1[s])));
  }
  return {GridField(lat, std::move(alpha), false, "alpha")};
}

GaugeTransformed gauge_to_B(const SpinorCoupledState& s, const SpinorParams& p) {
  const Lattice& lat = s.psi[0].lattice();
  const SpinorTaylor t = spinor_taylor(s, p);
  GaugeTransformed out{gauge_function(s.psi[0], p),
                       {spinor_zero(lat), spinor_zero(lat), spinor_zero(lat)},
                       spinor_zero(lat),
                       {spinor_zero(lat), spinor_zero(lat), spinor_zero(lat)}};
  // t.A[0][0] equals s.A0 up to solver tolerance; use the state's copy.
  // w = ln psi_1, alpha = -i w.
  const GridField& psi1 = s.psi[0];
  std::array<GridField, 5> alpha{out.gauge.alpha, GridField(lat), GridField(lat),
                                 GridField(lat), GridField(lat)};
  std::array<GridField, 5> w{kI * out.gauge.alpha, GridField(lat), GridField(lat),
                             GridField(lat), GridField(lat)};
  for (int n = 0; n <= 3; ++n) {
    GridField acc = t.psi[n + 1][0];
    for (int k = 0; k < n; ++k) acc -= binomial(n, k) * w[k + 1] * t.psi[n - k][0];
    w[n + 1] = acc / psi1;
    alpha[n + 1] = -kI * w[n + 1];
  }
  std::array<FourVector, 4> B{spinor_zero(lat), spinor_zero(lat),
                              spinor_zero(lat), spinor_zero(lat)};
  for (int n = 0; n <= 3; ++n) {
    const GridField a0 = n == 0 ? s.A0 : t.A[n][0];
    B[n] = {a0 + alpha[n + 1], t.A[n][1] - partial(alpha[n], 1),
            t.A[n][2] - partial(alpha[n], 2), t.A[n][3] - partial(alpha[n], 3)};
  }
  out.B = {B[0], B[1], B[2]};
  out.B_dddot = B[3];
  for (int c = 0; c < 4; ++c) {
    for (int n = 0; n <= 2; ++n) {
      GridField acc = t.psi[n][c];
      for (int j = 1; j <= n; ++j) acc -= binomial(n, j) * t.psi[j][0] * out.phi[n - j][c];
      out.phi[n][c] = acc / psi1;
    }
  }
  return out;
}

SpinorInitialData make_spinor_initial_data(const SpinorInitialSpec& spec,
                                           const Lattice& lattice,
                                           SpinorParams params) {
  params.validate();
  SpectrumSampler rng(spec.seed);
  Spinor psi = spinor_zero(lattice);
  for (int c = 0; c < 4; ++c) {
    psi[c] = rng.complex_field(lattice, spec.amp_psi, spec.kmax) + spec.psi_offset[c];
  }
  auto A = rng.transverse_field(lattice, spec.amp_A, spec.kmax);
  auto A_dot = rng.transverse_field(lattice, spec.amp_A_dot, spec.kmax);
  A_dot[1] += -spec.electric_field;

  params.background = params.e * params.e * mean(density(psi, psi)).real();
  const SpinorCoupledState partial_state{psi, A, A_dot, GridField(lattice),
                                         GridField(lattice)};
  SpinorCoupledState coupled =
      complete_spinor(pack(partial_state), lattice, params);
  GaugeTransformed transformed = gauge_to_B(coupled, params);
  try {
    reconstruct_chain(transformed.B, params);
  } catch (const Error& e) {
    throw Error(ErrorKind::PreconditionViolated,
                std::string("initial data fails the field-only checks: ") + e.what(),
                {{"cause", std::string(to_string(e.kind()))}, {"detail", e.detail()}});
  }
  return {params, std::move(coupled), std::move(transformed)};
}

}  // namespace fieldelim
