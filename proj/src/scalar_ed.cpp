#include "fieldelim/scalar_ed.hpp"

#include <cmath>

#include "fieldelim/errors.hpp"
#include "fieldelim/spectra.hpp"

namespace fieldelim {

namespace {

void guard_abs(const GridField& f, double eps, ErrorKind kind,
               const char* name) {
  const auto worst = min_abs(f);
  if (!(std::abs(worst.value) >= eps)) {
    throw Error(kind, std::string(name) + " below guard",
                {{"field", name},
                 {"site", f.lattice().coords(worst.index)},
                 {"value", worst.value.real()},
                 {"guard", eps}});
  }
}

void guard_positive(const GridField& f, double eps, ErrorKind kind,
                    const char* name) {
  std::size_t at = 0;
  double lo = f[0].real();
  for (std::size_t s = 1; s < f.size(); ++s) {
    if (f[s].real() < lo) {
      lo = f[s].real();
      at = s;
    }
  }
  if (!(lo >= eps)) {
    throw Error(kind, std::string(name) + " below guard",
                {{"field", name},
                 {"site", f.lattice().coords(at)},
                 {"value", lo},
                 {"guard", eps}});
  }
}

std::array<GridField, 3> spatial(const std::array<GridField, 4>& v) {
  return {v[1], v[2], v[3]};
}

/// B^mu B_mu
GridField minkowski_square(const std::array<GridField, 4>& B) {
  return B[0] * B[0] - B[1] * B[1] - B[2] * B[2] - B[3] * B[3];
}

GridField minkowski_square(const GridField& B0,
                           const std::array<GridField, 3>& Bs) {
  return minkowski_square({B0, Bs[0], Bs[1], Bs[2]});
}

/// -lap B^0 - div(dB/dt)
GridField gauss_lhs(const ScalarFieldOnlyState& s) {
  return -laplacian(s.B[0]) - divergence(spatial(s.B_dot));
}

}  // namespace

void ScalarParams::validate() const {
  if (e == 0.0 || !std::isfinite(e)) {
    throw Error(ErrorKind::ConfigInvalid, "charge e must be non-zero",
                {{"field", "e"}});
  }
  if (!(m >= 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "mass must be non-negative",
                {{"field", "m"}});
  }
  if (!(eps_b0 > 0.0) || !(eps_phi > 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "guards must be positive",
                {{"field", "eps_b0/eps_phi"}});
  }
}

// ---- field-only closure -------------------------------------------------

GridField phi_from_gauss(const ScalarFieldOnlyState& s, const ScalarParams& p) {
  guard_abs(s.B[0], p.eps_b0, ErrorKind::SingularB0, "B0");
  GridField Phi = (gauss_lhs(s) - p.background) / (-2.0 * p.e * p.e * s.B[0]);
  return Phi.make_real().with_label("Phi");
}

std::array<GridField, 3> b_ddot_spatial(const ScalarFieldOnlyState& s,
                                        const ScalarParams& p) {
  guard_abs(s.B[0], p.eps_b0, ErrorKind::SingularB0, "B0");
  const GridField theta = s.B_dot[0] + divergence(spatial(s.B));
  const GridField source = (gauss_lhs(s) - p.background) / s.B[0];
  const double sign = p.mutate_spatial_sign ? -1.0 : 1.0;
  std::array<GridField, 3> out{GridField(s.B[0].lattice()),
                               GridField(s.B[0].lattice()),
                               GridField(s.B[0].lattice())};
  for (int i = 1; i <= 3; ++i) {
    // lower index: lap B_i + d_i theta + B_i source / B_0, raised by -1
    out[i - 1] = laplacian(s.B[i]) - partial(theta, i) + sign * s.B[i] * source;
  }
  return out;
}

GridField phi_dot_from_current(const ScalarFieldOnlyState& s,
                               const GridField& Phi, const ScalarParams& p) {
  guard_abs(s.B[0], p.eps_b0, ErrorKind::SingularB0, "B0");
  const GridField theta = s.B_dot[0] + divergence(spatial(s.B));
  GridField flux = theta * Phi;
  for (int i = 1; i <= 3; ++i) flux += s.B[i] * partial(Phi, i);
  return (-flux / s.B[0]).with_label("Phi_dot");
}

GridField phi_ddot_from_wave(const ScalarFieldOnlyState& s,
                             const GridField& Phi, const GridField& Phi_dot,
                             const ScalarParams& p) {
  guard_positive(Phi, p.eps_phi, ErrorKind::SingularPhi, "Phi");
  GridField grad2 = Phi_dot * Phi_dot;
  for (int i = 1; i <= 3; ++i) {
    const GridField d = partial(Phi, i);
    grad2 -= d * d;
  }
  const GridField mass = p.e * p.e * minkowski_square(s.B) - p.m * p.m;
  return (laplacian(Phi) + 0.5 * grad2 / Phi + 2.0 * mass * Phi)
      .with_label("Phi_ddot");
}

namespace {

GridField b0_ddot_from(const ScalarFieldOnlyState& s, const GridField& Phi,
                       const GridField& Phi_dot, const GridField& Phi_ddot) {
  const GridField theta = s.B_dot[0] + divergence(spatial(s.B));
  GridField bracket = divergence(spatial(s.B_dot)) * Phi +
                      theta * Phi_dot + s.B_dot[0] * Phi_dot +
                      s.B[0] * Phi_ddot;
  for (int i = 1; i <= 3; ++i) {
    bracket += s.B_dot[i] * partial(Phi, i) + s.B[i] * partial(Phi_dot, i);
  }
  return -bracket / Phi;
}

}  // namespace

GridField b_ddot_temporal(const ScalarFieldOnlyState& s, const ScalarParams& p) {
  const GridField Phi = phi_from_gauss(s, p);
  const GridField Phi_dot = phi_dot_from_current(s, Phi, p);
  const GridField Phi_ddot = phi_ddot_from_wave(s, Phi, Phi_dot, p);
  return b0_ddot_from(s, Phi, Phi_dot, Phi_ddot);
}

ScalarClosure scalar_closure(const ScalarFieldOnlyState& s,
                             const ScalarParams& p) {
  GridField Phi = phi_from_gauss(s, p);
  GridField Phi_dot = phi_dot_from_current(s, Phi, p);
  GridField Phi_ddot = phi_ddot_from_wave(s, Phi, Phi_dot, p);
  GridField b0 = b0_ddot_from(s, Phi, Phi_dot, Phi_ddot);
  auto sp = b_ddot_spatial(s, p);
  return {std::move(Phi), std::move(Phi_dot), std::move(Phi_ddot),
          {b0.make_real(), sp[0], sp[1], sp[2]}};
}

FieldLayout scalar_field_only_layout(const Lattice& lattice) {
  return FieldLayout(lattice, 8);
}

State pack(const ScalarFieldOnlyState& s) {
  std::vector<GridField> f(s.B.begin(), s.B.end());
  f.insert(f.end(), s.B_dot.begin(), s.B_dot.end());
  return scalar_field_only_layout(s.B[0].lattice()).pack(f);
}

ScalarFieldOnlyState unpack_scalar_field_only(const State& x,
                                              const Lattice& lattice) {
  auto f = scalar_field_only_layout(lattice).unpack(x);
  for (auto& c : f) c.make_real();
  return {{f[0], f[1], f[2], f[3]}, {f[4], f[5], f[6], f[7]}};
}

State scalar_field_only_rhs(const State& x, const Lattice& lattice,
                            const ScalarParams& p) {
  const auto s = unpack_scalar_field_only(x, lattice);
  const auto c = scalar_closure(s, p);
  std::vector<GridField> out(s.B_dot.begin(), s.B_dot.end());
  out.insert(out.end(), c.B_ddot.begin(), c.B_ddot.end());
  return scalar_field_only_layout(lattice).pack(out);
}

// ---- coupled oracle -----------------------------------------------------

FieldLayout scalar_coupled_layout(const Lattice& lattice) {
  return FieldLayout(lattice, 8);
}

State pack(const ScalarCoupledState& s) {
  const std::vector<GridField> f{s.phi,         s.phi_dot,     s.B_sp[0],
                                 s.B_sp[1],     s.B_sp[2],     s.B_sp_dot[0],
                                 s.B_sp_dot[1], s.B_sp_dot[2]};
  return scalar_coupled_layout(s.phi.lattice()).pack(f);
}

namespace {

/// (-lap + D^2 + V), the operator of the differentiated Gauss law.
EllipticOperator b0_dot_operator(const GridField& V) {
  return EllipticOperator{1.0, -1.0, V};
}

}  // namespace

ScalarCoupledState complete_coupled(const State& x, const Lattice& lattice,
                                    const ScalarParams& p) {
  auto f = scalar_coupled_layout(lattice).unpack(x);
  for (auto& c : f) c.make_real();
  ScalarCoupledState s{f[0],
                       f[1],
                       {f[2], f[3], f[4]},
                       {f[5], f[6], f[7]},
                       GridField(lattice),
                       GridField(lattice)};
  const double e2 = p.e * p.e;
  const GridField V = 2.0 * e2 * s.phi * s.phi;
  const GridField V_dot = 4.0 * e2 * s.phi * s.phi_dot;
  s.B0 = solve_helmholtz(V, divergence(s.B_sp_dot) + p.background, p.solver)
             .with_label("B0");
  const GridField div_b = divergence(s.B_sp);
  GridField rhs = -V_dot * s.B0 + laplacian(div_b) - div_grad(div_b);
  rhs -= divergence({V * s.B_sp[0], V * s.B_sp[1], V * s.B_sp[2]});
  s.B0_dot = solve_elliptic(b0_dot_operator(V), rhs, p.solver).with_label("B0_dot");
  return s;
}

namespace {

std::array<GridField, 3> coupled_b_ddot_spatial(const ScalarCoupledState& s,
                                                const GridField& V) {
  const GridField theta = s.B0_dot + divergence(s.B_sp);
  std::array<GridField, 3> out{s.B0, s.B0, s.B0};
  for (int i = 1; i <= 3; ++i) {
    out[i - 1] = laplacian(s.B_sp[i - 1]) - partial(theta, i) -
                 V * s.B_sp[i - 1];
  }
  return out;
}

GridField coupled_phi_ddot(const ScalarCoupledState& s, const ScalarParams& p) {
  const GridField mass =
      p.e * p.e * minkowski_square(s.B0, s.B_sp) - p.m * p.m;
  return laplacian(s.phi) + mass * s.phi;
}

}  // namespace

State scalar_coupled_rhs(const State& x, const Lattice& lattice,
                         const ScalarParams& p) {
  const auto s = complete_coupled(x, lattice, p);
  const GridField V = 2.0 * p.e * p.e * s.phi * s.phi;
  const auto bdd = coupled_b_ddot_spatial(s, V);
  const std::vector<GridField> out{s.phi_dot,     coupled_phi_ddot(s, p),
                                   s.B_sp_dot[0], s.B_sp_dot[1],
                                   s.B_sp_dot[2], bdd[0],
                                   bdd[1],        bdd[2]};
  return scalar_coupled_layout(lattice).pack(out);
}

ScalarOracleDerivatives scalar_oracle_derivatives(const ScalarCoupledState& s,
                                                  const ScalarParams& p) {
  const double e2 = p.e * p.e;
  const GridField V = 2.0 * e2 * s.phi * s.phi;
  const GridField V_dot = 4.0 * e2 * s.phi * s.phi_dot;
  const GridField phi_ddot = coupled_phi_ddot(s, p);
  const GridField V_ddot =
      4.0 * e2 * (s.phi_dot * s.phi_dot + s.phi * phi_ddot);
  const auto bdd = coupled_b_ddot_spatial(s, V);
  // d/dt of the differentiated Gauss law L B0_dot = r.
  const GridField div_bd = divergence(s.B_sp_dot);
  GridField r_dot = -V_ddot * s.B0 - V_dot * s.B0_dot + laplacian(div_bd) -
                    div_grad(div_bd);
  std::array<GridField, 3> flux{s.B0, s.B0, s.B0};
  for (int i = 0; i < 3; ++i) flux[i] = V_dot * s.B_sp[i] + V * s.B_sp_dot[i];
  r_dot -= divergence(flux);
  GridField b0_ddot = solve_elliptic(b0_dot_operator(V),
                                     r_dot - V_dot * s.B0_dot, p.solver);
  return {phi_ddot, {b0_ddot, bdd[0], bdd[1], bdd[2]}};
}

double gauss_residual(const ScalarCoupledState& s, const ScalarParams& p) {
  const GridField V = 2.0 * p.e * p.e * s.phi * s.phi;
  const GridField lhs = -laplacian(s.B0) + V * s.B0;
  const GridField rhs = divergence(s.B_sp_dot) + p.background;
  const double scale = std::max(norms(lhs).l2, norms(rhs).l2);
  return scale > 0.0 ? norms(lhs - rhs).l2 / scale : 0.0;
}

ScalarFieldOnlyState to_field_only(const ScalarCoupledState& s) {
  return {{s.B0, s.B_sp[0], s.B_sp[1], s.B_sp[2]},
          {s.B0_dot, s.B_sp_dot[0], s.B_sp_dot[1], s.B_sp_dot[2]}};
}

std::array<GridField, 4> scalar_current(const std::array<GridField, 4>& B,
                                        const GridField& Phi) {
  return {B[0] * Phi, B[1] * Phi, B[2] * Phi, B[3] * Phi};
}

GridField current_divergence(const GridField& J0_dot,
                             const std::array<GridField, 3>& J_sp) {
  return J0_dot + divergence(J_sp);
}

// ---- initial data -------------------------------------------------------

ScalarInitialData make_scalar_initial_data(const ScalarInitialSpec& spec,
                                           const Lattice& lattice,
                                           ScalarParams params) {
  params.validate();
  SpectrumSampler rng(spec.seed);
  GridField phi = rng.real_field(lattice, spec.amp_phi, spec.kmax) + spec.phi_offset;
  GridField phi_dot = rng.real_field(lattice, spec.amp_phi_dot, spec.kmax);
  std::array<GridField, 3> B{GridField(lattice), GridField(lattice),
                             GridField(lattice)};
  std::array<GridField, 3> B_dot = B;
  for (auto& c : B) c = rng.real_field(lattice, spec.amp_B, spec.kmax);
  for (auto& c : B_dot) c = rng.real_field(lattice, spec.amp_B_dot, spec.kmax);

  const GridField V = 2.0 * params.e * params.e * phi * phi;
  params.background = spec.b0_offset * mean(V).real();

  const ScalarCoupledState partial_state{phi, phi_dot, B, B_dot,
                                         GridField(lattice), GridField(lattice)};
  ScalarCoupledState coupled =
      complete_coupled(pack(partial_state), lattice, params);
  ScalarInitialData out{params, coupled, to_field_only(coupled)};

  const auto b0 = min_abs(out.coupled.B0);
  if (!(std::abs(b0.value) >= params.eps_b0)) {
    throw Error(ErrorKind::SingularB0, "initial B0 violates its guard",
                {{"guard", "eps_b0"},
                 {"site", lattice.coords(b0.index)},
                 {"value", b0.value.real()}});
  }
  const GridField Phi = phi_from_gauss(out.field_only, params);
  const auto lo = min_abs(Phi);
  double phi_min = Phi[0].real();
  for (const auto& z : Phi.values()) phi_min = std::min(phi_min, z.real());
  if (!(phi_min >= params.eps_phi)) {
    throw Error(ErrorKind::SingularPhi, "reconstructed Phi violates its guard",
                {{"guard", "eps_phi"},
                 {"site", lattice.coords(lo.index)},
                 {"value", phi_min}});
  }
  return out;
}

}  // namespace fieldelim
