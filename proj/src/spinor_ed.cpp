#include "fieldelim/spinor_ed.hpp"

#include <cmath>

#include "fieldelim/errors.hpp"

namespace fieldelim {

namespace {

std::array<GridField, 3> spatial(const FourVector& v) { return {v[1], v[2], v[3]}; }

GridField minkowski(const FourVector& a, const FourVector& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

void guard_f(const GridField& D, double eps) {
  const auto worst = min_abs(D);
  if (!(std::abs(worst.value) >= eps)) {
    throw Error(ErrorKind::SingularF, "iF1 + F2 below guard",
                {{"site", D.lattice().coords(worst.index)},
                 {"abs", std::abs(worst.value)},
                 {"guard", eps}});
  }
}

/// Everything of the chain that depends only on (B, Bdot, Bddot).
struct ChainCore {
  ComplexFieldStrength F, F_dot;
  GridField theta, theta_dot;
  GridField D, D_dot, N, N_dot;
};

ChainCore chain_core(const SpinorFieldOnlyState& s, const SpinorParams& p) {
  auto F = field_strength(s.B, s.B_dot);
  auto F_dot = field_strength(s.B_dot, s.B_ddot);
  GridField theta = s.B_dot[0] + divergence(spatial(s.B));
  GridField theta_dot = s.B_ddot[0] + divergence(spatial(s.B_dot));
  GridField D = kI * F.F[0] + F.F[1];
  guard_f(D, p.eps_f);
  GridField D_dot = kI * F_dot.F[0] + F_dot.F[1];
  GridField N = kI * theta - minkowski(s.B, s.B) + 1.0 + kI * F.F[2];
  GridField N_dot =
      kI * theta_dot - 2.0 * minkowski(s.B, s.B_dot) + kI * F_dot.F[2];
  return {std::move(F),     std::move(F_dot), std::move(theta),
          std::move(theta_dot), std::move(D), std::move(D_dot),
          std::move(N),     std::move(N_dot)};
}

/// Spinor (1, phi2, phi3, phi4) and its time derivative (0, ...).
Spinor phi_of(const SpinorReconstruction& r) {
  return {GridField::constant(r.phi2.lattice(), 1.0), r.phi2, r.phi3, r.phi4};
}
Spinor phi_dot_of(const SpinorReconstruction& r) {
  return {GridField(r.phi2.lattice()), r.phi2_dot, r.phi3_dot, r.phi4_dot};
}

}  // namespace

void SpinorParams::validate() const {
  if (!(e > 0.0) || !std::isfinite(e)) {
    throw Error(ErrorKind::ConfigInvalid, "charge e must be positive",
                {{"field", "e"}});
  }
  if (!(eps_psi > 0.0) || !(eps_f > 0.0)) {
    throw Error(ErrorKind::ConfigInvalid, "guards must be positive",
                {{"field", "eps_psi/eps_f"}});
  }
}

Spinor dirac_rhs(const Spinor& psi, const FourVector& A) {
  const auto& [p1, p2, p3, p4] = psi;
  const GridField d1p1 = partial(p1, 1), d2p1 = partial(p1, 2), d3p1 = partial(p1, 3);
  const GridField d1p2 = partial(p2, 1), d2p2 = partial(p2, 2), d3p2 = partial(p2, 3);
  const GridField d1p3 = partial(p3, 1), d2p3 = partial(p3, 2), d3p3 = partial(p3, 3);
  const GridField d1p4 = partial(p4, 1), d2p4 = partial(p4, 2), d3p4 = partial(p4, 3);
  const GridField a_plus = A[0] + A[3], a_minus = A[0] - A[3];
  const GridField t_plus = A[1] + kI * A[2], t_minus = A[1] - kI * A[2];

  const GridField r8 = a_minus * p1 - t_minus * p2 - kI * (d3p1 - kI * d2p2 + d1p2);
  const GridField r9 = -t_plus * p1 + a_plus * p2 - kI * d1p1 + d2p1 + kI * d3p2;
  const GridField r6 = a_plus * p3 + t_minus * p4 + kI * (d3p3 - kI * d2p4 + d1p4);
  const GridField r7 = t_plus * p3 + a_minus * p4 + kI * d1p3 - d2p3 - kI * d3p4;
  return {kI * (p3 - r8), kI * (p4 - r9), kI * (p1 - r6), kI * (p2 - r7)};
}

FourVector bilinear_current(const Spinor& a, const Spinor& b) {
  const GridField a1 = conj(a[0]), a2 = conj(a[1]), a3 = conj(a[2]), a4 = conj(a[3]);
  return {a1 * b[0] + a2 * b[1] + a3 * b[2] + a4 * b[3],
          a2 * b[0] + a1 * b[1] - a4 * b[2] - a3 * b[3],
          kI * (a2 * b[0] - a1 * b[1] - a4 * b[2] + a3 * b[3]),
          a1 * b[0] - a2 * b[1] - a3 * b[2] + a4 * b[3]};
}

ComplexFieldStrength field_strength(const FourVector& X, const FourVector& Y) {
  return {{-partial(X[0], 1) - Y[1] + kI * (partial(X[3], 2) - partial(X[2], 3)),
           -partial(X[0], 2) - Y[2] + kI * (partial(X[1], 3) - partial(X[3], 1)),
           -partial(X[0], 3) - Y[3] + kI * (partial(X[2], 1) - partial(X[1], 2))}};
}

std::array<GridField, 3> ComplexFieldStrength::E() const {
  return {real_part(F[0]), real_part(F[1]), real_part(F[2])};
}
std::array<GridField, 3> ComplexFieldStrength::H() const {
  return {imag_part(F[0]), imag_part(F[1]), imag_part(F[2])};
}

GridField phi2(const SpinorFieldOnlyState& s, const SpinorParams& p) {
  const auto c = chain_core(s, p);
  return (-c.N / c.D).with_label("phi2");
}

GridField delta_factor(const SpinorFieldOnlyState& s,
                       const SpinorReconstruction& r, const SpinorParams& p) {
  const GridField G0 = -laplacian(s.B[0]) - divergence(spatial(s.B_dot));
  const GridField rho = 1.0 + abs2(r.phi2) + abs2(r.phi3) + abs2(r.phi4);
  GridField k = (G0 + p.background) / rho;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i].real() > 0.0)) {
      throw Error(ErrorKind::NonPositiveDensity,
                  "e^2 exp(-2 delta) is not positive",
                  {{"site", k.lattice().coords(i)}, {"value", k[i].real()}});
    }
  }
  return k.with_label("delta_factor");
}

namespace {

SpinorReconstruction chain_from(const SpinorFieldOnlyState& s,
                                const ChainCore& c, const SpinorParams& p) {
  const auto& B = s.B;
  const auto& Bd = s.B_dot;
  SpinorReconstruction r{GridField(B[0].lattice()), GridField(B[0].lattice()),
                         GridField(B[0].lattice()), GridField(B[0].lattice()),
                         GridField(B[0].lattice()), GridField(B[0].lattice()),
                         GridField(B[0].lattice()), GridField(B[0].lattice())};
  r.phi2 = -c.N / c.D;
  r.phi2_dot = -c.N_dot / c.D + c.N * c.D_dot / (c.D * c.D);

  GridField transport = B[1] * partial(r.phi2, 1) + B[2] * partial(r.phi2, 2) +
                        B[3] * partial(r.phi2, 3);
  r.phi2_ddot = laplacian(r.phi2) - 2.0 * kI * B[0] * r.phi2_dot -
                2.0 * kI * transport -
                (kI * c.theta - minkowski(B, B) + 1.0 - kI * c.F.F[2]) * r.phi2 -
                (kI * c.F.F[0] - c.F.F[1]);

  r.phi3 = B[0] - B[3] - (B[1] - kI * B[2]) * r.phi2 - partial(r.phi2, 2) -
           kI * partial(r.phi2, 1);
  r.phi3_dot = Bd[0] - Bd[3] - (Bd[1] - kI * Bd[2]) * r.phi2 -
               (B[1] - kI * B[2]) * r.phi2_dot - partial(r.phi2_dot, 2) -
               kI * partial(r.phi2_dot, 1);
  r.phi4 = -(B[1] + kI * B[2]) + (B[0] + B[3]) * r.phi2 +
           kI * partial(r.phi2, 3) - kI * r.phi2_dot;
  r.phi4_dot = -(Bd[1] + kI * Bd[2]) + (Bd[0] + Bd[3]) * r.phi2 +
               (B[0] + B[3]) * r.phi2_dot + kI * partial(r.phi2_dot, 3) -
               kI * r.phi2_ddot;
  r.delta_factor = delta_factor(s, r, p);
  return r;
}

}  // namespace

SpinorReconstruction reconstruct_chain(const SpinorFieldOnlyState& s,
                                       const SpinorParams& p) {
  return chain_from(s, chain_core(s, p), p);
}

FourVector b_dddot(const SpinorFieldOnlyState& s, const SpinorParams& p) {
  const auto c = chain_core(s, p);
  const auto r = chain_from(s, c, p);
  const Lattice& lat = s.B[0].lattice();

  const Spinor phi = phi_of(r), phi_dot = phi_dot_of(r);
  const GridField rho = 1.0 + abs2(r.phi2) + abs2(r.phi3) + abs2(r.phi4);
  GridField rho_dot(lat);
  for (int k = 1; k < 4; ++k) rho_dot += 2.0 * real_part(conj(phi[k]) * phi_dot[k]);
  const GridField G0_dot = -laplacian(s.B_dot[0]) - divergence(spatial(s.B_ddot));
  const GridField& kappa = r.delta_factor;
  const GridField kappa_dot = (G0_dot - kappa * rho_dot) / rho;
  const FourVector J = bilinear_current(phi, phi);
  const FourVector Ja = bilinear_current(phi_dot, phi);
  const FourVector Jb = bilinear_current(phi, phi_dot);

  FourVector out{GridField(lat), GridField(lat), GridField(lat), GridField(lat)};
  for (int i = 1; i <= 3; ++i) {
    out[i] = laplacian(s.B_dot[i]) - partial(c.theta_dot, i) + kappa_dot * J[i] +
             kappa * (Ja[i] + Jb[i]);
  }

  const auto F_ddot = field_strength(s.B_ddot, out);
  const GridField D_ddot = kI * F_ddot.F[0] + F_ddot.F[1];
  const GridField R = kI * divergence(spatial(s.B_ddot)) -
                      2.0 * (minkowski(s.B_dot, s.B_dot) + minkowski(s.B, s.B_ddot)) +
                      kI * F_ddot.F[2];
  const GridField N_ddot = c.N * D_ddot / c.D + 2.0 * c.N_dot * c.D_dot / c.D -
                           2.0 * c.N * c.D_dot * c.D_dot / (c.D * c.D) -
                           c.D * r.phi2_ddot;
  out[0] = -kI * (N_ddot - R);
  return out;
}

GridField fourth_order_residual(const SpinorFieldOnlyState& s,
                                const FourVector& B_dddot,
                                const SpinorParams& p) {
  const auto c = chain_core(s, p);
  const auto F_ddot = field_strength(s.B_ddot, B_dddot);
  const GridField D_ddot = kI * F_ddot.F[0] + F_ddot.F[1];
  const GridField theta_ddot = B_dddot[0] + divergence(spatial(s.B_ddot));
  const GridField N_ddot =
      kI * theta_ddot -
      2.0 * (minkowski(s.B_dot, s.B_dot) + minkowski(s.B, s.B_ddot)) +
      kI * F_ddot.F[2];
  const GridField& D = c.D;
  const GridField u = c.N / D;
  const GridField u_dot = c.N_dot / D - c.N * c.D_dot / (D * D);
  const GridField u_ddot = N_ddot / D - 2.0 * c.N_dot * c.D_dot / (D * D) -
                           c.N * D_ddot / (D * D) +
                           2.0 * c.N * c.D_dot * c.D_dot / (D * D * D);
  const auto& B = s.B;
  const GridField transport =
      B[1] * partial(u, 1) + B[2] * partial(u, 2) + B[3] * partial(u, 3);
  return (u_ddot - laplacian(u) + 2.0 * kI * B[0] * u_dot + 2.0 * kI * transport +
          (kI * c.theta - minkowski(B, B) + 1.0 - kI * c.F.F[2]) * u -
          kI * c.F.F[0] + c.F.F[1])
      .with_label("residual");
}

FieldLayout spinor_field_only_layout(const Lattice& lattice) {
  return FieldLayout(lattice, 12);
}

State pack(const SpinorFieldOnlyState& s) {
  std::vector<GridField> f(s.B.begin(), s.B.end());
  f.insert(f.end(), s.B_dot.begin(), s.B_dot.end());
  f.insert(f.end(), s.B_ddot.begin(), s.B_ddot.end());
  return spinor_field_only_layout(s.B[0].lattice()).pack(f);
}

SpinorFieldOnlyState unpack_spinor_field_only(const State& x,
                                              const Lattice& lattice) {
  const auto f = spinor_field_only_layout(lattice).unpack(x);
  return {{f[0], f[1], f[2], f[3]},
          {f[4], f[5], f[6], f[7]},
          {f[8], f[9], f[10], f[11]}};
}

State spinor_field_only_rhs(const State& x, const Lattice& lattice,
                            const SpinorParams& p) {
  const auto s = unpack_spinor_field_only(x, lattice);
  const auto third = b_dddot(s, p);
  std::vector<GridField> out(s.B_dot.begin(), s.B_dot.end());
  out.insert(out.end(), s.B_ddot.begin(), s.B_ddot.end());
  out.insert(out.end(), third.begin(), third.end());
  return spinor_field_only_layout(lattice).pack(out);
}

}  // namespace fieldelim
