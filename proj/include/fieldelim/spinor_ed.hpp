#pragma once

#include <array>
#include <cstdint>

#include "fieldelim/grid.hpp"
#include "fieldelim/integrator.hpp"

namespace fieldelim {

/// Spinor electrodynamics in units hbar = c = m = 1 with the charge absorbed
/// into the potential. Spinors are in the chiral representation; four-vectors
/// carry upper indices.
using Spinor = std::array<GridField, 4>;
using FourVector = std::array<GridField, 4>;

struct SpinorParams {
  double e = 0.3;
  double eps_psi = 1e-6;
  double eps_f = 1e-6;
  /// e^2 times the mean charge density; the Gauss law is solved against a
  /// uniform neutralising background of this size.
  double background = 0.0;
  SolverOptions solver;

  void validate() const;
};

/// d psi / dt for the Dirac equation minimally coupled to A. A may be complex
/// (the same component equations hold for (phi, B)).
Spinor dirac_rhs(const Spinor& psi, const FourVector& A);

/// Bilinear current c^mu(a, b) = a^dagger gamma^0 gamma^mu b; c(psi, psi) is
/// the Dirac current with c^0 = |psi|^2.
FourVector bilinear_current(const Spinor& a, const Spinor& b);

/// F^i = E^i + i H^i with E = -grad X^0 - Y, H = curl X. field_strength(B, Bdot)
/// gives F and field_strength(Bdot, Bddot) its time derivative.
struct ComplexFieldStrength {
  std::array<GridField, 3> F;
  std::array<GridField, 3> E() const;
  std::array<GridField, 3> H() const;
};
ComplexFieldStrength field_strength(const FourVector& X, const FourVector& Y);

struct SpinorFieldOnlyState {
  FourVector B, B_dot, B_ddot;
};

/// phi2 = -(iF1 + F2)^-1 (i dB - B.B + 1 + iF3). Throws SingularF.
GridField phi2(const SpinorFieldOnlyState& s, const SpinorParams& p);

struct SpinorReconstruction {
  GridField phi2, phi2_dot, phi2_ddot;
  GridField phi3, phi3_dot;
  GridField phi4, phi4_dot;
  /// e^2 exp(-2 delta); complex on the lattice, positive real part enforced.
  GridField delta_factor;
};

SpinorReconstruction reconstruct_chain(const SpinorFieldOnlyState& s,
                                       const SpinorParams& p);

/// (G0 + background) / (1 + |phi2|^2 + |phi3|^2 + |phi4|^2) with
/// G0 = -lap B^0 - div Bdot. Throws NonPositiveDensity.
GridField delta_factor(const SpinorFieldOnlyState& s,
                       const SpinorReconstruction& r, const SpinorParams& p);

/// Third time derivatives of B implied by (B, Bdot, Bddot).
FourVector b_dddot(const SpinorFieldOnlyState& s, const SpinorParams& p);

/// Left side of the fourth-order equation for B given all four time levels;
/// zero on exact solutions and identically zero when B_dddot = b_dddot(s).
GridField fourth_order_residual(const SpinorFieldOnlyState& s,
                                const FourVector& B_dddot,
                                const SpinorParams& p);

/// Flat layout: B, Bdot, Bddot (12 complex components).
FieldLayout spinor_field_only_layout(const Lattice& lattice);
State pack(const SpinorFieldOnlyState& s);
SpinorFieldOnlyState unpack_spinor_field_only(const State& x,
                                              const Lattice& lattice);
State spinor_field_only_rhs(const State& x, const Lattice& lattice,
                            const SpinorParams& p);

// ---- coupled oracle -----------------------------------------------------

struct SpinorCoupledState {
  Spinor psi;
  std::array<GridField, 3> A_sp, A_sp_dot;
  GridField A0, A0_dot;
};

/// Flat layout: psi_1..psi_4, A^1..A^3, Adot^1..Adot^3. A^0 and its time
/// derivative follow from the Coulomb-gauge Gauss law.
FieldLayout spinor_coupled_layout(const Lattice& lattice);
State pack(const SpinorCoupledState& s);
SpinorCoupledState complete_spinor(const State& x, const Lattice& lattice,
                                   const SpinorParams& p);
State spinor_coupled_rhs(const State& x, const Lattice& lattice,
                         const SpinorParams& p);

/// Exact time derivatives of the semi-discrete coupled system at one instant:
/// psi[n] = d^n psi / dt^n (n <= 4), A[n] (n <= 3).
struct SpinorTaylor {
  std::array<Spinor, 5> psi;
  std::array<FourVector, 4> A;
};
SpinorTaylor spinor_taylor(const SpinorCoupledState& s, const SpinorParams& p);

struct GaugeFunction {
  GridField alpha;  // beta + i delta
  GridField beta() const { return real_part(alpha); }
  GridField delta() const { return imag_part(alpha); }
};

/// alpha with exp(-i alpha) psi_1 = 1: beta = unwrapped arg psi_1,
/// delta = -ln |psi_1|. Throws SingularPsi1 or BranchCutAmbiguity.
GaugeFunction gauge_function(const GridField& psi1, const SpinorParams& p);

struct GaugeTransformed {
  GaugeFunction gauge;
  SpinorFieldOnlyState B;
  FourVector B_dddot;
  /// phi = exp(-i alpha) psi and its first two time derivatives.
  std::array<Spinor, 3> phi;
};
GaugeTransformed gauge_to_B(const SpinorCoupledState& s, const SpinorParams& p);

// ---- initial data -------------------------------------------------------

struct SpinorInitialSpec {
  std::uint64_t seed = 1;
  int kmax = 1;
  /// psi = offset + perturbation; the default is the positive-energy rest
  /// spinor.
  std::array<cplx, 4> psi_offset{1.0, 0.0, -1.0, 0.0};
  double amp_psi = 0.0;
  double amp_A = 0.0, amp_A_dot = 0.0;
  /// Uniform electric field along x^2 (keeps iF1 + F2 away from zero).
  double electric_field = 0.5;
};

struct SpinorInitialData {
  SpinorParams params;  // with `background` filled in
  SpinorCoupledState coupled;
  GaugeTransformed transformed;
};

SpinorInitialData make_spinor_initial_data(const SpinorInitialSpec& spec,
                                           const Lattice& lattice,
                                           SpinorParams params);

}  // namespace fieldelim
