#pragma once

#include <array>
#include <cstdint>

#include "fieldelim/grid.hpp"
#include "fieldelim/integrator.hpp"

namespace fieldelim {

/// Scalar electrodynamics in unitary gauge. All four-vectors are stored with
/// upper indices, B = (B^0, B^1, B^2, B^3), and are real.
struct ScalarParams {
  double e = 1.0;
  double m = 1.0;
  double eps_b0 = 1e-6;
  double eps_phi = 1e-6;
  /// Uniform neutralising charge q in the Gauss law
  /// (-lap + 2 e^2 phi^2) B^0 = div(dB/dt) + q. Needed on a periodic box,
  /// where the charge of a state with phi != 0 cannot be zero.
  double background = 0.0;
  /// Test fixture: flips the sign of the last term of the spatial closure.
  bool mutate_spatial_sign = false;
  SolverOptions solver;

  void validate() const;
};

struct ScalarCoupledState {
  GridField phi, phi_dot;
  std::array<GridField, 3> B_sp, B_sp_dot;
  GridField B0, B0_dot;
};

struct ScalarFieldOnlyState {
  std::array<GridField, 4> B;
  std::array<GridField, 4> B_dot;
};

// ---- field-only closure -------------------------------------------------

/// Phi = phi^2 from the Gauss law. Throws SingularB0.
GridField phi_from_gauss(const ScalarFieldOnlyState& s, const ScalarParams& p);

/// Spatial second derivatives, returned with upper index (d^2/dt^2 B^i).
std::array<GridField, 3> b_ddot_spatial(const ScalarFieldOnlyState& s,
                                        const ScalarParams& p);

/// dPhi/dt from current conservation. Throws SingularB0.
GridField phi_dot_from_current(const ScalarFieldOnlyState& s,
                               const GridField& Phi, const ScalarParams& p);

/// d^2 Phi/dt^2 from the matter wave equation written for Phi.
/// Throws SingularPhi when Phi < eps_phi anywhere.
GridField phi_ddot_from_wave(const ScalarFieldOnlyState& s,
                             const GridField& Phi, const GridField& Phi_dot,
                             const ScalarParams& p);

/// d^2/dt^2 B^0 from the differentiated current law.
GridField b_ddot_temporal(const ScalarFieldOnlyState& s, const ScalarParams& p);

/// Everything the closure derives from (B, dB/dt) in one pass.
struct ScalarClosure {
  GridField Phi, Phi_dot, Phi_ddot;
  std::array<GridField, 4> B_ddot;
};
ScalarClosure scalar_closure(const ScalarFieldOnlyState& s,
                             const ScalarParams& p);

/// Flat layout: B^0..B^3 then dB^0/dt..dB^3/dt.
FieldLayout scalar_field_only_layout(const Lattice& lattice);
State pack(const ScalarFieldOnlyState& s);
ScalarFieldOnlyState unpack_scalar_field_only(const State& x,
                                              const Lattice& lattice);
State scalar_field_only_rhs(const State& x, const Lattice& lattice,
                            const ScalarParams& p);

// ---- coupled oracle -----------------------------------------------------

/// Flat layout: phi, dphi/dt, B^1..B^3, dB^1/dt..dB^3/dt. B^0 and its time
/// derivative are re-solved from the constraint on every evaluation.
FieldLayout scalar_coupled_layout(const Lattice& lattice);
State pack(const ScalarCoupledState& s);

/// Solves B^0 and dB^0/dt for the evolved part of `x`.
ScalarCoupledState complete_coupled(const State& x, const Lattice& lattice,
                                    const ScalarParams& p);
State scalar_coupled_rhs(const State& x, const Lattice& lattice,
                         const ScalarParams& p);

/// Exact second time derivatives of the oracle at one instant.
struct ScalarOracleDerivatives {
  GridField phi_ddot;
  std::array<GridField, 4> B_ddot;
};
ScalarOracleDerivatives scalar_oracle_derivatives(const ScalarCoupledState& s,
                                                  const ScalarParams& p);

/// Relative residual of the Gauss law for a completed state.
double gauss_residual(const ScalarCoupledState& s, const ScalarParams& p);

ScalarFieldOnlyState to_field_only(const ScalarCoupledState& s);

/// J^mu = B^mu Phi (up to the constant -2 e^2).
std::array<GridField, 4> scalar_current(const std::array<GridField, 4>& B,
                                        const GridField& Phi);
/// d_t J^0 + div J for a supplied time derivative of J^0.
GridField current_divergence(const GridField& J0_dot,
                             const std::array<GridField, 3>& J_sp);

// ---- initial data -------------------------------------------------------

struct ScalarInitialSpec {
  std::uint64_t seed = 1;
  int kmax = 1;
  double phi_offset = 1.0;
  /// Sets the background charge so a uniform state has B^0 = b0_offset.
  double b0_offset = 1.0;
  double amp_phi = 0.0, amp_phi_dot = 0.0, amp_B = 0.0, amp_B_dot = 0.0;
};

struct ScalarInitialData {
  ScalarParams params;  // input params with `background` filled in
  ScalarCoupledState coupled;
  ScalarFieldOnlyState field_only;
};

/// Throws SingularB0 or SingularPhi (with the offending site) when the data
/// violates a guard.
ScalarInitialData make_scalar_initial_data(const ScalarInitialSpec& spec,
                                           const Lattice& lattice,
                                           ScalarParams params);

}  // namespace fieldelim
