#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "fieldelim/integrator.hpp"

namespace fieldelim {

/// coeff * prod_j xi_j^exponents[j]
struct Monomial {
  cplx coeff;
  std::vector<int> exponents;
};

/// Linear nearest-neighbour style couplings for modes that are sites of a
/// periodic chain: F_i += sum over taps of weight * xi_{(i + offset) mod k}.
struct StencilCoupling {
  std::vector<std::pair<int, cplx>> taps;
};

struct ModeSystem {
  int k = 1;
  std::vector<std::vector<Monomial>> F;  // F[i] is the polynomial F_i
  std::optional<StencilCoupling> stencil;

  void validate() const;
  int degree() const;
  /// F with the stencil folded in as linear monomials.
  std::vector<std::vector<Monomial>> expanded() const;
  std::vector<cplx> evaluate(std::span<const cplx> xi) const;
};

/// Occupation vectors n with |n| <= N in graded lexicographic order:
/// by total |n|, then lexicographically descending in (n_1, ..., n_k).
class FockSpace {
 public:
  FockSpace(int k, int N);

  int modes() const { return k_; }
  int cutoff() const { return N_; }
  std::size_t dimension() const { return basis_.size(); }
  const std::vector<int>& occupation(std::size_t idx) const { return basis_[idx]; }
  std::optional<std::size_t> index_of(std::span<const int> n) const;
  std::size_t vacuum() const { return 0; }

 private:
  int k_, N_;
  std::vector<std::vector<int>> basis_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

using FockState = std::vector<cplx>;
using SparseOperator = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

FockState apply_annihilate(const FockSpace& fs, int i, const FockState& s);
/// Components pushed above the cutoff are dropped.
FockState apply_create(const FockSpace& fs, int i, const FockState& s);

/// Probability mass of a coherent state with sum |xi|^2 = r2 above |n| = N.
double coherent_tail(double r2, int N);
/// Smallest N whose tail is at most tail_tol.
int required_cutoff(double r2, double tail_tol);

/// Truncated coherent state e^{-|xi|^2/2} prod xi_i^{n_i}/sqrt(n_i!).
/// Throws TruncationTooSevere (detail carries the required N).
FockState coherent_state(const FockSpace& fs, std::span<const cplx> xi,
                         double tail_tol = 1e-12);

/// M = sum_i a_i^dagger F_i(a). `leak` maps the same columns onto the
/// |n| = N + 1 shell and collects every dropped contribution.
struct CarlemanOperator {
  SparseOperator M;
  SparseOperator leak;
};

/// Throws DegreeVsCutoff unless degree + 1 <= N.
CarlemanOperator carleman_hamiltonian(const ModeSystem& ms, const FockSpace& fs);

/// Largest singular value by power iteration on M^dagger M.
double operator_norm_estimate(const SparseOperator& M, int iterations = 50);

struct FockOptions {
  /// abort when |s| exceeds this multiple of the initial norm
  double max_norm_growth = 1e6;
  /// dt * |M| must stay below this (RK4 stability interval is about 2.8)
  double stability_limit = 2.5;
  std::size_t cadence = 1;
};

struct FockDiagnostic {
  std::size_t step;
  double t;
  double norm;
  double leak;  // |dropped part of M s|
};

struct FockEvolution {
  FockState state;
  std::vector<FockDiagnostic> diagnostics;
};

using FockHook = std::function<void(std::size_t step, double t, const FockState&)>;

/// RK4 for ds/dt = M s. Throws Instability (step too large or runaway norm).
FockEvolution evolve_fock(FockState s, const CarlemanOperator& op, double dt,
                          std::size_t steps, const FockOptions& opts = {},
                          const FockHook& hook = {});

/// xi_i = <e_i|s> / <0|s>. Throws VacuumDepleted.
std::vector<cplx> readout(const FockSpace& fs, const FockState& s,
                          double eps_vac = 1e-12);

/// |(a_i - xi_i) s|
double eigenproperty_error(const FockSpace& fs, const FockState& s, int i, cplx xi_i);
/// |xi_i| e^{-|xi|^2/2} |xi|^N / sqrt(N!): the defect left by the missing
/// |n| = N + 1 shell.
double eigenproperty_bound(std::span<const cplx> xi, int i, int N);

/// max over basis states with |n| <= N-1 of |([a_i, a_j^dagger] - delta_ij)|n>|
double commutator_defect(const FockSpace& fs, int i, int j);

struct Superposition {
  FockState embedded;
  FockState linear_combo;
  double deviation;
};

Superposition weak_superposition(const FockSpace& fs, std::span<const cplx> xi,
                                 std::span<const cplx> psi, cplx a, cplx b,
                                 double tail_tol = 1e-12);

double fock_norm(const FockState& s);

}  // namespace fieldelim
