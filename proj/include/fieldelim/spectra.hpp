#pragma once

#include <cstdint>
#include <random>

#include "fieldelim/grid.hpp"

namespace fieldelim {

/// Random smooth fields built from the continuum Fourier modes with
/// |k_i| <= kmax (in units of 2 pi / L_i). Draws depend only on the seed and
/// kmax, never on the lattice, so the same sampler sequence gives the same
/// continuum function on every resolution.
class SpectrumSampler {
 public:
  explicit SpectrumSampler(std::uint64_t seed) : rng_(seed) {}

  /// Real field with sup-norm at most `amplitude` (coefficients are
  /// normalised by their l1 sum). Zero amplitude still consumes draws.
  GridField real_field(const Lattice& lattice, double amplitude, int kmax = 1);
  /// Independent real and imaginary parts, each bounded by amplitude / 2.
  GridField complex_field(const Lattice& lattice, double amplitude,
                          int kmax = 1);
  /// Divergence-free real vector field: each mode's coefficient vector is
  /// projected orthogonal to its wave vector, then all components share one
  /// scale so that each has sup-norm at most `amplitude`.
  std::array<GridField, 3> transverse_field(const Lattice& lattice,
                                            double amplitude, int kmax = 1);

 private:
  double uniform();
  std::mt19937_64 rng_;
};

}  // namespace fieldelim
