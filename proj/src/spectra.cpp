#include "fieldelim/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fieldelim/errors.hpp"

namespace fieldelim {

namespace {

/// Half of the wave-vector cube, k != 0, one of each +-k pair.
std::vector<std::array<int, 3>> half_modes(int kmax) {
  if (kmax < 1) {
    throw Error(ErrorKind::PreconditionViolated, "kmax must be at least 1",
                {{"kmax", kmax}});
  }
  std::vector<std::array<int, 3>> out;
  for (int a = -kmax; a <= kmax; ++a) {
    for (int b = -kmax; b <= kmax; ++b) {
      for (int c = -kmax; c <= kmax; ++c) {
        const bool positive =
            a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0);
        if (positive) out.push_back({a, b, c});
      }
    }
  }
  return out;
}

double phase(const Lattice& lat, const std::array<int, 3>& k,
             const std::array<double, 3>& x) {
  double p = 0.0;
  for (int a = 0; a < 3; ++a) {
    p += 2.0 * std::numbers::pi * k[a] * x[a] / lat.length(a + 1);
  }
  return p;
}

}  // namespace

double SpectrumSampler::uniform() {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
}

GridField SpectrumSampler::real_field(const Lattice& lattice, double amplitude,
                                      int kmax) {
  const auto modes = half_modes(kmax);
  std::vector<double> a(modes.size()), b(modes.size());
  double l1 = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    a[m] = uniform();
    b[m] = uniform();
    l1 += std::abs(a[m]) + std::abs(b[m]);
  }
  const double scale = l1 > 0.0 ? amplitude / l1 : 0.0;
  std::vector<cplx> v(lattice.size());
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto x = lattice.position(s);
    double f = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double p = phase(lattice, modes[m], x);
      f += a[m] * std::cos(p) + b[m] * std::sin(p);
    }
    v[s] = scale * f;
  }
  return GridField(lattice, std::move(v), true);
}

GridField SpectrumSampler::complex_field(const Lattice& lattice,
                                         double amplitude, int kmax) {
  GridField re = real_field(lattice, 0.5 * amplitude, kmax);
  GridField im = real_field(lattice, 0.5 * amplitude, kmax);
  return re + kI * im;
}

std::array<GridField, 3> SpectrumSampler::transverse_field(
    const Lattice& lattice, double amplitude, int kmax) {
  const auto modes = half_modes(kmax);
  // coefficient vectors for cos and sin parts, projected off k
  std::vector<std::array<double, 3>> a(modes.size()), b(modes.size());
  std::array<double, 3> l1{0.0, 0.0, 0.0};
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::array<double, 3> kv{};
    double k2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      kv[c] = modes[m][c] / lattice.length(c + 1);
      k2 += kv[c] * kv[c];
    }
    for (auto* coef : {&a[m], &b[m]}) {
      for (int c = 0; c < 3; ++c) (*coef)[c] = uniform();
      double dot = 0.0;
      for (int c = 0; c < 3; ++c) dot += (*coef)[c] * kv[c];
      for (int c = 0; c < 3; ++c) (*coef)[c] -= dot * kv[c] / k2;
      for (int c = 0; c < 3; ++c) l1[c] += std::abs((*coef)[c]);
    }
  }
  std::array<GridField, 3> out{GridField(lattice), GridField(lattice),
                               GridField(lattice)};
  for (std::size_t s = 0; s < lattice.size(); ++s) {
    const auto x = lattice.position(s);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double p = phase(lattice, modes[m], x);
      const double cp = std::cos(p), sp = std::sin(p);
      for (int c = 0; c < 3; ++c) {
        out[c][s] += a[m][c] * cp + b[m][c] * sp;
      }
    }
  }
  // one factor for all components, or the projection is undone
  const double top = std::max({l1[0], l1[1], l1[2]});
  for (int c = 0; c < 3; ++c) out[c] *= top > 0.0 ? amplitude / top : 0.0;
  return out;
}

}  // namespace fieldelim
