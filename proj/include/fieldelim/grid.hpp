#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fieldelim {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// Metric diag(+1,-1,-1,-1). Raising a spatial index flips its sign, the
/// time index is unchanged: X^0 = X_0, X^i = -X_i. Every index gymnastic in
/// the physics modules goes through `metric::g`.
namespace metric {
constexpr double g(int mu) { return mu == 0 ? 1.0 : -1.0; }

/// Contract two four-vectors given with upper indices: X^mu Y_mu.
template <class T>
T dot(const std::array<T, 4>& x, const std::array<T, 4>& y) {
  return x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
}
}  // namespace metric

/// Periodic 3D lattice. Axis indices are 1, 2, 3 in the public API (matching
/// x^1, x^2, x^3); storage is x-fastest.
class Lattice {
 public:
  Lattice(int n1, int n2, int n3, double h1, double h2, double h3);

  /// n^3 points covering [0, length)^3.
  static Lattice cube(int n, double length);

  int n(int axis) const { return n_[axis - 1]; }
  double h(int axis) const { return h_[axis - 1]; }
  double length(int axis) const { return n_[axis - 1] * h_[axis - 1]; }
  const std::array<int, 3>& dims() const { return n_; }
  const std::array<double, 3>& spacings() const { return h_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }
  double cell_volume() const { return h_[0] * h_[1] * h_[2]; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> coords(std::size_t idx) const;
  /// Physical position of site `idx`: (i h1, j h2, k h3).
  std::array<double, 3> position(std::size_t idx) const;

  bool operator==(const Lattice& other) const = default;

 private:
  std::array<int, 3> n_;
  std::array<double, 3> h_;
};

/// Complex values on every lattice site. A field flagged real keeps that flag
/// only through operations that cannot create an imaginary part.
class GridField {
 public:
  explicit GridField(const Lattice& lattice, std::string label = {});
  GridField(const Lattice& lattice, std::vector<cplx> values, bool real,
            std::string label = {});

  static GridField constant(const Lattice& lattice, cplx value);
  static GridField from_function(
      const Lattice& lattice,
      const std::function<cplx(double, double, double)>& fn);

  const Lattice& lattice() const { return lattice_; }
  std::size_t size() const { return values_.size(); }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  const std::string& label() const { return label_; }
  GridField& with_label(std::string label) {
    label_ = std::move(label);
    return *this;
  }

  bool is_real() const { return real_; }
  /// Drops imaginary parts and flags the field real.
  GridField& make_real();
  /// True iff every imaginary part is exactly zero.
  bool imaginary_is_zero() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(const GridField& o);
  GridField& operator/=(const GridField& o);
  GridField& operator+=(cplx s);
  GridField& operator*=(cplx s);
  GridField& operator*=(double s);

 private:
  void require_same(const GridField& o) const;

  Lattice lattice_;
  std::vector<cplx> values_;
  bool real_ = true;
  std::string label_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(GridField a, const GridField& b);
GridField operator/(GridField a, const GridField& b);
GridField operator-(GridField a);
GridField operator*(cplx s, GridField a);
GridField operator*(GridField a, cplx s);
GridField operator*(double s, GridField a);
GridField operator*(GridField a, double s);
GridField operator+(GridField a, cplx s);
GridField operator+(cplx s, GridField a);
GridField operator-(GridField a, cplx s);
GridField operator-(cplx s, GridField a);
GridField operator/(cplx s, const GridField& a);

GridField conj(GridField f);
GridField real_part(const GridField& f);
GridField imag_part(const GridField& f);
/// |f|^2 as a real field.
GridField abs2(const GridField& f);
/// Pointwise f(z); the result is flagged complex.
GridField map(const GridField& f, const std::function<cplx(cplx)>& fn);

cplx mean(const GridField& f);
/// Site of the minimum |f| and that value.
struct SiteValue {
  std::size_t index;
  cplx value;
};
SiteValue min_abs(const GridField& f);
/// Throws NonFinite naming `where` if any value is NaN/Inf.
void require_finite(const GridField& f, const std::string& where);

/// Second-order central difference along `axis` (1, 2 or 3).
GridField partial(const GridField& f, int axis);
/// Compact 7-point Laplacian.
GridField laplacian(const GridField& f);
/// sum_i partial(partial(f, i), i): the wide (2h) stencil, the Laplacian that
/// commutes exactly with `partial` compositions.
GridField div_grad(const GridField& f);
/// sum_i partial(v[i], i).
GridField divergence(const std::array<GridField, 3>& v);

/// Eigenvalue of -laplacian for the plane wave with integer wave numbers m.
double compact_symbol(const Lattice& lattice, const std::array<int, 3>& m);
/// Eigenvalue of -div_grad for the same plane wave.
double wide_symbol(const Lattice& lattice, const std::array<int, 3>& m);

struct SolverOptions {
  double tolerance = 1e-10;
  /// 0 means the default cap 10 * sites.
  std::size_t max_iterations = 0;
};

struct SolverStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Operator u -> -(compact_weight * laplacian + wide_weight * div_grad) u + V u
/// with V real and non-negative. Must be positive semi-definite.
struct EllipticOperator {
  double compact_weight = 1.0;
  double wide_weight = 0.0;
  GridField potential;

  GridField apply(const GridField& u) const;
};

/// Preconditioned conjugate gradients with the operator's Fourier symbol
/// (potential replaced by its mean) as preconditioner. With V == 0 the
/// zero-mean solution is returned, and a rhs with non-zero mean is rejected
/// with NullSpace.
GridField solve_elliptic(const EllipticOperator& op, const GridField& rhs,
                         const SolverOptions& options = {},
                         SolverStats* stats = nullptr);

/// Solves (-laplacian + V) u = rhs.
GridField solve_helmholtz(const GridField& V, const GridField& rhs,
                          const SolverOptions& options = {},
                          SolverStats* stats = nullptr);

struct Norms {
  double l2;
  double linf;
};
/// l2 = sqrt(h1 h2 h3 sum |f|^2).
Norms norms(const GridField& f);
/// ||f - g||_2 / max(||g||_2, 1e-300); throws LatticeMismatch.
double rel_diff(const GridField& f, const GridField& g);
/// Same over a group of components taken as one vector.
double rel_diff(std::span<const GridField> f, std::span<const GridField> g);
double l2_norm(std::span<const GridField> f);

}  // namespace fieldelim
