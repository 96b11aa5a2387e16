#include "fieldelim/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fieldelim/errors.hpp"

namespace fieldelim {

// ---------------------------------------------------------------- Lattice

Lattice::Lattice(int n1, int n2, int n3, double h1, double h2, double h3)
    : n_{n1, n2, n3}, h_{h1, h2, h3} {
  for (int a = 0; a < 3; ++a) {
    if (n_[a] < 4) {
      throw Error(ErrorKind::PreconditionViolated,
                  "lattice needs at least 4 points per axis",
                  {{"axis", a + 1}, {"n", n_[a]}});
    }
    if (!(h_[a] > 0.0) || !std::isfinite(h_[a])) {
      throw Error(ErrorKind::PreconditionViolated,
                  "lattice spacing must be positive and finite",
                  {{"axis", a + 1}, {"h", h_[a]}});
    }
  }
}

Lattice Lattice::cube(int n, double length) {
  const double h = length / n;
  return Lattice(n, n, n, h, h, h);
}

std::array<int, 3> Lattice::coords(std::size_t idx) const {
  const int i = static_cast<int>(idx % n_[0]);
  idx /= n_[0];
  const int j = static_cast<int>(idx % n_[1]);
  const int k = static_cast<int>(idx / n_[1]);
  return {i, j, k};
}

std::array<double, 3> Lattice::position(std::size_t idx) const {
  const auto c = coords(idx);
  return {c[0] * h_[0], c[1] * h_[1], c[2] * h_[2]};
}

// -------------------------------------------------------------- GridField

GridField::GridField(const Lattice& lattice, std::string label)
    : lattice_(lattice), values_(lattice.size()), label_(std::move(label)) {}

GridField::GridField(const Lattice& lattice, std::vector<cplx> values,
                     bool real, std::string label)
    : lattice_(lattice),
      values_(std::move(values)),
      real_(real),
      label_(std::move(label)) {
  if (values_.size() != lattice_.size()) {
    throw Error(ErrorKind::LatticeMismatch,
                "value count does not match lattice size",
                {{"values", values_.size()}, {"sites", lattice_.size()}});
  }
  if (real_) make_real();
}

GridField GridField::constant(const Lattice& lattice, cplx value) {
  return GridField(lattice, std::vector<cplx>(lattice.size(), value),
                   value.imag() == 0.0);
}

GridField GridField::from_function(
    const Lattice& lattice,
    const std::function<cplx(double, double, double)>& fn) {
  std::vector<cplx> v(lattice.size());
  bool real = true;
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto x = lattice.position(s);
    v[s] = fn(x[0], x[1], x[2]);
    real = real && v[s].imag() == 0.0;
  }
  return GridField(lattice, std::move(v), real);
}

GridField& GridField::make_real() {
  for (auto& z : values_) z = cplx(z.real(), 0.0);
  real_ = true;
  return *this;
}

bool GridField::imaginary_is_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const cplx& z) { return z.imag() == 0.0; });
}

void GridField::require_same(const GridField& o) const {
  if (!(lattice_ == o.lattice_)) {
    throw Error(ErrorKind::LatticeMismatch,
                "fields live on different lattices");
  }
}

GridField& GridField::operator+=(const GridField& o) {
  require_same(o);
  for (std::size_t s = 0; s < values_.size(); ++s) values_[s] += o.values_[s];
  real_ = real_ && o.real_;
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same(o);
  for (std::size_t s = 0; s < values_.size(); ++s) values_[s] -= o.values_[s];
  real_ = real_ && o.real_;
  return *this;
}

GridField& GridField::operator*=(const GridField& o) {
  require_same(o);
  for (std::size_t s = 0; s < values_.size(); ++s) values_[s] *= o.values_[s];
  real_ = real_ && o.real_;
  return *this;
}

GridField& GridField::operator/=(const GridField& o) {
  require_same(o);
  for (std::size_t s = 0; s < values_.size(); ++s) values_[s] /= o.values_[s];
  real_ = real_ && o.real_;
  return *this;
}

GridField& GridField::operator+=(cplx s) {
  for (auto& z : values_) z += s;
  real_ = real_ && s.imag() == 0.0;
  return *this;
}

GridField& GridField::operator*=(cplx s) {
  for (auto& z : values_) z *= s;
  real_ = real_ && s.imag() == 0.0;
  return *this;
}

GridField& GridField::operator*=(double s) {
  for (auto& z : values_) z *= s;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(GridField a, const GridField& b) { return a *= b; }
GridField operator/(GridField a, const GridField& b) { return a /= b; }
GridField operator-(GridField a) { return a *= -1.0; }
GridField operator*(cplx s, GridField a) { return a *= s; }
GridField operator*(GridField a, cplx s) { return a *= s; }
GridField operator*(double s, GridField a) { return a *= s; }
GridField operator*(GridField a, double s) { return a *= s; }
GridField operator+(GridField a, cplx s) { return a += s; }
GridField operator+(cplx s, GridField a) { return a += s; }
GridField operator-(GridField a, cplx s) { return a += -s; }
GridField operator-(cplx s, GridField a) { return (a *= -1.0) += s; }

GridField operator/(cplx s, const GridField& a) {
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s / a[i];
  return GridField(a.lattice(), std::move(v), a.is_real() && s.imag() == 0.0);
}

GridField conj(GridField f) {
  for (auto& z : f.values()) z = std::conj(z);
  return f;
}

GridField real_part(const GridField& f) {
  GridField out = f;
  return out.make_real();
}

GridField imag_part(const GridField& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = f[s].imag();
  return GridField(f.lattice(), std::move(v), true);
}

GridField abs2(const GridField& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = std::norm(f[s]);
  return GridField(f.lattice(), std::move(v), true);
}

GridField map(const GridField& f, const std::function<cplx(cplx)>& fn) {
  std::vector<cplx> v(f.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = fn(f[s]);
  return GridField(f.lattice(), std::move(v), false);
}

cplx mean(const GridField& f) {
  cplx sum = 0.0;
  for (const auto& z : f.values()) sum += z;
  return sum / static_cast<double>(f.size());
}

SiteValue min_abs(const GridField& f) {
  SiteValue best{0, f[0]};
  for (std::size_t s = 1; s < f.size(); ++s) {
    if (std::abs(f[s]) < std::abs(best.value)) best = {s, f[s]};
  }
  return best;
}

void require_finite(const GridField& f, const std::string& where) {
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (!std::isfinite(f[s].real()) || !std::isfinite(f[s].imag())) {
      const auto c = f.lattice().coords(s);
      throw Error(ErrorKind::NonFinite, "non-finite value in " + where,
                  {{"where", where}, {"site", c}});
    }
  }
}

// -------------------------------------------------------------- stencils

GridField partial(const GridField& f, int axis) {
  const Lattice& lat = f.lattice();
  const int n1 = lat.n(1), n2 = lat.n(2), n3 = lat.n(3);
  const double inv = 0.5 / lat.h(axis);
  std::vector<cplx> out(f.size());
  for (int k = 0; k < n3; ++k) {
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) {
        std::size_t plus, minus;
        switch (axis) {
          case 1:
            plus = lat.index((i + 1) % n1, j, k);
            minus = lat.index((i + n1 - 1) % n1, j, k);
            break;
          case 2:
            plus = lat.index(i, (j + 1) % n2, k);
            minus = lat.index(i, (j + n2 - 1) % n2, k);
            break;
          default:
            plus = lat.index(i, j, (k + 1) % n3);
            minus = lat.index(i, j, (k + n3 - 1) % n3);
            break;
        }
        out[lat.index(i, j, k)] = (f[plus] - f[minus]) * inv;
      }
    }
  }
  return GridField(lat, std::move(out), f.is_real());
}

GridField laplacian(const GridField& f) {
  const Lattice& lat = f.lattice();
  const int n1 = lat.n(1), n2 = lat.n(2), n3 = lat.n(3);
  const double c1 = 1.0 / (lat.h(1) * lat.h(1));
  const double c2 = 1.0 / (lat.h(2) * lat.h(2));
  const double c3 = 1.0 / (lat.h(3) * lat.h(3));
  std::vector<cplx> out(f.size());
  for (int k = 0; k < n3; ++k) {
    const int kp = (k + 1) % n3, km = (k + n3 - 1) % n3;
    for (int j = 0; j < n2; ++j) {
      const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
      for (int i = 0; i < n1; ++i) {
        const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
        const cplx centre = f[lat.index(i, j, k)];
        out[lat.index(i, j, k)] =
            c1 * (f[lat.index(ip, j, k)] + f[lat.index(im, j, k)] - 2.0 * centre) +
            c2 * (f[lat.index(i, jp, k)] + f[lat.index(i, jm, k)] - 2.0 * centre) +
            c3 * (f[lat.index(i, j, kp)] + f[lat.index(i, j, km)] - 2.0 * centre);
      }
    }
  }
  return GridField(f.lattice(), std::move(out), f.is_real());
}

GridField div_grad(const GridField& f) {
  GridField out = partial(partial(f, 1), 1);
  out += partial(partial(f, 2), 2);
  out += partial(partial(f, 3), 3);
  return out;
}

GridField divergence(const std::array<GridField, 3>& v) {
  GridField out = partial(v[0], 1);
  out += partial(v[1], 2);
  out += partial(v[2], 3);
  return out;
}

double compact_symbol(const Lattice& lattice, const std::array<int, 3>& m) {
  double s = 0.0;
  for (int a = 1; a <= 3; ++a) {
    const double theta = 2.0 * std::numbers::pi * m[a - 1] / lattice.n(a);
    const double h = lattice.h(a);
    s += 4.0 * std::pow(std::sin(0.5 * theta), 2) / (h * h);
  }
  return s;
}

double wide_symbol(const Lattice& lattice, const std::array<int, 3>& m) {
  double s = 0.0;
  for (int a = 1; a <= 3; ++a) {
    const double theta = 2.0 * std::numbers::pi * m[a - 1] / lattice.n(a);
    const double h = lattice.h(a);
    s += std::pow(std::sin(theta), 2) / (h * h);
  }
  return s;
}

// ------------------------------------------------------- elliptic solver

GridField EllipticOperator::apply(const GridField& u) const {
  GridField out = u * potential;
  if (compact_weight != 0.0) out -= compact_weight * laplacian(u);
  if (wide_weight != 0.0) out -= wide_weight * div_grad(u);
  return out;
}

namespace {

cplx inner(const GridField& a, const GridField& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(const GridField& a) { return std::sqrt(inner(a, a).real()); }

/// Inverse of the constant-coefficient part of the operator, applied by FFT.
class FourierPreconditioner {
 public:
  FourierPreconditioner(const EllipticOperator& op, double shift)
      : lattice_(op.potential.lattice()), inverse_symbol_(lattice_.size()) {
    const Lattice& lat = lattice_;
    buffer_ = fftw_alloc_complex(lat.size());
    forward_ = fftw_plan_dft_3d(lat.n(3), lat.n(2), lat.n(1), buffer_,
                                buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_3d(lat.n(3), lat.n(2), lat.n(1), buffer_,
                                 buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t s = 0; s < lat.size(); ++s) {
      const auto m = lat.coords(s);
      const double sym = op.compact_weight * compact_symbol(lat, m) +
                         op.wide_weight * wide_symbol(lat, m) + shift;
      inverse_symbol_[s] = sym > 1e-14 * (1.0 + std::abs(shift)) ? 1.0 / sym : 0.0;
    }
  }
  ~FourierPreconditioner() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
  }
  FourierPreconditioner(const FourierPreconditioner&) = delete;
  FourierPreconditioner& operator=(const FourierPreconditioner&) = delete;

  GridField apply(const GridField& r) {
    const std::size_t n = r.size();
    for (std::size_t s = 0; s < n; ++s) {
      buffer_[s][0] = r[s].real();
      buffer_[s][1] = r[s].imag();
    }
    fftw_execute(forward_);
    for (std::size_t s = 0; s < n; ++s) {
      buffer_[s][0] *= inverse_symbol_[s];
      buffer_[s][1] *= inverse_symbol_[s];
    }
    fftw_execute(backward_);
    std::vector<cplx> out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      out[s] = cplx(buffer_[s][0], buffer_[s][1]) * scale;
    }
    return GridField(lattice_, std::move(out), false);
  }

 private:
  Lattice lattice_;
  std::vector<double> inverse_symbol_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace

GridField solve_elliptic(const EllipticOperator& op, const GridField& rhs,
                         const SolverOptions& options, SolverStats* stats) {
  const Lattice& lat = rhs.lattice();
  if (!(op.potential.lattice() == lat)) {
    throw Error(ErrorKind::LatticeMismatch,
                "potential and rhs live on different lattices");
  }
  double v_mean = 0.0;
  bool v_zero = true;
  for (const auto& v : op.potential.values()) {
    if (v.real() < 0.0) {
      throw Error(ErrorKind::PreconditionViolated,
                  "elliptic potential must be non-negative");
    }
    v_mean += v.real();
    v_zero = v_zero && v.real() == 0.0;
  }
  v_mean /= static_cast<double>(lat.size());

  GridField b = rhs;
  const bool result_real = rhs.is_real() && op.potential.is_real();
  if (v_zero) {
    const cplx m = mean(b);
    const double rms = norm2(b) / std::sqrt(static_cast<double>(b.size()));
    if (std::abs(m) > 1e-12 * rms && std::abs(m) > 1e-300) {
      throw Error(ErrorKind::NullSpace,
                  "operator has a constant null space and rhs mean is non-zero",
                  {{"mean_re", m.real()}, {"mean_im", m.imag()}});
    }
    b += -m;
  }

  const double b_norm = norm2(b);
  GridField x(lat);
  if (b_norm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }

  FourierPreconditioner precond(op, v_mean);
  const std::size_t cap =
      options.max_iterations ? options.max_iterations : 10 * lat.size();

  GridField r = b;
  GridField z = precond.apply(r);
  GridField p = z;
  cplx rz = inner(r, z);
  double rel = 1.0;
  std::size_t it = 0;
  while (it < cap) {
    const GridField ap = op.apply(p);
    const cplx alpha = rz / inner(p, ap);
    x += alpha * p;
    r -= alpha * ap;
    ++it;
    rel = norm2(r) / b_norm;
    if (rel <= options.tolerance) break;
    z = precond.apply(r);
    const cplx rz_new = inner(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (v_zero) x += -mean(x);
  if (stats) *stats = {it, rel};
  if (rel > options.tolerance) {
    throw Error(ErrorKind::NonConvergence, "elliptic solve hit iteration cap",
                {{"iterations", it}, {"relative_residual", rel}});
  }
  if (result_real) x.make_real();
  return x;
}

GridField solve_helmholtz(const GridField& V, const GridField& rhs,
                          const SolverOptions& options, SolverStats* stats) {
  return solve_elliptic(EllipticOperator{1.0, 0.0, V}, rhs, options, stats);
}

// ------------------------------------------------------------------ norms

Norms norms(const GridField& f) {
  double sum = 0.0, mx = 0.0;
  for (const auto& z : f.values()) {
    sum += std::norm(z);
    mx = std::max(mx, std::abs(z));
  }
  return {std::sqrt(f.lattice().cell_volume() * sum), mx};
}

double l2_norm(std::span<const GridField> f) {
  double sum = 0.0;
  for (const auto& c : f) sum += std::pow(norms(c).l2, 2);
  return std::sqrt(sum);
}

double rel_diff(std::span<const GridField> f, std::span<const GridField> g) {
  if (f.size() != g.size()) {
    throw Error(ErrorKind::LatticeMismatch, "component counts differ");
  }
  double num = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (!(f[c].lattice() == g[c].lattice())) {
      throw Error(ErrorKind::LatticeMismatch,
                  "rel_diff of fields on different lattices");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f[c].size(); ++i) s += std::norm(f[c][i] - g[c][i]);
    num += f[c].lattice().cell_volume() * s;
  }
  return std::sqrt(num) / std::max(l2_norm(g), 1e-300);
}

double rel_diff(const GridField& f, const GridField& g) {
  return rel_diff(std::span<const GridField>(&f, 1),
                  std::span<const GridField>(&g, 1));
}

}  // namespace fieldelim
