#include "fieldelim/fock.hpp"

#include <algorithm>
#include <cmath>

#include "fieldelim/errors.hpp"

namespace fieldelim {

namespace {

using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

Eigen::Map<const Vec> view(const FockState& s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

FockState to_state(const Vec& v) { return FockState(v.begin(), v.end()); }

void check_size(const FockSpace& fs, const FockState& s) {
  if (s.size() != fs.dimension()) {
    throw Error(ErrorKind::PreconditionViolated, "state does not match Fock space",
                {{"dimension", fs.dimension()}, {"size", s.size()}});
  }
}

void check_mode(const FockSpace& fs, int i) {
  if (i < 0 || i >= fs.modes()) {
    throw Error(ErrorKind::PreconditionViolated, "mode index out of range",
                {{"mode", i}, {"modes", fs.modes()}});
  }
}

void compositions(int total, int k, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    cur.push_back(first);
    compositions(total - first, k, cur, out);
    cur.pop_back();
  }
}

double squared_norm(std::span<const cplx> xi) {
  double r2 = 0.0;
  for (const auto& x : xi) r2 += std::norm(x);
  return r2;
}

}  // namespace

// ---- mode systems ---------------------------------------------------------

void ModeSystem::validate() const {
  if (k < 1) {
    throw Error(ErrorKind::PreconditionViolated, "mode system needs k >= 1", {{"k", k}});
  }
  if (static_cast<int>(F.size()) != k) {
    throw Error(ErrorKind::PreconditionViolated, "one polynomial per mode required",
                {{"k", k}, {"polynomials", F.size()}});
  }
  for (int i = 0; i < k; ++i) {
    for (const auto& m : F[i]) {
      if (static_cast<int>(m.exponents.size()) != k ||
          std::any_of(m.exponents.begin(), m.exponents.end(),
                      [](int e) { return e < 0; })) {
        throw Error(ErrorKind::PreconditionViolated,
                    "monomial needs k non-negative exponents", {{"mode", i}});
      }
      if (!std::isfinite(m.coeff.real()) || !std::isfinite(m.coeff.imag())) {
        throw Error(ErrorKind::PreconditionViolated, "non-finite coefficient",
                    {{"mode", i}});
      }
    }
  }
}

std::vector<std::vector<Monomial>> ModeSystem::expanded() const {
  auto out = F;
  if (!stencil) return out;
  for (int i = 0; i < k; ++i) {
    for (const auto& [offset, w] : stencil->taps) {
      std::vector<int> e(k, 0);
      e[((i + offset) % k + k) % k] = 1;
      out[i].push_back({w, e});
    }
  }
  return out;
}

int ModeSystem::degree() const {
  int d = 0;
  for (const auto& poly : expanded()) {
    for (const auto& m : poly) {
      int deg = 0;
      for (int e : m.exponents) deg += e;
      d = std::max(d, deg);
    }
  }
  return d;
}

std::vector<cplx> ModeSystem::evaluate(std::span<const cplx> xi) const {
  std::vector<cplx> out(k, 0.0);
  const auto polys = expanded();
  for (int i = 0; i < k; ++i) {
    for (const auto& m : polys[i]) {
      cplx term = m.coeff;
      for (int j = 0; j < k; ++j) {
        for (int p = 0; p < m.exponents[j]; ++p) term *= xi[j];
      }
      out[i] += term;
    }
  }
  return out;
}

// ---- Fock space -------------------------------------------------------------

FockSpace::FockSpace(int k, int N) : k_(k), N_(N) {
  if (k < 1 || N < 0) {
    throw Error(ErrorKind::PreconditionViolated, "Fock space needs k >= 1, N >= 0",
                {{"k", k}, {"N", N}});
  }
  std::vector<int> cur;
  for (int m = 0; m <= N; ++m) compositions(m, k, cur, basis_);
  for (std::size_t idx = 0; idx < basis_.size(); ++idx) lookup_[basis_[idx]] = idx;
}

std::optional<std::size_t> FockSpace::index_of(std::span<const int> n) const {
  const auto it = lookup_.find(std::vector<int>(n.begin(), n.end()));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

FockState apply_annihilate(const FockSpace& fs, int i, const FockState& s) {
  check_size(fs, s);
  check_mode(fs, i);
  FockState out(s.size(), 0.0);
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    auto n = fs.occupation(idx);
    if (n[i] == 0) continue;
    const double f = std::sqrt(static_cast<double>(n[i]));
    --n[i];
    out[*fs.index_of(n)] += f * s[idx];
  }
  return out;
}

FockState apply_create(const FockSpace& fs, int i, const FockState& s) {
  check_size(fs, s);
  check_mode(fs, i);
  FockState out(s.size(), 0.0);
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    auto n = fs.occupation(idx);
    const double f = std::sqrt(static_cast<double>(n[i] + 1));
    ++n[i];
    if (const auto t = fs.index_of(n)) out[*t] += f * s[idx];
  }
  return out;
}

double fock_norm(const FockState& s) { return view(s).norm(); }

// ---- coherent states -------------------------------------------------------

double coherent_tail(double r2, int N) {
  if (r2 == 0.0) return 0.0;
  // sum_{m > N} e^{-r2} r2^m / m!, summed upward from the first term
  double term = std::exp(-r2 + (N + 1) * std::log(r2) - std::lgamma(N + 2.0));
  double sum = 0.0;
  for (int m = N + 1; m < N + 2000 && term > 1e-300; ++m) {
    sum += term;
    term *= r2 / (m + 1);
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

int required_cutoff(double r2, double tail_tol) {
  int N = 0;
  while (coherent_tail(r2, N) > tail_tol) ++N;
  return N;
}

FockState coherent_state(const FockSpace& fs, std::span<const cplx> xi,
                         double tail_tol) {
  if (static_cast<int>(xi.size()) != fs.modes()) {
    throw Error(ErrorKind::PreconditionViolated, "one amplitude per mode required",
                {{"modes", fs.modes()}, {"given", xi.size()}});
  }
  const double r2 = squared_norm(xi);
  const double tail = coherent_tail(r2, fs.cutoff());
  if (tail > tail_tol) {
    throw Error(ErrorKind::TruncationTooSevere,
                "coherent state has too much weight above the cutoff",
                {{"tail", tail},
                 {"tail_tol", tail_tol},
                 {"N", fs.cutoff()},
                 {"required_N", required_cutoff(r2, tail_tol)}});
  }
  const double pre = std::exp(-0.5 * r2);
  FockState s(fs.dimension());
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    const auto& n = fs.occupation(idx);
    cplx a = pre;
    for (int i = 0; i < fs.modes(); ++i) {
      for (int p = 1; p <= n[i]; ++p) a *= xi[i] / std::sqrt(static_cast<double>(p));
    }
    s[idx] = a;
  }
  return s;
}

double eigenproperty_error(const FockSpace& fs, const FockState& s, int i, cplx xi_i) {
  const FockState as = apply_annihilate(fs, i, s);
  return (view(as) - xi_i * view(s)).norm();
}

double eigenproperty_bound(std::span<const cplx> xi, int i, int N) {
  const double r2 = squared_norm(xi);
  return std::abs(xi[i]) *
         std::exp(-0.5 * r2 + 0.5 * (N * std::log(r2) - std::lgamma(N + 1.0)));
}

double commutator_defect(const FockSpace& fs, int i, int j) {
  double worst = 0.0;
  for (std::size_t idx = 0; idx < fs.dimension(); ++idx) {
    const auto& n = fs.occupation(idx);
    int total = 0;
    for (int v : n) total += v;
    if (total > fs.cutoff() - 1) continue;
    FockState e(fs.dimension(), 0.0);
    e[idx] = 1.0;
    const FockState ac = apply_annihilate(fs, i, apply_create(fs, j, e));
    const FockState ca = apply_create(fs, j, apply_annihilate(fs, i, e));
    Vec d = view(ac) - view(ca);
    if (i == j) d -= view(e);
    worst = std::max(worst, d.norm());
  }
  return worst;
}

// ---- Carleman operator -----------------------------------------------------

CarlemanOperator carleman_hamiltonian(const ModeSystem& ms, const FockSpace& fs) {
  ms.validate();
  if (ms.k != fs.modes()) {
    throw Error(ErrorKind::PreconditionViolated, "mode count differs from Fock space",
                {{"system", ms.k}, {"space", fs.modes()}});
  }
  const int d = ms.degree();
  if (d + 1 > fs.cutoff()) {
    throw Error(ErrorKind::DegreeVsCutoff, "polynomial degree + 1 exceeds the cutoff",
                {{"degree", d}, {"N", fs.cutoff()}});
  }
  const FockSpace shell(fs.modes(), fs.cutoff() + 1);
  const auto polys = ms.expanded();
  std::vector<Eigen::Triplet<cplx>> inside, outside;
  for (std::size_t col = 0; col < fs.dimension(); ++col) {
    const auto& n = fs.occupation(col);
    for (int i = 0; i < ms.k; ++i) {
      for (const auto& mono : polys[i]) {
        std::vector<int> m = n;
        cplx amp = mono.coeff;
        bool ok = true;
        for (int j = 0; j < ms.k && ok; ++j) {
          for (int p = 0; p < mono.exponents[j]; ++p) {
            if (m[j] == 0) {
              ok = false;
              break;
            }
            amp *= std::sqrt(static_cast<double>(m[j]));
            --m[j];
          }
        }
        if (!ok || amp == 0.0) continue;
        amp *= std::sqrt(static_cast<double>(m[i] + 1));
        ++m[i];
        if (const auto row = fs.index_of(m)) {
          inside.emplace_back(*row, col, amp);
        } else {
          outside.emplace_back(*shell.index_of(m), col, amp);
        }
      }
    }
  }
  CarlemanOperator op;
  const auto dim = static_cast<Eigen::Index>(fs.dimension());
  op.M.resize(dim, dim);
  op.M.setFromTriplets(inside.begin(), inside.end());
  op.leak.resize(static_cast<Eigen::Index>(shell.dimension()), dim);
  op.leak.setFromTriplets(outside.begin(), outside.end());
  return op;
}

double operator_norm_estimate(const SparseOperator& M, int iterations) {
  if (M.nonZeros() == 0) return 0.0;
  Vec v = Vec::Ones(M.cols()).normalized();
  double sigma2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec w = M.adjoint() * (M * v);
    sigma2 = w.norm();
    if (sigma2 == 0.0) return 0.0;
    v = w / sigma2;
  }
  return std::sqrt(sigma2);
}

FockEvolution evolve_fock(FockState s, const CarlemanOperator& op, double dt,
                          std::size_t steps, const FockOptions& opts,
                          const FockHook& hook) {
  if (static_cast<Eigen::Index>(s.size()) != op.M.cols()) {
    throw Error(ErrorKind::PreconditionViolated, "state does not match operator",
                {{"size", s.size()}, {"dimension", op.M.cols()}});
  }
  if (opts.cadence == 0) {
    throw Error(ErrorKind::PreconditionViolated, "cadence must be positive");
  }
  const double mnorm = operator_norm_estimate(op.M);
  if (dt * mnorm > opts.stability_limit) {
    throw Error(ErrorKind::Instability, "time step outside the RK4 stability region",
                {{"dt", dt}, {"norm_estimate", mnorm}, {"limit", opts.stability_limit}});
  }
  EvolutionProblem p{std::move(s),
                     [&op](const State& x) { return to_state(op.M * view(x)); },
                     {}};
  FockEvolution out;
  const double norm0 = fock_norm(p.state);
  auto record = [&](std::size_t step) {
    const double t = step * dt;
    out.diagnostics.push_back(
        {step, t, fock_norm(p.state), (op.leak * view(p.state)).norm()});
    if (hook) hook(step, t, p.state);
  };
  record(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    p.state = rk4_step(p, dt);
    const double norm = fock_norm(p.state);
    if (!(norm <= opts.max_norm_growth * std::max(norm0, 1e-300))) {
      throw Error(ErrorKind::Instability, "Fock state norm grew beyond bound",
                  {{"step", n},
                   {"t", n * dt},
                   {"norm", norm},
                   {"initial_norm", norm0},
                   {"max_norm_growth", opts.max_norm_growth}});
    }
    if (n % opts.cadence == 0 || n == steps) record(n);
  }
  out.state = std::move(p.state);
  return out;
}

std::vector<cplx> readout(const FockSpace& fs, const FockState& s, double eps_vac) {
  check_size(fs, s);
  const cplx vac = s[fs.vacuum()];
  if (!(std::abs(vac) >= eps_vac)) {
    throw Error(ErrorKind::VacuumDepleted, "vacuum amplitude below guard",
                {{"abs", std::abs(vac)}, {"eps_vac", eps_vac}});
  }
  std::vector<cplx> xi(fs.modes());
  if (fs.cutoff() == 0) return xi;
  for (int i = 0; i < fs.modes(); ++i) {
    std::vector<int> e(fs.modes(), 0);
    e[i] = 1;
    xi[i] = s[*fs.index_of(e)] / vac;
  }
  return xi;
}

Superposition weak_superposition(const FockSpace& fs, std::span<const cplx> xi,
                                 std::span<const cplx> psi, cplx a, cplx b,
                                 double tail_tol) {
  if (xi.size() != psi.size()) {
    throw Error(ErrorKind::PreconditionViolated, "amplitude sets differ in size");
  }
  std::vector<cplx> mix(xi.size()), zero(xi.size(), 0.0);
  for (std::size_t i = 0; i < xi.size(); ++i) mix[i] = a * xi[i] + b * psi[i];
  Superposition out;
  out.embedded = coherent_state(fs, mix, tail_tol);
  const FockState ex = coherent_state(fs, xi, tail_tol);
  const FockState ep = coherent_state(fs, psi, tail_tol);
  const FockState e0 = coherent_state(fs, zero, tail_tol);
  out.linear_combo = to_state(a * view(ex) + b * view(ep) - (a + b - 1.0) * view(e0));
  out.deviation = (view(out.embedded) - view(out.linear_combo)).norm();
  return out;
}

}  // namespace fieldelim
