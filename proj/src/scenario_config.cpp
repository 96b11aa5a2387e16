#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "fieldelim/errors.hpp"
#include "fieldelim/scenario.hpp"

namespace fieldelim {

namespace {

using nlohmann::json;

// Collects every field-level problem before failing.
class Reader {
 public:
  json problems = json::array();

  void problem(const std::string& field, const std::string& what) {
    problems.push_back({{"field", field}, {"problem", what}});
  }

  void only_keys(const toml::table& t, const std::string& where,
                 std::initializer_list<std::string_view> allowed) {
    const std::set<std::string_view> ok(allowed);
    for (const auto& [key, node] : t) {
      if (!ok.contains(key.str())) {
        problem(join(where, key.str()), "unknown key");
      }
    }
  }

  double number(const toml::table& t, const std::string& where,
                std::string_view key, double fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value<double>(); v && node->is_number()) return *v;
    problem(join(where, key), "must be a number");
    return fallback;
  }

  std::int64_t integer(const toml::table& t, const std::string& where,
                       std::string_view key, std::int64_t fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value_exact<std::int64_t>()) return *v;
    problem(join(where, key), "must be an integer");
    return fallback;
  }

  bool boolean(const toml::table& t, const std::string& where,
               std::string_view key, bool fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value_exact<bool>()) return *v;
    problem(join(where, key), "must be true or false");
    return fallback;
  }

  std::string string(const toml::table& t, const std::string& where,
                     std::string_view key, std::string fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value_exact<std::string>()) return *v;
    problem(join(where, key), "must be a string");
    return fallback;
  }

  /// A scalar or a three-element array.
  template <class T>
  std::array<T, 3> triple(const toml::table& t, const std::string& where,
                          std::string_view key, T fallback) {
    const auto* node = t.get(key);
    if (!node) return {fallback, fallback, fallback};
    const auto one = [&](const toml::node& x) -> std::optional<T> {
      if constexpr (std::is_integral_v<T>) {
        if (auto v = x.value_exact<std::int64_t>()) return static_cast<T>(*v);
      } else if (x.is_number()) {
        return x.value<double>();
      }
      return std::nullopt;
    };
    if (auto v = one(*node)) return {*v, *v, *v};
    if (const auto* arr = node->as_array(); arr && arr->size() == 3) {
      std::array<T, 3> out{};
      bool ok = true;
      for (std::size_t i = 0; i < 3; ++i) {
        auto v = one(*arr->get(i));
        ok = ok && v.has_value();
        if (v) out[i] = *v;
      }
      if (ok) return out;
    }
    problem(join(where, key), "must be a number or an array of three");
    return {fallback, fallback, fallback};
  }

  /// [re, im] or a plain real number.
  std::optional<cplx> complex(const toml::node& node, const std::string& field) {
    if (node.is_number()) return cplx(*node.value<double>(), 0.0);
    if (const auto* arr = node.as_array();
        arr && arr->size() == 2 && arr->get(0)->is_number() &&
        arr->get(1)->is_number()) {
      return cplx(*arr->get(0)->value<double>(), *arr->get(1)->value<double>());
    }
    problem(field, "must be a number or [re, im]");
    return std::nullopt;
  }

  void positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) problem(field, "must be positive");
  }
  void non_negative(double v, const std::string& field) {
    if (!(v >= 0.0) || !std::isfinite(v)) problem(field, "must be non-negative");
  }

  static std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : fmt::format("{}.{}", where, key);
  }
};

const toml::table* section(const toml::table& root, std::string_view name,
                           Reader& r) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  if (const auto* t = node->as_table()) return t;
  r.problem(std::string(name), "must be a table");
  return nullptr;
}

ScalarScenario parse_scalar(const toml::table& t, Reader& r) {
  const std::string w = "scalar";
  r.only_keys(t, w,
              {"mode", "e", "m", "eps_b0", "eps_phi", "kmax", "phi_offset",
               "b0_offset", "amp_phi", "amp_phi_dot", "amp_B", "amp_B_dot",
               "mutate_spatial_sign"});
  ScalarScenario s;
  const auto mode = r.string(t, w, "mode", "field_only");
  if (mode != "field_only" && mode != "coupled") {
    r.problem("scalar.mode", "must be \"field_only\" or \"coupled\"");
  }
  s.coupled = mode == "coupled";
  auto& p = s.params;
  p.e = r.number(t, w, "e", p.e);
  p.m = r.number(t, w, "m", p.m);
  p.eps_b0 = r.number(t, w, "eps_b0", p.eps_b0);
  p.eps_phi = r.number(t, w, "eps_phi", p.eps_phi);
  p.mutate_spatial_sign = r.boolean(t, w, "mutate_spatial_sign", false);
  if (p.e == 0.0 || !std::isfinite(p.e)) r.problem("scalar.e", "must be non-zero");
  r.non_negative(p.m, "scalar.m");
  r.positive(p.eps_b0, "scalar.eps_b0");
  r.positive(p.eps_phi, "scalar.eps_phi");
  auto& in = s.initial;
  in.kmax = static_cast<int>(r.integer(t, w, "kmax", in.kmax));
  if (in.kmax < 1) r.problem("scalar.kmax", "must be at least 1");
  in.phi_offset = r.number(t, w, "phi_offset", in.phi_offset);
  in.b0_offset = r.number(t, w, "b0_offset", in.b0_offset);
  in.amp_phi = r.number(t, w, "amp_phi", 0.0);
  in.amp_phi_dot = r.number(t, w, "amp_phi_dot", 0.0);
  in.amp_B = r.number(t, w, "amp_B", 0.0);
  in.amp_B_dot = r.number(t, w, "amp_B_dot", 0.0);
  for (auto [name, v] : {std::pair{"amp_phi", in.amp_phi},
                         {"amp_phi_dot", in.amp_phi_dot},
                         {"amp_B", in.amp_B},
                         {"amp_B_dot", in.amp_B_dot}}) {
    r.non_negative(v, fmt::format("scalar.{}", name));
  }
  return s;
}

SpinorScenario parse_spinor(const toml::table& t, Reader& r) {
  const std::string w = "spinor";
  r.only_keys(t, w,
              {"mode", "e", "eps_psi", "eps_f", "kmax", "psi_offset", "amp_psi",
               "amp_A", "amp_A_dot", "electric_field"});
  SpinorScenario s;
  const auto mode = r.string(t, w, "mode", "field_only");
  if (mode != "field_only" && mode != "coupled") {
    r.problem("spinor.mode", "must be \"field_only\" or \"coupled\"");
  }
  s.coupled = mode == "coupled";
  auto& p = s.params;
  p.e = r.number(t, w, "e", p.e);
  p.eps_psi = r.number(t, w, "eps_psi", p.eps_psi);
  p.eps_f = r.number(t, w, "eps_f", p.eps_f);
  r.positive(p.e, "spinor.e");
  r.positive(p.eps_psi, "spinor.eps_psi");
  r.positive(p.eps_f, "spinor.eps_f");
  auto& in = s.initial;
  in.kmax = static_cast<int>(r.integer(t, w, "kmax", in.kmax));
  if (in.kmax < 1) r.problem("spinor.kmax", "must be at least 1");
  if (const auto* node = t.get("psi_offset")) {
    const auto* arr = node->as_array();
    if (!arr || arr->size() != 4) {
      r.problem("spinor.psi_offset", "must be an array of four components");
    } else {
      for (std::size_t c = 0; c < 4; ++c) {
        if (auto z = r.complex(*arr->get(c),
                               fmt::format("spinor.psi_offset[{}]", c))) {
          in.psi_offset[c] = *z;
        }
      }
    }
  }
  in.amp_psi = r.number(t, w, "amp_psi", 0.0);
  in.amp_A = r.number(t, w, "amp_A", 0.0);
  in.amp_A_dot = r.number(t, w, "amp_A_dot", 0.0);
  in.electric_field = r.number(t, w, "electric_field", in.electric_field);
  r.non_negative(in.amp_psi, "spinor.amp_psi");
  r.non_negative(in.amp_A, "spinor.amp_A");
  r.non_negative(in.amp_A_dot, "spinor.amp_A_dot");
  return s;
}

FockScenario parse_fock(const toml::table& t, Reader& r) {
  const std::string w = "fock";
  r.only_keys(t, w,
              {"k", "N", "xi0", "terms", "stencil", "tail_tol", "eps_vac",
               "max_norm_growth"});
  FockScenario s;
  const int k = static_cast<int>(r.integer(t, w, "k", 0));
  if (k < 1) r.problem("fock.k", "must be at least 1");
  s.system.k = std::max(k, 1);
  s.system.F.assign(s.system.k, {});
  s.cutoff = static_cast<int>(r.integer(t, w, "N", s.cutoff));
  if (s.cutoff < 1) r.problem("fock.N", "must be at least 1");
  s.tail_tol = r.number(t, w, "tail_tol", s.tail_tol);
  if (!(s.tail_tol > 0.0 && s.tail_tol < 1.0)) {
    r.problem("fock.tail_tol", "must lie in (0, 1)");
  }
  s.eps_vac = r.number(t, w, "eps_vac", s.eps_vac);
  r.positive(s.eps_vac, "fock.eps_vac");
  s.max_norm_growth = r.number(t, w, "max_norm_growth", s.max_norm_growth);
  r.positive(s.max_norm_growth, "fock.max_norm_growth");

  const auto* xi = t.get("xi0") ? t.get("xi0")->as_array() : nullptr;
  if (!xi || static_cast<int>(xi->size()) != s.system.k) {
    r.problem("fock.xi0", "must be an array with one entry per mode");
  } else {
    for (std::size_t i = 0; i < xi->size(); ++i) {
      s.xi0.push_back(
          r.complex(*xi->get(i), fmt::format("fock.xi0[{}]", i)).value_or(0.0));
    }
  }

  const auto* terms = t.get("terms") ? t.get("terms")->as_array() : nullptr;
  if (t.get("terms") && !terms) r.problem("fock.terms", "must be an array of tables");
  if (terms) {
    for (std::size_t n = 0; n < terms->size(); ++n) {
      const std::string where = fmt::format("fock.terms[{}]", n);
      const auto* term = terms->get(n)->as_table();
      if (!term) {
        r.problem(where, "must be a table");
        continue;
      }
      r.only_keys(*term, where, {"mode", "coeff", "exponents"});
      const auto mode = r.integer(*term, where, "mode", -1);
      if (mode < 0 || mode >= s.system.k) {
        r.problem(where + ".mode", "must name a mode in [0, k)");
        continue;
      }
      Monomial m{0.0, {}};
      if (const auto* c = term->get("coeff")) {
        m.coeff = r.complex(*c, where + ".coeff").value_or(0.0);
      } else {
        r.problem(where + ".coeff", "missing");
      }
      const auto* ex = term->get("exponents") ? term->get("exponents")->as_array()
                                              : nullptr;
      if (!ex || static_cast<int>(ex->size()) != s.system.k) {
        r.problem(where + ".exponents", "must list one exponent per mode");
        continue;
      }
      for (std::size_t j = 0; j < ex->size(); ++j) {
        const auto v = ex->get(j)->value_exact<std::int64_t>();
        if (!v || *v < 0) {
          r.problem(fmt::format("{}.exponents[{}]", where, j),
                    "must be a non-negative integer");
        }
        m.exponents.push_back(static_cast<int>(v.value_or(0)));
      }
      s.system.F[mode].push_back(std::move(m));
    }
  }

  // stencil = [[offset, re, im], ...]
  if (const auto* node = t.get("stencil")) {
    const auto* arr = node->as_array();
    if (!arr) r.problem("fock.stencil", "must be an array of [offset, re, im]");
    StencilCoupling sc;
    for (std::size_t n = 0; arr && n < arr->size(); ++n) {
      const auto* tap = arr->get(n)->as_array();
      const auto off = tap && tap->size() == 3
                           ? tap->get(0)->value_exact<std::int64_t>()
                           : std::nullopt;
      if (!off || !tap->get(1)->is_number() || !tap->get(2)->is_number()) {
        r.problem(fmt::format("fock.stencil[{}]", n), "must be [offset, re, im]");
        continue;
      }
      sc.taps.emplace_back(static_cast<int>(*off),
                           cplx(*tap->get(1)->value<double>(),
                                *tap->get(2)->value<double>()));
    }
    s.system.stencil = std::move(sc);
  }
  return s;
}

}  // namespace

Lattice Scenario::lattice() const {
  return Lattice(n[0], n[1], n[2], length[0] / n[0], length[1] / n[1],
                 length[2] / n[2]);
}

Scenario parse_scenario(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw Error(ErrorKind::ConfigInvalid, "config is not valid TOML",
                {{"problems",
                  {{{"field", fmt::format("line {}, column {}", where.line,
                                          where.column)},
                    {"problem", std::string(e.description())}}}}});
  }
  Reader r;
  r.only_keys(root, "",
              {"engine", "seed", "lattice", "integration", "scalar", "spinor",
               "fock"});
  Scenario s;
  const auto engine = r.string(root, "", "engine", "");
  if (engine == "scalar") {
    s.engine = Engine::Scalar;
  } else if (engine == "spinor") {
    s.engine = Engine::Spinor;
  } else if (engine == "fock") {
    s.engine = Engine::Fock;
  } else {
    r.problem("engine", "must be \"scalar\", \"spinor\" or \"fock\"");
  }
  const auto seed = r.integer(root, "", "seed", 1);
  if (seed < 0) r.problem("seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(std::max<std::int64_t>(seed, 0));

  // exactly one engine section, and it must be the selected one
  int sections = 0;
  for (std::string_view name : {"scalar", "spinor", "fock"}) {
    if (!root.get(name)) continue;
    ++sections;
    if (name != engine) {
      r.problem(std::string(name), fmt::format("section does not match engine \"{}\"", engine));
    }
  }
  if (sections == 0 && !engine.empty()) {
    r.problem(engine, "engine section missing");
  }

  const auto* lat = section(root, "lattice", r);
  const bool needs_lattice = s.engine != Engine::Fock;
  if (lat && !needs_lattice) {
    r.problem("lattice", "not used by the fock engine");
  } else if (!lat && needs_lattice && !engine.empty()) {
    r.problem("lattice", "section missing");
  }
  if (lat && needs_lattice) {
    r.only_keys(*lat, "lattice", {"n", "length"});
    s.n = r.triple<int>(*lat, "lattice", "n", 0);
    s.length = r.triple<double>(*lat, "lattice", "length", 0.0);
    for (int a = 0; a < 3; ++a) {
      if (s.n[a] < 3) r.problem("lattice.n", "every dimension needs at least 3 sites");
      if (!(s.length[a] > 0.0)) r.problem("lattice.length", "must be positive");
    }
  }

  if (const auto* in = section(root, "integration", r)) {
    r.only_keys(*in, "integration", {"dt", "steps", "cadence", "snapshot_cadence"});
    s.dt = r.number(*in, "integration", "dt", s.dt);
    r.positive(s.dt, "integration.dt");
    const auto steps = r.integer(*in, "integration", "steps", 0);
    const auto cadence = r.integer(*in, "integration", "cadence", 1);
    const auto snap = r.integer(*in, "integration", "snapshot_cadence", 0);
    if (steps < 0) r.problem("integration.steps", "must be non-negative");
    if (cadence < 1) r.problem("integration.cadence", "must be at least 1");
    if (snap < 0) r.problem("integration.snapshot_cadence", "must be non-negative");
    s.steps = static_cast<std::size_t>(std::max<std::int64_t>(steps, 0));
    s.cadence = static_cast<std::size_t>(std::max<std::int64_t>(cadence, 1));
    s.snapshot_cadence = static_cast<std::size_t>(std::max<std::int64_t>(snap, 0));
  } else {
    r.problem("integration", "section missing");
  }

  if (const auto* t = section(root, "scalar", r); t && engine == "scalar") {
    s.scalar = parse_scalar(*t, r);
    s.scalar->initial.seed = s.seed;
  }
  if (const auto* t = section(root, "spinor", r); t && engine == "spinor") {
    s.spinor = parse_spinor(*t, r);
    s.spinor->initial.seed = s.seed;
  }
  if (const auto* t = section(root, "fock", r); t && engine == "fock") {
    s.fock = parse_fock(*t, r);
    if (r.problems.empty()) {
      try {
        s.fock->system.validate();
      } catch (const Error& e) {
        r.problem("fock", e.what());
      }
    }
  }

  if (!r.problems.empty()) {
    throw Error(ErrorKind::ConfigInvalid,
                fmt::format("{} invalid config field(s)", r.problems.size()),
                {{"problems", r.problems}});
  }
  return s;
}

std::string config_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace fieldelim
