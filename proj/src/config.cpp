#include "evoq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evoq/signal_io.hpp"

namespace evoq {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Schema, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) schema(where, "expected an object");
  for (auto& [key, _] : j.items())
    if (!allowed.count(key)) schema(where, "unknown key '" + key + "'");
}

const json& need(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) schema(where, "missing '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& where, const std::string& key, double fallback) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

Complex entry(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    schema(where, "expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

CMatrix matrix(const json& j, const std::string& where) {
  if (j.is_object()) {
    if (j.contains("identity")) {
      only_keys(j, where, {"identity", "scale"});
      auto n = static_cast<Eigen::Index>(count(j.at("identity"), where + ".identity"));
      return number_or(j, where, "scale", 1.0) * CMatrix::Identity(n, n);
    }
    only_keys(j, where, {"zeros"});
    const json& z = j.at("zeros");
    if (!z.is_array() || z.size() != 2) schema(where, "zeros takes [rows, cols]");
    return CMatrix::Zero(static_cast<Eigen::Index>(count(z[0], where)), static_cast<Eigen::Index>(count(z[1], where)));
  }
  if (!j.is_array() || j.empty()) schema(where, "expected a non-empty list of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  CMatrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) schema(row, "ragged row");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entry(j[r][c], row + "[" + std::to_string(c) + "]");
  }
  return M;
}

CVector vector(const json& j, const std::string& where) {
  if (!j.is_array()) schema(where, "expected a list of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = entry(j[i], where);
  return v;
}

GridSpec grid_spec(const json& j, const std::string& where) {
  only_keys(j, where, {"t_min", "t_max", "n", "padding_fraction"});
  GridSpec g;
  g.t_min = number(need(j, where, "t_min"), where + ".t_min");
  g.t_max = number(need(j, where, "t_max"), where + ".t_max");
  g.n = count(need(j, where, "n"), where + ".n");
  g.padding_fraction = number_or(j, where, "padding_fraction", 0.25);
  if (!(g.t_max > g.t_min) || g.n < 2) schema(where, "needs t_max > t_min and n >= 2");
  if (g.padding_fraction < 0.0) schema(where, "padding_fraction must be non-negative");
  return g;
}

ShapeSpec shape_spec(const json& j, const std::string& where, const std::filesystem::path& base) {
  if (!j.is_object()) schema(where, "expected an object");
  const json& kind = need(j, where, "shape");
  ShapeSpec s;
  if (kind == "bump") {
    only_keys(j, where, {"shape", "centre", "half_width", "direction"});
    s.kind = ShapeSpec::Kind::Bump;
    s.centre = number(need(j, where, "centre"), where + ".centre");
    s.width = number(need(j, where, "half_width"), where + ".half_width");
  } else if (kind == "gaussian") {
    only_keys(j, where, {"shape", "centre", "width", "direction"});
    s.kind = ShapeSpec::Kind::Gaussian;
    s.centre = number(need(j, where, "centre"), where + ".centre");
    s.width = number(need(j, where, "width"), where + ".width");
  } else if (kind == "indicator") {
    only_keys(j, where, {"shape", "start", "end", "direction"});
    s.kind = ShapeSpec::Kind::Indicator;
    s.start = number(need(j, where, "start"), where + ".start");
    s.end = number(need(j, where, "end"), where + ".end");
    if (!(s.end > s.start)) schema(where, "needs end > start");
  } else if (kind == "csv") {
    only_keys(j, where, {"shape", "path"});
    s.kind = ShapeSpec::Kind::Csv;
    if (!need(j, where, "path").is_string()) schema(where + ".path", "expected a string");
    s.path = base / j.at("path").get<std::string>();
    if (!std::filesystem::exists(s.path.string() + ".csv"))
      throw Error(ErrorKind::Io, where + ": no such signal file " + s.path.string() + ".csv");
  } else {
    schema(where + ".shape", "expected bump, gaussian, indicator or csv");
  }
  if (s.kind != ShapeSpec::Kind::Csv && s.width <= 0.0) schema(where, "width must be positive");
  if (j.contains("direction")) s.direction = vector(j.at("direction"), where + ".direction");
  return s;
}

ShapeSpec mirrored(ShapeSpec s) {
  s.centre = -s.centre;
  std::swap(s.start, s.end);
  s.start = -s.start;
  s.end = -s.end;
  return s;
}

std::vector<CMatrix> law_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema(where, "expected a non-empty list of matrices");
  std::vector<CMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

struct Built {
  BlockSystem system;
  std::optional<CoercivityCertificate> certificate;
};

Built build_spatial(const json& j, double nu) {
  const std::string where = "spatial";
  const json& kind = need(j, where, "kind");
  auto k = [&] { return count(need(j, where, "k"), where + ".k"); };
  auto dx = [&] { return number_or(j, where, "dx", 1.0); };
  auto mat = [&](const char* key) { return matrix(need(j, where, key), where + "." + key); };
  if (kind == "heat") {
    only_keys(j, where, {"kind", "k", "dx", "conductivity"});
    return {build_heat_block(k(), mat("conductivity"), dx()), std::nullopt};
  }
  if (kind == "wave") {
    only_keys(j, where, {"kind", "k", "dx", "elasticity"});
    return {build_wave_block(k(), mat("elasticity"), dx()), std::nullopt};
  }
  if (kind == "maxwell") {
    only_keys(j, where, {"kind", "k", "dx", "epsilon", "mu", "sigma"});
    auto m = build_maxwell_block(k(), mat("epsilon"), mat("mu"), mat("sigma"), nu, dx());
    return {m.system, m.certificate};
  }
  if (kind == "matrix") {
    only_keys(j, where, {"kind", "A"});
    CMatrix A = mat("A");
    // the law is filled in by the caller
    return {BlockSystem{check_skew(A), MaterialLaw::finite_sum({CMatrix::Identity(A.rows(), A.rows())}), 0},
            std::nullopt};
  }
  schema(where + ".kind", "expected heat, wave, maxwell or matrix");
}

Tolerances tolerances(const json& j) {
  Tolerances t;
  if (j.is_null()) return t;
  const std::string where = "tolerances";
  only_keys(j, where,
            {"residual", "norm_slack", "duality", "pairing", "causality", "reversal", "nu_independence", "oracle",
             "control"});
  t.residual = number_or(j, where, "residual", t.residual);
  t.norm_slack = number_or(j, where, "norm_slack", t.norm_slack);
  t.duality = number_or(j, where, "duality", t.duality);
  t.pairing = number_or(j, where, "pairing", t.pairing);
  t.causality = number_or(j, where, "causality", t.causality);
  t.reversal = number_or(j, where, "reversal", t.reversal);
  t.nu_independence = number_or(j, where, "nu_independence", t.nu_independence);
  t.oracle = number_or(j, where, "oracle", t.oracle);
  if (j.contains("control")) {
    const json& c = j.at("control");
    const std::string cw = where + ".control";
    only_keys(c, cw,
              {"rank_cutoff", "inclusion_tol", "feasibility_tol", "pointwise_tol", "size_guard", "power_iterations",
               "power_tol"});
    auto& o = t.control;
    o.rank_cutoff = number_or(c, cw, "rank_cutoff", o.rank_cutoff);
    o.inclusion_tol = number_or(c, cw, "inclusion_tol", o.inclusion_tol);
    o.feasibility_tol = number_or(c, cw, "feasibility_tol", o.feasibility_tol);
    o.pointwise_tol = number_or(c, cw, "pointwise_tol", o.pointwise_tol);
    o.power_tol = number_or(c, cw, "power_tol", o.power_tol);
    if (c.contains("size_guard")) o.size_guard = count(c.at("size_guard"), cw + ".size_guard");
    if (c.contains("power_iterations"))
      o.power_iterations = static_cast<int>(count(c.at("power_iterations"), cw + ".power_iterations"));
  }
  return t;
}

ControlSpec control_spec(const json& j, const GridSpec& fallback, Eigen::Index m) {
  const std::string where = "control";
  only_keys(j, where, {"B", "T", "variant", "U0", "grid"});
  ControlSpec c;
  c.B = matrix(need(j, where, "B"), where + ".B");
  if (c.B.rows() != m) schema(where + ".B", "needs " + std::to_string(m) + " rows");
  c.T = number(need(j, where, "T"), where + ".T");
  const std::string variant = j.value("variant", "supported");
  if (variant == "supported")
    c.variant = ControlVariant::Supported;
  else if (variant == "pointwise")
    c.variant = ControlVariant::Pointwise;
  else
    schema(where + ".variant", "expected supported or pointwise");
  c.U0 = j.contains("U0") ? vector(j.at("U0"), where + ".U0") : CVector::Zero(m);
  if (c.U0.size() != m) schema(where + ".U0", "needs " + std::to_string(m) + " entries");
  c.grid = j.contains("grid") ? grid_spec(j.at("grid"), where + ".grid") : fallback;
  return c;
}

}  // namespace

InstanceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"name", "seed", "units", "nu", "grid", "spatial", "law", "rhs", "adjoint_rhs", "control", "tolerances"});
  if (j.contains("units")) {
    const json& u = j.at("units");
    only_keys(u, "units", {"time", "nu"});
    if (u.value("time", "s") != "s" || u.value("nu", "1/s") != "1/s") schema("units", "time is in s and nu in 1/s");
  }
  const std::string name = j.value("name", "instance");
  const std::uint64_t seed = j.contains("seed") ? count(j.at("seed"), "seed") : 1;
  const double nu = number(need(j, "config", "nu"), "nu");
  if (!(nu > 0.0)) schema("nu", "must be positive");
  const GridSpec grid = grid_spec(need(j, "config", "grid"), "grid");
  const json& sp = need(j, "config", "spatial");
  if (!sp.is_object()) schema("spatial", "expected an object");
  const std::string kind = sp.value("kind", "");
  Built built = build_spatial(sp, nu);
  if (j.contains("law")) {
    built.system.law = MaterialLaw::finite_sum(law_list(j.at("law"), "law"));
  } else if (kind == "matrix") {
    schema("law", "required for spatial kind 'matrix'");
  }
  const Eigen::Index m = built.system.A.dim();
  if (built.system.law.dim() != m) schema("law", "coefficients must be " + std::to_string(m) + " x " + std::to_string(m));

  CoercivityCertificate cert = coercivity(built.system.law, nu, grid.grid());

  ShapeSpec rhs = shape_spec(need(j, "config", "rhs"), "rhs", base_dir);
  if (rhs.kind != ShapeSpec::Kind::Csv && rhs.direction.size() == 0) rhs.direction = CVector::Ones(m);
  if (rhs.kind != ShapeSpec::Kind::Csv && rhs.direction.size() != m) schema("rhs.direction", "wrong length");
  ShapeSpec adj = j.contains("adjoint_rhs") ? shape_spec(j.at("adjoint_rhs"), "adjoint_rhs", base_dir) : mirrored(rhs);
  if (adj.kind != ShapeSpec::Kind::Csv && adj.direction.size() == 0) adj.direction = CVector::Ones(m);
  if (adj.kind != ShapeSpec::Kind::Csv && adj.direction.size() != m) schema("adjoint_rhs.direction", "wrong length");

  std::optional<ControlSpec> control;
  if (j.contains("control")) control = control_spec(j.at("control"), grid, m);

  return InstanceConfig{name,  seed,           nu,  grid, kind, built.system, cert, rhs,
                        adj,   std::move(control), tolerances(j.value("tolerances", json()))};
}

InstanceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

CMatrix shape_values(const ShapeSpec& s, const TimeGrid& g, Eigen::Index m) {
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), m);
  switch (s.kind) {
    case ShapeSpec::Kind::Bump:
      for (std::size_t j = 0; j < g.size(); ++j) {
        double x = (g.time(j) - s.centre) / s.width;
        if (std::abs(x) < 1.0) out.row(static_cast<Eigen::Index>(j)) = std::exp(1.0 - 1.0 / (1.0 - x * x)) * s.direction.transpose();
      }
      break;
    case ShapeSpec::Kind::Gaussian:
      for (std::size_t j = 0; j < g.size(); ++j) {
        double x = (g.time(j) - s.centre) / s.width;
        out.row(static_cast<Eigen::Index>(j)) = std::exp(-0.5 * x * x) * s.direction.transpose();
      }
      break;
    case ShapeSpec::Kind::Indicator:
      for (std::size_t j = 0; j < g.size(); ++j)
        if (g.time(j) >= s.start && g.time(j) < s.end) out.row(static_cast<Eigen::Index>(j)) = s.direction.transpose();
      break;
    case ShapeSpec::Kind::Csv: {
      auto f = read_signal(s.path);
      if (f.grid() != g || f.dim() != m) throw Error(ErrorKind::Schema, s.path.string() + ": grid or dimension mismatch");
      out = f.values();
      break;
    }
  }
  return out;
}

EvoProblem make_problem(const InstanceConfig& c, Direction dir) {
  const TimeGrid g = c.grid.grid();
  const Eigen::Index m = c.system.A.dim();
  const bool fwd = dir == Direction::Forward;
  CMatrix vals = shape_values(fwd ? c.rhs : c.adjoint_rhs, g, m);
  return {c.nu, c.system.law, c.system.A, WeightedSignal::from_values(g, fwd ? c.nu : -c.nu, vals), dir,
          c.grid.padding_fraction};
}

ControlProblem make_control_problem(const InstanceConfig& c, std::optional<ControlVariant> variant) {
  if (!c.control) throw Error(ErrorKind::Schema, "config has no control section");
  const ControlSpec& s = *c.control;
  const TimeGrid g = s.grid.grid();
  const Eigen::Index m = c.system.A.dim();
  const ControlVariant v = variant.value_or(s.variant);
  WeightedSignal F = v == ControlVariant::Supported ? WeightedSignal::from_values(g, c.nu, shape_values(c.rhs, g, m))
                                                   : WeightedSignal::zero(g, c.nu, m);
  return {EvoProblem{c.nu, c.system.law, c.system.A, F, Direction::Forward, s.grid.padding_fraction}, s.B, s.T, v, s.U0};
}

}  // namespace evoq
