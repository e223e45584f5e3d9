#include "tpdo/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "tpdo/errors.hpp"

namespace tpdo {
namespace {

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Json shell(const calculus::Shell& s) { return Json{{"lo", number(s.lo)}, {"hi", number(s.hi)}}; }

Json line_fit(const LineFit& f) {
  return Json{{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"residuals", numbers(f.residuals)}};
}

}  // namespace

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return INFINITY;
    if (s == "-inf" || s == "-infinity") return -INFINITY;
  }
  throw ValidationError("expected a number, got " + j.dump());
}

Json to_json(const ClassParams& c) {
  return Json{{"m", number(c.m())}, {"rho", number(c.rho())}, {"delta", number(c.delta())}, {"lambda", number(c.lambda())}};
}

Json to_json(const calculus::ClassEstimate& e) {
  Json constants = Json::array();
  for (const auto& [key, value] : e.constants)
    constants.push_back(Json{{"alpha", key.first.str()}, {"beta", key.second.str()}, {"constant", number(value)}});
  Json fits = Json::array();
  for (const auto& f : e.fits)
    fits.push_back(Json{{"alpha", f.alpha.str()},
                        {"beta", f.beta.str()},
                        {"log_bracket", numbers(f.log_bracket)},
                        {"log_sup", numbers(f.log_sup)},
                        {"fit", line_fit(f.fit)},
                        {"vanishing", f.vanishing}});
  Json shells = Json::array(), fit_shells = Json::array();
  for (const auto& s : e.shells) shells.push_back(shell(s));
  for (const auto& s : e.fit_shells) fit_shells.push_back(shell(s));
  return Json{{"nominal", to_json(e.params)}, {"fitted_m", number(e.fitted_m)},   {"fitted_rho", number(e.fitted_rho)},
              {"fitted_delta", number(e.fitted_delta)}, {"max_order", e.max_order}, {"constants", constants},
              {"fits", fits}, {"shells", shells}, {"fit_shells", fit_shells}};
}

Json to_json(const EffectiveOrder& e) {
  return Json{{"order", number(e.order)}, {"fit", line_fit(e.fit)}, {"log_bracket", numbers(e.log_bracket)},
              {"log_norm", numbers(e.log_norm)}};
}

Json to_json(const KernelMatrix& k) {
  double mx = 0.0;
  for (const Complex& z : k.values) mx = std::max(mx, std::abs(z));
  return Json{{"grid", k.spec.sizes()}, {"truncation", k.truncation.sizes()}, {"provenance", k.provenance},
              {"circulant", k.circulant}, {"max_abs", number(mx)}, {"stored_values", k.values.size()}};
}

Json to_json(const KernelDecayReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back(Json{{"truncation", e.truncation}, {"cutoff", number(e.cutoff)}, {"sup", number(e.sup)},
                           {"distance_at_sup", number(e.distance_at_sup)}});
  return Json{{"exponent", number(r.exponent)}, {"entries", entries}, {"stability_ratio", number(r.stability_ratio)}};
}

Json to_json(const LogBoundReport& r) {
  return Json{{"truncation", r.truncation},           {"cutoff", number(r.cutoff)},
              {"samples", r.samples},                 {"slope", number(r.slope)},
              {"intercept", number(r.intercept)},     {"inner_slope", number(r.inner_slope)},
              {"outer_slope", number(r.outer_slope)}, {"residual_ratio", number(r.residual_ratio)},
              {"max_abs_kernel", number(r.max_abs_kernel)}, {"bounded", r.bounded}};
}

Json to_json(const SigmaEstimateReport& r) {
  Json j{{"variant", to_string(r.variant)}, {"sigmas", numbers(r.sigmas)},       {"radii", numbers(r.radii)},
         {"suprema", numbers(r.suprema)},   {"warnings", r.warnings},            {"unit_scale", number(r.unit_scale)},
         {"samples", r.samples},            {"flatness", number(r.flatness)},    {"suprema_are_lower_bounds", true}};
  j["nominal"] = r.params ? to_json(*r.params) : Json(nullptr);
  return j;
}

Json to_json(const NormValue& v) {
  Json j{{"kind", to_string(v.kind)}, {"p", number(v.p)}, {"value", number(v.value)}, {"method", v.method}};
  if (v.q) j["q"] = number(*v.q);
  return j;
}

Json to_json(const CZDecomposition& d) {
  Json cubes = Json::array();
  for (const auto& b : d.bad) {
    std::vector<int> corner(b.cube.corner.begin(), b.cube.corner.begin() + d.good.spec.dim());
    const int side = d.good.spec.size(0) >> b.cube.level;
    double l1 = 0.0;
    for (const Complex& z : b.values) l1 += std::abs(z);
    cubes.push_back(Json{{"level", b.cube.level},
                         {"corner", corner},
                         {"side", side},
                         {"points", b.cube.indices.size()},
                         {"mean", Json{number(b.mean.real()), number(b.mean.imag())}},
                         {"bad_l1", number(l1 / static_cast<double>(d.good.size()))}});
  }
  double gmax = 0.0;
  for (const Complex& z : d.good.values) gmax = std::max(gmax, std::abs(z));
  return Json{{"lambda", number(d.lambda)},         {"cubes", cubes},
              {"omega_points", d.omega.size()},     {"omega_measure", number(d.omega_measure)},
              {"good_max_abs", number(gmax)},       {"warnings", d.warnings}};
}

Json to_json(const NormEstimate& e) {
  Json j{{"p", number(e.p)},          {"q", number(e.q)},
         {"value", number(e.value)},  {"method", e.method},
         {"trials", e.trials},        {"seed", e.seed},
         {"truncation", e.truncation}, {"witness_kind", e.witness_kind},
         {"iterations", e.iterations}, {"gap", number(e.gap)}};
  if (e.witness) {
    j["witness_lp_norm"] = number(lp_norm(*e.witness, e.p).value);
    j["witness_points"] = e.witness->size();
  }
  return j;
}

Json to_json(const ThresholdSweepRecord& r) {
  Json matrix = Json::array();
  for (const auto& row : r.estimates) {
    Json jr = Json::array();
    for (const auto& e : row) jr.push_back(to_json(e));
    matrix.push_back(jr);
  }
  Json params = Json::object();
  for (const auto& [k, v] : r.family.params) params[k] = number(v);
  return Json{{"family", r.family.name},
              {"family_params", params},
              {"nominal", to_json(r.family.nominal)},
              {"dim", r.dim},
              {"p", number(r.p)},
              {"orders", numbers(r.orders)},
              {"truncations", r.truncations},
              {"estimates", matrix},
              {"threshold", number(r.threshold)},
              {"slopes", numbers(r.slopes)},
              {"classification", r.classification},
              {"classification_thresholds", Json{{"bounded_below", kBoundedSlope}, {"growth_above", kGrowthSlope}}},
              {"seed", r.seed},
              {"trials", r.trials}};
}

Json to_json(const TruncationResult& r) {
  return Json{{"truncation", r.truncation}, {"max_ratio", number(r.max_ratio)}, {"ratios", numbers(r.ratios)},
              {"kinds", r.kinds},           {"argmax", r.argmax}};
}

Json to_json(const WeakTypeReport& r) {
  Json results = Json::array();
  for (const auto& t : r.results) results.push_back(to_json(t));
  return Json{{"operator", r.op},          {"lambda_grid", numbers(r.lambda_grid)},
              {"results", results},        {"input_l1", numbers(r.input_l1)},
              {"relative_change", number(r.relative_change)}, {"warnings", r.warnings},
              {"seed", r.seed},            {"trials", r.trials}};
}

Json to_json(const ExperimentReport& r) {
  Json results = Json::array();
  for (const auto& t : r.results) results.push_back(to_json(t));
  Json j{{"operator", r.op},   {"kind", r.kind},          {"results", results},
         {"relative_change", number(r.relative_change)},  {"warnings", r.warnings},
         {"seed", r.seed},     {"trials", r.trials}};
  if (!r.radii.empty()) {
    j["radii"] = numbers(r.radii);
    j["radius_max"] = numbers(r.radius_max);
    j["regime"] = r.regime;
  }
  return j;
}

Json to_json(const AdmissibilityReport& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) cases.push_back(Json{{"case", std::string(1, c.id)}, {"threshold", number(c.threshold)}});
  return Json{{"params", to_json(r.params)},  {"dim", r.dim},
              {"p", number(r.p)},             {"q", number(r.q)},
              {"case", std::string(1, r.primary)}, {"threshold", number(r.threshold)},
              {"cases", cases},               {"admissible", r.admissible}};
}

Json to_json(const Weak11Hypothesis& h) {
  return Json{{"alpha", number(h.alpha)}, {"beta", number(h.beta)}, {"q", number(h.q)},
              {"residual", number(h.residual)}, {"order_ok", h.order_ok}};
}

Json to_json(const ReportEnvelope& e) {
  return Json{{"tool", e.tool},     {"version", e.version}, {"timestamp", e.timestamp}, {"command", e.command},
              {"config", e.config}, {"payload", e.payload}, {"provenance", e.provenance}};
}

ReportEnvelope envelope_from_json(const Json& j) {
  try {
    ReportEnvelope e;
    e.tool = j.at("tool").get<std::string>();
    e.version = j.at("version").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::string>();
    e.command = j.at("command").get<std::string>();
    e.config = j.at("config");
    e.payload = j.at("payload");
    e.provenance = j.at("provenance").get<std::vector<std::string>>();
    return e;
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("malformed report envelope: ") + ex.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace tpdo
