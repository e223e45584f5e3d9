#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "config.hpp"
#include "tpdo/errors.hpp"
#include "tpdo/io.hpp"
#include "tpdo/report.hpp"
#include "tpdo/version.hpp"

namespace tpdo::cli {
namespace {

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  Json payload = Json::object();
  std::vector<std::string> provenance;
  std::vector<std::string> summary;
  std::vector<Artifact> files;
  Json curves = Json::array();
};

struct Context {
  Json config;
  bool to_files = false;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v + 0.0);
  return buf;
}

// ---- configuration helpers --------------------------------------------------------

struct SymbolChoice {
  std::string text;
  std::optional<dsl::SymbolFamily> family;
  std::optional<dsl::Expr> expr;
  dsl::ParamMap params;
  std::optional<ClassParams> nominal;
};

dsl::ParamMap config_params(const Json& cfg) {
  dsl::ParamMap params;
  for (const auto& [k, v] : at(cfg, "params").items()) params[k] = v.get<double>();
  return params;
}

std::optional<ClassParams> config_nominal(const Json& cfg) {
  const Json& n = at(cfg, "nominal");
  if (n.is_null()) return std::nullopt;
  if (!n.is_object()) field_error("nominal", "expected an object {m, rho, delta} or null");
  for (const auto& [k, v] : n.items())
    if (k != "m" && k != "rho" && k != "delta") throw ValidationError("unknown config field 'nominal." + k + "'");
  try {
    return ClassParams(get_double(cfg, "nominal.m"), get_double(cfg, "nominal.rho"), get_double(cfg, "nominal.delta"));
  } catch (const ValidationError& e) {
    if (std::string(e.what()).starts_with("config field")) throw;
    field_error("nominal", e.what());
  }
}

int config_dim(const Json& cfg) {
  const int dim = get_int(cfg, "dim");
  if (dim < 1 || dim > kMaxDim) field_error("dim", "must be 1, 2 or 3");
  return dim;
}

SymbolChoice resolve_symbol(const Json& cfg) {
  SymbolChoice s;
  s.text = get_string(cfg, "symbol");
  s.params = config_params(cfg);
  try {
    if (auto family = dsl::parse_family(s.text)) {
      s.family = family;
      s.expr = family->expr;
      for (const auto& [k, v] : family->params) s.params[k] = v;
      s.nominal = family->nominal;
    } else {
      s.expr = dsl::parse(s.text);
    }
    s.expr->check_dimension(config_dim(cfg));
  } catch (const ValidationError& e) {
    field_error("symbol", e.what());
  }
  if (auto n = config_nominal(cfg)) {
    s.nominal = n;
    if (s.family) s.family->nominal = *n;
  }
  return s;
}

dsl::Symbol make_symbol(const SymbolChoice& s, int dim) {
  try {
    return dsl::Symbol::analytic(*s.expr, dim, s.params);
  } catch (const ValidationError& e) {
    field_error("symbol", e.what());
  }
}

GridSpec config_grid(const Json& cfg) {
  const int dim = config_dim(cfg);
  const auto sizes = get_ints(cfg, "grid");
  try {
    if (sizes.size() == 1) return GridSpec::cube(dim, sizes[0]);
    if (static_cast<int>(sizes.size()) != dim) field_error("grid", "needs one size or one per axis (dim = " + std::to_string(dim) + ")");
    return GridSpec(sizes);
  } catch (const ValidationError& e) {
    if (std::string(e.what()).starts_with("config field")) throw;
    field_error("grid", e.what());
  }
}

GridFunction input_function(const Json& cfg, const GridSpec& g, Outcome& o) {
  if (auto file = get_optional_string(cfg, "input.file")) {
    std::ifstream in(*file);
    if (!in) field_error("input.file", "cannot open '" + *file + "'");
    o.payload["input"] = Json{{"file", *file}};
    try {
      return io::read_grid_csv(in, g);
    } catch (const ValidationError& e) {
      field_error("input.file", e.what());
    }
  }
  const std::string text = get_string(cfg, "input.generator");
  std::optional<dsl::Expr> e;
  try {
    e = dsl::parse(text);
    e->check_dimension(g.dim());
  } catch (const ValidationError& ex) {
    field_error("input.generator", ex.what());
  }
  if (e->depends_on_xi()) field_error("input.generator", "must be a function of x only");
  const auto params = config_params(cfg);
  for (const auto& name : e->parameters())
    if (!params.contains(name)) field_error("input.generator", "unbound parameter '" + name + "'");
  o.payload["input"] = Json{{"generator", text}};
  return GridFunction::sample(g, [&](const Point& x) { return e->eval(x, LatticePoint{}, g.dim(), params); });
}

// ---- artifacts --------------------------------------------------------------------

void attach_grid(Outcome& o, const Context& c, const std::string& key, const std::string& file, const GridFunction& f) {
  if (c.to_files) {
    std::ostringstream s;
    io::write_grid_csv(s, f);
    o.files.push_back({file, s.str()});
    o.payload[key] = file;
  } else {
    Json a = Json::array();
    for (const Complex& z : f.values) a.push_back(Json{number(z.real()), number(z.imag())});
    o.payload[key] = a;
  }
}

void add_table(Outcome& o, const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream s;
  io::write_table_csv(s, header, rows);
  o.files.push_back({file, s.str()});
}

void add_curve(Outcome& o, const std::string& file, const std::string& label, const std::string& xlabel,
               const std::string& ylabel, const std::vector<double>& x, const std::vector<double>& y) {
  std::ostringstream s;
  s << "# " << xlabel << ' ' << ylabel << '\n';
  io::write_curve(s, x, y);
  o.files.push_back({file, s.str()});
  o.curves.push_back(Json{{"file", file}, {"label", label}, {"x", xlabel}, {"y", ylabel}});
}

std::string index_tag(const calculus::MultiIndex& m) {
  std::string s;
  for (int k = 0; k < m.dim; ++k) s += std::to_string(m[k]);
  return s;
}

// ---- commands ---------------------------------------------------------------------

Outcome cmd_symbol_class(const Context& c) {
  const Json& cfg = c.config;
  const int dim = config_dim(cfg);
  const SymbolChoice s = resolve_symbol(cfg);
  if (!s.nominal) field_error("nominal", "required when the symbol is an expression rather than a family");
  const auto shells = [&] {
    try {
      return calculus::dyadic_shells(get_double(cfg, "symbol_class.shell_lo"), get_double(cfg, "symbol_class.shell_hi"));
    } catch (const ValidationError& e) {
      if (std::string(e.what()).starts_with("config field")) throw;
      field_error("symbol_class", e.what());
    }
  }();
  calculus::ShellOptions so;
  so.x_points = get_int(cfg, "symbol_class.x_points");
  so.seed = get_u64(cfg, "seed");
  const int max_order = get_int(cfg, "symbol_class.max_order");

  const auto est = calculus::fit_order(make_symbol(s, dim), *s.nominal, shells, max_order, so);

  Outcome o;
  o.payload = to_json(est);
  o.payload["symbol"] = s.text;
  o.provenance = {"shell suprema are sampled over finite lattice shells and a finite x grid",
                  "fitted exponents are log-log regression slopes over the outer shells"};
  std::vector<std::vector<double>> rows;
  std::ostringstream table;
  table << "alpha,beta,constant\n";
  for (const auto& [key, value] : est.constants)
    table << '"' << key.first.str() << "\",\"" << key.second.str() << "\"," << io::format_double(value) << '\n';
  o.files.push_back({"constants.csv", table.str()});
  for (const auto& f : est.fits) {
    if (f.vanishing) continue;
    add_curve(o, "fit_a" + index_tag(f.alpha) + "_b" + index_tag(f.beta) + ".dat",
              "alpha=" + f.alpha.str() + " beta=" + f.beta.str(), "log_bracket", "log_sup", f.log_bracket, f.log_sup);
  }
  o.summary.push_back("fitted m = " + fmt(est.fitted_m) + ", rho = " + fmt(est.fitted_rho) + ", delta = " +
                      fmt(est.fitted_delta) + " (nominal " + fmt(s.nominal->m()) + ", " + fmt(s.nominal->rho()) + ", " +
                      fmt(s.nominal->delta()) + ")");
  return o;
}

Outcome cmd_quantize(const Context& c) {
  const Json& cfg = c.config;
  const GridSpec g = config_grid(cfg);
  const SymbolChoice s = resolve_symbol(cfg);
  const PdoOperator op(make_symbol(s, g.dim()), g, s.nominal);
  Outcome o;
  const GridFunction f = input_function(cfg, g, o);
  const GridFunction tf = op.apply(f);
  o.payload["symbol"] = s.text;
  o.payload["operator"] = op.describe();
  o.payload["grid"] = g.sizes();
  o.payload["multiplier"] = op.is_multiplier();
  o.payload["input_l2"] = to_json(lp_norm(f, 2.0));
  o.payload["output_l2"] = to_json(lp_norm(tf, 2.0));
  attach_grid(o, c, "output", "output.csv", tf);
  o.provenance = {"frequency sums run over the FFT box of the grid"};
  o.summary.push_back("applied " + op.describe() + ": ||f||_2 = " + fmt(lp_norm(f, 2.0).value) +
                      ", ||Tf||_2 = " + fmt(lp_norm(tf, 2.0).value));
  return o;
}

std::optional<calculus::MultiIndex> config_index(const Json& cfg, const std::string& path, int dim) {
  if (at(cfg, path).is_null()) return std::nullopt;
  const auto v = get_ints(cfg, path);
  if (static_cast<int>(v.size()) != dim) field_error(path, "needs one component per axis");
  try {
    return calculus::MultiIndex::of(v);
  } catch (const ValidationError& e) {
    field_error(path, e.what());
  }
}

Outcome cmd_kernel(const Context& c) {
  const Json& cfg = c.config;
  const std::string mode = get_string(cfg, "kernel.mode");
  const int dim = config_dim(cfg);
  const SymbolChoice s = resolve_symbol(cfg);
  const int oversample = get_int(cfg, "kernel.oversample");
  const auto max_rows = get_optional_double(cfg, "kernel.max_rows");
  if (max_rows && *max_rows < 1) field_error("kernel.max_rows", "must be positive");
  Outcome o;
  o.payload["symbol"] = s.text;
  o.payload["mode"] = mode;
  o.provenance = {"kernel sums run over a truncated frequency box; suprema are taken over sampled points only"};

  if (mode == "synthesize") {
    const GridSpec g = config_grid(cfg);
    const PdoOperator op(make_symbol(s, g.dim()), g, s.nominal);
    const KernelMatrix k = synthesize_kernel(op, oversample);
    o.payload["kernel"] = to_json(k);
    const int rows = std::min<int>(get_int(cfg, "kernel.dump_rows"), static_cast<int>(k.spec.point_count()));
    std::vector<std::vector<double>> table;
    for (int r = 0; r < rows; ++r) {
      const std::size_t x = static_cast<std::size_t>(r);
      const auto row = k.offset_row(x);
      for (std::size_t z = 0; z < row.size(); ++z)
        table.push_back({double(r), double(z), row[z].real(), row[z].imag()});
      if (dim == 1) {
        const int n = k.spec.size(0);
        std::vector<std::pair<double, double>> pts;
        for (int z = 0; z < n; ++z) {
          const int signed_z = z < n / 2 ? z : z - n;
          pts.emplace_back(double(signed_z) / n, std::abs(row[static_cast<std::size_t>(z)]));
        }
        std::sort(pts.begin(), pts.end());
        std::vector<double> xs, ys;
        for (const auto& [a, b] : pts) xs.push_back(a), ys.push_back(b);
        add_curve(o, "kernel_row_" + std::to_string(r) + ".dat", "|k(x_" + std::to_string(r) + ", x - z)|", "z",
                  "abs_k", xs, ys);
      }
    }
    add_table(o, "kernel_rows.csv", {"row", "offset", "real", "imag"}, table);
    o.summary.push_back("kernel on grid " + std::to_string(k.spec.point_count()) + " points, " +
                        (k.circulant ? "circulant" : "full") + ", max |k| = " + fmt(o.payload["kernel"]["max_abs"].get<double>()));
  } else if (mode == "decay") {
    DecayOptions d;
    d.exponent = get_double(cfg, "kernel.exponent");
    d.truncations = get_ints(cfg, "kernel.truncations");
    d.cutoff_cells = get_double(cfg, "kernel.cutoff_cells");
    d.cutoff = get_optional_double(cfg, "kernel.cutoff");
    d.oversample = oversample;
    d.alpha = config_index(cfg, "kernel.alpha", dim);
    d.beta = config_index(cfg, "kernel.beta", dim);
    if (max_rows) d.max_rows = static_cast<std::size_t>(*max_rows);
    const auto r = decay_scan(make_symbol(s, dim), d);
    o.payload["decay"] = to_json(r);
    std::vector<std::vector<double>> table;
    std::vector<double> xs, ys;
    for (const auto& e : r.entries) {
      table.push_back({double(e.truncation), e.cutoff, e.sup, e.distance_at_sup});
      xs.push_back(e.truncation);
      ys.push_back(e.sup);
    }
    add_table(o, "decay.csv", {"truncation", "cutoff", "sup", "distance_at_sup"}, table);
    add_curve(o, "decay.dat", "sup d^N |k| per truncation", "truncation", "sup", xs, ys);
    o.summary.push_back("decay scan N = " + fmt(r.exponent) + ": stability ratio " + fmt(r.stability_ratio));
  } else if (mode == "log") {
    const auto r = log_bound_check(make_symbol(s, dim), get_int(cfg, "kernel.truncation"),
                                   get_double(cfg, "kernel.cutoff_cells"), oversample,
                                   max_rows ? static_cast<std::size_t>(*max_rows) : 256);
    o.payload["log_bound"] = to_json(r);
    o.summary.push_back("log bound: slope " + fmt(r.slope) + ", residual ratio " + fmt(r.residual_ratio) +
                        (r.bounded ? " (kernel bounded near the diagonal)" : ""));
  } else if (mode == "sigma") {
    const GridSpec g = config_grid(cfg);
    const PdoOperator op(make_symbol(s, g.dim()), g, s.nominal);
    SigmaOptions so;
    so.sigmas = get_doubles(cfg, "kernel.sigmas");
    so.samples = static_cast<std::size_t>(get_int(cfg, "kernel.samples"));
    so.seed = get_u64(cfg, "seed");
    so.unit_scale = get_double(cfg, "kernel.unit_scale");
    SigmaVariant variant;
    try {
      variant = parse_sigma_variant(get_string(cfg, "kernel.variant"));
    } catch (const ValidationError& e) {
      if (std::string(e.what()).starts_with("config field")) throw;
      field_error("kernel.variant", e.what());
    }
    const auto r = sigma_estimates(op, variant, so);
    o.payload["sigma"] = to_json(r);
    std::vector<std::vector<double>> table;
    for (std::size_t i = 0; i < r.sigmas.size(); ++i) table.push_back({r.sigmas[i], r.radii[i], r.suprema[i]});
    add_table(o, "sigma.csv", {"sigma", "radius", "sup"}, table);
    add_curve(o, "sigma.dat", "sampled sup per sigma", "sigma", "sup", r.sigmas, r.suprema);
    o.provenance.push_back("sigma suprema are maxima over sampled (x, y, z) and are lower bounds");
    o.summary.push_back("sigma estimates (" + to_string(r.variant) + "): flatness " + fmt(r.flatness));
  } else {
    field_error("kernel.mode", "expected synthesize, decay, log or sigma, got '" + mode + "'");
  }
  return o;
}

Outcome cmd_norms(const Context& c) {
  const Json& cfg = c.config;
  const GridSpec g = config_grid(cfg);
  Outcome o;
  const GridFunction f = input_function(cfg, g, o);
  Json norms = Json::array();
  for (double p : get_doubles(cfg, "norms.p")) {
    if (!(p >= 1.0)) field_error("norms.p", "exponents must be >= 1");
    norms.push_back(to_json(lp_norm(f, p)));
  }
  for (double p : get_doubles(cfg, "norms.weak_p")) {
    if (!(p >= 1.0) || std::isinf(p)) field_error("norms.weak_p", "exponents must be finite and >= 1");
    norms.push_back(to_json(weak_lp(f, p)));
  }
  if (get_bool(cfg, "norms.bmo")) norms.push_back(to_json(bmo_norm(f)));
  o.payload["grid"] = g.sizes();
  o.payload["norms"] = norms;
  if (get_bool(cfg, "norms.maximal")) {
    const GridFunction mf = maximal_function(f);
    o.payload["maximal_sup"] = number(lp_norm(mf, INFINITY).value);
    o.payload["maximal_l1"] = number(lp_norm(mf, 1.0).value);
    attach_grid(o, c, "maximal", "maximal.csv", mf);
    if (g.dim() == 1) {
      std::vector<double> xs, fy, my;
      for (std::size_t i = 0; i < f.size(); ++i) {
        xs.push_back(g.point(i)[0]);
        fy.push_back(std::abs(f[i]));
        my.push_back(mf[i].real());
      }
      add_curve(o, "abs_f.dat", "|f|", "x", "abs_f", xs, fy);
      add_curve(o, "maximal.dat", "Mf (dyadic balls)", "x", "Mf", xs, my);
    }
  }
  o.provenance = {"BMO and the maximal function use grid-centred balls with dyadic radii"};
  for (const auto& n : norms) {
    std::string label = n["kind"].get<std::string>();
    if (n["kind"] != "BMO") label += "(p=" + (n["p"].is_string() ? n["p"].get<std::string>() : fmt(n["p"].get<double>())) + ")";
    o.summary.push_back(label + " = " + fmt(to_double(n["value"])));
  }
  return o;
}

Outcome cmd_cz(const Context& c) {
  const Json& cfg = c.config;
  const GridSpec g = config_grid(cfg);
  Outcome o;
  const GridFunction f = input_function(cfg, g, o);
  const double lambda = get_double(cfg, "cz.lambda");
  const CZDecomposition d = [&] {
    try {
      return cz_decompose(f, lambda);
    } catch (const ValidationError& e) {
      field_error("cz.lambda", e.what());
    }
  }();
  const Json input = o.payload["input"];
  o.payload = to_json(d);
  o.payload["input"] = input;
  o.payload["grid"] = g.sizes();
  GridFunction bad = GridFunction::zeros(g);
  for (const auto& b : d.bad)
    for (std::size_t k = 0; k < b.cube.indices.size(); ++k) bad[b.cube.indices[k]] += b.values[k];
  attach_grid(o, c, "good_values", "good.csv", d.good);
  attach_grid(o, c, "bad_values", "bad.csv", bad);
  o.provenance = {"cubes are dyadic on the grid; corners and sides are in cells"};
  o.summary.push_back(std::to_string(d.bad.size()) + " cubes at lambda = " + fmt(lambda) + ", |Omega| = " +
                      fmt(d.omega_measure) + ", max |g| = " + fmt(lp_norm(d.good, INFINITY).value));
  return o;
}

Outcome cmd_sweep(const Context& c) {
  const Json& cfg = c.config;
  const int dim = config_dim(cfg);
  const SymbolChoice s = resolve_symbol(cfg);
  if (!s.family) field_error("symbol", "sweep needs a family: bessel(m), wainger(a, b) or exotic(m, d, c)");
  const double p = get_double(cfg, "sweep.p");
  if (!(p > 1.0)) field_error("sweep.p", "must exceed 1");
  auto orders = get_doubles(cfg, "sweep.orders");
  const double critical = s.family->nominal.lp_order(p, dim);
  if (orders.empty()) {
    const double off = get_double(cfg, "sweep.offset");
    orders = {critical - off, critical + off};
  }
  SweepOptions so;
  so.dim = dim;
  so.bound.trials = static_cast<std::size_t>(get_int(cfg, "sweep.trials"));
  so.bound.seed = get_u64(cfg, "seed");
  so.bound.ascent_steps = get_int(cfg, "sweep.ascent_steps");
  const auto truncations = get_ints(cfg, "sweep.truncations");
  const auto r = threshold_sweep(*s.family, p, orders, truncations, so);

  Outcome o;
  o.payload = to_json(r);
  o.payload["critical_order"] = number(critical);
  std::vector<std::string> header{"m"};
  for (int n : truncations) header.push_back("N=" + std::to_string(n));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    std::vector<double> row{orders[i]};
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < truncations.size(); ++j) {
      row.push_back(r.estimates[i][j].value);
      xs.push_back(truncations[j]);
      ys.push_back(r.estimates[i][j].value);
    }
    rows.push_back(row);
    add_curve(o, "sweep_m" + std::to_string(i) + ".dat", "m = " + fmt(orders[i]), "N", "lower_bound", xs, ys);
    o.summary.push_back("m = " + fmt(orders[i]) + ": slope " + fmt(r.slopes[i]) + " (" + r.classification[i] + ")");
  }
  add_table(o, "sweep.csv", header, rows);
  o.provenance = {"norm values are certified lower bounds from sampled trial functions",
                  "growth slopes are fitted on log N over the listed truncations"};
  return o;
}

OperatorFamily experiment_family(const Json& cfg) {
  const int dim = config_dim(cfg);
  SymbolChoice s = resolve_symbol(cfg);
  OperatorFamily fam;
  if (s.family) {
    fam = pdo_family(*s.family, dim);
  } else {
    const auto expr = *s.expr;
    const auto params = s.params;
    const auto nominal = s.nominal;
    fam = {expr.print(),
           [expr, params, nominal, dim](const GridSpec& g) -> OperatorPtr {
             return std::make_shared<PdoOperator>(dsl::Symbol::analytic(expr, dim, params), g, nominal);
           },
           nominal};
  }
  const Json& shift = at(cfg, "experiment.bessel_shift");
  if (!shift.is_null()) {
    double sh = 0.0;
    if (shift.is_string() && shift.get<std::string>() == "endpoint") {
      if (!fam.nominal) field_error("experiment.bessel_shift", "'endpoint' needs a nominal class");
      sh = fam.nominal->endpoint_order(dim) - fam.nominal->m();
    } else {
      sh = get_double(cfg, "experiment.bessel_shift");
    }
    fam = bessel_left(fam, sh);
  }
  if (get_bool(cfg, "experiment.adjoint")) fam = adjoint_family(fam);
  return fam;
}

ExperimentOptions experiment_options(const Json& cfg) {
  ExperimentOptions e;
  e.truncations = get_ints(cfg, "experiment.truncations");
  e.dim = config_dim(cfg);
  e.trials = static_cast<std::size_t>(get_int(cfg, "experiment.trials"));
  e.seed = get_u64(cfg, "seed");
  e.lambda_grid = get_doubles(cfg, "experiment.lambda_grid");
  e.atom_radii = get_doubles(cfg, "experiment.atom_radii");
  e.unit_scale = get_double(cfg, "experiment.unit_scale");
  return e;
}

void ratio_outputs(Outcome& o, const std::vector<TruncationResult>& results) {
  if (results.empty()) return;
  std::vector<std::string> header{"trial"};
  for (const auto& r : results) {
    std::string h = "N=";
    for (std::size_t k = 0; k < r.truncation.size(); ++k) h += (k ? "x" : "") + std::to_string(r.truncation[k]);
    header.push_back(h);
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t t = 0; t < results.front().ratios.size(); ++t) {
    std::vector<double> row{double(t)};
    for (const auto& r : results) row.push_back(t < r.ratios.size() ? r.ratios[t] : NAN);
    rows.push_back(row);
  }
  add_table(o, "ratios.csv", header, rows);
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    xs.push_back(r.truncation.front());
    ys.push_back(r.max_ratio);
  }
  add_curve(o, "max_ratio.dat", "max ratio per truncation", "N", "max_ratio", xs, ys);
}

Outcome cmd_experiment(const Context& c, const std::string& kind) {
  const Json& cfg = c.config;
  const OperatorFamily fam = experiment_family(cfg);
  const ExperimentOptions eo = experiment_options(cfg);
  Outcome o;
  o.provenance = {"ratios are maxima over sampled trial functions: lower bounds for the operator constants"};
  if (kind == "weak11") {
    const auto r = weak11_experiment(fam, eo);
    o.payload = to_json(r);
    if (fam.nominal) o.payload["hypothesis"] = to_json(weak11_hypothesis(*fam.nominal, eo.dim));
    ratio_outputs(o, r.results);
    o.summary.push_back("weak-(1,1) ratio change under refinement: " + fmt(r.relative_change));
  } else {
    const auto r = kind == "bmo" ? linf_bmo_experiment(fam, eo) : h1_l1_experiment(fam, eo);
    o.payload = to_json(r);
    ratio_outputs(o, r.results);
    if (!r.radii.empty()) add_curve(o, "radius_max.dat", "max ratio per atom radius", "radius", "max_ratio", r.radii, r.radius_max);
    o.summary.push_back(kind + " ratio change under refinement: " + fmt(r.relative_change));
  }
  o.payload["nominal"] = fam.nominal ? to_json(*fam.nominal) : Json(nullptr);
  for (const auto& w : o.payload["warnings"]) o.summary.push_back("warning: " + w.get<std::string>());
  return o;
}

Outcome cmd_admissible(const Context& c) {
  const Json& cfg = c.config;
  const int dim = config_dim(cfg);
  const ClassParams params = [&] {
    try {
      return ClassParams(get_double(cfg, "admissible.m"), get_double(cfg, "admissible.rho"),
                         get_double(cfg, "admissible.delta"));
    } catch (const ValidationError& e) {
      if (std::string(e.what()).starts_with("config field")) throw;
      field_error("admissible", e.what());
    }
  }();
  const double p = get_double(cfg, "admissible.p");
  const double q = get_double(cfg, "admissible.q");
  const auto r = [&] {
    try {
      return lp_lq_admissibility(params, p, q, dim);
    } catch (const ValidationError& e) {
      field_error("admissible", e.what());
    }
  }();
  Outcome o;
  o.payload = to_json(r);
  o.payload["m_star"] = number(r.threshold + 0.0);
  o.summary.push_back("m* = " + fmt(r.threshold) + " (case " + std::string(1, r.primary) + "); m = " + fmt(params.m()) +
                      (r.admissible ? " is admissible" : " is not admissible"));
  return o;
}

// ---- command table ----------------------------------------------------------------

enum class FlagKind { Value, List, Switch };

struct Flag {
  std::string name;
  std::string path;
  FlagKind kind;
  std::string help;
  std::string value;
  bool on = false;
};

struct Command {
  std::string name;
  std::string help;
  std::function<Outcome(const Context&)> handler;
  std::vector<Flag> flags;
};

std::vector<Command> commands() {
  const Flag input{"input", "input.file", FlagKind::Value, "grid-function CSV (index,real,imag)", {}};
  const Flag generator{"generator", "input.generator", FlagKind::Value, "expression in x used when no input file is given", {}};
  const Flag truncations{"truncations", "experiment.truncations", FlagKind::List, "grid sizes N[,N...]", {}};
  const Flag trials{"trials", "experiment.trials", FlagKind::Value, "trial functions per truncation", {}};
  const Flag shift{"bessel-shift", "experiment.bessel_shift", FlagKind::Value, "compose J^s on the left; 'endpoint' moves the order to the endpoint order", {}};
  const Flag adjoint{"adjoint", "experiment.adjoint", FlagKind::Switch, "use the adjoint operator", {}};
  return {
      {"symbol-class", "fit the class exponents (m, rho, delta) of a symbol", cmd_symbol_class,
       {{"shell-lo", "symbol_class.shell_lo", FlagKind::Value, "inner bracket of the first shell", {}},
        {"shell-hi", "symbol_class.shell_hi", FlagKind::Value, "outer bracket of the last shell", {}},
        {"max-order", "symbol_class.max_order", FlagKind::Value, "largest |alpha| and |beta| examined", {}}}},
      {"quantize", "apply Op(p) to an input or generated grid function", cmd_quantize, {input, generator}},
      {"kernel", "Schwartz kernel synthesis and estimates", cmd_kernel,
       {{"mode", "kernel.mode", FlagKind::Value, "synthesize | decay | log | sigma", {}},
        {"exponent", "kernel.exponent", FlagKind::Value, "decay exponent N", {}},
        {"truncations", "kernel.truncations", FlagKind::List, "decay-scan truncations", {}},
        {"truncation", "kernel.truncation", FlagKind::Value, "log-check truncation", {}},
        {"variant", "kernel.variant", FlagKind::Value, "sigma variant a1 | a2 | b | c", {}},
        {"samples", "kernel.samples", FlagKind::Value, "sampled pairs for sigma estimates", {}}}},
      {"norms", "function-space norms of a grid function", cmd_norms,
       {input, generator, {"p", "norms.p", FlagKind::List, "L^p exponents", {}}}},
      {"cz", "Calderon-Zygmund decomposition at level lambda", cmd_cz,
       {input, generator, {"lambda", "cz.lambda", FlagKind::Value, "decomposition level", {}}}},
      {"sweep", "L^p threshold sweep over orders and truncations", cmd_sweep,
       {{"p", "sweep.p", FlagKind::Value, "exponent p", {}},
        {"orders", "sweep.orders", FlagKind::List, "orders m (default m*(p) -/+ offset)", {}},
        {"truncations", "sweep.truncations", FlagKind::List, "grid sizes", {}},
        {"trials", "sweep.trials", FlagKind::Value, "trial functions per class", {}}}},
      {"weak11", "weak-(1,1) experiment", [](const Context& c) { return cmd_experiment(c, "weak11"); },
       {truncations, trials, shift, adjoint,
        {"lambda-grid", "experiment.lambda_grid", FlagKind::List, "levels as multiples of ||f||_1", {}}}},
      {"bmo", "L^inf -> BMO experiment", [](const Context& c) { return cmd_experiment(c, "bmo"); },
       {truncations, trials, shift, adjoint}},
      {"h1l1", "H^1 -> L^1 experiment on atoms", [](const Context& c) { return cmd_experiment(c, "h1l1"); },
       {truncations, trials, shift, adjoint,
        {"atom-radii", "experiment.atom_radii", FlagKind::List, "atom radii", {}}}},
      {"admissible", "L^p -> L^q admissible order m*", cmd_admissible,
       {{"p", "admissible.p", FlagKind::Value, "source exponent", {}},
        {"q", "admissible.q", FlagKind::Value, "target exponent", {}},
        {"m", "admissible.m", FlagKind::Value, "order to test", {}},
        {"rho", "admissible.rho", FlagKind::Value, "rho", {}},
        {"delta", "admissible.delta", FlagKind::Value, "delta", {}}}},
  };
}

Json list_value(const std::string& text) {
  if (!text.empty() && text.front() == '[') return flag_value(text);
  Json a = Json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) a.push_back(flag_value(item));
  return a;
}

int fail(std::ostream& out, std::ostream& err, int code, const std::string& kind, const std::string& message) {
  out << Json{{"error", {{"exit_code", code}, {"kind", kind}, {"message", message}}}}.dump(2) << '\n';
  err << "error: " << message << '\n';
  return code;
}

void write_outputs(const std::filesystem::path& dir, const std::string& report, const Outcome& o) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + (dir / name).string() + "'");
    f << content;
  };
  Json names = Json::array();
  for (const auto& a : o.files) {
    write(a.name, a.content);
    names.push_back(a.name);
  }
  if (!o.files.empty()) write("manifest.json", Json{{"curves", o.curves}, {"files", names}}.dump(2) + "\n");
  write("report.json", report);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments with pseudo-differential operators on the torus"};
  app.name("tpdo");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, grid_text, symbol_text;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "master random seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads (0: runtime default)");
  app.add_option("--out", out_dir, "write report.json and data files to this directory");
  app.add_option("--grid", grid_text, "grid size N or N,N[,N]");
  app.add_option("--symbol", symbol_text, "symbol expression or family(args)");
  app.add_option("--set", sets, "override a config field: dotted.path=value")->take_all();

  auto table = commands();
  std::vector<std::pair<CLI::App*, Command*>> subs;
  for (auto& cmd : table) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    for (auto& f : cmd.flags) {
      if (f.kind == FlagKind::Switch)
        sub->add_flag("--" + f.name, f.on, f.help);
      else
        sub->add_option("--" + f.name, f.value, f.help);
    }
    subs.emplace_back(sub, &cmd);
  }

  // CLI11 reports a stray word as a missing subcommand; name it instead.
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.starts_with("-")) {
      static const std::vector<std::string> valued{"--config", "--seed", "--jobs", "--out", "--grid", "--symbol", "--set"};
      if (std::find(valued.begin(), valued.end(), a) != valued.end()) ++i;
      continue;
    }
    if (std::none_of(table.begin(), table.end(), [&](const Command& c) { return c.name == a; }))
      return fail(out, err, kExitValidation, "usage", "unknown command '" + a + "'");
    break;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return fail(out, err, kExitValidation, "usage", e.what());
  }

  Command* command = nullptr;
  CLI::App* sub = nullptr;
  for (auto& [s, c] : subs)
    if (s->parsed()) sub = s, command = c;
  if (!command) return fail(out, err, kExitValidation, "usage", "no command given");

  try {
    Json cfg = default_config();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot open config '" + config_path + "'");
      Json user;
      try {
        user = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw ValidationError("config '" + config_path + "' is not valid JSON: " + e.what());
      }
      merge_config(cfg, user);
    }
    if (seed_opt->count()) set_path(cfg, "seed", seed);
    if (jobs_opt->count()) set_path(cfg, "jobs", jobs);
    if (!grid_text.empty()) {
      const Json g = list_value(grid_text);
      set_path(cfg, "grid", g);
      if (g.size() > 1) set_path(cfg, "dim", g.size());
    }
    if (!symbol_text.empty()) set_path(cfg, "symbol", symbol_text);
    for (const auto& f : command->flags) {
      if (f.kind == FlagKind::Switch) {
        if (f.on) set_path(cfg, f.path, true);
      } else if (sub->get_option("--" + f.name)->count()) {
        set_path(cfg, f.path, f.kind == FlagKind::List ? list_value(f.value) : flag_value(f.value));
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects PATH=VALUE, got '" + s + "'");
      set_path(cfg, s.substr(0, eq), flag_value(s.substr(eq + 1)));
    }
    config_dim(cfg);
    get_u64(cfg, "seed");
    const int threads = get_int(cfg, "jobs");
    if (threads < 0) field_error("jobs", "must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);

    const Context ctx{cfg, !out_dir.empty()};
    const Outcome o = command->handler(ctx);

    ReportEnvelope env;
    env.version = kVersion;
    env.timestamp = utc_timestamp();
    env.command = command->name;
    env.config = cfg;
    env.payload = o.payload;
    env.provenance = o.provenance;
    const std::string report = to_json(env).dump(2) + "\n";
    if (out_dir.empty()) {
      out << report;
      for (const auto& line : o.summary) err << line << '\n';
    } else {
      write_outputs(out_dir, report, o);
      for (const auto& line : o.summary) out << line << '\n';
      out << "wrote " << o.files.size() + 1 + (o.files.empty() ? 0 : 1) << " files to " << out_dir << '\n';
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    return fail(out, err, kExitValidation, "validation", e.what());
  } catch (const NumericalError& e) {
    return fail(out, err, kExitNumerical, "numerical", e.what());
  } catch (const Json::exception& e) {
    return fail(out, err, kExitValidation, "validation", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(out, err, kExitValidation, "io", e.what());
  } catch (const std::exception& e) {
    return fail(out, err, kExitNumerical, "numerical", e.what());
  }
}

}  // namespace tpdo::cli
