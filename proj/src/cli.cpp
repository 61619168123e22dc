#include "xfg/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "xfg/config.hpp"
#include "xfg/discrete_sobolev.hpp"
#include "xfg/errors.hpp"
#include "xfg/field_io.hpp"
#include "xfg/functionals.hpp"
#include "xfg/gamma_lab.hpp"
#include "xfg/integrands.hpp"
#include "xfg/kernels.hpp"
#include "xfg/vector_fields.hpp"

namespace xfg::cli {

namespace {

using config::Json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string join(std::span<const double> v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + num(v[i]);
  return s;
}

std::string header(std::string_view prefix, int count) {
  std::string s;
  for (int i = 1; i <= count; ++i) s += (i > 1 ? "," : "") + std::string(prefix) + std::to_string(i);
  return s;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = text.find(sep, start);
    out.emplace_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

/// "1,0;0,x1" -> [["1","0"],["0","x1"]]
Json matrix_flag(const std::string& text) {
  Json rows = Json::array();
  for (const auto& row : split(text, ';')) {
    Json r = Json::array();
    for (const auto& e : split(row, ',')) r.push_back(e);
    rows.push_back(r);
  }
  return rows;
}

Json list_flag(const std::string& text, const char* what) { return Json(config::number_list(text, what)); }

/// Command-line values layered over the config file.
struct Flags {
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  double tol = 0.0;
  int threads = 1;

  std::string family, lo, hi, coeff, x, kind, f, fe, a, u, eps, interior_lo, interior_hi, sub_lo, sub_hi, xi,
      eta, args, dirichlet, target, method, format;
  int n = 0, m = 0, nodes = 0, lattice = 0, max_iters = 0;
  double p = 0, c0 = 0, c1 = 0, tether = 0, grad_tol = 0;

  std::map<std::string, CLI::Option*> opt;
  bool has(const std::string& name) const {
    const auto it = opt.find(name);
    return it != opt.end() && it->second->count() > 0;
  }
};

Json& object_at(Json& root, const char* key) {
  Json& j = root[key];
  if (j.is_string()) j = Json{{"kind", j.get<std::string>()}};
  if (!j.is_object()) j = Json::object();
  return j;
}

Json merged_config(const Flags& fl) {
  Json root = fl.has("--config") ? config::load(fl.config_path) : Json::object();
  if (!root.is_object()) throw ConfigError("config /: expected an object");

  if (fl.has("--family")) {
    if (root.contains("family") && root["family"].is_object())
      root["family"]["kind"] = fl.family;
    else
      root["family"] = fl.family;
  }
  if (fl.has("--n") || fl.has("--m") || fl.has("--coeff") || fl.has("--lo") || fl.has("--hi")) {
    Json& fam = object_at(root, "family");
    if (fl.has("--n")) fam["n"] = fl.n;
    if (fl.has("--m")) fam["m"] = fl.m;
    if (fl.has("--coeff")) fam["coeff"] = matrix_flag(fl.coeff);
    if (fl.has("--lo") || fl.has("--hi")) {
      if (!fl.has("--lo") || !fl.has("--hi")) throw ConfigError("--lo and --hi go together");
      fam["box"] = {{"lo", list_flag(fl.lo, "--lo")}, {"hi", list_flag(fl.hi, "--hi")}};
    }
  }
  auto integrand_flags = [&](const char* key, const std::string& expr, bool has_expr) {
    if (!(has_expr || fl.has("--kind") || fl.has("--a") || fl.has("--p") || fl.has("--c0") || fl.has("--c1"))) return;
    Json& j = object_at(root, key);
    if (has_expr) j["f"] = expr;
    if (fl.has("--a")) j["a"] = matrix_flag(fl.a);
    if (fl.has("--kind")) j["kind"] = fl.kind;
    if (!j.contains("kind")) j["kind"] = j.contains("a") ? "quadratic" : "general";
    if (fl.has("--p")) j["p"] = fl.p;
    if (fl.has("--c0")) j["c0"] = fl.c0;
    if (fl.has("--c1")) j["c1"] = fl.c1;
  };
  integrand_flags("integrand", fl.f, fl.has("--f"));
  integrand_flags("fe", fl.fe, fl.has("--fe"));
  if (fl.has("--nodes")) object_at(root, "grid")["nodes"] = fl.nodes;
  if (fl.has("--x")) root["x"] = list_flag(fl.x, "--x");
  if (fl.has("--u")) root["u"] = fl.u;
  if (fl.has("--eps")) root["eps"] = list_flag(fl.eps, "--eps");
  if (fl.has("--interior-lo") || fl.has("--interior-hi"))
    root["interior"] = {{"lo", list_flag(fl.interior_lo, "--interior-lo")},
                        {"hi", list_flag(fl.interior_hi, "--interior-hi")}};
  if (fl.has("--sub-lo") || fl.has("--sub-hi"))
    root["subdomain"] = {{"lo", list_flag(fl.sub_lo, "--sub-lo")}, {"hi", list_flag(fl.sub_hi, "--sub-hi")}};
  if (fl.has("--xi")) root["xi"] = fl.xi;
  if (fl.has("--eta")) root["eta"] = fl.eta;
  if (fl.has("--args")) root["args"] = fl.args;
  if (fl.has("--lattice")) root["lattice"] = fl.lattice;
  if (fl.has("--p")) root["p"] = fl.p;
  if (fl.has("--dirichlet")) object_at(root, "problem")["dirichlet"] = fl.dirichlet;
  if (fl.has("--target")) object_at(root, "problem")["target"] = fl.target;
  if (fl.has("--tether")) object_at(root, "problem")["tether"] = fl.tether;
  if (fl.has("--max-iters")) root["max_iters"] = fl.max_iters;
  if (fl.has("--grad-tol")) root["grad_tol"] = fl.grad_tol;
  if (fl.has("--method")) root["method"] = fl.method;
  if (fl.has("--format")) root["format"] = fl.format;
  if (fl.has("--seed")) root["seed"] = fl.seed;
  if (fl.has("--tol")) root["tol"] = fl.tol;
  if (fl.has("--threads")) root["threads"] = fl.threads;
  return root;
}

// ---------------------------------------------------------------------------

struct Context {
  Json root;
  std::string out_dir;
  std::ostream& out;
  std::ostream& err;

  const Json& need(const char* key) const {
    const Json* j = config::find(root, key);
    if (!j) throw ConfigError(std::string("config /") + key + ": missing required value (flag or config)");
    return *j;
  }
  double number(const char* key, double fallback) const {
    const Json* j = config::find(root, key);
    return j ? config::get_number(*j, std::string("/") + key) : fallback;
  }
  int integer(const char* key, int fallback) const {
    const Json* j = config::find(root, key);
    return j ? config::get_int(*j, std::string("/") + key) : fallback;
  }
  std::string text(const char* key, std::string fallback) const {
    const Json* j = config::find(root, key);
    return j ? config::get_string(*j, std::string("/") + key) : fallback;
  }
  std::uint64_t seed() const {
    const Json* j = config::find(root, "seed");
    if (!j) return 0;
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0))
      throw ConfigError("config /seed: expected a non-negative integer");
    return j->get<std::uint64_t>();
  }
  int threads() const {
    const int t = integer("threads", 1);
    if (t < 0) throw ConfigError("config /threads: expected a non-negative integer");
    return t;
  }

  VectorFieldFamily family() const { return config::family(need("family"), "/family"); }
  Integrand integrand(const VectorFieldFamily& fam) const {
    return config::integrand(need("integrand"), "/integrand", fam);
  }
  EuclideanIntegrand fe(const VectorFieldFamily& fam) const { return config::euclidean_integrand(need("fe"), "/fe", fam); }
  Grid grid(const VectorFieldFamily& fam, int default_nodes) const {
    const Json* g = config::find(root, "grid");
    if (!g) return Grid::uniform(fam.domain(), default_nodes);
    return config::grid(*g, "/grid", fam.domain());
  }
  std::vector<double> point(const char* key, int n) const {
    const auto x = config::get_numbers(need(key), std::string("/") + key);
    if (static_cast<int>(x.size()) != n)
      throw ConfigError(std::string("config /") + key + ": expected " + std::to_string(n) + " coordinates");
    return x;
  }
  Subdomain subdomain(const char* key, const Grid& g) const {
    const Json* j = config::find(root, key);
    return Subdomain{j ? config::box(*j, std::string("/") + key) : g.box()};
  }
  ScalarField field(const Grid& g) const {
    const std::string text = config::get_string(need("u"), "/u");
    try {
      return ScalarField::from_expression(g, text);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config /u: ") + e.what());
    }
  }
  std::vector<std::vector<double>> vectors(const char* key, int dim) const {
    std::vector<std::vector<double>> out;
    const Json& j = need(key);
    if (j.is_string()) {
      for (const auto& part : split(j.get<std::string>(), ';')) out.push_back(config::number_list(part, key));
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(config::get_numbers(j[i], std::string("/") + key + "/" + std::to_string(i)));
    } else {
      throw ConfigError(std::string("config /") + key + ": expected vectors");
    }
    for (const auto& v : out)
      if (static_cast<int>(v.size()) != dim)
        throw ConfigError(std::string("config /") + key + ": expected vectors of dimension " + std::to_string(dim));
    return out;
  }

  std::filesystem::path output(const std::string& name) const {
    std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
  }
};

void print_report(std::ostream& out, const std::string& name, const CheckReport& r) {
  out << "check: " << name << "\n";
  out << "samples: " << r.samples_tested << "\n";
  out << "skipped: " << r.skipped << "\n";
  out << "violations: " << r.violations << "\n";
  out << "worst_residual: " << num(r.worst_residual) << "\n";
  out << "witness_x: " << join(r.worst_x, " ") << "\n";
  out << "witness_arg: " << join(r.worst_arg, " ") << "\n";
  if (r.lic_warning) out << "lic_warning: yes\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "result: " << (r.passed ? "PASS" : "FAIL") << "\n";
}

SampleSpec samples(const Context& ctx, const VectorFieldFamily& fam, int arg_dim, const char* default_args) {
  SampleSpec s;
  s.xs = lattice_points(fam.domain(), ctx.integer("lattice", 17));
  const std::string mode = ctx.text("args", default_args);
  if (mode == "basis")
    s.args = basis_arguments(arg_dim);
  else if (mode == "default")
    s.args = default_arguments(arg_dim, ctx.seed());
  else
    throw ConfigError("config /args: expected 'basis' or 'default'");
  s.threads = ctx.threads();
  return s;
}

int cmd_lic_scan(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Grid g = ctx.grid(fam, 21);
  const LicReport r = lic_scan(fam, g, ctx.number("tol", kRankTolerance));
  ctx.out << "family,total_samples,degenerate_samples,degenerate_fraction,min_singular_value\n";
  ctx.out << fam.id() << "," << r.total_samples << "," << r.degenerate_samples << "," << num(r.degenerate_fraction)
          << "," << num(r.min_singular_value) << "\n";
  if (!ctx.out_dir.empty()) {
    std::ofstream f(ctx.output("lic_scan_locations.csv"), std::ios::binary);
    f << header("x", fam.n()) << "\n";
    for (const auto& x : r.degenerate_locations) f << join(x) << "\n";
  }
  return kSuccess;
}

int cmd_project(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const auto x = ctx.point("x", fam.n());
  const Matrix pi = horizontal_projection(fam, x, ctx.number("tol", kRankTolerance));
  ctx.out << header("c", fam.n()) << "\n";
  for (Eigen::Index r = 0; r < pi.rows(); ++r) {
    for (Eigen::Index c = 0; c < pi.cols(); ++c) ctx.out << (c ? "," : "") << num(pi(r, c));
    ctx.out << "\n";
  }
  return kSuccess;
}

int cmd_lift(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Integrand f = ctx.integrand(fam);
  const EuclideanIntegrand fe = lift_to_euclidean(f, fam);
  const auto x = ctx.point("x", fam.n());
  coefficient_matrix(fam, x);  // domain check
  ctx.out << header("x", fam.n()) << "," << header("xi", fam.n()) << ",f_e\n";
  for (const auto& xi : ctx.vectors("xi", fam.n()))
    ctx.out << join(x) << "," << join(xi) << "," << num(evaluate(fe, x, xi)) << "\n";
  return kSuccess;
}

int cmd_lower(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const EuclideanIntegrand fe = ctx.fe(fam);
  const double tol = ctx.number("tol", kRankTolerance);
  const Integrand f = lower_to_x(fe, fam, tol);
  const auto x = ctx.point("x", fam.n());
  if (is_degenerate(coefficient_matrix(fam, x), tol))
    ctx.err << "warning: C(x) is degenerate at " << format_point(x) << "; the lowered integrand is 0 there\n";
  ctx.out << header("x", fam.n()) << "," << header("eta", fam.m()) << ",f\n";
  for (const auto& eta : ctx.vectors("eta", fam.m()))
    ctx.out << join(x) << "," << join(eta) << "," << num(evaluate(f, x, eta)) << "\n";
  return kSuccess;
}

int cmd_check_compat(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const EuclideanIntegrand fe = ctx.fe(fam);
  const CheckReport r = compatibility_check(fe, fam, samples(ctx, fam, fam.n(), "basis"), ctx.number("tol", 1e-10));
  ctx.out << "family: " << fam.id() << "\n";
  ctx.out << "integrand: " << fe.id() << "\n";
  print_report(ctx.out, "compatibility", r);
  return r.passed ? kSuccess : kCheckFailed;
}

int cmd_check_class(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Integrand f = ctx.integrand(fam);
  const SampleSpec s = samples(ctx, fam, fam.m(), "default");
  const double tol = ctx.number("tol", 1e-10);
  const CheckReport bounds = class_bounds_check(f, s, tol);
  const CheckReport convex = convexity_check(f, s, tol);
  ctx.out << "family: " << fam.id() << "\n";
  ctx.out << "integrand: " << f.id() << "\n";
  ctx.out << "p: " << num(f.bounds().p) << "\nc0: " << num(f.bounds().c0) << "\nc1: " << num(f.bounds().c1) << "\n";
  print_report(ctx.out, "growth_bounds", bounds);
  print_report(ctx.out, "convexity", convex);
  return bounds.passed && convex.passed ? kSuccess : kCheckFailed;
}

int cmd_eval(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const FunctionalSpec spec(ctx.integrand(fam), fam);
  const Grid g = ctx.grid(fam, 33);
  const ScalarField u = ctx.field(g);
  const CellBlock block = snap(g, ctx.subdomain("subdomain", g));
  const double value = evaluate_functional(spec, u, block, ctx.threads());
  double h = 0.0;
  for (double s : g.spacings()) h = std::max(h, s);
  ctx.out << "value,cells,h,integrand,family\n";
  ctx.out << num(value) << "," << block.cell_count() << "," << num(h) << "," << spec.integrand.id() << ","
          << fam.id() << "\n";
  return kSuccess;
}

int cmd_norms(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Grid g = ctx.grid(fam, 33);
  const ScalarField u = ctx.field(g);
  const double p = ctx.number("p", 2.0);
  const CellBlock block = snap(g, ctx.subdomain("subdomain", g));
  const SobolevXNorm parts = sobolev_x_parts(u, fam, p, block, ctx.threads());
  ctx.out << "lp_norm";
  for (int j = 1; j <= fam.m(); ++j) ctx.out << ",X" << j << "u_norm";
  ctx.out << ",sobolev_x_norm\n";
  ctx.out << num(parts.lp) << "," << join(parts.derivatives) << "," << num(parts.total) << "\n";
  return kSuccess;
}

int cmd_mollify_check(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Grid g = ctx.grid(fam, 201);
  const ScalarField u = ctx.field(g);
  const auto eps = config::get_numbers(ctx.need("eps"), "/eps");
  const Subdomain interior{config::box(ctx.need("interior"), "/interior")};
  const MollifierReport r = mollifier_approx_check(u, fam, eps, interior, ctx.number("p", 2.0), ctx.threads());
  ctx.out << "eps,error\n";
  for (std::size_t i = 0; i < r.eps.size(); ++i) ctx.out << num(r.eps[i]) << "," << num(r.errors[i]) << "\n";
  for (const auto& w : r.warnings) ctx.err << "warning: " << w << "\n";
  if (!r.monotone) ctx.err << "errors do not decrease monotonically\n";
  return r.monotone ? kSuccess : kCheckFailed;
}

int cmd_affine_residual(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Grid g = ctx.grid(fam, 33);
  const ScalarField u = ctx.field(g);
  const CellBlock block = snap(g, ctx.subdomain("subdomain", g));
  const AffineResidual r = x_affine_residual(u, fam, ctx.number("p", 2.0), block, ctx.threads());
  ctx.out << header("c", fam.m()) << ",residual\n";
  ctx.out << join(r.c_star) << "," << num(r.residual) << "\n";
  return kSuccess;
}

MinimizeOptions minimize_options(const Context& ctx) {
  MinimizeOptions opts;
  opts.max_iters = ctx.integer("max_iters", opts.max_iters);
  opts.grad_tol = ctx.number("grad_tol", opts.grad_tol);
  opts.seed = ctx.seed();
  opts.threads = ctx.threads();
  const std::string method = ctx.text("method", "automatic");
  if (method == "automatic") opts.method = MinimizeMethod::automatic;
  else if (method == "cg") opts.method = MinimizeMethod::conjugate_gradient;
  else if (method == "descent") opts.method = MinimizeMethod::descent;
  else throw ConfigError("config /method: expected automatic, cg or descent");
  if (opts.max_iters < 0) throw ConfigError("config /max_iters: expected a non-negative integer");
  if (!(opts.grad_tol > 0.0)) throw ConfigError("config /grad_tol: expected a positive number");
  return opts;
}

int cmd_minimize(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Grid g = ctx.grid(fam, 33);
  EnergyProblem problem =
      config::problem(ctx.need("problem"), "/problem", FunctionalSpec(ctx.integrand(fam), fam), g);
  const MinimizeResult r = minimize(problem, minimize_options(ctx));
  ctx.out << "energy,iterations,converged,lambda,method,residual\n";
  ctx.out << num(r.energy) << "," << r.iterations << "," << (r.converged ? 1 : 0) << "," << num(r.lambda) << ","
          << r.method << "," << num(r.residual) << "\n";
  if (r.untethered_degenerate)
    ctx.err << "warning: lambda = 0 on a family that degenerates in the subdomain; the minimum may not be unique\n";
  if (!r.converged) ctx.err << "warning: solver stopped before reaching grad_tol\n";
  if (!ctx.out_dir.empty()) {
    const std::string fmt = ctx.text("format", "csv");
    if (fmt != "csv" && fmt != "binary") throw ConfigError("config /format: expected csv or binary");
    write_field(ctx.output(fmt == "csv" ? "minimizer.csv" : "minimizer.bin"), r.u,
                fmt == "csv" ? FieldFormat::csv : FieldFormat::binary);
  }
  return kSuccess;
}

int cmd_gamma_study(const Context& ctx) {
  const VectorFieldFamily fam = ctx.family();
  const Json& hj = ctx.need("h_list");
  if (!hj.is_array()) throw ConfigError("config /h_list: expected an array of integers");
  std::vector<int> h_list;
  for (std::size_t i = 0; i < hj.size(); ++i) h_list.push_back(config::get_int(hj[i], "/h_list/" + std::to_string(i)));
  if (h_list.empty()) throw ConfigError("config /h_list: expected at least one value");
  const SequenceSpec seq = config::sequence(ctx.need("sequence"), "/sequence", fam, h_list);
  const Json& gj = ctx.need("grid");
  const GridRule rule = config::grid_rule(gj, "/grid");
  Box box = fam.domain();
  if (const Json* b = config::find(gj, "box")) box = config::box(*b, "/grid/box");
  const Grid probe(box, std::vector<int>(static_cast<std::size_t>(box.dim()), 2));
  EnergyProblem problem = config::problem(
      ctx.need("problem"), "/problem", FunctionalSpec(sequence_member(seq, fam.m(), h_list.front()), fam), probe);

  StudyOptions opts;
  opts.minimize = minimize_options(ctx);
  opts.gap_tolerance = ctx.number("gap_tolerance", opts.gap_tolerance);
  const GammaStudyReport r = gamma_min_study(seq, problem, rule, opts);

  std::ostringstream csv;
  csv << "h,cells,min_energy,wx_norm,gap,iterations\n";
  std::ostringstream plot;
  plot << "# h min_energy\n";
  for (const auto& row : r.rows) {
    csv << row.h << "," << row.cells << "," << num(row.min_energy) << "," << num(row.wx_norm) << "," << num(row.gap)
        << "," << row.iterations << "\n";
    plot << row.h << " " << num(row.min_energy) << "\n";
  }
  {
    std::ofstream f(ctx.output("gamma_study.csv"), std::ios::binary);
    f << csv.str();
    std::ofstream p(ctx.output("gamma_study_plot.dat"), std::ios::binary);
    p << plot.str();
  }
  ctx.out << csv.str();
  ctx.out << "reference: " << num(r.reference) << " (" << r.reference_kind << ")\n";
  if (r.gap_exponent) ctx.out << "gap_exponent: " << num(*r.gap_exponent) << "\n";
  ctx.out << "gaps_decreasing: " << (r.gaps_decreasing ? "yes" : "no") << "\n";
  ctx.out << "result: " << (r.converged ? "PASS" : "FAIL") << "\n";
  for (const auto& w : r.warnings) ctx.err << "warning: " << w << "\n";
  return r.converged ? kSuccess : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk experiments for integral functionals defined by families of vector fields", "xfg"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Flags fl;
  auto add = [&](const std::string& name, auto& target, const std::string& help) {
    fl.opt[name] = app.add_option(name, target, help);
  };
  add("--config", fl.config_path, "JSON experiment file");
  add("--out", fl.out_dir, "directory for report files");
  add("--seed", fl.seed, "64-bit seed for randomized samples");
  add("--tol", fl.tol, "check tolerance");
  add("--threads", fl.threads, "worker threads (0 = all cores)");
  add("--family", fl.family, "euclidean, grushin, heisenberg or custom");
  add("--n", fl.n, "dimension for euclidean/custom families");
  add("--m", fl.m, "number of fields for custom families");
  add("--coeff", fl.coeff, "custom C(x) rows, e.g. \"1,0;0,x1\"");
  add("--lo", fl.lo, "domain lower corner, comma separated");
  add("--hi", fl.hi, "domain upper corner, comma separated");
  add("--x", fl.x, "point, comma separated");
  add("--kind", fl.kind, "integrand kind: quadratic, autonomous, general");
  add("--f", fl.f, "X-frame integrand in x1.., eta1..");
  add("--fe", fl.fe, "Euclidean-frame integrand in x1.., xi1..");
  add("--a", fl.a, "quadratic coefficient rows, e.g. \"1,0;0,1\"");
  add("--p", fl.p, "growth exponent");
  add("--c0", fl.c0, "lower growth constant");
  add("--c1", fl.c1, "upper growth constant");
  add("--u", fl.u, "scalar field in x1..");
  add("--nodes", fl.nodes, "grid nodes per axis");
  add("--eps", fl.eps, "mollifier radii, decreasing, comma separated");
  add("--interior-lo", fl.interior_lo, "interior box lower corner");
  add("--interior-hi", fl.interior_hi, "interior box upper corner");
  add("--sub-lo", fl.sub_lo, "subdomain lower corner");
  add("--sub-hi", fl.sub_hi, "subdomain upper corner");
  add("--xi", fl.xi, "Euclidean arguments, ';' between vectors");
  add("--eta", fl.eta, "X-frame arguments, ';' between vectors");
  add("--args", fl.args, "sample arguments: basis or default");
  add("--lattice", fl.lattice, "sample lattice nodes per axis");
  add("--dirichlet", fl.dirichlet, "boundary data in x1..");
  add("--target", fl.target, "tether target in x1..");
  add("--tether", fl.tether, "tether strength lambda");
  add("--max-iters", fl.max_iters, "solver iteration cap");
  add("--grad-tol", fl.grad_tol, "solver tolerance");
  add("--method", fl.method, "automatic, cg or descent");
  add("--format", fl.format, "field output format: csv or binary");

  using Handler = int (*)(const Context&);
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"lic-scan", {"classify grid nodes by the rank of C(x)", cmd_lic_scan}},
      {"project", {"print the horizontal projection at --x", cmd_project}},
      {"lift", {"evaluate the Euclidean form of an X-frame integrand", cmd_lift}},
      {"lower", {"evaluate the X-frame form of a Euclidean integrand", cmd_lower}},
      {"check-compat", {"sampled compatibility check f_e(xi) = f_e(Pi xi)", cmd_check_compat}},
      {"check-class", {"growth bounds and convexity of an X-frame integrand", cmd_check_class}},
      {"eval", {"evaluate F(u, A) by midpoint quadrature", cmd_eval}},
      {"norms", {"W^{1,p}_X norm of u", cmd_norms}},
      {"mollify-check", {"mollifier approximation errors on an interior box", cmd_mollify_check}},
      {"affine-residual", {"distance of Xu from a constant", cmd_affine_residual}},
      {"minimize", {"minimize the energy with Dirichlet data", cmd_minimize}},
      {"gamma-study", {"convergence of minima along a sequence", cmd_gamma_study}},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, entry] : commands) handlers[app.add_subcommand(name, entry.first)] = entry.second;
  CLI::App* version = app.add_subcommand("version", "print the version");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  if (version->parsed()) {
    out << kVersion << "\n";
    return kSuccess;
  }
  try {
    Context ctx{merged_config(fl), fl.out_dir, out, err};
    ctx.threads();
    for (const auto& [sub, handler] : handlers)
      if (sub->parsed()) return handler(ctx);
    err << "usage error: no subcommand\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace xfg::cli
