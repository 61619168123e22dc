#include "xfg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xfg/errors.hpp"
#include "xfg/expression.hpp"

namespace xfg::config {

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& message) {
  throw ConfigError("config " + (path.empty() ? std::string("/") : path) + ": " + message);
}

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }

const Json& member(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  const Json* j = find(obj, key);
  if (!j) schema(child(path, key), "missing required value");
  return *j;
}

/// Number or expression string, as text for the expression parser.
std::string expression_text(const Json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return os.str();
  }
  schema(path, "expected a number or an expression string");
}

std::vector<std::vector<std::string>> expression_matrix(const Json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array of rows");
  std::vector<std::vector<std::string>> out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "/" + std::to_string(r);
    if (!j[r].is_array()) schema(rp, "expected an array");
    std::vector<std::string> row;
    for (std::size_t c = 0; c < j[r].size(); ++c) row.push_back(expression_text(j[r][c], rp + "/" + std::to_string(c)));
    out.push_back(std::move(row));
  }
  return out;
}

GrowthBounds bounds_of(const Json& j, const std::string& path, GrowthBounds fallback) {
  GrowthBounds b = fallback;
  if (const Json* v = find(j, "p")) b.p = get_number(*v, child(path, "p"));
  if (const Json* v = find(j, "c0")) b.c0 = get_number(*v, child(path, "c0"));
  if (const Json* v = find(j, "c1")) b.c1 = get_number(*v, child(path, "c1"));
  if (!(b.p > 1.0)) schema(child(path, "p"), "p must exceed 1");
  if (!(b.c0 >= 0.0 && b.c1 >= b.c0)) schema(path, "need 0 <= c0 <= c1");
  return b;
}

IntegrandKind kind_of(const Json& j, const std::string& path) {
  const std::string k = get_string(member(j, "kind", path), child(path, "kind"));
  if (k == "quadratic") return IntegrandKind::quadratic;
  if (k == "autonomous") return IntegrandKind::autonomous;
  if (k == "general") return IntegrandKind::general;
  schema(child(path, "kind"), "unknown integrand kind '" + k + "' (quadratic, autonomous, general)");
}

template <class Build>
auto build_integrand(const Json& j, const std::string& path, Build&& build) {
  if (!j.is_object()) schema(path, "expected an object");
  const IntegrandKind kind = kind_of(j, path);
  const GrowthBounds bounds = bounds_of(j, path, GrowthBounds{2.0, 0.0, 1.0});
  std::vector<std::vector<std::string>> a;
  std::string f;
  if (kind == IntegrandKind::quadratic)
    a = expression_matrix(member(j, "a", path), child(path, "a"));
  else
    f = get_string(member(j, "f", path), child(path, "f"));
  std::string id;
  if (const Json* v = find(j, "id")) id = get_string(*v, child(path, "id"));
  try {
    return build(kind, a, f, bounds, id);
  } catch (const ConfigError& e) {
    schema(path, e.what());
  }
}

}  // namespace

Json parse(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("; "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON: " + what);
  } catch (const Json::out_of_range& e) {
    std::string what = e.what();
    if (const auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(std::string(source) + ": malformed JSON: " + what);
  }
}

Json load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<double> number_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(v))
      throw ConfigError(std::string(what) + ": '" + std::string(item) + "' is not a number");
    out.push_back(v);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

const Json* find(const Json& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(path, "expected a finite number");
  return v;
}

int get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<int>();
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) schema(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

Box box(const Json& j, const std::string& path) {
  const auto lo = get_numbers(member(j, "lo", path), child(path, "lo"));
  const auto hi = get_numbers(member(j, "hi", path), child(path, "hi"));
  try {
    return Box(lo, hi);
  } catch (const ArgumentError& e) {
    schema(path, e.what());
  }
}

VectorFieldFamily family(const Json& j, const std::string& path) {
  std::string kind;
  const Json empty = Json::object();
  const Json& obj = j.is_string() ? empty : j;
  if (j.is_string())
    kind = j.get<std::string>();
  else
    kind = get_string(member(j, "kind", path), child(path, "kind"));

  int n = 0;
  if (kind == "grushin") n = 2;
  else if (kind == "heisenberg") n = 3;
  else if (kind == "euclidean" || kind == "custom") n = find(obj, "n") ? get_int(obj["n"], child(path, "n")) : (kind == "euclidean" ? 2 : 0);
  else schema(child(path, "kind"), "unknown family '" + kind + "' (euclidean, grushin, heisenberg, custom)");
  if (n < 1) schema(child(path, "n"), "n must be a positive integer");
  if (n > 3) schema(child(path, "n"), "n = " + std::to_string(n) + " is not supported (n <= 3)");

  Box domain = Box::cube(n, -1.0, 1.0);
  if (const Json* b = find(obj, "box")) {
    domain = box(*b, child(path, "box"));
    if (domain.dim() != n) schema(child(path, "box"), "box dimension differs from n = " + std::to_string(n));
  }
  try {
    if (kind == "euclidean") return VectorFieldFamily::euclidean(n, domain);
    if (kind == "grushin") return VectorFieldFamily::grushin(domain);
    if (kind == "heisenberg") return VectorFieldFamily::heisenberg(domain);
    const int m = get_int(member(obj, "m", path), child(path, "m"));
    if (m < 1 || m > n) schema(child(path, "m"), "need 1 <= m <= n");
    std::string id = "custom";
    if (const Json* v = find(obj, "id")) id = get_string(*v, child(path, "id"));
    return VectorFieldFamily::custom(m, n, domain, expression_matrix(member(obj, "coeff", path), child(path, "coeff")),
                                     id);
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with("config ")) throw;
    schema(child(path, "coeff"), e.what());
  } catch (const ArgumentError& e) {
    schema(path, e.what());
  }
}

Integrand integrand(const Json& j, const std::string& path, const VectorFieldFamily& fam) {
  return build_integrand(j, path, [&](IntegrandKind kind, const auto& a, const std::string& f, GrowthBounds b,
                                      std::string id) {
    return integrand_from_expression(kind, fam.m(), fam.n(), a, f, b, std::move(id));
  });
}

EuclideanIntegrand euclidean_integrand(const Json& j, const std::string& path, const VectorFieldFamily& fam) {
  return build_integrand(j, path, [&](IntegrandKind kind, const auto& a, const std::string& f, GrowthBounds b,
                                      std::string id) {
    return euclidean_integrand_from_expression(kind, fam.n(), a, f, b, std::move(id));
  });
}

Grid grid(const Json& j, const std::string& path, const Box& fallback) {
  if (!j.is_object()) schema(path, "expected an object");
  Box b = fallback;
  if (const Json* v = find(j, "box")) b = box(*v, child(path, "box"));
  std::vector<int> res;
  if (const Json* v = find(j, "resolution")) {
    if (!v->is_array()) schema(child(path, "resolution"), "expected an array of integers");
    for (std::size_t i = 0; i < v->size(); ++i) res.push_back(get_int((*v)[i], child(path, "resolution") + "/" + std::to_string(i)));
  } else if (const Json* v = find(j, "nodes")) {
    res.assign(static_cast<std::size_t>(b.dim()), get_int(*v, child(path, "nodes")));
  } else {
    schema(path, "expected 'nodes' or 'resolution'");
  }
  try {
    return Grid(b, res);
  } catch (const ArgumentError& e) {
    schema(path, e.what());
  }
}

GridRule grid_rule(const Json& j, const std::string& path) {
  GridRule rule;
  if (const Json* v = find(j, "cells")) rule.cells = get_int(*v, child(path, "cells"));
  if (const Json* v = find(j, "cells_per_period")) rule.cells_per_period = get_int(*v, child(path, "cells_per_period"));
  if (rule.cells <= 0 && rule.cells_per_period <= 0)
    schema(path, "expected a positive 'cells' or 'cells_per_period'");
  return rule;
}

SequenceSpec sequence(const Json& j, const std::string& path, const VectorFieldFamily& fam, std::vector<int> h_list) {
  SequenceSpec seq;
  seq.h_list = std::move(h_list);
  const std::string kind = get_string(member(j, "kind", path), child(path, "kind"));
  const int m = fam.m();
  try {
    if (kind == "oscillating_quadratic") {
      seq.kind = SequenceKind::oscillating_quadratic;
      seq.bounds = bounds_of(j, path, GrowthBounds{2.0, 0.0, 1.0});
      if (seq.bounds.p != 2.0) schema(child(path, "p"), "oscillating quadratic sequences have p = 2");
      if (const Json* tp = find(j, "two_phase")) {
        const std::string tpath = child(path, "two_phase");
        if (m != 1 || fam.n() != 1) schema(tpath, "two-phase media are one-dimensional");
        const double alpha = get_number(member(*tp, "alpha", tpath), child(tpath, "alpha"));
        const double beta = get_number(member(*tp, "beta", tpath), child(tpath, "beta"));
        const double theta = find(*tp, "theta") ? get_number((*tp)["theta"], child(tpath, "theta")) : 0.5;
        seq.oracle = homogenization_oracle_1d(alpha, beta, theta);
        seq.base = [alpha, beta, theta](std::span<const double> y) {
          Matrix a(1, 1);
          a(0, 0) = y[0] < theta ? alpha : beta;
          return a;
        };
        if (!find(j, "c0")) seq.bounds.c0 = std::min(alpha, beta);
        if (!find(j, "c1")) seq.bounds.c1 = std::max(alpha, beta);
      } else {
        const auto entries = expression_matrix(member(j, "a", path), child(path, "a"));
        if (static_cast<int>(entries.size()) != m) schema(child(path, "a"), "expected an m x m matrix");
        std::vector<Expression> exprs;
        const auto ys = indexed_names("y", fam.n());
        for (const auto& row : entries) {
          if (static_cast<int>(row.size()) != m) schema(child(path, "a"), "expected an m x m matrix");
          for (const auto& t : row) exprs.push_back(Expression::parse(t, ys));
        }
        seq.base = [exprs, m](std::span<const double> y) {
          Matrix a(m, m);
          for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) a(r, c) = exprs[static_cast<std::size_t>(r * m + c)].eval(y);
          return a;
        };
      }
      if (const Json* v = find(j, "oracle")) seq.oracle = get_number(*v, child(path, "oracle"));
      return seq;
    }
    if (kind == "autonomous_sequence") {
      seq.kind = SequenceKind::autonomous_sequence;
      const GrowthBounds b = bounds_of(j, path, GrowthBounds{2.0, 0.0, 1.0});
      seq.bounds = b;
      const auto etas = indexed_names("eta", m);
      const Expression fh = Expression::parse(get_string(member(j, "f_h", path), child(path, "f_h")),
                                              concat_names({etas, {"h"}}));
      std::vector<Expression> grad;
      for (int i = 0; i < m; ++i) grad.push_back(fh.derivative(i));
      const std::string text = fh.text();
      seq.member = [fh, grad, m, b, text](int h) {
        return Integrand::autonomous(
            m,
            [fh, m, h](std::span<const double> eta) {
              double s[4];
              std::copy(eta.begin(), eta.end(), s);
              s[m] = h;
              return fh.eval(std::span<const double>(s, static_cast<std::size_t>(m + 1)));
            },
            [grad, m, h](std::span<const double> eta, std::span<double> g) {
              double s[4];
              std::copy(eta.begin(), eta.end(), s);
              s[m] = h;
              for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i)] = grad[static_cast<std::size_t>(i)].eval(std::span<const double>(s, static_cast<std::size_t>(m + 1)));
            },
            b, text + " (h=" + std::to_string(h) + ")");
      };
      if (const Json* v = find(j, "limit"))
        seq.limit = integrand_from_expression(IntegrandKind::autonomous, m, fam.n(), {},
                                              get_string(*v, child(path, "limit")), b, "limit");
      if (const Json* v = find(j, "oracle")) seq.oracle = get_number(*v, child(path, "oracle"));
      return seq;
    }
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with("config ")) throw;
    schema(path, e.what());
  } catch (const ArgumentError& e) {
    schema(path, e.what());
  }
  schema(child(path, "kind"), "unknown sequence kind '" + kind + "' (oscillating_quadratic, autonomous_sequence)");
}

EnergyProblem problem(const Json& j, const std::string& path, FunctionalSpec spec, Grid g) {
  if (!j.is_object()) schema(path, "expected an object");
  Subdomain area{g.box()};
  if (const Json* v = find(j, "area")) area.box = box(*v, child(path, "area"));
  const auto names = indexed_names("x", g.dim());
  auto field = [&](std::string_view key) -> PointFn {
    const Json* v = find(j, key);
    if (!v) return {};
    try {
      const Expression e = Expression::parse(expression_text(*v, child(path, key)), names);
      return [e](std::span<const double> x) { return e.eval(x); };
    } catch (const ConfigError& err) {
      if (std::string_view(err.what()).starts_with("config ")) throw;
      schema(child(path, key), err.what());
    }
  };
  PointFn dirichlet = field("dirichlet");
  if (!dirichlet) schema(child(path, "dirichlet"), "missing required value");
  std::optional<double> tether;
  if (const Json* v = find(j, "tether")) {
    tether = get_number(*v, child(path, "tether"));
    if (*tether < 0.0) schema(child(path, "tether"), "lambda must be >= 0");
  }
  return EnergyProblem{std::move(spec), std::move(g), area, dirichlet, tether, field("target")};
}

}  // namespace xfg::config
