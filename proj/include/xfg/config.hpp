#pragma once

// JSON experiment files to library objects.  Parse errors carry
// <source>:<line>:<column>; schema errors carry the JSON pointer of the
// offending value, e.g. "config /family/kind: expected a string".

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xfg/gamma_lab.hpp"
#include "xfg/grid.hpp"
#include "xfg/integrands.hpp"
#include "xfg/vector_fields.hpp"

namespace xfg::config {

using Json = nlohmann::json;

Json parse(std::string_view text, std::string_view source = "config");
Json load(const std::filesystem::path& path);

/// "1, 2.5,-3" -> {1, 2.5, -3}.  Throws ConfigError naming `what`.
std::vector<double> number_list(std::string_view text, std::string_view what);

/// Member lookup; null when absent.
const Json* find(const Json& obj, std::string_view key);

double get_number(const Json& j, const std::string& path);
int get_int(const Json& j, const std::string& path);
std::string get_string(const Json& j, const std::string& path);
std::vector<double> get_numbers(const Json& j, const std::string& path);

/// {"lo": [...], "hi": [...]}
Box box(const Json& j, const std::string& path);

/// "heisenberg" or {"kind", "n", "m", "coeff", "box"}.  Default box [-1, 1]^n.
/// Rejects n > 3.
VectorFieldFamily family(const Json& j, const std::string& path);

/// {"kind", "a" | "f", "p", "c0", "c1", "id"}
Integrand integrand(const Json& j, const std::string& path, const VectorFieldFamily& family);
EuclideanIntegrand euclidean_integrand(const Json& j, const std::string& path, const VectorFieldFamily& family);

/// {"nodes": N} or {"resolution": [...]}, optional "box" (defaults to `fallback`).
Grid grid(const Json& j, const std::string& path, const Box& fallback);

/// {"cells": N} or {"cells_per_period": k}
GridRule grid_rule(const Json& j, const std::string& path);

/// {"kind": "oscillating_quadratic", "two_phase": {"alpha", "beta", "theta"} | "a": [[...in y...]], "c0", "c1"}
/// {"kind": "autonomous_sequence", "f_h": "... eta, h ...", "limit": "...", "p", "c0", "c1"}
/// The h list is read from "h_list".
SequenceSpec sequence(const Json& j, const std::string& path, const VectorFieldFamily& family,
                      std::vector<int> h_list);

/// {"area": box, "dirichlet": expr, "tether": lambda, "target": expr}; the
/// integrand and grid come from the caller.
EnergyProblem problem(const Json& j, const std::string& path, FunctionalSpec spec, Grid grid);

}  // namespace xfg::config
