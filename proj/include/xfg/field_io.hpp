#pragma once

// Node values on disk: a CSV (header "value", one row per node) or raw
// little-endian doubles, next to a JSON sidecar <path>.json holding
// {"resolution": [...], "box": {"lo": [...], "hi": [...]}, "format": ...}.

#include <filesystem>

#include "xfg/discrete_sobolev.hpp"

namespace xfg {

enum class FieldFormat { csv, binary };

void write_field(const std::filesystem::path& path, const ScalarField& u, FieldFormat format = FieldFormat::csv);

/// Reads the sidecar, then the values.  Throws ConfigError on malformed files.
ScalarField read_field(const std::filesystem::path& path);

}  // namespace xfg
