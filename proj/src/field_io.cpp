#include "xfg/field_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xfg/errors.hpp"

namespace xfg {

namespace {

std::filesystem::path sidecar(const std::filesystem::path& path) {
  std::filesystem::path s = path;
  s += ".json";
  return s;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& u, FieldFormat format) {
  static_assert(std::endian::native == std::endian::little, "binary fields are little-endian");
  nlohmann::json meta;
  meta["resolution"] = u.grid.resolution();
  meta["box"] = {{"lo", u.grid.box().lo}, {"hi", u.grid.box().hi}};
  meta["format"] = format == FieldFormat::csv ? "csv" : "binary";

  if (format == FieldFormat::csv) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "value\n";
    char buf[64];
    for (double v : u.values) {
      std::snprintf(buf, sizeof buf, "%.16e\n", v);
      out << buf;
    }
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(u.values.data()),
              static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  }
  std::ofstream side(sidecar(path), std::ios::binary);
  if (!side) throw ConfigError("cannot write " + sidecar(path).string());
  side << meta.dump(2) << "\n";
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream side(sidecar(path));
  if (!side) throw ConfigError("missing sidecar " + sidecar(path).string());
  nlohmann::json meta;
  try {
    side >> meta;
    const Box box(meta.at("box").at("lo").get<std::vector<double>>(),
                  meta.at("box").at("hi").get<std::vector<double>>());
    const Grid grid(box, meta.at("resolution").get<std::vector<int>>());
    const std::string format = meta.value("format", "csv");
    std::vector<double> values;
    if (format == "csv") {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read " + path.string());
      std::string line;
      std::getline(in, line);
      if (line != "value") throw ConfigError(path.string() + ": expected header 'value'");
      std::size_t lineno = 1;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(line, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != line.size()) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
        values.push_back(v);
      }
    } else if (format == "binary") {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ConfigError("cannot read " + path.string());
      values.resize(grid.node_count());
      in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
      if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
        throw ConfigError(path.string() + ": truncated binary field");
    } else {
      throw ConfigError(sidecar(path).string() + ": unknown format '" + format + "'");
    }
    return ScalarField(grid, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(sidecar(path).string() + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace xfg
