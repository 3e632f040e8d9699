// eqsem: command-line driver for the equilibrium spectral-element solver.
//
//   eqsem run     --case results1 --n 5 --mesh 4x4
//   eqsem sweep   --case results1 --n 2,5 --mesh 1x1,2x2,4x4,8x8 --c 0.15
//   eqsem compare --case lshape --element-size 0.1,0.05,0.025
//
// Settings may also come from a JSON file (--config); flags win.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "driver.hpp"
#include "eqsem/geometry.hpp"
#include "eqsem/solver.hpp"

namespace {

using eqsem::driver::ConfigError;
using eqsem::driver::Mode;

struct Flags {
  std::map<std::string, std::string> values;
  std::string config_file;
};

void add_flags(CLI::App* cmd, Flags& f) {
  static const std::vector<std::pair<std::string, std::string>> opts{
      {"case", "results1 | energy | plate-hole | lshape"},
      {"n", "polynomial order(s), comma separated"},
      {"mesh", "element grid(s) NXxNY for the square cases, comma separated"},
      {"element-size", "element size(s) for lshape, comma separated"},
      {"c", "sine deformation amplitude of the square cases"},
      {"rotation", "rotation multiplier grid: gauss | gauss-lobatto"},
      {"method", "equilibrium | fem"},
      {"fem-order", "displacement element order: 1 (Q4) | 2 (Q9)"},
      {"out", "output directory"},
      {"samples", "equispaced sample points per direction per element for metrics"},
      {"field-samples", "sample points per direction per element in fields.csv"},
      {"overint", "compliance Gauss points on curved elements as a multiple of N+1"},
  };
  for (const auto& [name, help] : opts) {
    cmd->add_option_function<std::string>(
        "--" + name, [&f, name = name](const std::string& v) { f.values[name] = v; }, help);
  }
  cmd->add_option("--config", f.config_file, "JSON file with default settings (same keys as the flags)");
}

std::map<std::string, std::string> merged(const Flags& f) {
  std::map<std::string, std::string> out;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw ConfigError("cannot open config file " + f.config_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + f.config_file + ": " + e.what());
    }
    out = eqsem::driver::flatten_config(j);
  }
  for (const auto& [k, v] : f.values) out[k] = v;
  return out;
}

void print_point(const nlohmann::json& r) {
  const auto num = [&](const char* k) { return r.contains(k) && r[k].is_number() ? r[k].get<double>() : std::nan(""); };
  double res = 0.0;
  for (const auto& v : r["max_residual"]) res = std::max(res, v.is_number() ? v.get<double>() : std::nan(""));
  std::printf("%-11s N=%-2d h=%-6g elements=%-5d unknowns=%-7d energy=%.10g max_residual=%.3g\n",
              r["method"].get<std::string>().c_str(), r["order"].get<int>(), num("h"), r["elements"].get<int>(),
              r["unknowns"].get<int>(), num("energy"), res);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium spectral-element elasticity solver"};
  app.require_subcommand(1);
  Flags flags;
  auto* run = app.add_subcommand("run", "solve one configuration; writes summary.json and fields.csv");
  auto* sweep = app.add_subcommand("sweep", "solve a list of orders/meshes; writes summary.json and convergence.csv");
  auto* compare = app.add_subcommand("compare", "equilibrium method against the displacement baseline; writes compare.csv");
  for (auto* c : {run, sweep, compare}) add_flags(c, flags);
  CLI11_PARSE(app, argc, argv);

  const Mode mode = run->parsed() ? Mode::Run : sweep->parsed() ? Mode::Sweep : Mode::Compare;
  eqsem::driver::RunConfig cfg;
  try {
    cfg = eqsem::driver::parse_config(merged(flags), mode);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "eqsem: invalid configuration: %s\n", e.what());
    return 2;
  }

  try {
    nlohmann::json summary;
    switch (mode) {
      case Mode::Run: summary = eqsem::driver::run(cfg); break;
      case Mode::Sweep: summary = eqsem::driver::sweep(cfg); break;
      case Mode::Compare: summary = eqsem::driver::compare(cfg); break;
    }
    if (mode == Mode::Run) {
      print_point(summary["result"]);
    } else {
      for (const auto& r : summary["points"]) print_point(r);
    }
    std::printf("wrote %s\n", (cfg.out / "summary.json").string().c_str());
  } catch (const eqsem::SolverError& e) {
    std::fprintf(stderr, "eqsem: solver failure: %s\n", e.what());
    return 3;
  } catch (const eqsem::GeometryError& e) {
    std::fprintf(stderr, "eqsem: geometry error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eqsem: %s\n", e.what());
    return 1;
  }
  return 0;
}
