#include "driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "eqsem/baseline_fem.hpp"
#include "eqsem/cases.hpp"
#include "eqsem/parallel.hpp"
#include "eqsem/postproc.hpp"

#ifndef EQSEM_GIT_REV
#define EQSEM_GIT_REV "unknown"
#endif

namespace eqsem::driver {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("--" + key + ": '" + v + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e6) throw ConfigError("--" + key + ": '" + v + "' is not an integer");
  return static_cast<int>(d);
}

MeshSize to_mesh(const std::string& v) {
  const auto x = v.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("--mesh: '" + v + "' is not of the form NXxNY");
  MeshSize m{to_int("mesh", v.substr(0, x)), to_int("mesh", v.substr(x + 1))};
  if (m.nx < 1 || m.ny < 1) throw ConfigError("--mesh: '" + v + "' needs at least one element per direction");
  return m;
}

bool is_square_case(const std::string& id) { return id == "results1" || id == "energy"; }

// One solved configuration point.
struct PointResult {
  int order = 0;
  MeshSize mesh;
  double h = kNaN;
  Method method = Method::Equilibrium;
  int unknowns = 0;
  int elements = 0;
  int rank_deficiency = 0;
  double uniqueness_gap = -1.0;
  double algebraic_residual = kNaN;
  double constraint_residual = kNaN;
  Vec2 residual{kNaN, kNaN};  // max sampled |R_fe| (equilibrium) or |div s + f| (fem)
  double traction_jump = kNaN;
  double asymmetry = kNaN;
  double energy = kNaN;
  std::optional<double> exact_energy;
  std::optional<ErrorReport> errors;
  double seconds = 0.0;
  std::string fields_csv;
};

const char* kFieldHeader = "element,xi1,xi2,x1,x2,u1,u2,s11,s21,s12,s22,omega,r1,r2\n";

void append_row(std::string& out, int e, const Vec2& xi, const Vec2& x, const Vec2& u, const Vec4& s, double omega,
                const Vec2& r) {
  out += std::to_string(e);
  for (double v : {xi(0), xi(1), x(0), x(1), u(0), u(1), s(0), s(1), s(2), s(3), omega, r(0), r(1)}) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

// Problem and reference data for one point.
struct CaseSetup {
  std::optional<ManufacturedCase> manufactured;
  std::optional<Kirsch> kirsch;
  Problem problem;
  double h = kNaN;
};

CaseSetup make_case(const RunConfig& cfg, const MeshSize& mesh, double element_size, Method method) {
  if (is_square_case(cfg.case_id)) {
    ManufacturedCase mc = cfg.case_id == "results1" ? case_results_I() : case_energy();
    Problem p = square_problem(mc, mesh.nx, mesh.ny, cfg.c);
    if (method == Method::Fem && p.particular) {
      // The kinematic model carries the body force directly.
      p.particular = {};
      p.body_force = mc.exact.body_force;
    }
    return {std::move(mc), std::nullopt, std::move(p), 2.0 / std::max(mesh.nx, mesh.ny)};
  }
  if (cfg.case_id == "plate-hole") {
    PlateWithHole ph = case_plate_with_hole();
    return {std::nullopt, ph.kirsch, std::move(ph.problem), kNaN};
  }
  return {std::nullopt, std::nullopt, case_l_shape(element_size), element_size};
}

std::optional<ExactSolution> exact_of(const CaseSetup& s) {
  if (s.manufactured) return s.manufactured->exact;
  if (s.kirsch) return s.kirsch->exact();
  return std::nullopt;
}

PointResult solve_point(const RunConfig& cfg, Method method, int order, const MeshSize& mesh, double element_size,
                        bool want_fields) {
  const auto t0 = std::chrono::steady_clock::now();
  CaseSetup setup = make_case(cfg, mesh, element_size, method);
  const auto exact = exact_of(setup);
  PointResult r;
  r.order = order;
  r.mesh = mesh;
  r.h = setup.h;
  r.method = method;
  r.elements = setup.problem.mesh.element_count();
  if (setup.manufactured) r.exact_energy = setup.manufactured->exact_energy;
  const auto pts = equispaced(cfg.samples);
  const auto field_pts = equispaced(cfg.field_samples);
  if (want_fields) r.fields_csv = kFieldHeader;

  if (method == Method::Equilibrium) {
    AssemblyOptions opt;
    opt.order = order;
    opt.rotation = cfg.gll_rotation ? RotationGrid::GaussLobatto : RotationGrid::Gauss;
    if (cfg.overint > 0.0) opt.curved_points = static_cast<int>(std::ceil(cfg.overint * (order + 1)));
    const SaddleSystem sys = build_saddle_system(setup.problem, opt);
    const SolveReport rep = solve(sys);
    const FieldSampler fs(setup.problem, sys, rep);
    r.unknowns = rep.unknowns;
    r.rank_deficiency = rep.rank_deficiency;
    r.uniqueness_gap = rep.uniqueness_gap;
    r.algebraic_residual = rep.algebraic_residual;
    r.constraint_residual = rep.equilibrium_residual;
    r.residual = equilibrium_residual_field(fs, pts);
    r.asymmetry = stress_asymmetry(fs, pts);
    r.energy = reported_energy(setup.problem, sys.layout, rep.traction);
    if (exact) r.errors = error_norms(fs, *exact, pts, r.h);
    if (want_fields) {
      fs.for_each(field_pts, [&](const FieldSample& s) {
        append_row(r.fields_csv, s.element, s.xi, s.x, s.u, s.sigma, s.omega, s.residual);
      });
    }
  } else {
    FemOptions fo;
    fo.order = cfg.fem_order;
    const FemModel model(setup.problem, fo);
    r.order = cfg.fem_order;
    r.unknowns = model.free_dof_count();
    const FemResidual res = fem_equilibrium_residual(model, pts);
    r.residual = res.interior;
    r.traction_jump = res.traction_jump;
    r.energy = model.strain_energy();
    if (exact) {
      ErrorReport e;
      e.h = r.h;
      e.order = r.order;
      model.for_each(pts, [&](const FemSample& s) {
        const Vec2 du = s.u - exact->displacement(s.x);
        const Vec4 ds = s.sigma - exact->stress(s.x);
        e.linf[0] = std::max(e.linf[0], std::abs(du(0)));
        e.linf[1] = std::max(e.linf[1], std::abs(du(1)));
        for (int k = 0; k < 4; ++k) e.linf[2 + k] = std::max(e.linf[2 + k], std::abs(ds(k)));
      });
      r.errors = e;
    }
    if (want_fields) {
      for (int el = 0; el < setup.problem.mesh.element_count(); ++el)
        for (double b : field_pts)
          for (double a : field_pts) {
            const Vec2 xi(a, b);
            const FemSample s = model.at(el, xi);
            append_row(r.fields_csv, el, xi, s.x, s.u, s.sigma, kNaN, s.residual);
          }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// JSON cannot hold NaN; it becomes null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const PointResult& r) {
  json j;
  j["method"] = r.method == Method::Equilibrium ? "equilibrium" : "fem";
  j["order"] = r.order;
  j["mesh"] = {r.mesh.nx, r.mesh.ny};
  j["h"] = num(r.h);
  j["elements"] = r.elements;
  j["unknowns"] = r.unknowns;
  j["energy"] = num(r.energy);
  if (r.exact_energy) j["energy_exact"] = *r.exact_energy;
  j["max_residual"] = {num(r.residual(0)), num(r.residual(1))};
  if (r.method == Method::Equilibrium) {
    j["constraint_residual"] = num(r.constraint_residual);
    j["algebraic_residual"] = num(r.algebraic_residual);
    j["rank_deficiency"] = r.rank_deficiency;
    j["uniqueness_gap"] = num(r.uniqueness_gap);
    j["stress_asymmetry"] = num(r.asymmetry);
  } else {
    j["traction_jump"] = num(r.traction_jump);
  }
  if (r.errors) {
    json e;
    for (int k = 0; k < 6; ++k) e[kErrorFields[k]] = r.errors->linf[k];
    j["linf_error"] = e;
  }
  j["seconds"] = r.seconds;
  return j;
}

json base_summary(const RunConfig& cfg, const char* mode) {
  json j;
  j["build"] = build_id();
  j["mode"] = mode;
  j["config"] = cfg.to_json();
  return j;
}

void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + p.string() + ": " + ec.message());
}

// All (order, mesh) points of a configuration, orders outermost.
struct PointSpec {
  int order;
  MeshSize mesh;
  double element_size;
};

std::vector<PointSpec> points_of(const RunConfig& cfg) {
  std::vector<PointSpec> out;
  for (int n : cfg.orders) {
    if (is_square_case(cfg.case_id)) {
      for (const auto& m : cfg.meshes) out.push_back({n, m, 0.0});
    } else if (cfg.case_id == "lshape") {
      for (double s : cfg.element_sizes) out.push_back({n, {}, s});
    } else {
      out.push_back({n, {}, 0.0});
    }
  }
  return out;
}

std::vector<PointResult> solve_all(const RunConfig& cfg, Method method, bool want_fields) {
  const auto pts = points_of(cfg);
  std::vector<PointResult> results(pts.size());
  parallel_for(static_cast<int>(pts.size()), [&](int i) {
    results[i] = solve_point(cfg, method, pts[i].order, pts[i].mesh, pts[i].element_size, want_fields);
  });
  return results;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

const char* build_id() { return EQSEM_GIT_REV; }

int RunConfig::point_count() const { return static_cast<int>(points_of(*this).size()); }

json RunConfig::to_json() const {
  json j;
  j["case"] = case_id;
  j["n"] = orders;
  json meshes_j = json::array();
  for (const auto& m : meshes) meshes_j.push_back(std::to_string(m.nx) + "x" + std::to_string(m.ny));
  if (!meshes.empty()) j["mesh"] = meshes_j;
  if (!element_sizes.empty()) j["element_size"] = element_sizes;
  j["c"] = c;
  j["rotation"] = gll_rotation ? "gauss-lobatto" : "gauss";
  j["method"] = method == Method::Equilibrium ? "equilibrium" : "fem";
  j["fem_order"] = fem_order;
  j["out"] = out.string();
  j["samples"] = samples;
  j["field_samples"] = field_samples;
  j["overint"] = overint;
  return j;
}

std::map<std::string, std::string> flatten_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : j.items()) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '_', '-');
    auto scalar = [&](const json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number() || v.is_boolean()) return v.dump();
      throw ConfigError("config key '" + key + "' has an unsupported value");
    };
    if (value.is_array()) {
      std::string s;
      for (const auto& v : value) s += (s.empty() ? "" : ",") + scalar(v);
      out[k] = s;
    } else {
      out[k] = scalar(value);
    }
  }
  return out;
}

RunConfig parse_config(const std::map<std::string, std::string>& values, Mode mode) {
  static const std::vector<std::string> known{"case",   "n",       "mesh",    "element-size",  "c",      "rotation",
                                              "method", "fem-order", "out",   "samples", "field-samples", "overint"};
  for (const auto& [k, v] : values)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown setting '" + k + "'");
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = values.find(k);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };

  RunConfig cfg;
  const auto id = get("case");
  if (!id) throw ConfigError("--case is required (one of results1, energy, plate-hole, lshape)");
  const auto& ids = case_ids();
  if (std::find(ids.begin(), ids.end(), *id) == ids.end()) throw ConfigError("unknown case '" + *id + "'");
  cfg.case_id = *id;

  if (auto v = get("n")) {
    cfg.orders.clear();
    for (const auto& s : split(*v, ',')) cfg.orders.push_back(to_int("n", s));
    if (cfg.orders.empty()) throw ConfigError("--n is empty");
  }
  for (int n : cfg.orders)
    if (n < 1 || n > 30) throw ConfigError("--n: polynomial order " + std::to_string(n) + " outside [1, 30]");

  if (auto v = get("method")) {
    if (*v == "equilibrium") cfg.method = Method::Equilibrium;
    else if (*v == "fem") cfg.method = Method::Fem;
    else throw ConfigError("--method must be equilibrium or fem");
  }
  if (auto v = get("fem-order")) cfg.fem_order = to_int("fem-order", *v);
  if (cfg.fem_order != 1 && cfg.fem_order != 2) throw ConfigError("--fem-order must be 1 (Q4) or 2 (Q9)");
  if (auto v = get("rotation")) {
    if (*v == "gauss") cfg.gll_rotation = false;
    else if (*v == "gauss-lobatto") cfg.gll_rotation = true;
    else throw ConfigError("--rotation must be gauss or gauss-lobatto");
  }
  if (auto v = get("c")) cfg.c = to_double("c", *v);
  if (!(cfg.c >= 0.0 && cfg.c < 1.0 / std::numbers::pi)) throw ConfigError("--c must lie in [0, 1/pi) to keep the map invertible");
  if (auto v = get("out")) cfg.out = *v;
  if (auto v = get("samples")) cfg.samples = to_int("samples", *v);
  if (auto v = get("field-samples")) cfg.field_samples = to_int("field-samples", *v);
  if (cfg.samples < 2 || cfg.field_samples < 2) throw ConfigError("sample grids need at least 2 points per direction");
  if (auto v = get("overint")) cfg.overint = to_double("overint", *v);
  if (cfg.overint < 0.0) throw ConfigError("--overint must be non-negative");

  const auto mesh = get("mesh");
  const auto sizes = get("element-size");
  if (is_square_case(cfg.case_id)) {
    if (sizes) throw ConfigError("--element-size applies to lshape only; use --mesh");
    for (const auto& s : split(mesh.value_or("1x1"), ',')) cfg.meshes.push_back(to_mesh(s));
    if (cfg.meshes.empty()) throw ConfigError("--mesh is empty");
  } else if (cfg.case_id == "lshape") {
    if (mesh) throw ConfigError("lshape is meshed by --element-size, not --mesh");
    for (const auto& s : split(sizes.value_or("0.05"), ',')) {
      const double h = to_double("element-size", s);
      try {
        (void)l_shape_mesh(h);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--element-size: ") + e.what());
      }
      cfg.element_sizes.push_back(h);
    }
    if (cfg.element_sizes.empty()) throw ConfigError("--element-size is empty");
  } else {
    if (mesh || sizes) throw ConfigError("plate-hole uses its fixed 8-element mesh");
  }
  if (cfg.c != 0.0 && !is_square_case(cfg.case_id)) throw ConfigError("--c applies to results1 and energy only");

  if (cfg.method == Method::Fem || mode == Mode::Compare) {
    if (cfg.case_id == "plate-hole") throw ConfigError("the displacement baseline needs affine elements; plate-hole is curved");
    if (cfg.c != 0.0) throw ConfigError("the displacement baseline needs affine elements; use --c 0");
  }
  if (mode == Mode::Run && cfg.point_count() != 1) throw ConfigError("run takes a single --n and a single mesh; use sweep for lists");
  if (mode == Mode::Sweep && cfg.point_count() < 2) throw ConfigError("sweep needs at least two points");
  return cfg;
}

// ---------------------------------------------------------------------------

json run(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  const auto results = solve_all(cfg, cfg.method, true);
  const PointResult& r = results.front();
  json j = base_summary(cfg, "run");
  j["case"] = cfg.case_id;
  j["result"] = point_json(r);
  write_atomic(cfg.out / "fields.csv", r.fields_csv);
  write_atomic(cfg.out / "summary.json", j.dump(2) + "\n");
  return j;
}

json sweep(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  const auto results = solve_all(cfg, cfg.method, false);
  std::string csv = "h,N,field,Linf_error,energy,residual,asymmetry,unknowns,rank_deficiency\n";
  json points = json::array();
  for (const auto& r : results) {
    points.push_back(point_json(r));
    const std::string tail = "," + format_double(r.energy) + "," + format_double(r.residual.maxCoeff()) + "," +
                             format_double(r.asymmetry) + "," + std::to_string(r.unknowns) + "," +
                             std::to_string(r.rank_deficiency) + "\n";
    const std::string head = format_double(r.h) + "," + std::to_string(r.order) + ",";
    if (r.errors) {
      for (int k = 0; k < 6; ++k) csv += head + kErrorFields[k] + "," + format_double(r.errors->linf[k]) + tail;
    } else {
      csv += head + "none,nan" + tail;
    }
  }

  // Fitted slopes per (N, field) over the h values of the sweep.
  json rates = json::array();
  for (int n : cfg.orders) {
    std::vector<const PointResult*> sel;
    for (const auto& r : results)
      if (r.order == n && r.errors && std::isfinite(r.h)) sel.push_back(&r);
    if (sel.size() < 2) continue;
    for (int k = 0; k < 6; ++k) {
      std::vector<double> h, e;
      for (const auto* r : sel) {
        h.push_back(r->h);
        e.push_back(r->errors->linf[k]);
      }
      json rate{{"N", n}, {"field", kErrorFields[k]}};
      try {
        const RateFit fit = convergence_rate(h, e);
        rate["slope"] = fit.slope;
        rate["points_used"] = fit.used;
        rate["sufficient"] = fit.sufficient;
      } catch (const std::invalid_argument&) {
        rate["slope"] = nullptr;
        rate["points_used"] = 0;
        rate["sufficient"] = false;
      }
      rates.push_back(rate);
    }
  }

  json j = base_summary(cfg, "sweep");
  j["case"] = cfg.case_id;
  j["points"] = points;
  j["rates"] = rates;
  write_atomic(cfg.out / "convergence.csv", csv);
  write_atomic(cfg.out / "summary.json", j.dump(2) + "\n");
  return j;
}

json compare(const RunConfig& cfg) {
  ensure_dir(cfg.out);
  const auto eq = solve_all(cfg, Method::Equilibrium, false);
  const auto fem = solve_all(cfg, Method::Fem, false);
  std::string csv = "h,method,order,elements,unknowns,energy,max_residual,traction_jump\n";
  json rows = json::array();
  for (std::size_t i = 0; i < eq.size(); ++i) {
    for (const PointResult* r : {&eq[i], &fem[i]}) {
      csv += format_double(r->h) + "," + (r->method == Method::Equilibrium ? "equilibrium" : "fem") + "," +
             std::to_string(r->order) + "," + std::to_string(r->elements) + "," + std::to_string(r->unknowns) + "," +
             format_double(r->energy) + "," + format_double(r->residual.maxCoeff()) + "," +
             format_double(r->traction_jump) + "\n";
      rows.push_back(point_json(*r));
    }
  }
  json j = base_summary(cfg, "compare");
  j["case"] = cfg.case_id;
  j["points"] = rows;
  // The two energies bound the exact one from either side when both models converge.
  json bracket = json::array();
  for (std::size_t i = 0; i < eq.size(); ++i) bracket.push_back(fem[i].energy <= eq[i].energy);
  j["fem_below_equilibrium"] = bracket;
  write_atomic(cfg.out / "compare.csv", csv);
  write_atomic(cfg.out / "summary.json", j.dump(2) + "\n");
  return j;
}

}  // namespace eqsem::driver
