// ssmap: command-line front end for the Sun-shadow library.
//
// Exit status: 0 success, 1 module error or failed check, 2 UnknownCommand
// or BadFlag, 3 ConfigInvalid.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sunshadow/brake.hpp"
#include "sunshadow/diagnostics.hpp"
#include "sunshadow/io.hpp"
#include "sunshadow/manifolds.hpp"
#include "sunshadow/ssmap.hpp"
#include "sunshadow/stark.hpp"

#ifndef SUNSHADOW_VERSION
#define SUNSHADOW_VERSION "0.0.0"
#endif

namespace {

using namespace sunshadow;
using io::Json;

enum Exit { kOk = 0, kModuleError = 1, kUsage = 2, kConfig = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options of one command that may also come from the config file.  Flags
// given on the command line win.
class Bindings {
 public:
  explicit Bindings(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, var, help)->capture_default_str();
    entries_.push_back({name, opt,
                        [&var, name](const Json& j) {
                          try {
                            var = j.get<T>();
                          } catch (const Json::exception&) {
                            throw Error(ErrorCode::ConfigInvalid, "config value '" + name + "' has the wrong type");
                          }
                        },
                        [&var] { return Json(var); }});
    return opt;
  }

  void load(const Json& section) const {
    if (!section.is_object()) throw Error(ErrorCode::ConfigInvalid, "command section must be an object");
    for (const auto& [key, v] : section.items()) {
      const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == key; });
      if (it == entries_.end()) throw Error(ErrorCode::ConfigInvalid, "unknown option '" + key + "'");
      if (it->opt->count() == 0) it->load(v);
    }
  }

  Json dump() const {
    Json j = Json::object();
    for (const auto& e : entries_) j[e.name] = e.dump();
    return j;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* opt;
    std::function<void(const Json&)> load;
    std::function<Json()> dump;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

struct Globals {
  std::string config_path;
  std::string out = "-";
  int jobs = 1;
  std::uint64_t seed = 1;
  double ell = 348600;
  // Physical overrides; NaN means unset.
  double mu = NAN, f = NAN, R = NAN, r_escape = NAN, tau_budget = NAN, step = NAN;
  int switch_budget = -1;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::ConfigInvalid, "cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ssmap::SectionPoint section_point(const std::vector<double>& xy, double ell) {
  if (xy.size() != 2) throw UsageError("--point expects u,pu");
  return {xy[0], xy[1], ell};
}

std::string pattern_string(const stark::RootPattern& rp) {
  auto k = [](stark::RootKind r) {
    switch (r) {
      case stark::RootKind::Positive: return "+";
      case stark::RootKind::Zero: return "0";
      case stark::RootKind::Negative: return "-";
      case stark::RootKind::Complex: return "c";
    }
    return "?";
  };
  std::string s = std::string("xi1") + k(rp.xi1) + " xi2" + k(rp.xi2) + " eta1" + k(rp.eta1) + " eta2" + k(rp.eta2);
  if (rp.xi_double) s += " xi-double";
  if (rp.eta_double) s += " eta-double";
  return s;
}

Json mat_json(const Mat2& J) { return {{J(0, 0), J(0, 1)}, {J(1, 0), J(1, 1)}}; }

ssmap::FixedPoint fixed_point(int which, double ell, const PhysParams& p) {
  if (which != 1 && which != 2) throw UsageError("--fixed must be 1 or 2");
  const auto b = brake::solve_brake(ell, p);
  const double s = which == 1 ? 1 : -1;
  return ssmap::find_fixed_point({s * std::sqrt(b.xiE), -s * b.puE, ell}, p);
}

int run(int argc, char** argv) {
  CLI::App app{"Sun-shadow dynamics: Stark taxonomy, brake orbits, the shadow return map and its manifolds", "ssmap"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  bool version = false;
  app.add_flag("--version", version, "print build and schema versions");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out, "output file, - for stdout");
  app.add_option("--jobs", g.jobs, "worker threads for scans and manifolds")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed of pseudo-random samples");
  app.add_option("--ell", g.ell, "Stark integral ell_s, km^3/s^2");
  app.add_option("--mu", g.mu, "gravitational parameter, km^3/s^2");
  app.add_option("--f", g.f, "radiation acceleration, km/s^2");
  app.add_option("--R", g.R, "shadow half-width, km");
  app.add_option("--r-escape", g.r_escape, "escape radius, km");
  app.add_option("--tau-budget", g.tau_budget, "fictitious-time budget per map application");
  app.add_option("--switch-budget", g.switch_budget, "regime switches per map application");
  app.add_option("--step", g.step, "fixed fictitious-time step, 0 for automatic");

  std::map<std::string, std::unique_ptr<Bindings>> bindings;
  std::map<std::string, std::function<int(io::RunConfig&)>> actions;
  auto command = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    bindings[name] = std::make_unique<Bindings>(sub);
    return std::pair{sub, bindings[name].get()};
  };

  // classify / periods / zvp share (ell, hs).
  double hs = 0;
  for (const char* name : {"classify", "periods", "zvp"}) {
    auto [sub, b] = command(name, "");
    b->add("hs", hs, "Stark energy h_s, km^2/s^2")->required();
  }
  app.get_subcommand("classify")->description("region label and root pattern of (ell_s, h_s)");
  app.get_subcommand("periods")->description("fictitious-time periods T_u, T_v");
  app.get_subcommand("zvp")->description("zero-velocity points");

  actions["classify"] = [&](io::RunConfig& cfg) {
    const auto rc = stark::classify(g.ell, hs, cfg.params);
    const auto q = stark::quartic_structure(g.ell, hs, cfg.params);
    Json j;
    j["region"] = std::string(stark::to_string(rc.label));
    j["pattern"] = pattern_string(stark::root_pattern(q, cfg.params));
    j["bounded_u_branch"] = rc.bounded_u_branch_exists;
    j["xi"] = {{q.xi1.real(), q.xi1.imag()}, {q.xi2.real(), q.xi2.imag()}};
    j["eta"] = {{q.eta1.real(), q.eta1.imag()}, {q.eta2.real(), q.eta2.imag()}};
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return kOk;
  };
  actions["periods"] = [&](io::RunConfig& cfg) {
    Json j;
    j["T_v"] = stark::period_v(g.ell, hs, cfg.params);
    if (stark::classify(g.ell, hs, cfg.params).bounded_u_branch_exists) {
      j["T_u"] = stark::period_u(g.ell, hs, cfg.params);
      j["ratio"] = j["T_v"].get<double>() / j["T_u"].get<double>();
    }
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return kOk;
  };
  actions["zvp"] = [&](io::RunConfig& cfg) {
    Json pts = Json::array();
    for (const auto& z : stark::zero_velocity_points(g.ell, hs, cfg.params)) pts.push_back({z.x, z.y});
    Json j;
    j["region"] = std::string(stark::to_string(stark::classify(g.ell, hs, cfg.params).label));
    j["points"] = pts;
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return kOk;
  };

  command("brake", "brake orbit of the Sun-shadow dynamics");
  actions["brake"] = [&](io::RunConfig& cfg) {
    Output out(g.out);
    io::write_json(out.stream(), cfg, io::to_json(brake::solve_brake(g.ell, cfg.params)));
    return kOk;
  };

  int which_fixed = 1;
  {
    auto [sub, b] = command("fixed", "fixed point of the return map seeded by the brake orbit");
    b->add("fixed", which_fixed, "1: u > 0, 2: u < 0");
  }
  actions["fixed"] = [&](io::RunConfig& cfg) {
    Output out(g.out);
    io::write_json(out.stream(), cfg, io::to_json(fixed_point(which_fixed, g.ell, cfg.params)));
    return kOk;
  };

  std::vector<double> point;
  std::string method = "both";
  {
    auto [sub, b] = command("jacobian", "map Jacobian at a section point");
    b->add("point", point, "u,pu")->required()->delimiter(',')->expected(2);
    b->add("method", method, "variational, fd or both")->check(CLI::IsMember({"variational", "fd", "both"}));
  }
  actions["jacobian"] = [&](io::RunConfig& cfg) {
    const auto q = section_point(point, g.ell);
    Json j;
    if (method != "fd") j["variational"] = mat_json(ssmap::jacobian(q, cfg.params, ssmap::JacobianMethod::Variational));
    if (method != "variational")
      j["finite_difference"] = mat_json(ssmap::jacobian(q, cfg.params, ssmap::JacobianMethod::FiniteDifference));
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return kOk;
  };

  ssmap::ScanSpec scan;
  {
    auto [sub, b] = command("scan", "classify a grid of section points");
    b->add("umin", scan.umin, "")->required();
    b->add("umax", scan.umax, "")->required();
    b->add("pumin", scan.pumin, "")->required();
    b->add("pumax", scan.pumax, "")->required();
    b->add("nx", scan.nx, "")->required()->check(CLI::PositiveNumber);
    b->add("ny", scan.ny, "")->required()->check(CLI::PositiveNumber);
  }
  actions["scan"] = [&](io::RunConfig& cfg) {
    scan.jobs = g.jobs;
    const auto nodes = ssmap::scan_domain(scan, g.ell, cfg.params);
    Output out(g.out);
    io::write_grid(out.stream(), cfg, nodes);
    return kOk;
  };

  int iterations = 1000;
  std::string trajectory_path;
  {
    auto [sub, b] = command("iterate", "orbit of a section point under the map");
    b->add("point", point, "u,pu")->required()->delimiter(',')->expected(2);
    b->add("n", iterations, "map applications")->check(CLI::NonNegativeNumber);
    b->add("trajectory", trajectory_path, "also dump every integration step to this CSV");
  }
  actions["iterate"] = [&](io::RunConfig& cfg) {
    std::vector<io::OrbitPoint> orbit{{0, section_point(point, g.ell), 0}};
    std::vector<propagate::StepRecord> steps;
    ssmap::MapOptions opt;
    if (!trajectory_path.empty()) opt.on_step = [&steps](const propagate::StepRecord& r) { steps.push_back(r); };
    for (int n = 1; n <= iterations; ++n) {
      const auto o = ssmap::apply(orbit.back().point, cfg.params, opt);
      if (o.kind != ssmap::MapKind::Returned) {
        std::cerr << "orbit lost at application " << n << ": " << ssmap::to_string(o.kind) << '\n';
        break;
      }
      orbit.push_back({n, o.point, o.winding});
    }
    Output out(g.out);
    io::write_orbit(out.stream(), cfg, orbit);
    if (!trajectory_path.empty()) {
      Output traj(trajectory_path);
      io::write_trajectory(traj.stream(), cfg, steps);
    }
    return kOk;
  };

  ssmap::AreaSpec area;
  {
    auto [sub, b] = command("area", "area of a mapped ellipse");
    b->add("uc", area.u_c, "centre u of the ellipse");
    b->add("rc", area.r_c, "radius of the ellipse");
    b->add("c", area.c, "p_u weight of the ellipse");
    b->add("m", area.m, "samples")->check(CLI::Range(8, 100000000));
  }
  actions["area"] = [&](io::RunConfig& cfg) {
    area.jobs = g.jobs;
    Output out(g.out);
    io::write_json(out.stream(), cfg, io::to_json(ssmap::area_experiment(area, g.ell, cfg.params)));
    return kOk;
  };

  std::string which_branch = "unstable";
  manifolds::BranchOptions bopt;
  {
    auto [sub, b] = command("manifold", "grow a branch of a fixed point's manifold");
    b->add("which", which_branch, "unstable or stable")->check(CLI::IsMember({"unstable", "stable"}));
    b->add("dir", bopt.direction, "+1 toward smaller |u|, -1 away")->check(CLI::IsMember({-1, 1}));
    b->add("gens", bopt.generations, "generations after the initial primary")->check(CLI::NonNegativeNumber);
    b->add("fixed", which_fixed, "1: u > 0, 2: u < 0");
    b->add("corrected", bopt.corrected_generations, "generations corrected by MFLI");
    b->add("horizon", bopt.correction.horizon, "MFLI horizon in map iterates")->check(CLI::PositiveNumber);
    b->add("samples", bopt.correction.samples, "transverse MFLI candidates")->check(CLI::PositiveNumber);
    b->add("spacing", bopt.spacing_fraction, "chord bound over the bounding-box diagonal")
        ->check(CLI::PositiveNumber);
    b->add("max-points", bopt.max_points, "points per generation")->check(CLI::PositiveNumber);
  }
  actions["manifold"] = [&](io::RunConfig& cfg) {
    bopt.jobs = bopt.correction.jobs = g.jobs;
    const auto fp = fixed_point(which_fixed, g.ell, cfg.params);
    const auto which = which_branch == "unstable" ? manifolds::Which::Unstable : manifolds::Which::Stable;
    const auto branch = manifolds::grow_section_branch(fp, which, g.ell, cfg.params, bopt);
    Output out(g.out);
    io::write_branch(out.stream(), cfg, branch);
    return kOk;
  };

  int count = 100;
  constexpr double kTransitTol = 1e-8, kResidualTol = 1e-9, kLeapTol = 1e-9;
  {
    auto [sub, b] = command("transit-check", "analytic against integrated shadow transits");
    b->add("n", count, "transits")->check(CLI::PositiveNumber);
  }
  actions["transit-check"] = [&](io::RunConfig& cfg) {
    const auto rep = diagnostics::transit_check(g.ell, cfg.params, g.seed, static_cast<std::size_t>(count));
    const bool pass = rep.transits.size() >= static_cast<std::size_t>(count) && rep.no_root == 0 &&
                      rep.max_rel_error <= kTransitTol && rep.max_poly_residual <= kResidualTol;
    Json j;
    j["transits"] = rep.transits.size();
    j["no_root"] = rep.no_root;
    j["max_rel_error"] = rep.max_rel_error;
    j["max_poly_residual"] = rep.max_poly_residual;
    j["tolerance"] = {{"rel_error", kTransitTol}, {"poly_residual", kResidualTol}};
    j["pass"] = pass;
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return pass ? kOk : kModuleError;
  };
  {
    auto [sub, b] = command("leaps-check", "integral leaps at shadow crossings");
    b->add("n", count, "minimum number of crossings")->check(CLI::PositiveNumber);
  }
  actions["leaps-check"] = [&](io::RunConfig& cfg) {
    const auto rep = diagnostics::leaps_check(g.ell, cfg.params, g.seed, static_cast<std::size_t>(count));
    const bool pass = rep.leaps.size() >= static_cast<std::size_t>(count) && rep.max_dell_rel <= kLeapTol &&
                      rep.max_dh_rel <= kLeapTol && rep.max_ell_restore_rel <= kLeapTol;
    Json j;
    j["crossings"] = rep.leaps.size();
    j["stark_legs"] = rep.stark_legs;
    j["max_dell_rel"] = rep.max_dell_rel;
    j["max_dh_rel"] = rep.max_dh_rel;
    j["max_ell_restore_rel"] = rep.max_ell_restore_rel;
    j["tolerance"] = kLeapTol;
    j["pass"] = pass;
    Output out(g.out);
    io::write_json(out.stream(), cfg, j);
    return pass ? kOk : kModuleError;
  };

  // --version needs no command.
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--version") {
      std::cout << "ssmap " << SUNSHADOW_VERSION << " schema " << io::kSchemaVersion << '\n';
      return kOk;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto extras = app.remaining();
    if (app.get_subcommands().empty() && (extras.empty() || extras.front().rfind('-', 0) != 0))
      throw UsageError("UnknownCommand: " + (extras.empty() ? std::string("no command given") : "'" + extras.front() + "'"));
    throw UsageError(std::string("BadFlag: ") + e.what());
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  PhysParams params;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config file '" + g.config_path + "'");
    Json cfg;
    try {
      cfg = Json::parse(in);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    for (const auto& [key, v] : cfg.items()) {
      if (key == "params") {
        params = io::params_from_json(v, params);
      } else if (key == "ell") {
        if (!v.is_number()) throw Error(ErrorCode::ConfigInvalid, "'ell' must be a number");
        if (app.get_option("--ell")->count() == 0) g.ell = v.get<double>();
      } else if (key == "seed") {
        if (!v.is_number_unsigned()) throw Error(ErrorCode::ConfigInvalid, "'seed' must be a non-negative integer");
        if (app.get_option("--seed")->count() == 0) g.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        if (!v.is_number_integer() || v.get<int>() < 1) throw Error(ErrorCode::ConfigInvalid, "'jobs' must be >= 1");
        if (app.get_option("--jobs")->count() == 0) g.jobs = v.get<int>();
      } else if (bindings.count(key)) {
        if (key == name) bindings.at(key)->load(v);
      } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
      }
    }
  }
  if (!std::isnan(g.mu)) params.mu = g.mu;
  if (!std::isnan(g.f)) params.f = g.f;
  if (!std::isnan(g.R)) params.R = g.R;
  if (!std::isnan(g.r_escape)) params.r_escape = g.r_escape;
  if (!std::isnan(g.tau_budget)) params.tau_budget = g.tau_budget;
  if (!std::isnan(g.step)) params.step = g.step;
  if (g.switch_budget >= 0) params.switch_budget = g.switch_budget;
  params.validate();

  io::RunConfig cfg;
  cfg.command = name;
  cfg.params = params;
  cfg.seed = g.seed;
  cfg.options = bindings.at(name)->dump();
  cfg.options["ell"] = g.ell;
  return actions.at(name)(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? kConfig : kModuleError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModuleError;
  }
}
