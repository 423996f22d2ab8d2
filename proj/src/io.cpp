#include "sunshadow/io.hpp"

#include <charconv>
#include <ostream>

namespace sunshadow::io {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

Json to_json(const PhysParams& p) {
  Json j;
  j["mu"] = p.mu;
  j["f"] = p.f;
  j["R"] = p.R;
  j["r_escape"] = p.r_escape;
  j["tau_budget"] = p.tau_budget;
  j["switch_budget"] = p.switch_budget;
  j["tol_abs"] = p.tol_abs;
  j["tol_rel"] = p.tol_rel;
  j["step"] = p.step;
  return j;
}

PhysParams params_from_json(const Json& j, PhysParams base) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "physical parameters must be a JSON object");
  auto number = [&](const std::string& key, const Json& v) {
    if (!v.is_number()) throw Error(ErrorCode::ConfigInvalid, "'" + key + "' must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "mu") base.mu = number(key, v);
    else if (key == "f") base.f = number(key, v);
    else if (key == "R") base.R = number(key, v);
    else if (key == "r_escape") base.r_escape = number(key, v);
    else if (key == "tau_budget") base.tau_budget = number(key, v);
    else if (key == "tol_abs") base.tol_abs = number(key, v);
    else if (key == "tol_rel") base.tol_rel = number(key, v);
    else if (key == "step") base.step = number(key, v);
    else if (key == "switch_budget") {
      if (!v.is_number_integer()) throw Error(ErrorCode::ConfigInvalid, "'switch_budget' must be an integer");
      base.switch_budget = v.get<int>();
    } else {
      throw Error(ErrorCode::ConfigInvalid, "unknown physical parameter '" + key + "'");
    }
  }
  base.validate();
  return base;
}

Json RunConfig::to_json() const {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["params"] = io::to_json(params);
  j["options"] = options;
  j["seed"] = seed;
  return j;
}

CsvWriter::CsvWriter(std::ostream& os, const RunConfig& cfg, const std::vector<std::string>& columns) : os_(os) {
  os_ << "# config: " << cfg.to_json().dump() << '\n';
  for (const auto& c : columns) {
    if (&c != &columns.front()) os_ << ',';
    os_ << c;
  }
  os_ << '\n';
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) os_ << ',';
  os_ << s;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  os_ << '\n';
  first_ = true;
}

void write_grid(std::ostream& os, const RunConfig& cfg, const std::vector<ssmap::ScanNode>& nodes) {
  CsvWriter w(os, cfg, {"u", "pu", "class", "winding"});
  for (const auto& n : nodes) {
    w.cell(n.u).cell(n.pu).cell(std::string(ssmap::to_string(n.cls)));
    w.cell(n.winding ? std::to_string(*n.winding) : std::string());
    w.end_row();
  }
}

void write_branch(std::ostream& os, const RunConfig& cfg, const manifolds::Branch& b) {
  CsvWriter w(os, cfg, {"gen", "comp", "idx", "u", "pu"});
  for (const auto& v : b.primaries)
    for (std::size_t c = 0; c < v.components.size(); ++c)
      for (std::size_t i = 0; i < v.components[c].size(); ++i) {
        const Vec2& x = v.components[c][i].x;
        w.cell(v.generation).cell(c).cell(i).cell(x[0]).cell(x[1]);
        w.end_row();
      }
}

void write_orbit(std::ostream& os, const RunConfig& cfg, const std::vector<OrbitPoint>& orbit) {
  CsvWriter w(os, cfg, {"n", "u", "pu", "winding"});
  for (const auto& o : orbit) {
    w.cell(o.n).cell(o.point.u).cell(o.point.pu).cell(o.winding);
    w.end_row();
  }
}

void write_trajectory(std::ostream& os, const RunConfig& cfg, const std::vector<propagate::StepRecord>& steps) {
  CsvWriter w(os, cfg, {"tau", "t", "u", "v", "pu", "pv", "x", "y", "regime", "h", "ell", "event"});
  for (const auto& r : steps) {
    const auto& s = r.state;
    const double x = (s.u * s.u - s.v * s.v) / 2, y = s.u * s.v;
    w.cell(s.tau).cell(s.t).cell(s.u).cell(s.v).cell(s.pu).cell(s.pv).cell(x).cell(y);
    w.cell(std::string(r.regime.kind == propagate::RegimeKind::Kepler ? "K" : "S"));
    w.cell(r.regime.h).cell(r.ell).cell(r.event ? 1 : 0);
    w.end_row();
  }
}

Json to_json(const brake::BrakeSolution& s) {
  Json j;
  j["ell_s"] = s.ell_s;
  j["x0_star"] = s.x0_star;
  j["hs_hat"] = s.hs_hat;
  j["hk"] = s.hk;
  j["xiE"] = s.xiE;
  j["puE"] = s.puE;
  j["brake_point"] = {s.x_brake, s.y_brake};
  j["residual_tau"] = s.residual_tau;
  j["tau_kepler"] = s.tau_kepler;
  j["tau_stark"] = s.tau_stark;
  j["hs_bar"] = s.hs_bar;
  j["hs_star"] = s.hs_star;
  j["roots"] = s.roots;
  j["tolerances"] = {{"guard_fraction", brake::kGuardFraction}, {"scan_points", brake::kScanPoints}};
  return j;
}

Json to_json(const ssmap::FixedPoint& fp) {
  Json j;
  j["ell_s"] = fp.point.ell_s;
  j["u"] = fp.point.u;
  j["pu"] = fp.point.pu;
  j["residual"] = fp.residual;
  j["iterations"] = fp.iterations;
  j["winding"] = fp.winding;
  const Mat2& J = fp.jacobian;
  j["jacobian"] = {{J(0, 0), J(0, 1)}, {J(1, 0), J(1, 1)}};
  j["eigen_real"] = fp.eigen.real;
  j["lambda1"] = fp.eigen.lambda1;
  j["lambda2"] = fp.eigen.lambda2;
  j["v1"] = {fp.eigen.v1[0], fp.eigen.v1[1]};
  j["v2"] = {fp.eigen.v2[0], fp.eigen.v2[1]};
  j["tolerance"] = ssmap::kFixedPointTol;
  return j;
}

Json to_json(const ssmap::AreaResult& a) {
  Json j;
  j["A0"] = a.A0;
  j["A0_numeric"] = a.A0_numeric;
  j["A1"] = a.A1;
  j["A1_half"] = a.A1_half;
  j["quadrature_error"] = a.quadrature_error;
  j["relative_loss"] = (a.A0 - a.A1) / a.A0;
  j["orientation"] = a.orientation;
  return j;
}

void write_json(std::ostream& os, const RunConfig& cfg, const Json& payload) {
  Json j;
  j["config"] = cfg.to_json();
  for (const auto& [k, v] : payload.items()) j[k] = v;
  os << j.dump(2) << '\n';
}

}  // namespace sunshadow::io
