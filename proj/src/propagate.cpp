#include "sunshadow/propagate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sunshadow/stark.hpp"

namespace sunshadow::propagate {

Regime enter_regime(RegimeKind kind, const Vec4& U, const PhysParams& p) {
  const double h = kind == RegimeKind::Kepler ? phase::kepler_energy(U, p.mu) : phase::stark_energy(U, p.mu, p.f);
  return {kind, h};
}

namespace {

bool inside_strip(double u, double v, double R) { return std::abs(u * v) < R && u * u > v * v; }

double regime_ell(RegimeKind kind, const Vec4& U, const PhysParams& p) {
  return kind == RegimeKind::Kepler ? phase::kepler_ell(U, p.mu) : phase::stark_ell(U, p.mu, p.f);
}

Vec4 regime_energy_gradient(RegimeKind kind, const Vec4& U, const PhysParams& p) {
  return phase::energy_gradient(U, p.mu, kind == RegimeKind::Kepler ? 0.0 : p.f);
}

Vec4 field4(const Regime& r, const Vec4& U, const PhysParams& p) {
  const double u = U[kU], v = U[kV];
  Vec4 d;
  d[kPu] = 2 * r.h * u;
  d[kPv] = 2 * r.h * v;
  if (r.kind == RegimeKind::Stark) {
    d[kPu] += 2 * p.f * u * u * u;
    d[kPv] -= 2 * p.f * v * v * v;
  }
  d[kU] = U[kPu];
  d[kV] = U[kPv];
  return d;
}

}  // namespace

RegimeKind regime_at(const Vec4& U, const PhysParams& p) {
  return inside_strip(U[kU], U[kV], p.R) ? RegimeKind::Kepler : RegimeKind::Stark;
}

State5 field(const Regime& regime, const State5& y, const PhysParams& p) {
  State5 d;
  d.head<4>() = field4(regime, y.head<4>(), p);
  d[4] = y[kU] * y[kU] + y[kV] * y[kV];
  return d;
}

Mat4 field_jacobian(const Regime& regime, const Vec4& U, const PhysParams& p) {
  Mat4 J = Mat4::Zero();
  const double stark = regime.kind == RegimeKind::Stark ? 1.0 : 0.0;
  J(kPu, kU) = 2 * regime.h + stark * 6 * p.f * U[kU] * U[kU];
  J(kPv, kV) = 2 * regime.h - stark * 6 * p.f * U[kV] * U[kV];
  J(kU, kPu) = 1;
  J(kV, kPv) = 1;
  return J;
}

Vec4 field_h_derivative(const Vec4& U) { return {2 * U[kU], 2 * U[kV], 0, 0}; }

ParabolicState<double> step_gauss(const Regime& regime, const ParabolicState<double>& s, double dtau,
                                  const PhysParams& p) {
  State5 y;
  y << s.pu, s.pv, s.u, s.v, s.t;
  const State5 y1 = gauss_step<5>([&](const State5& z) { return field(regime, z, p); }, y, dtau);
  return ParabolicState<double>::from_phase(y1.head<4>(), s.tau + dtau, y1[4]);
}

std::string_view to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::ReachedSection: return "ReachedSection";
    case FlowStatus::Collision: return "Collision";
    case FlowStatus::Escape: return "Escape";
    case FlowStatus::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

double default_step(double ell_s, const PhysParams& p) {
  const auto fam = stark::brake_family(ell_s, p);
  return stark::period_v(ell_s, fam.hs_star, p) / 400;
}

namespace {

// Step used when the caller gives none: T_v / 400 of the brake family of the
// start state's ell_s, or 1/400 of the Kepler oscillation period in tau.
double resolve_step(const Vec4& U, const Regime& regime, const PhysParams& p, const FlowOptions& opt) {
  if (opt.step > 0) return opt.step;
  if (p.step > 0) return p.step;
  const double ell_s = phase::stark_ell(U, p.mu, p.f);
  if (std::abs(ell_s) < p.mu) return default_step(ell_s, p);
  const double h = std::abs(regime.h);
  return h > 0 ? 2 * std::numbers::pi / std::sqrt(2 * h) / 400 : 1e-3;
}

// Hybrid flow on (p_u, p_v, u, v, t) optionally augmented with the 4x5
// sensitivity d U / d (U_leg_start, h) stored column-major after t.
template <int N>
class Engine {
 public:
  using Vec = Eigen::Matrix<double, N, 1>;
  static constexpr bool kVariational = N > 5;

  Engine(const ParabolicState<double>& start, RegimeKind kind, const PhysParams& p, const FlowOptions& opt)
      : p_(p), opt_(opt) {
    y_.setZero();
    carry_.setZero();
    y_.template head<5>() << start.pu, start.pv, start.u, start.v, start.t;
    tau_ = start.tau;
    regime_ = enter_regime(kind, start.phase(), p);
    dtau_ = resolve_step(start.phase(), regime_, p, opt) * (opt.direction < 0 ? -1.0 : 1.0);
    budget_ = opt.tau_budget > 0 ? opt.tau_budget : p.tau_budget;
    collision_g = [R = p.R](const Vec& z) { return radius(z) - R; };
    begin_leg();
  }

  struct Located {
    double theta;
    Vec y;
    Vec increment;  // y - y_ before rounding
  };

  FlowResult run() {
    const double tau0 = tau_;
    for (;;) {
      const double remaining = budget_ - std::abs(tau_ - tau0);
      if (remaining <= 0) return finish(FlowStatus::BudgetExceeded);
      const bool last = remaining < std::abs(dtau_);
      const double h = last ? std::copysign(remaining, dtau_) : dtau_;

      std::array<Vec, 3> stages;
      const Vec d1 = increment(y_, h, &stages);
      const Vec y1 = y_ + d1;
      const std::array<const Vec*, 5> samples{&y_, &stages[0], &stages[1], &stages[2], &y1};
      const std::array<double, 5> theta{0, gauss3::c[0], gauss3::c[1], gauss3::c[2], 1};

      // Earliest terminal or switching condition inside the step.
      std::optional<Located> best;
      std::optional<Surface> best_surface;
      auto consider = [&](const Located& at, std::optional<Surface> surface) {
        if (!best || at.theta < best->theta) {
          best = at;
          best_surface = surface;
        }
      };

      for (int k = 1; k < 5; ++k) {
        if (radius(*samples[k]) > p_.R) continue;
        consider(locate(y_, h, theta[k], 1.0, collision_g, collision_grad, true), std::nullopt);
        break;
      }

      const bool kepler = regime_.kind == RegimeKind::Kepler;
      for (const Surface surface : {Surface::Upper, Surface::Lower}) {
        const double off = surface == Surface::Upper ? p_.R : -p_.R;
        // Sign of uv - off on the side the current regime lives on.
        const double here = (surface == Surface::Upper) == kepler ? -1.0 : 1.0;
        auto g = [off](const Vec& z) { return z[kU] * z[kV] - off; };
        for (int k = 1; k < 5; ++k) {
          if ((g(*samples[k]) < 0) == (here < 0)) continue;
          const Located at = locate(y_, h, theta[k], here, g, guard_grad, false);
          if ((g(at.y) < 0) != (here < 0) && std::abs(g(at.y)) > 1e-9 * p_.R) break;
          if (at.y[kU] * at.y[kU] >= p_.R) consider(at, surface);
          break;
        }
      }

      if (!best && kepler && y1[kU] * y1[kU] < y1[kV] * y1[kV]) {
        // Left the strip across x = 0, which lies inside the Earth disk.
        auto gx = [](const Vec& z) { return z[kU] * z[kU] - z[kV] * z[kV]; };
        auto gx_grad = [](const Vec& z) -> Vec4 { return {0, 0, 2 * z[kU], -2 * z[kV]}; };
        consider(locate(y_, h, 1.0, 1.0, gx, gx_grad, true), std::nullopt);
      }

      if (best) {
        advance_to(*best, h);
        if (!best_surface) return finish(FlowStatus::Collision);
        if (auto status = switch_regime(*best_surface)) return finish(*status);
        continue;
      }

      advance(d1, h);
      if (radius(y_) >= p_.r_escape) return finish(FlowStatus::Escape);
      report_step(false);
      if (last) return finish(FlowStatus::BudgetExceeded);
    }
  }

  const std::vector<Mat4>& legs() const { return legs_; }
  const std::vector<Mat4>& raw() const { return raw_; }
  const std::vector<Mat4>& projectors() const { return projectors_; }

 private:
  static double radius(const Vec& z) { return (z[kU] * z[kU] + z[kV] * z[kV]) / 2; }
  static Vec4 guard_grad(const Vec& z) { return {0, 0, z[kV], z[kU]}; }
  static Vec4 collision_grad(const Vec& z) { return {0, 0, z[kU], z[kV]}; }

  Vec rhs(const Vec& z) const {
    Vec d;
    const Vec4 U = z.template head<4>();
    d.template head<4>() = field4(regime_, U, p_);
    d[4] = U[kU] * U[kU] + U[kV] * U[kV];
    if constexpr (kVariational) {
      using Sens = Eigen::Matrix<double, 4, 5>;
      const Eigen::Map<const Sens> S(z.data() + 5);
      Eigen::Map<Sens> dS(d.data() + 5);
      dS = field_jacobian(regime_, U, p_) * S;
      dS.col(4) += field_h_derivative(U);
    }
    return d;
  }

  Vec increment(const Vec& y, double h, std::array<Vec, 3>* stages = nullptr) const {
    return gauss_increment<N>([this](const Vec& z) { return rhs(z); }, y, h, stages);
  }

  // Root of g(step(y0, theta h)) on (0, theta_hi] by safeguarded Newton;
  // `lo_sign` is the sign g has before the crossing.  With `after` the
  // returned state lies on the far side of the root.
  template <typename G, typename Grad>
  Located locate(const Vec& y0, double h, double theta_hi, double lo_sign, G g, Grad grad, bool after) const {
    double lo = 0, hi = theta_hi;
    Vec d_lo = Vec::Zero();
    Vec d_hi = increment(y0, hi * h);
    Vec y_lo = y0;
    Vec y_hi = y0 + d_hi;
    const double g_lo = g(y0);
    double g_hi = g(y_hi);
    const double g_lo_eff = (g_lo < 0) == (lo_sign < 0) ? g_lo : 0.0;
    const double scale = std::max(p_.R, std::abs(g_lo) + std::abs(g_hi));
    double theta = g_hi != g_lo_eff ? hi - g_hi * (hi - lo) / (g_hi - g_lo_eff) : (lo + hi) / 2;
    if (!(theta > lo && theta < hi)) theta = (lo + hi) / 2;
    for (int it = 0; it < 100; ++it) {
      const Vec dt = increment(y0, theta * h);
      const Vec yt = y0 + dt;
      const double gt = g(yt);
      if ((gt < 0) == (lo_sign < 0) && gt != 0) {
        lo = theta;
        y_lo = yt;
        d_lo = dt;
      } else {
        hi = theta;
        y_hi = yt;
        d_hi = dt;
      }
      if (std::abs(gt) <= 4 * std::numeric_limits<double>::epsilon() * scale || hi - lo <= 1e-15) {
        if (after) return {hi, y_hi, d_hi};
        return {theta, yt, dt};
      }
      const Vec4 X = field4(regime_, yt.template head<4>(), p_);
      const double dg = h * grad(yt).dot(X);
      double next = dg != 0 ? theta - gt / dg : (lo + hi) / 2;
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      theta = next;
    }
    return after ? Located{hi, y_hi, d_hi} : Located{lo, y_lo, d_lo};
  }

  // Compensated accumulation of the increment into y_.
  void commit(const Vec& d) {
    const Vec y0 = y_;
    carry_ += d;
    y_ = y0 + carry_;
    carry_ += y0 - y_;
    turning_ += std::atan2(y0[kU] * y_[kV] - y0[kV] * y_[kU], y0[kU] * y_[kU] + y0[kV] * y_[kV]);
  }

  void advance(const Vec& d, double h) {
    commit(d);
    tau_ += h;
    ++steps_;
  }

  void advance_to(const Located& at, double h) {
    commit(at.increment);
    tau_ += at.theta * h;
  }

  void begin_leg() {
    leg_entry_ = y_.template head<4>();
    leg_tau_start_ = tau_;
    leg_ell_ = regime_ell(regime_.kind, leg_entry_, p_);
    if constexpr (kVariational) {
      Eigen::Map<Eigen::Matrix<double, 4, 5>> S(y_.data() + 5);
      S.setZero();
      S.template leftCols<4>().setIdentity();
      carry_.template tail<N - 5>().setZero();
    }
  }

  // Leg transition matrix including the frozen-energy dependence.
  Mat4 leg_matrix() const {
    const Eigen::Map<const Eigen::Matrix<double, 4, 5>> S(y_.data() + 5);
    return S.template leftCols<4>() + S.col(4) * regime_energy_gradient(regime_.kind, leg_entry_, p_).transpose();
  }

  void close_leg(const std::optional<Surface>& surface) {
    LegRecord rec;
    rec.regime = regime_;
    rec.tau_start = leg_tau_start_;
    rec.tau_end = tau_;
    rec.entry = ParabolicState<double>::from_phase(leg_entry_, leg_tau_start_);
    log_.push_back(rec);
    if constexpr (kVariational) {
      const Mat4 M = leg_matrix();
      Mat4 P = Mat4::Identity();
      if (surface) {
        const Vec4 U = y_.template head<4>();
        const Vec4 X = field4(regime_, U, p_);
        const Vec4 grad{0, 0, U[kV], U[kU]};
        const double den = grad.dot(X);
        if (std::abs(den) <= kTangentialTol * grad.norm() * X.norm())
          throw Error(ErrorCode::SingularSection, "tangential crossing of the shadow boundary");
        P -= X * grad.transpose() / den;
      }
      raw_.push_back(M);
      projectors_.push_back(P);
      legs_.push_back(P * M);
    }
  }

  std::optional<FlowStatus> switch_regime(Surface surface) {
    close_leg(surface);
    const Vec4 U = y_.template head<4>();
    const RegimeKind next = regime_.kind == RegimeKind::Kepler ? RegimeKind::Stark : RegimeKind::Kepler;
    CrossingEvent ev;
    ev.tau_event = tau_;
    ev.state = ParabolicState<double>::from_phase(U, tau_, y_[4]);
    ev.surface = surface;
    ev.direction = next == RegimeKind::Kepler ? Crossing::EnteringShadow : Crossing::LeavingShadow;
    ev.h_before = regime_.h;
    regime_ = enter_regime(next, U, p_);
    ev.h_after = regime_.h;
    ev.delta_h = ev.h_after - ev.h_before;
    ev.ell_after = regime_ell(next, U, p_);
    ev.delta_ell = ev.ell_after - leg_ell_;
    events_.push_back(ev);
    begin_leg();
    report_step(true);
    if (opt_.single_leg) return FlowStatus::ReachedSection;
    if (opt_.stop_at && opt_.stop_at(ev)) return FlowStatus::ReachedSection;
    if (static_cast<int>(events_.size()) >= p_.switch_budget) return FlowStatus::BudgetExceeded;
    return std::nullopt;
  }

  void report_step(bool event) const {
    if (!opt_.on_step) return;
    StepRecord rec;
    rec.state = ParabolicState<double>::from_phase(y_.template head<4>(), tau_, y_[4]);
    rec.regime = regime_;
    rec.ell = regime_ell(regime_.kind, y_.template head<4>(), p_);
    rec.event = event;
    opt_.on_step(rec);
  }

  FlowResult finish(FlowStatus status) {
    const bool ended_on_event = status == FlowStatus::ReachedSection ||
                                (status == FlowStatus::BudgetExceeded && !events_.empty() &&
                                 events_.back().tau_event == tau_);
    if (!ended_on_event) close_leg(std::nullopt);
    FlowResult r;
    r.final = ParabolicState<double>::from_phase(y_.template head<4>(), tau_, y_[4]);
    r.events = std::move(events_);
    r.status = status;
    r.regime_log = std::move(log_);
    r.final_regime = regime_;
    r.uv_turning = turning_;
    r.accepted_steps = steps_;
    return r;
  }

  const PhysParams& p_;
  FlowOptions opt_;
  std::function<double(const Vec&)> collision_g;
  Vec y_;
  Vec carry_;
  double tau_ = 0;
  double dtau_ = 0;
  double budget_ = 0;
  Regime regime_;
  Vec4 leg_entry_ = Vec4::Zero();
  double leg_tau_start_ = 0;
  double leg_ell_ = 0;
  double turning_ = 0;
  int steps_ = 0;
  std::vector<CrossingEvent> events_;
  std::vector<LegRecord> log_;
  std::vector<Mat4> legs_, raw_, projectors_;
};

}  // namespace

FlowResult sunshadow_flow(const ParabolicState<double>& start, RegimeKind start_regime, const PhysParams& p,
                          const FlowOptions& opt) {
  return Engine<5>(start, start_regime, p, opt).run();
}

FlowResult propagate_to_event(const ParabolicState<double>& start, RegimeKind start_regime, const PhysParams& p,
                              FlowOptions opt) {
  opt.single_leg = true;
  return Engine<5>(start, start_regime, p, opt).run();
}

VariationalResult variational_flow(const ParabolicState<double>& start, RegimeKind start_regime,
                                   const PhysParams& p, const FlowOptions& opt) {
  Engine<25> engine(start, start_regime, p, opt);
  VariationalResult out;
  out.flow = engine.run();
  out.legs = engine.legs();
  out.raw = engine.raw();
  out.projectors = engine.projectors();
  for (const Mat4& M : out.legs) out.total = M * out.total;
  return out;
}

std::array<double, 9> transit_polynomial(double h_k, double ell_k, double c_k, const PhysParams& p) {
  const double mu = p.mu, R2 = p.R * p.R, c2 = c_k * c_k;
  std::array<double, 9> c{};
  c[8] = (mu - ell_k) * (mu - ell_k);
  c[6] = -4 * (mu - ell_k) * c2;
  c[4] = 2 * (R2 * (ell_k * ell_k - mu * mu - 4 * c2 * h_k) + 2 * c2 * c2);
  c[2] = -4 * (mu + ell_k) * R2 * c2;
  c[0] = (mu + ell_k) * (mu + ell_k) * R2 * R2;
  return c;
}

namespace {

// Quartic in xi = u^2 from the even coefficients; value and derivative.
std::pair<double, double> quartic_eval(const std::array<double, 9>& c, double xi) {
  double v = 0, d = 0;
  for (int k = 4; k >= 0; --k) {
    d = d * xi + v;
    v = v * xi + c[2 * k];
  }
  return {v, d};
}

}  // namespace

TransitResult kepler_transit_analytic(const ParabolicState<double>& entry, const PhysParams& p) {
  const Vec4 U0 = entry.phase();
  const double h = phase::kepler_energy(U0, p.mu);
  const double ell = phase::kepler_ell(U0, p.mu);
  const double ck = phase::angular_momentum(U0);
  const auto coef = transit_polynomial(h, ell, ck, p);
  const auto A0 = integrals(entry, p).A_k;

  // Companion matrix in z = xi / s.
  const double s = std::max(entry.u * entry.u, p.R);
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  const double lead = coef[8] * std::pow(s, 4);
  for (int k = 0; k < 4; ++k) C(0, 3 - k) = -coef[2 * k] * std::pow(s, k) / lead;
  for (int k = 1; k < 4; ++k) C(k, k - 1) = 1;
  const Eigen::Vector4cd z = C.eigenvalues();

  TransitResult best;
  double best_mismatch = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    // A symmetric transit makes the exit a double root, which round-off
    // splits into a close complex pair whose real part is still accurate.
    if (std::abs(z[i].imag()) > 1e-4 * std::abs(z[i])) continue;
    double xi = z[i].real() * s;
    for (int it = 0; it < 8 && z[i].imag() == 0; ++it) {
      const auto [v, d] = quartic_eval(coef, xi);
      if (d == 0) break;
      const double next = xi - v / d;
      if (next == xi) break;
      xi = next;
    }
    if (!(xi >= p.R)) continue;
    const double u = std::sqrt(xi);
    best.candidate_u.push_back(u);
    const double v = p.R / u;
    const double pu2 = 2 * (h * xi + p.mu + ell);
    const double pv2 = 2 * (h * v * v + p.mu - ell);
    if (pu2 < -1e-9 * (p.mu + std::abs(ell)) || pv2 < -1e-9 * (p.mu + std::abs(ell))) continue;
    const double apu = std::sqrt(std::max(pu2, 0.0)), apv = std::sqrt(std::max(pv2, 0.0));
    for (const double su : {1.0, -1.0}) {
      for (const double sv : {1.0, -1.0}) {
        const Vec4 U{su * apu, sv * apv, u, v};
        const double c_err = std::abs(phase::angular_momentum(U) - ck);
        if (c_err > 1e-6 * (std::abs(ck) + std::sqrt(p.mu * p.R))) continue;
        const auto st = ParabolicState<double>::from_phase(U);
        const auto cs = to_cartesian(st);
        if (!(cs.py > 0)) continue;
        const double mismatch = std::abs(integrals(st, p).A_k.y() - A0.y()) + c_err;
        if (mismatch < best_mismatch) {
          best_mismatch = mismatch;
          best.exit = st;
        }
      }
    }
  }
  if (!std::isfinite(best_mismatch)) throw Error(ErrorCode::NoExitRoot, "no admissible exit root on uv = +R");

  const double u = best.exit.u;
  double num = 0, den = 0;
  for (int k = 0; k <= 8; ++k) {
    const double term = coef[k] * std::pow(u, k);
    num += term;
    den += std::abs(term);
  }
  best.poly_residual = den > 0 ? std::abs(num) / den : 0;
  return best;
}

}  // namespace sunshadow::propagate
