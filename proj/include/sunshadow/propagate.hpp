#pragma once

// Hybrid Sun-shadow flow in fictitious time: Kepler inside the shadow strip
// {x >= 0, |y| <= R}, Stark outside, switching on the guarded surfaces
// uv = +R and uv = -R with |u| >= sqrt(R).  Each leg integrates the
// frozen-energy field with a 3-stage Gauss collocation method.

#include <array>
#include <functional>
#include <string_view>
#include <vector>

#include "sunshadow/core.hpp"

namespace sunshadow::propagate {

enum class RegimeKind { Kepler, Stark };

// A regime together with the energy frozen at its entry.
struct Regime {
  RegimeKind kind = RegimeKind::Stark;
  double h = 0;
};

// Freezes h = H_kind(U).
Regime enter_regime(RegimeKind kind, const Vec4& U, const PhysParams& p);

// Position test: Kepler iff the point lies strictly inside the shadow strip.
RegimeKind regime_at(const Vec4& U, const PhysParams& p);

// (p_u, p_v, u, v, t) and its tau-derivative.
using State5 = Eigen::Matrix<double, 5, 1>;

State5 field(const Regime& regime, const State5& y, const PhysParams& p);

// dX/dU at fixed h, and dX/dh.
Mat4 field_jacobian(const Regime& regime, const Vec4& U, const PhysParams& p);
Vec4 field_h_derivative(const Vec4& U);

// One step of the s-stage Gauss collocation method (s = 3, order 6) for the
// autonomous system y' = rhs(y).  Stage equations are solved by fixed-point
// iteration to round-off; throws NoConvergence otherwise.
template <int N, typename Rhs>
Eigen::Matrix<double, N, 1> gauss_increment(Rhs&& rhs, const Eigen::Matrix<double, N, 1>& y, double dtau,
                                            std::array<Eigen::Matrix<double, N, 1>, 3>* stages = nullptr);
template <int N, typename Rhs>
Eigen::Matrix<double, N, 1> gauss_step(Rhs&& rhs, const Eigen::Matrix<double, N, 1>& y, double dtau,
                                       std::array<Eigen::Matrix<double, N, 1>, 3>* stages = nullptr);

ParabolicState<double> step_gauss(const Regime& regime, const ParabolicState<double>& s,
                                  double dtau, const PhysParams& p);

enum class Surface { Upper, Lower };  // uv = +R, uv = -R
enum class Crossing { EnteringShadow, LeavingShadow };

struct CrossingEvent {
  double tau_event = 0;
  ParabolicState<double> state;
  Surface surface = Surface::Upper;
  Crossing direction = Crossing::EnteringShadow;
  double h_before = 0, h_after = 0;
  double delta_h = 0;    // h_after - h frozen on the previous leg
  double delta_ell = 0;  // ell of the new regime at the event - ell of the previous leg entry
  double ell_after = 0;
};

enum class FlowStatus { ReachedSection, Collision, Escape, BudgetExceeded };

std::string_view to_string(FlowStatus s);

struct LegRecord {
  Regime regime;
  double tau_start = 0, tau_end = 0;
  ParabolicState<double> entry;
};

struct FlowResult {
  ParabolicState<double> final;
  std::vector<CrossingEvent> events;
  FlowStatus status = FlowStatus::BudgetExceeded;
  std::vector<LegRecord> regime_log;
  Regime final_regime;
  // Unwrapped change of arg(u + i v) along the trajectory; the position
  // vector turns by twice this angle.
  double uv_turning = 0;
  int accepted_steps = 0;
};

// Per accepted step (and at every event), for trajectory dumps.
struct StepRecord {
  ParabolicState<double> state;
  Regime regime;
  double ell = 0;
  bool event = false;
};

struct FlowOptions {
  // Negative reverses the flow direction.
  double direction = 1.0;
  // Return ReachedSection at the first guarded crossing for which this
  // returns true (evaluated after the regime switch).  Unset: never.
  std::function<bool(const CrossingEvent&)> stop_at;
  // Stop after the first guarded crossing whatever it is (single leg).
  bool single_leg = false;
  std::function<void(const StepRecord&)> on_step;
  // Overrides p.step when positive.
  double step = 0;
  // Overrides p.tau_budget when positive.
  double tau_budget = 0;
};

FlowResult sunshadow_flow(const ParabolicState<double>& start, RegimeKind start_regime,
                          const PhysParams& p, const FlowOptions& opt = {});

FlowResult propagate_to_event(const ParabolicState<double>& start, RegimeKind start_regime,
                              const PhysParams& p, FlowOptions opt = {});

// Transversality threshold (scaled) below which a crossing counts as tangential.
inline constexpr double kTangentialTol = 1e-13;

struct VariationalResult {
  FlowResult flow;
  // Per leg: d U(end of leg) / d U(start of leg), including the dependence of
  // the frozen energy on the entry state and, for legs ending on a surface,
  // the section correction.
  std::vector<Mat4> legs;
  // Raw fixed-tau transition matrices and the section projectors.
  std::vector<Mat4> raw;
  std::vector<Mat4> projectors;
  Mat4 total = Mat4::Identity();
};

// Re-integrates the flow with the variational equations.  Throws
// SingularSection at a tangential crossing.
VariationalResult variational_flow(const ParabolicState<double>& start, RegimeKind start_regime,
                                   const PhysParams& p, const FlowOptions& opt = {});

// Exit state through uv = +R of a Kepler leg entering on uv = -R, from the
// degree-8 polynomial in u.  Throws NoExitRoot if no admissible root exists.
struct TransitResult {
  ParabolicState<double> exit;
  double poly_residual = 0;  // |P8(u)| / sum |c_i u^i|
  std::vector<double> candidate_u;
};
TransitResult kepler_transit_analytic(const ParabolicState<double>& entry, const PhysParams& p);

// Coefficients c_0..c_8 of the degree-8 polynomial for given integrals.
std::array<double, 9> transit_polynomial(double h_k, double ell_k, double c_k, const PhysParams& p);

// T_v / 400 at h_s* for ell_s in (-mu, mu).
double default_step(double ell_s, const PhysParams& p);

}  // namespace sunshadow::propagate

#include "sunshadow/detail/gauss.hpp"
