#include "sunshadow/stark.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sunshadow/elliptic.hpp"

namespace sunshadow::stark {

namespace {

// Both roots of t^2 - 2 b t + c = 0 given the radicand d = b^2 - c >= 0; the
// root of larger magnitude comes from the non-cancelling sum, the other from
// the product c.
std::pair<double, double> stable_roots(double b, double d, double c) {
  const double sq = std::sqrt(d);
  if (b >= 0) {
    const double hi = b + sq;
    const double lo = hi != 0 ? c / hi : b - sq;
    return {hi, lo};
  }
  const double lo = b - sq;
  const double hi = lo != 0 ? c / lo : b + sq;
  return {hi, lo};
}

}  // namespace

double QuarticStructure::U(double u, const PhysParams& p) const {
  const double u2 = u * u;
  return p.f * u2 * u2 + 2 * h_s * u2 + 2 * (p.mu + ell_s);
}

double QuarticStructure::V(double v, const PhysParams& p) const {
  const double v2 = v * v;
  return -p.f * v2 * v2 + 2 * h_s * v2 + 2 * (p.mu - ell_s);
}

QuarticStructure quartic_structure(double ell_s, double h_s, const PhysParams& p) {
  QuarticStructure q;
  q.ell_s = ell_s;
  q.h_s = h_s;
  const double hf = h_s / p.f;

  // xi solves t^2 + 2(h/f) t + 2(mu+ell)/f = 0.
  // Cancels near h_s*, where tau_u is most sensitive; form it in extended precision.
  const long double hf_l = static_cast<long double>(h_s) / p.f;
  q.xi_radicand = static_cast<double>(hf_l * hf_l - 2 * (static_cast<long double>(p.mu) + ell_s) / p.f);
  if (q.xi_radicand >= 0) {
    const auto [a, b] = stable_roots(-hf, q.xi_radicand, 2 * (p.mu + ell_s) / p.f);
    q.xi1 = a;
    q.xi2 = b;
  } else {
    const double im = std::sqrt(-q.xi_radicand);
    q.xi1 = {-hf, im};
    q.xi2 = {-hf, -im};
    q.xi_real = false;
  }

  // eta solves t^2 - 2(h/f) t - 2(mu-ell)/f = 0.
  q.eta_radicand = hf * hf + 2 * (p.mu - ell_s) / p.f;
  if (q.eta_radicand >= 0) {
    const auto [a, b] = stable_roots(hf, q.eta_radicand, -2 * (p.mu - ell_s) / p.f);
    q.eta1 = a;
    q.eta2 = b;
  } else {
    const double im = std::sqrt(-q.eta_radicand);
    q.eta1 = {hf, im};
    q.eta2 = {hf, -im};
    q.eta_real = false;
  }

  auto root = [](bool real, std::complex<double> z) -> std::optional<double> {
    if (real && z.real() >= 0) return std::sqrt(z.real());
    return std::nullopt;
  };
  q.u1 = root(q.xi_real, q.xi1);
  q.u2 = root(q.xi_real, q.xi2);
  q.v1 = root(q.eta_real, q.eta1);
  q.v2 = root(q.eta_real, q.eta2);
  return q;
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
    case Region::B_I_II: return "B_I_II";
    case Region::B_I_IV: return "B_I_IV";
    case Region::B_II_IV: return "B_II_IV";
    case Region::B_II_III: return "B_II_III";
    case Region::B_II_edge: return "B_II_edge";
    case Region::B_IV_edge: return "B_IV_edge";
    case Region::B_III_edge: return "B_III_edge";
    case Region::P_I_II_IV: return "P_I_II_IV";
    case Region::P_II_III: return "P_II_III";
    case Region::P_II_IV: return "P_II_IV";
    case Region::Forbidden: return "Forbidden";
  }
  return "?";
}

RegionClass classify(double ell_s, double h_s, const PhysParams& p, double tol) {
  const double L = ell_s / p.mu;
  const double H = h_s / std::sqrt(p.f * p.mu);
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

  RegionClass rc;
  auto set = [&rc](Region r) {
    rc.label = r;
    rc.bounded_u_branch_exists = r == Region::IV;
    return rc;
  };

  if (near(L, -1)) {
    if (near(H, 0)) return set(Region::P_I_II_IV);
    return set(H > 0 ? Region::B_I_II : Region::B_I_IV);
  }
  if (near(L, 1)) {
    if (near(H, 0)) return set(Region::P_II_III);
    if (near(H, -2)) return set(Region::P_II_IV);
    if (H > 0) return set(Region::B_II_III);
    return set(H > -2 ? Region::B_II_edge : Region::B_IV_edge);
  }
  if (L < -1) return set(Region::I);
  if (L < 1) {
    const double edge = -std::sqrt(2 * (1 + L));
    if (near(H, edge)) return set(Region::B_II_IV);
    return set(H > edge ? Region::II : Region::IV);
  }
  const double edge = std::sqrt(2 * (L - 1));
  if (near(H, edge)) return set(Region::B_III_edge);
  return set(H > edge ? Region::III : Region::Forbidden);
}

RootPattern root_pattern(const QuarticStructure& q, const PhysParams& p, double tol) {
  // Work in units where lengths xi, eta are measured in sqrt(mu / f).
  const double scale = std::sqrt(p.mu / p.f);
  const double H = q.h_s / std::sqrt(p.f * p.mu);
  const double L = q.ell_s / p.mu;
  const double slack = 4 * tol;

  auto classify_pair = [&](bool real, std::complex<double> z1, std::complex<double> z2,
                           double radicand, double cross, RootKind& k1, RootKind& k2,
                           bool& dbl) {
    const double d = radicand / (scale * scale);
    dbl = std::abs(d) <= slack * (H * H + 2 * std::abs(cross));
    if (!real && !dbl) {
      k1 = k2 = RootKind::Complex;
      return;
    }
    double r1 = z1.real() / scale, r2 = z2.real() / scale;
    const bool small_is_2 = std::abs(r2) <= std::abs(r1);
    double& small = small_is_2 ? r2 : r1;
    double& big = small_is_2 ? r1 : r2;
    if (std::abs(r1 * r2) <= slack) small = 0;
    if (small == 0 && std::abs(big) <= slack) big = 0;
    if (dbl) r1 = r2 = (r1 + r2) / 2;
    auto kind = [](double r) {
      return r > 0 ? RootKind::Positive : (r < 0 ? RootKind::Negative : RootKind::Zero);
    };
    k1 = kind(r1);
    k2 = kind(r2);
  };

  RootPattern rp{};
  classify_pair(q.xi_real, q.xi1, q.xi2, q.xi_radicand, 1 + L, rp.xi1, rp.xi2, rp.xi_double);
  classify_pair(q.eta_real, q.eta1, q.eta2, q.eta_radicand, 1 - L, rp.eta1, rp.eta2, rp.eta_double);
  return rp;
}

std::optional<RootPattern> expected_pattern(Region r) {
  using K = RootKind;
  // {xi1, xi2, eta1, eta2, xi_double, eta_double}
  switch (r) {
    case Region::I: return RootPattern{K::Positive, K::Negative, K::Positive, K::Negative};
    case Region::II: return RootPattern{K::Complex, K::Complex, K::Positive, K::Negative};
    case Region::III: return RootPattern{K::Complex, K::Complex, K::Positive, K::Positive};
    case Region::IV: return RootPattern{K::Positive, K::Positive, K::Positive, K::Negative};
    case Region::B_I_II: return RootPattern{K::Zero, K::Negative, K::Positive, K::Negative};
    case Region::B_I_IV: return RootPattern{K::Positive, K::Zero, K::Positive, K::Negative};
    case Region::B_II_IV:
      return RootPattern{K::Positive, K::Positive, K::Positive, K::Negative, true, false};
    case Region::B_II_III: return RootPattern{K::Complex, K::Complex, K::Positive, K::Zero};
    case Region::B_II_edge: return RootPattern{K::Complex, K::Complex, K::Zero, K::Negative};
    case Region::B_IV_edge: return RootPattern{K::Positive, K::Positive, K::Zero, K::Negative};
    case Region::B_III_edge:
      return RootPattern{K::Complex, K::Complex, K::Positive, K::Positive, false, true};
    // The closed forms give xi1 = xi2 = 0 and eta2 < 0 at ell = -mu, h = 0.
    case Region::P_I_II_IV:
      return RootPattern{K::Zero, K::Zero, K::Positive, K::Negative, true, false};
    case Region::P_II_III:
      return RootPattern{K::Complex, K::Complex, K::Zero, K::Zero, false, true};
    case Region::P_II_IV:
      return RootPattern{K::Positive, K::Positive, K::Zero, K::Negative, true, false};
    case Region::Forbidden: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Point2> zero_velocity_points(double ell_s, double h_s, const PhysParams& p) {
  const auto rc = classify(ell_s, h_s, p);
  if (rc.label != Region::I && rc.label != Region::IV) return {};
  const auto q = quartic_structure(ell_s, h_s, p);
  const double xi1 = q.xi1.real(), xi2 = q.xi2.real(), eta1 = q.eta1.real();

  std::vector<Point2> pts;
  auto add = [&](double xi) {
    const double x = xi / 2 - eta1 / 2;
    const double y = std::sqrt(xi * eta1);
    pts.push_back({x, y});
    pts.push_back({x, -y});
  };
  add(xi1);
  if (rc.label == Region::IV) add(xi2);

  for (const auto& pt : pts) {
    const double r = std::hypot(pt.x, pt.y);
    const double resid = h_s + p.mu / r + p.f * pt.x;
    if (std::abs(resid) > 1e-9 * (std::abs(h_s) + p.mu / r))
      throw std::logic_error("zero_velocity_points: kinetic energy does not vanish");
  }
  return pts;
}

double period_v(double ell_s, double h_s, const PhysParams& p) {
  const auto q = quartic_structure(ell_s, h_s, p);
  const double sf = std::sqrt(p.f);
  if (q.eta_real && q.eta1.real() > 0) {
    if (q.eta2.real() <= 0) {
      const double a = std::sqrt(2 * std::sqrt(q.eta_radicand));  // sqrt(eta1 - eta2)
      const double b = std::sqrt(-q.eta2.real());
      return 2 * std::numbers::pi / (sf * elliptic::agm(a, b));
    }
    // v oscillates in [v2, v1] away from the axis.
    return std::numbers::pi / (sf * elliptic::agm(*q.v1, *q.v2));
  }
  throw Error(ErrorCode::OutOfRange, "no admissible v motion at (ell_s, h_s)");
}

double period_u(double ell_s, double h_s, const PhysParams& p) {
  if (classify(ell_s, h_s, p).label != Region::IV)
    throw Error(ErrorCode::UnboundedU, "u is periodic only on the bounded branch of region IV");
  const auto q = quartic_structure(ell_s, h_s, p);
  const double a = *q.u1;
  const double b = std::sqrt(2 * std::sqrt(q.xi_radicand));  // sqrt(xi1 - xi2)
  return 2 * std::numbers::pi / (std::sqrt(p.f) * elliptic::agm(a, b));
}

Periods periods(double ell_s, double h_s, const PhysParams& p) {
  return {period_u(ell_s, h_s, p), period_v(ell_s, h_s, p)};
}

Mat2 reduced_u_jacobian(double ell_s, double u, double pu, const PhysParams& p) {
  const double u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
  const double k = 2 * (p.mu + ell_s);
  Mat2 J;
  J << -2 * pu / u3, 1 / u2,                              //
      (-3 * pu * pu + 3 * k) / u4 + p.f, 2 * pu / u3;
  return J;
}

BrakeFamily brake_family(double ell_s, const PhysParams& p) {
  if (!(ell_s > -p.mu && ell_s < p.mu))
    throw Error(ErrorCode::OutOfRange, "brake family needs ell_s in (-mu, mu), got " + std::to_string(ell_s));
  BrakeFamily b;
  const double k = 2 * (p.mu + ell_s) / p.f;
  b.xi_star = std::sqrt(k);
  b.u_star = std::sqrt(b.xi_star);
  b.hs_star = -std::sqrt(2 * p.f * (p.mu + ell_s));
  const auto q = quartic_structure(ell_s, b.hs_star, p);
  b.eta1_star = q.eta1.real();
  b.v1_star = std::sqrt(b.eta1_star);
  b.reduced_jacobian = reduced_u_jacobian(ell_s, b.u_star, 0.0, p);
  return b;
}

double commensurable_energy(double ell_s, int num, int den, const PhysParams& p,
                            std::optional<double> h_lo, std::optional<double> h_hi) {
  if (num <= 0 || den <= 0 || num >= den)
    throw Error(ErrorCode::InvalidRatio, "T_v / T_u must lie in (0, 1)");
  const auto fam = brake_family(ell_s, p);
  double hi = h_hi.value_or(fam.hs_star * (1 + 1e-9));
  double lo = h_lo.value_or(64 * fam.hs_star);
  const double target = static_cast<double>(num) / den;
  auto g = [&](double h) { return period_v(ell_s, h, p) / period_u(ell_s, h, p) - target; };

  double g_lo = g(lo), g_hi = g(hi);
  if (!(g_lo * g_hi < 0)) throw Error(ErrorCode::NotFound, "ratio not bracketed in the search interval");
  for (int i = 0; i < 200 && std::abs(hi - lo) > 2e-16 * std::abs(lo); ++i) {
    const double mid = (lo + hi) / 2;
    const double gm = g(mid);
    if (gm == 0) return mid;
    if ((gm < 0) == (g_lo < 0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace sunshadow::stark
