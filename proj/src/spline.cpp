#include "sunshadow/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sunshadow::spline {

namespace {

// Thomas algorithm for a tridiagonal system; a, b, c are sub-, main and
// super-diagonals.
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values, bool periodic)
    : t_(std::move(knots)), y_(std::move(values)) {
  const std::size_t n = t_.size();
  if (n < 3 || y_.size() != n) throw std::invalid_argument("spline needs at least three matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("spline knots must increase");

  std::vector<double> h(n - 1), s(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t_[i + 1] - t_[i];
    s[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);

  if (!periodic) {
    if (n == 3) {
      m_[1] = 3 * (s[1] - s[0]) / (h[0] + h[1]);
      return;
    }
    const std::size_t k = n - 2;
    std::vector<double> a(k), b(k), c(k), d(k);
    for (std::size_t i = 0; i < k; ++i) {
      a[i] = h[i];
      b[i] = 2 * (h[i] + h[i + 1]);
      c[i] = h[i + 1];
      d[i] = 6 * (s[i + 1] - s[i]);
    }
    const auto x = solve_tridiagonal(a, b, c, d);
    std::copy(x.begin(), x.end(), m_.begin() + 1);
    return;
  }

  // Periodic: unknowns m_0..m_{k-1} with k = n - 1 and m_k = m_0.  The
  // cyclic system is reduced to a tridiagonal one by Sherman-Morrison.
  const std::size_t k = n - 1;
  auto hh = [&](std::size_t i) { return h[(i + k) % k]; };
  auto ss = [&](std::size_t i) { return s[(i + k) % k]; };
  std::vector<double> a(k), b(k), c(k), d(k);
  for (std::size_t i = 0; i < k; ++i) {
    a[i] = hh(i + k - 1);
    b[i] = 2 * (hh(i + k - 1) + hh(i));
    c[i] = hh(i);
    d[i] = 6 * (ss(i) - ss(i + k - 1));
  }
  const double alpha = c[k - 1];  // row k-1, column 0
  const double beta = a[0];       // row 0, column k-1
  const double gamma = -b[0];
  std::vector<double> bb = b;
  bb[0] -= gamma;
  bb[k - 1] -= alpha * beta / gamma;
  const auto x = solve_tridiagonal(a, bb, c, d);
  std::vector<double> u(k, 0.0);
  u[0] = gamma;
  u[k - 1] = alpha;
  const auto z = solve_tridiagonal(a, bb, c, u);
  const double fact = (x[0] + beta * x[k - 1] / gamma) / (1 + z[0] + beta * z[k - 1] / gamma);
  for (std::size_t i = 0; i < k; ++i) m_[i] = x[i] - fact * z[i];
  m_[k] = m_[0];
}

std::size_t CubicSpline::segment(double t) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(i, t_.size() - 2);
}

double CubicSpline::operator()(double t) const {
  const std::size_t i = segment(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6;
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return (y_[i + 1] - y_[i]) / h + ((1 - 3 * a * a) * m_[i] + (3 * b * b - 1) * m_[i + 1]) * h / 6;
}

std::vector<double> chord_parameter(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> t(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j) t[j] = t[j - 1] + std::hypot(x[j] - x[j - 1], y[j] - y[j - 1]);
  return t;
}

double enclosed_area(const CubicSpline& x, const CubicSpline& y) {
  // Three-point Gauss-Legendre is exact for the degree-5 integrand.
  static const double node[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double weight[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  const auto& t = x.knots();
  double sum = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double mid = (t[i] + t[i + 1]) / 2, half = (t[i + 1] - t[i]) / 2;
    double seg = 0;
    for (int q = 0; q < 3; ++q) {
      const double s = mid + half * node[q];
      seg += weight[q] * (x(s) * y.derivative(s) - y(s) * x.derivative(s));
    }
    sum += seg * half;
  }
  return sum / 2;
}

}  // namespace sunshadow::spline
