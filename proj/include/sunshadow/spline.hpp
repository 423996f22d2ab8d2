#pragma once

// Interpolating cubic splines: periodic for closed curves, natural for open ones.

#include <vector>

namespace sunshadow::spline {

class CubicSpline {
 public:
  // Knots must be strictly increasing.  For a periodic spline the last
  // value must equal the first.
  CubicSpline(std::vector<double> knots, std::vector<double> values, bool periodic);

  double operator()(double t) const;
  double derivative(double t) const;

  // Second derivatives at the knots.
  const std::vector<double>& moments() const { return m_; }
  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return y_; }

  // Segment index containing t, clamped to the knot range.
  std::size_t segment(double t) const;

 private:
  std::vector<double> t_, y_, m_;
};

// Chord-length parameter of a polyline starting at zero.
std::vector<double> chord_parameter(const std::vector<double>& x, const std::vector<double>& y);

// Area enclosed by the closed spline curve (x(t), y(t)) by Green's theorem,
// integrated exactly per segment (the integrand is a quintic).
double enclosed_area(const CubicSpline& x, const CubicSpline& y);

}  // namespace sunshadow::spline
