#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bbmlab/errors.hpp"

namespace bbmlab {

// Function samples on a uniform 1-D grid.  Used both by the FKPP solver
// (values are a CDF in [0,1]) and by the finite-difference oracle for the
// canonical Airy-type equation.
struct ScalarField1D {
  double x0 = 0.0;   // coordinate of values[0]
  double dx = 0.0;
  double time = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  double x_max() const {
    return values.empty() ? x0 : x(values.size() - 1);
  }

  // Linear interpolation; clamps to the boundary values outside the grid.
  double at(double xq) const {
    if (values.empty()) throw domain_error("empty field");
    const double u = (xq - x0) / dx;
    if (u <= 0.0) return values.front();
    const auto n = values.size();
    if (u >= static_cast<double>(n - 1)) return values.back();
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * values[i] + f * values[i + 1];
  }

  // L2 norm with the trapezoid weight of the grid.
  double l2_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
      s += w * values[i] * values[i];
    }
    return std::sqrt(s * dx);
  }
};

// Relative L2 distance on the intersection of supports, sampled on a's grid.
inline double relative_l2_gap(const ScalarField1D& a, const ScalarField1D& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double xa = a.x(i);
    const double va = a.values[i];
    const double vb = b.at(xa);
    num += (va - vb) * (va - vb);
    den += va * va;
  }
  if (den == 0.0) throw numerical_error("relative gap against zero field");
  return std::sqrt(num / den);
}

}  // namespace bbmlab
