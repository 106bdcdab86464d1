#pragma once

#include <vector>

#include "phasered/common.hpp"

namespace phasered {

/// Cubic spline interpolation of 2*pi-periodic samples on a uniform grid
/// theta_j = 2*pi*j/N (j = 0..N-1).
class PeriodicCubicSpline {
  public:
    PeriodicCubicSpline() = default;
    explicit PeriodicCubicSpline(std::vector<double> values);

    double eval(double theta) const;

  private:
    std::vector<double> y_, m_;  // samples and second derivatives
    double h_ = 0.0;
};

}  // namespace phasered
