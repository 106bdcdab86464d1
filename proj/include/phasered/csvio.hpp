#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phasered/adjoint.hpp"
#include "phasered/reduce.hpp"

namespace phasered {

/// One formatted number with 17 significant digits (round-trips a double).
std::string format_g17(double v);

/// CurveCSV: header `theta,c1[,c2,...]`, N+1 rows, the theta = 2*pi row
/// carrying the integrated end-of-period values.
void write_curve_csv(const std::string& path, const std::vector<double>& thetas,
                     const std::vector<State>& values);

/// Time-series CSV with a custom header (reduce-sim output).
void write_timeseries_csv(const std::string& path, const std::string& header,
                          const std::vector<double>& times,
                          const std::vector<std::vector<double>>& columns);

/// key = value companion manifest.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

/// Control CSV: header `t,u1[,u2,...]` for piecewise-constant inputs, or a
/// leading `#impulses` line with header `t,dx1[,dx2,...]` for impulse
/// trains. An empty body is the zero signal.
ControlSignal read_control_csv(const std::string& path, int dim);

}  // namespace phasered
