#pragma once

#include <string>
#include <vector>

#include "phasered/common.hpp"

namespace phasered {

/// Simple polyline plot: x values against one or more y columns, with
/// labeled axes. Plots are conveniences; the CSVs are the contract.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::vector<double>& x,
                    const std::vector<std::vector<double>>& columns,
                    const std::vector<std::string>& labels);

}  // namespace phasered
