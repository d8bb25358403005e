#pragma once

#include <string>

#include "pro_ood/analysis.hpp"

namespace pro_ood {

// Heatmap of the landscape grid with the unperturbed center cell marked.
std::string landscape_svg(const LandscapeGrid& grid);

// Overlaid bar chart of per-set shift counts.
std::string histogram_svg(const Histogram& hist);

}  // namespace pro_ood
