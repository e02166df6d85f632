#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fiberlin/foliation.hpp"

namespace fiberlin {

struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

struct LevelContours {
  double level = 0.0;
  std::vector<Polyline> lines;
};

using PlaneFn = std::function<double(double, double)>;

/// Marching squares on a (resolution + 1)^2 node grid with linear
/// interpolation along cell edges. Saddle cells are split according to the
/// sign of f at the cell center. Nodes where f throws are treated as gaps.
std::vector<Polyline> marching_squares(const PlaneFn& f, double level, const Window2& window, std::size_t resolution);

struct SvgStyle {
  int width = 480;
  std::vector<std::string> colors;      ///< cycled per level; a default palette when empty
  std::string title;
  std::vector<std::string> notes;       ///< text lines under the title
  bool axes = true;
};

/// Deterministic SVG: coordinates printed with two decimals.
std::string render_svg(const std::vector<LevelContours>& levels, const Window2& window, const SvgStyle& style);

}  // namespace fiberlin
