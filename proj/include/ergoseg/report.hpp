#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergoseg/risk.hpp"

namespace ergoseg {

// Deterministic per-class fill color.
std::string class_color(int class_id);

// Two horizontal run bars (truth above prediction) plus an optional risk bar,
// rectangles only. Byte-identical output for identical inputs.
std::string render_timeline_svg(
    const std::vector<int>& truth, const std::vector<int>& pred,
    const std::optional<std::vector<RiskCategory>>& risk = std::nullopt);

}  // namespace ergoseg
