#pragma once

#include <string>

namespace ergoseg {

enum class RiskCategory { low, medium, high };

// Score < 3 is low, 3..7 medium, above 7 high. Accepts fractional scores so
// that unrounded medians and averages categorize directly.
inline RiskCategory risk_category(double score) {
  if (score < 3.0) return RiskCategory::low;
  if (score <= 7.0) return RiskCategory::medium;
  return RiskCategory::high;
}

inline const char* risk_name(RiskCategory category) {
  switch (category) {
    case RiskCategory::low: return "Low";
    case RiskCategory::medium: return "Medium";
    case RiskCategory::high: return "High";
  }
  return "?";
}

RiskCategory parse_risk(const std::string& name);

}  // namespace ergoseg
