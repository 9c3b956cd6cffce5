#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

// Brute-force reference implementations, deliberately written without reusing
// the library code paths they check.

namespace ergoseg::testing {

inline double ref_accuracy(const std::vector<int>& pred,
                           const std::vector<int>& truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

inline std::vector<int> ref_collapse(const std::vector<int>& frames) {
  std::vector<int> out;
  for (const int f : frames)
    if (out.empty() || out.back() != f) out.push_back(f);
  return out;
}

// Plain recursion; exponential, for tiny inputs only.
inline std::size_t ref_levenshtein_slow(const std::vector<int>& a, std::size_t i,
                                        const std::vector<int>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t skip_a = 1 + ref_levenshtein_slow(a, i + 1, b, j);
  const std::size_t skip_b = 1 + ref_levenshtein_slow(a, i, b, j + 1);
  const std::size_t both = (a[i] == b[j] ? 0 : 1) +
                           ref_levenshtein_slow(a, i + 1, b, j + 1);
  return std::min({skip_a, skip_b, both});
}

inline std::size_t ref_levenshtein_memo(const std::vector<int>& a,
                                        const std::vector<int>& b);

inline double ref_edit_score(const std::vector<int>& pred,
                             const std::vector<int>& truth) {
  const std::vector<int> p = ref_collapse(pred);
  const std::vector<int> t = ref_collapse(truth);
  const std::size_t d = ref_levenshtein_memo(p, t);
  const std::size_t m = std::max(p.size(), t.size());
  return 100.0 * (1.0 - static_cast<double>(d) / static_cast<double>(m));
}

struct RefSegment {
  int label;
  std::int64_t first;
  std::int64_t last;  // inclusive
};

inline std::vector<RefSegment> ref_segments(const std::vector<int>& frames) {
  std::vector<RefSegment> out;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(frames.size()); ++i) {
    if (out.empty() || out.back().label != frames[static_cast<std::size_t>(i)])
      out.push_back({frames[static_cast<std::size_t>(i)], i, i});
    else
      out.back().last = i;
  }
  return out;
}

inline double ref_f1_overlap(const std::vector<int>& pred,
                             const std::vector<int>& truth, double tau) {
  const auto ps = ref_segments(pred);
  const auto ts = ref_segments(truth);
  std::vector<bool> used(ts.size(), false);
  long tp = 0, fp = 0;
  for (const auto& p : ps) {
    double best = -1.0;
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < ts.size(); ++t) {
      if (used[t] || ts[t].label != p.label) continue;
      const std::int64_t lo = std::max(p.first, ts[t].first);
      const std::int64_t hi = std::min(p.last, ts[t].last);
      const double inter = static_cast<double>(std::max<std::int64_t>(0, hi - lo + 1));
      const double uni = static_cast<double>(std::max(p.last, ts[t].last) -
                                             std::min(p.first, ts[t].first) + 1);
      const double overlap = inter / uni;
      if (overlap > best) {
        best = overlap;
        best_t = t;
      }
    }
    if (best >= tau) {
      used[best_t] = true;
      ++tp;
    } else {
      ++fp;
    }
  }
  long fn = 0;
  for (const bool u : used) fn += u ? 0 : 1;
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 100.0 : 200.0 * static_cast<double>(tp) / denom;
}

// Memoized recursion, still independent of the production dynamic program.
inline std::size_t ref_levenshtein_memo(const std::vector<int>& a,
                                        const std::vector<int>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  const auto go = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const std::size_t result = std::min(
        {1 + self(self, i + 1, j), 1 + self(self, i, j + 1),
         (a[i] == b[j] ? 0 : 1) + self(self, i + 1, j + 1)});
    memo.emplace(key, result);
    return result;
  };
  return go(go, 0, 0);
}

}  // namespace ergoseg::testing
