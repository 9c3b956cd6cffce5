#include "ergoseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ergoseg/error.hpp"

namespace ergoseg {

namespace {

void check_pair(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    fail(Errc::length_mismatch,
         "prediction has " + std::to_string(pred.size()) + " frames, truth " +
             std::to_string(truth.size()));
  if (pred.empty()) fail(Errc::length_mismatch, "sequences are empty");
}

struct Segment {
  int class_id;
  std::int64_t start;  // inclusive
  std::int64_t end;    // exclusive
};

std::vector<Segment> segments_of(const std::vector<int>& frames) {
  std::vector<Segment> out;
  const SegmentRun runs = run_length_encode(frames);
  std::int64_t pos = 0;
  for (const auto& [id, length] : runs.runs) {
    out.push_back({id, pos, pos + length});
    pos += length;
  }
  return out;
}

double iou(const Segment& a, const Segment& b) {
  const std::int64_t inter =
      std::max<std::int64_t>(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const std::int64_t uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace

std::size_t levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> previous(m + 1);
  std::vector<std::size_t> current(m + 1);
  for (std::size_t j = 0; j <= m; ++j) previous[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    current[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t substitute =
          previous[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      current[j] = std::min({previous[j] + 1, current[j - 1] + 1, substitute});
    }
    std::swap(previous, current);
  }
  return previous[m];
}

double frame_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_pair(pred, truth);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

double edit_score(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_pair(pred, truth);
  std::vector<int> pred_runs, truth_runs;
  for (const auto& [id, len] : run_length_encode(pred).runs) pred_runs.push_back(id);
  for (const auto& [id, len] : run_length_encode(truth).runs) truth_runs.push_back(id);
  const std::size_t distance = levenshtein(pred_runs, truth_runs);
  const std::size_t denom = std::max(pred_runs.size(), truth_runs.size());
  return 100.0 * (1.0 - static_cast<double>(distance) / static_cast<double>(denom));
}

double f1_overlap(const std::vector<int>& pred, const std::vector<int>& truth,
                  double tau) {
  check_pair(pred, truth);
  if (!(tau > 0.0 && tau < 1.0))
    fail(Errc::bad_tau, "tau must be in (0,1)");

  const std::vector<Segment> pred_segments = segments_of(pred);
  const std::vector<Segment> truth_segments = segments_of(truth);
  if (pred_segments.empty() && truth_segments.empty()) return 100.0;

  std::vector<bool> matched(truth_segments.size(), false);
  std::size_t tp = 0, fp = 0;
  for (const auto& p : pred_segments) {
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t t = 0; t < truth_segments.size(); ++t) {
      if (matched[t] || truth_segments[t].class_id != p.class_id) continue;
      const double overlap = iou(p, truth_segments[t]);
      if (overlap > best) {
        best = overlap;
        best_index = t;
      }
    }
    if (best >= tau) {
      matched[best_index] = true;
      ++tp;
    } else {
      ++fp;
    }
  }
  std::size_t fn = 0;
  for (const bool m : matched)
    if (!m) ++fn;

  const double denom = static_cast<double>(2 * tp + fp + fn);
  if (denom == 0.0) return 100.0;
  return 200.0 * static_cast<double>(tp) / denom;
}

EvalReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                    double tau) {
  EvalReport report;
  report.accuracy = frame_accuracy(pred, truth);
  report.edit_score = edit_score(pred, truth);
  report.f1_overlap = f1_overlap(pred, truth, tau);
  report.tau = tau;
  report.n_frames = pred.size();
  report.n_segments_pred = run_length_encode(pred).runs.size();
  report.n_segments_true = run_length_encode(truth).runs.size();

  std::map<int, std::size_t> tp, pred_count, truth_count;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++pred_count[pred[i]];
    ++truth_count[truth[i]];
    if (pred[i] == truth[i]) ++tp[pred[i]];
  }
  std::map<int, bool> seen;
  for (const auto& [c, n] : pred_count) seen[c] = true;
  for (const auto& [c, n] : truth_count) seen[c] = true;
  for (const auto& [c, unused] : seen) {
    ClassStats stats;
    stats.class_id = c;
    const std::size_t hits = tp.count(c) ? tp[c] : 0;
    stats.precision = pred_count.count(c)
                          ? 100.0 * static_cast<double>(hits) / pred_count[c]
                          : 0.0;
    stats.recall = truth_count.count(c)
                       ? 100.0 * static_cast<double>(hits) / truth_count[c]
                       : 0.0;
    report.per_class.push_back(stats);
  }
  return report;
}

std::string eval_row(const std::string& id, const EvalReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%.2f,%.2f,%.2f", id.c_str(),
                report.accuracy, report.edit_score, report.f1_overlap);
  return buf;
}

std::string eval_aggregate_row(const std::vector<EvalReport>& reports) {
  const auto stats = [&](auto getter) {
    double mean = 0.0;
    for (const auto& r : reports) mean += getter(r);
    mean /= static_cast<double>(reports.size());
    double var = 0.0;
    for (const auto& r : reports) {
      const double d = getter(r) - mean;
      var += d * d;
    }
    var /= static_cast<double>(reports.size());
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  const auto [am, as] = stats([](const EvalReport& r) { return r.accuracy; });
  const auto [em, es] = stats([](const EvalReport& r) { return r.edit_score; });
  const auto [fm, fs] = stats([](const EvalReport& r) { return r.f1_overlap; });
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "aggregate,%.2f±%.2f,%.2f±%.2f,%.2f±%.2f", am, as, em, es, fm,
                fs);
  return buf;
}

}  // namespace ergoseg
