#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergoseg/labels.hpp"

namespace ergoseg {

struct ClassStats {
  int class_id = 0;
  double precision = 0.0;  // frame-level, percent
  double recall = 0.0;     // frame-level, percent
};

struct EvalReport {
  double accuracy = 0.0;    // percent
  double edit_score = 0.0;  // percent
  double f1_overlap = 0.0;  // percent
  double tau = 0.1;
  std::vector<ClassStats> per_class;
  std::size_t n_frames = 0;
  std::size_t n_segments_pred = 0;
  std::size_t n_segments_true = 0;
};

double frame_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// 100 * (1 - Levenshtein(pred runs, truth runs) / max(|pred runs|, |truth runs|)),
// comparing run class-id sequences with unit edit costs.
double edit_score(const std::vector<int>& pred, const std::vector<int>& truth);

// Segment F1 at IoU threshold tau with greedy temporal-order matching of
// same-class segments.
double f1_overlap(const std::vector<int>& pred, const std::vector<int>& truth,
                  double tau);

EvalReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                    double tau);

std::size_t levenshtein(const std::vector<int>& a, const std::vector<int>& b);

// One delimited text row per video: "id,accuracy,edit,f1" with 2 decimals.
std::string eval_row(const std::string& id, const EvalReport& report);
// Aggregate row "mean±std" per metric over several reports.
std::string eval_aggregate_row(const std::vector<EvalReport>& reports);

}  // namespace ergoseg
