#pragma once

#include <stdexcept>
#include <string>

namespace ergoseg {

enum class Errc {
  // skeleton ingestion
  malformed_hierarchy,
  motion_width_mismatch,
  frame_count_mismatch,
  row_width_mismatch,
  non_monotone_frame_index,
  empty_sequence,
  too_many_invalid_rows,
  // kinematics
  degenerate_frame,
  degenerate_projection,
  // labels
  unknown_label,
  overlap_error,
  gap_error,
  unsorted_error,
  empty_input,
  missing_risk,
  action_missing,
  // feature container / checkpoints
  bad_magic,
  version_unsupported,
  truncated_payload,
  non_finite_value,
  too_few_videos,
  too_short,
  // networks
  shape_mismatch,
  sequence_too_short,
  dims_mismatch,
  non_finite_loss,
  window_too_small,
  // metrics
  length_mismatch,
  bad_tau,
  // misc
  io_error,
  config_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ergoseg
