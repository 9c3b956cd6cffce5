#include "ergoseg/error.hpp"

namespace ergoseg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_hierarchy: return "MalformedHierarchy";
    case Errc::motion_width_mismatch: return "MotionWidthMismatch";
    case Errc::frame_count_mismatch: return "FrameCountMismatch";
    case Errc::row_width_mismatch: return "RowWidthMismatch";
    case Errc::non_monotone_frame_index: return "NonMonotoneFrameIndex";
    case Errc::empty_sequence: return "EmptySequence";
    case Errc::too_many_invalid_rows: return "TooManyInvalidRows";
    case Errc::degenerate_frame: return "DegenerateFrame";
    case Errc::degenerate_projection: return "DegenerateProjection";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::overlap_error: return "OverlapError";
    case Errc::gap_error: return "GapError";
    case Errc::unsorted_error: return "UnsortedError";
    case Errc::empty_input: return "EmptyInput";
    case Errc::missing_risk: return "MissingRisk";
    case Errc::action_missing: return "ActionMissing";
    case Errc::bad_magic: return "BadMagic";
    case Errc::version_unsupported: return "VersionUnsupported";
    case Errc::truncated_payload: return "TruncatedPayload";
    case Errc::non_finite_value: return "NonFiniteValue";
    case Errc::too_few_videos: return "TooFewVideos";
    case Errc::too_short: return "TooShort";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::sequence_too_short: return "SequenceTooShort";
    case Errc::dims_mismatch: return "DimsMismatch";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::window_too_small: return "WindowTooSmall";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::bad_tau: return "BadTau";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
  }
  return "Error";
}

}  // namespace ergoseg
