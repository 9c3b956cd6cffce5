#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ergoseg/labels.hpp"
#include "ergoseg/matrix.hpp"

namespace ergoseg {

// T x D per-frame feature matrix with fps metadata.
struct FeatureSequence {
  std::string video_id;
  double fps = 0.0;
  Matrix data;  // rows = frames, cols = dims

  std::size_t frames() const { return data.rows(); }
  std::size_t dims() const { return data.cols(); }
};

// Binary "FSEQ" container: magic, version u32, fps f64, T u64, D u64,
// T*D little-endian f64 row-major, then length-prefixed video_id.
void write_features(const FeatureSequence& seq, std::ostream& out);
FeatureSequence read_features(std::istream& in);  // consumes exactly one chunk
void write_features_file(const FeatureSequence& seq, const std::string& path);
FeatureSequence read_features_file(const std::string& path);

struct DatasetItem {
  FeatureSequence features;
  std::vector<int> frame_labels;
};

struct Dataset {
  std::vector<DatasetItem> items;
  LabelSet label_set;
};

struct SplitSpec {
  std::uint64_t seed = 0;
  // (train ids, test ids) per split
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> splits;
};

SplitSpec make_splits(const std::vector<std::string>& video_ids, int n_splits,
                      double test_fraction, std::uint64_t seed);

std::string splits_to_text(const SplitSpec& spec);
SplitSpec splits_from_stream(std::istream& in);

struct SynthParams {
  int n_videos = 10;
  int n_classes = 5;
  int dims = 16;
  double fps = 12.0;
  double mean_segment_frames = 40.0;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  int segments_per_video = 8;
  int min_segment_frames = 5;
};

// Segment-structured features: per class a fixed random unit prototype
// vector (inside [-1,1]^D), per frame the prototype plus Gaussian noise.
Dataset synth_generate(const SynthParams& params);

struct SynthDetail {
  Dataset dataset;
  Matrix prototypes;  // n_classes x dims
};

SynthDetail synth_generate_detailed(const SynthParams& params);

// Manifest lines "<features_path>,<annotations_path>".
Dataset load_dataset(const std::string& manifest_path, const LabelSet& labels);

}  // namespace ergoseg
