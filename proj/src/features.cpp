#include "ergoseg/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ergoseg/error.hpp"
#include "ergoseg/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature container io assumes a little-endian host");

namespace ergoseg {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'E', 'Q'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    fail(Errc::truncated_payload, std::string("stream ends inside ") + what);
  return value;
}

}  // namespace

void write_features(const FeatureSequence& seq, std::ostream& out) {
  for (const double v : seq.data.values())
    if (!std::isfinite(v))
      fail(Errc::non_finite_value, "feature matrix contains NaN or Inf");
  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, seq.fps);
  write_raw(out, static_cast<std::uint64_t>(seq.frames()));
  write_raw(out, static_cast<std::uint64_t>(seq.dims()));
  out.write(reinterpret_cast<const char*>(seq.data.values().data()),
            static_cast<std::streamsize>(seq.data.size() * sizeof(double)));
  write_raw(out, static_cast<std::uint32_t>(seq.video_id.size()));
  out.write(seq.video_id.data(),
            static_cast<std::streamsize>(seq.video_id.size()));
  if (!out) fail(Errc::io_error, "failed to write feature stream");
}

FeatureSequence read_features(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    fail(Errc::bad_magic, "not a feature container");
  const auto version = read_raw<std::uint32_t>(in, "version");
  if (version != kVersion)
    fail(Errc::version_unsupported,
         "feature container version " + std::to_string(version));
  FeatureSequence seq;
  seq.fps = read_raw<double>(in, "fps");
  const auto frames = read_raw<std::uint64_t>(in, "frame count");
  const auto dims = read_raw<std::uint64_t>(in, "dims");
  if (frames == 0 || dims == 0)
    fail(Errc::truncated_payload, "feature container has an empty matrix");
  seq.data = Matrix(frames, dims);
  const std::streamsize bytes =
      static_cast<std::streamsize>(frames * dims * sizeof(double));
  in.read(reinterpret_cast<char*>(seq.data.values().data()), bytes);
  if (in.gcount() != bytes)
    fail(Errc::truncated_payload, "stream ends inside the feature matrix");
  const auto id_length = read_raw<std::uint32_t>(in, "video id length");
  seq.video_id.resize(id_length);
  if (id_length > 0) {
    in.read(seq.video_id.data(), id_length);
    if (in.gcount() != static_cast<std::streamsize>(id_length))
      fail(Errc::truncated_payload, "stream ends inside the video id");
  }
  for (const double v : seq.data.values())
    if (!std::isfinite(v))
      fail(Errc::non_finite_value, "feature matrix contains NaN or Inf");
  return seq;
}

void write_features_file(const FeatureSequence& seq, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  write_features(seq, out);
}

FeatureSequence read_features_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  return read_features(in);
}

SplitSpec make_splits(const std::vector<std::string>& video_ids, int n_splits,
                      double test_fraction, std::uint64_t seed) {
  if (video_ids.size() < 2)
    fail(Errc::too_few_videos, "need at least 2 videos to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(Errc::config_error, "test fraction must be in (0,1)");
  if (n_splits < 1) fail(Errc::config_error, "need at least one split");

  const auto n = static_cast<double>(video_ids.size());
  auto test_size = static_cast<std::size_t>(std::llround(test_fraction * n));
  test_size = std::max<std::size_t>(1, std::min(test_size, video_ids.size() - 1));

  SplitSpec spec;
  spec.seed = seed;
  Rng rng(seed);
  for (int s = 0; s < n_splits; ++s) {
    std::vector<std::string> shuffled = video_ids;
    rng.shuffle(shuffled);
    std::vector<std::string> test(shuffled.begin(),
                                  shuffled.begin() + static_cast<std::ptrdiff_t>(test_size));
    std::vector<std::string> train(shuffled.begin() + static_cast<std::ptrdiff_t>(test_size),
                                   shuffled.end());
    spec.splits.emplace_back(std::move(train), std::move(test));
  }
  return spec;
}

std::string splits_to_text(const SplitSpec& spec) {
  std::string out = "seed " + std::to_string(spec.seed) + "\n";
  for (std::size_t s = 0; s < spec.splits.size(); ++s) {
    const auto& [train, test] = spec.splits[s];
    out += "split " + std::to_string(s) + " train";
    for (const auto& id : train) out += " " + id;
    out += "\nsplit " + std::to_string(s) + " test";
    for (const auto& id : test) out += " " + id;
    out += "\n";
  }
  return out;
}

SplitSpec splits_from_stream(std::istream& in) {
  SplitSpec spec;
  std::string word;
  while (in >> word) {
    if (word == "seed") {
      in >> spec.seed;
    } else if (word == "split") {
      std::size_t index = 0;
      std::string side;
      in >> index >> side;
      if (index >= spec.splits.size()) spec.splits.resize(index + 1);
      auto& slot = side == "train" ? spec.splits[index].first
                                   : spec.splits[index].second;
      std::string rest;
      std::getline(in, rest);
      std::istringstream ids(rest);
      std::string id;
      while (ids >> id) slot.push_back(id);
    } else {
      fail(Errc::config_error, "unexpected token '" + word + "' in splits file");
    }
  }
  if (spec.splits.empty()) fail(Errc::empty_input, "splits file is empty");
  return spec;
}

SynthDetail synth_generate_detailed(const SynthParams& params) {
  if (params.n_videos < 1 || params.n_classes < 1 || params.dims < 1 ||
      !(params.fps > 0.0) || !(params.mean_segment_frames > 0.0) ||
      params.noise_sigma < 0.0 || params.segments_per_video < 1)
    fail(Errc::config_error, "synthetic generator parameters must be positive");

  Rng rng(params.seed);

  SynthDetail detail;
  // Prototypes live on the unit sphere inside [-1,1]^D so that noise_sigma
  // is measured against an O(1) class separation regardless of D.
  detail.prototypes = Matrix(static_cast<std::size_t>(params.n_classes),
                             static_cast<std::size_t>(params.dims));
  for (int c = 0; c < params.n_classes; ++c) {
    double norm_sq = 0.0;
    for (int d = 0; d < params.dims; ++d) {
      const double v = rng.normal();
      detail.prototypes(static_cast<std::size_t>(c), static_cast<std::size_t>(d)) = v;
      norm_sq += v * v;
    }
    const double scale = 1.0 / std::sqrt(norm_sq);
    for (int d = 0; d < params.dims; ++d)
      detail.prototypes(static_cast<std::size_t>(c), static_cast<std::size_t>(d)) *= scale;
  }

  LabelSet label_set;
  for (int c = 0; c < params.n_classes; ++c)
    label_set.add(ActionLabel{{"c" + std::to_string(c)}});
  detail.dataset.label_set = label_set;

  // Geometric segment lengths with a floor keeps tiny segments measurable
  // by the overlap metric.
  const double extra_mean =
      std::max(1.0, params.mean_segment_frames - params.min_segment_frames);
  const double p = 1.0 / (extra_mean + 1.0);

  for (int v = 0; v < params.n_videos; ++v) {
    DatasetItem item;
    item.features.video_id =
        "video" + std::string(v < 10 ? "0" : "") + std::to_string(v);
    item.features.fps = params.fps;

    std::vector<int> classes;
    std::vector<std::int64_t> lengths;
    int previous = -1;
    for (int s = 0; s < params.segments_per_video; ++s) {
      int c = rng.uniform_int(0, params.n_classes - 1);
      if (params.n_classes > 1) {
        while (c == previous) c = rng.uniform_int(0, params.n_classes - 1);
      }
      previous = c;
      classes.push_back(c);
      const double u = rng.uniform();
      const auto extra = static_cast<std::int64_t>(
          std::floor(std::log(1.0 - u) / std::log(1.0 - p)));
      lengths.push_back(params.min_segment_frames + extra);
    }

    std::int64_t total = 0;
    for (const auto l : lengths) total += l;
    item.features.data = Matrix(static_cast<std::size_t>(total),
                                static_cast<std::size_t>(params.dims));
    item.frame_labels.reserve(static_cast<std::size_t>(total));
    std::size_t frame = 0;
    for (std::size_t s = 0; s < classes.size(); ++s) {
      const int c = classes[s];
      for (std::int64_t k = 0; k < lengths[s]; ++k, ++frame) {
        item.frame_labels.push_back(c);
        for (int d = 0; d < params.dims; ++d) {
          const double noise =
              params.noise_sigma > 0.0 ? params.noise_sigma * rng.normal() : 0.0;
          item.features.data(frame, static_cast<std::size_t>(d)) =
              detail.prototypes(static_cast<std::size_t>(c),
                                static_cast<std::size_t>(d)) +
              noise;
        }
      }
    }
    detail.dataset.items.push_back(std::move(item));
  }
  return detail;
}

Dataset synth_generate(const SynthParams& params) {
  return synth_generate_detailed(params).dataset;
}

Dataset load_dataset(const std::string& manifest_path, const LabelSet& labels) {
  std::ifstream in(manifest_path);
  if (!in) fail(Errc::io_error, "cannot open manifest '" + manifest_path + "'");
  const std::filesystem::path base =
      std::filesystem::path(manifest_path).parent_path();

  Dataset dataset;
  dataset.label_set = labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      fail(Errc::config_error,
           "manifest lines are '<features_path>,<annotations_path>'");
    const auto resolve = [&base](std::string text) {
      while (!text.empty() && (text.back() == '\r' || text.back() == ' '))
        text.pop_back();
      std::filesystem::path p(text);
      return p.is_absolute() ? p.string() : (base / p).string();
    };
    DatasetItem item;
    item.features = read_features_file(resolve(line.substr(0, comma)));
    std::ifstream ann(resolve(line.substr(comma + 1)));
    if (!ann)
      fail(Errc::io_error, "cannot open annotations for '" + line + "'");
    const AnnotationTrack track = parse_annotations(ann, labels);
    item.frame_labels = to_frame_labels(track);
    if (item.frame_labels.size() != item.features.frames())
      fail(Errc::length_mismatch,
           "'" + item.features.video_id + "': " +
               std::to_string(item.features.frames()) + " feature frames vs " +
               std::to_string(item.frame_labels.size()) + " annotated frames");
    dataset.items.push_back(std::move(item));
  }
  if (dataset.items.empty()) fail(Errc::empty_input, "manifest lists no videos");
  return dataset;
}

}  // namespace ergoseg
