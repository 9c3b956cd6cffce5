#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ergoseg/bvh.hpp"
#include "ergoseg/config.hpp"
#include "ergoseg/error.hpp"
#include "ergoseg/features.hpp"
#include "ergoseg/kinematics.hpp"
#include "ergoseg/labels.hpp"
#include "ergoseg/metrics.hpp"
#include "ergoseg/reba.hpp"
#include "ergoseg/report.hpp"
#include "ergoseg/tcn.hpp"

namespace fs = std::filesystem;
using namespace ergoseg;

namespace {

std::string stem_of(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  const std::size_t dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(Errc::io_error, "failed to write '" + path + "'");
}

LabelSet load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open label set '" + path + "'");
  return LabelSet::from_stream(in);
}

AnnotationTrack load_annotations(const std::string& path, const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open annotations '" + path + "'");
  return parse_annotations(in, labels);
}

// Prediction outputs and truth tracks both reduce to frame label ids; truth
// may arrive as "start,end,label" annotations instead.
std::vector<int> load_frame_ids(const std::string& path,
                                const LabelSet* labels) {
  const std::string text = read_file(path);
  const bool is_annotations = text.find(',') != std::string::npos;
  if (is_annotations) {
    if (!labels)
      fail(Errc::config_error,
           "'" + path + "' looks like annotations; pass --labels to decode it");
    std::istringstream in(text);
    return to_frame_labels(parse_annotations(in, *labels));
  }
  std::vector<int> ids;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ids.push_back(std::stoi(line));
  }
  if (ids.empty()) fail(Errc::empty_input, "'" + path + "' has no frames");
  return ids;
}

RebaTables load_tables(const std::string& flag_path, const ConfigFile& config) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("ERGOSEG_TABLES")) path = env;
  }
  if (path.empty()) path = config.get("paths.tables", "");
  if (path.empty()) return RebaTables::defaults();
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open tables '" + path + "'");
  return RebaTables::parse(in);
}

SkeletonSequence ingest_skeleton(const std::string& path, const std::string& layout_name,
                                 const JointLayout& layout, double fps,
                                 bool has_header) {
  const bool is_bvh = fs::path(path).extension() == ".bvh";
  if (is_bvh) return forward_kinematics(parse_bvh(read_file(path)));
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  TableOptions options;
  options.fps = fps;
  options.has_header = has_header;
  (void)layout_name;
  return read_joint_table(in, layout, options);
}

std::string format_score(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  ConfigFile config;
};

int run(int argc, char** argv) {
  CLI::App app{"ergonomic risk scoring and action segmentation pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonOpts common;
  app.add_option("--config", common.config_path, "path to a key = value config file");

  // reba score -------------------------------------------------------------
  auto* reba = app.add_subcommand("reba", "ergonomic scoring");
  reba->require_subcommand(1);
  auto* score = reba->add_subcommand("score", "score skeleton files frame by frame");
  std::vector<std::string> score_inputs;
  std::string score_layout = "tum33";
  std::string score_role_map, score_tables, score_out = ".";
  double score_fps = 12.0;
  bool score_header = false;
  double zero_th = -1, binary_th = -1, abduction_th = -1;
  int adj_load = -1, adj_coupling = -1, adj_activity = -1;
  score->add_option("inputs", score_inputs, "skeleton files (.bvh or joint tables)")
      ->required();
  score->add_option("--layout", score_layout, "tum33 | kinect25");
  score->add_option("--role-map", score_role_map, "role override file");
  score->add_option("--tables", score_tables, "scoring table file");
  score->add_option("--fps", score_fps, "frame rate for joint tables");
  score->add_flag("--has-header", score_header, "joint tables carry a header row");
  score->add_option("--zero", zero_th, "zero threshold, degrees");
  score->add_option("--binary", binary_th, "binary threshold, degrees");
  score->add_option("--abduction", abduction_th, "abduction threshold, degrees");
  score->add_option("--load", adj_load, "load adjustment 0-3");
  score->add_option("--coupling", adj_coupling, "coupling adjustment 0-3");
  score->add_option("--activity", adj_activity, "activity adjustment 0-3");
  std::vector<std::string> score_annotations;
  std::string score_labels;
  score->add_option("--annotations", score_annotations,
                    "annotation files (paired with inputs) enabling the "
                    "per-action [adjustments] config section");
  score->add_option("--labels", score_labels, "label set for --annotations");
  score->add_option("--out", score_out, "output directory");

  // reba aggregate ----------------------------------------------------------
  auto* aggregate = reba->add_subcommand("aggregate", "per-action risk labels");
  std::vector<std::string> agg_scores, agg_annotations;
  std::string agg_labels, agg_scheme = "median", agg_out;
  aggregate->add_option("--scores", agg_scores, "per-frame score files")->required();
  aggregate->add_option("--annotations", agg_annotations, "annotation files")->required();
  aggregate->add_option("--labels", agg_labels, "label set file")->required();
  aggregate->add_option("--scheme", agg_scheme, "median | resample_max");
  aggregate->add_option("--out", agg_out, "output file (default stdout)");

  // dataset synth -----------------------------------------------------------
  auto* dataset_cmd = app.add_subcommand("dataset", "dataset utilities");
  dataset_cmd->require_subcommand(1);
  auto* synth = dataset_cmd->add_subcommand("synth", "generate a synthetic dataset");
  SynthParams synth_params;
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed")->required();
  synth->add_option("--videos", synth_params.n_videos, "number of videos");
  synth->add_option("--classes", synth_params.n_classes, "number of classes");
  synth->add_option("--dims", synth_params.dims, "feature dimension");
  synth->add_option("--fps", synth_params.fps, "frames per second");
  synth->add_option("--mean-seg", synth_params.mean_segment_frames,
                    "mean segment length in frames");
  synth->add_option("--sigma", synth_params.noise_sigma, "feature noise sigma");
  synth->add_option("--segments", synth_params.segments_per_video,
                    "segments per video");

  // split ---------------------------------------------------------------
  auto* split = app.add_subcommand("split", "make train/test splits");
  std::string split_manifest, split_out;
  int split_count = 5;
  double split_fraction = 0.2;
  std::uint64_t split_seed = 0;
  split->add_option("--manifest", split_manifest, "dataset manifest")->required();
  split->add_option("--seed", split_seed, "shuffle seed")->required();
  split->add_option("--n-splits", split_count, "number of splits");
  split->add_option("--fraction", split_fraction, "test fraction");
  split->add_option("--out", split_out, "output file (default stdout)");

  // train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a segmentation model");
  std::string train_manifest, train_labels, train_arch = "ed_tcn";
  std::string train_splits, train_out, train_report;
  int train_split_index = 0;
  std::uint64_t train_seed = 0;
  int train_epochs = -1;
  double train_lr = -1.0;
  std::vector<int> train_filters;
  double train_filter_duration = -1.0;
  std::string train_filter_mode;
  int train_stacks = -1, train_layers = -1;
  train_cmd->add_option("--manifest", train_manifest, "dataset manifest")->required();
  train_cmd->add_option("--labels", train_labels, "label set file")->required();
  train_cmd->add_option("--seed", train_seed, "training seed")->required();
  train_cmd->add_option("--arch", train_arch, "ed_tcn | d_tcn | framewise");
  train_cmd->add_option("--splits", train_splits, "splits file; train on one split");
  train_cmd->add_option("--split-index", train_split_index, "which split to use");
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--lr", train_lr, "learning rate");
  train_cmd->add_option("--filters", train_filters,
                        "encoder filter counts (ed_tcn) or per-layer counts (d_tcn)");
  train_cmd->add_option("--filter-duration", train_filter_duration,
                        "ed_tcn filter duration, seconds");
  train_cmd->add_option("--filter-mode", train_filter_mode,
                        "fixed | shortest_class");
  train_cmd->add_option("--stacks", train_stacks, "d_tcn stacks");
  train_cmd->add_option("--layers", train_layers, "d_tcn layers per stack");
  train_cmd->add_option("--out", train_out, "model checkpoint path")->required();
  train_cmd->add_option("--report", train_report, "per-epoch loss/accuracy csv");

  // predict / stream ------------------------------------------------------
  auto* predict_cmd = app.add_subcommand("predict", "segment a feature file");
  std::string predict_model, predict_features, predict_out;
  int predict_window = 0;
  predict_cmd->add_option("--model", predict_model, "model checkpoint")->required();
  predict_cmd->add_option("--features", predict_features, "feature file")->required();
  predict_cmd->add_option("--window", predict_window,
                          "apply the streaming window rule offline");
  predict_cmd->add_option("--out", predict_out, "output file (default stdout)");

  auto* stream_cmd = app.add_subcommand(
      "stream", "segment feature chunks arriving on standard input");
  std::string stream_model;
  int stream_window = 90;
  stream_cmd->add_option("--model", stream_model, "model checkpoint")->required();
  stream_cmd->add_option("--window", stream_window, "frames per window");

  // eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against truth");
  std::vector<std::string> eval_pairs;
  std::string eval_labels, eval_out;
  double eval_tau = -1.0;
  eval_cmd->add_option("--pair", eval_pairs, "PRED:TRUTH file pair (repeatable)")
      ->required();
  eval_cmd->add_option("--labels", eval_labels, "label set file for annotations");
  eval_cmd->add_option("--tau", eval_tau, "overlap threshold in (0,1)");
  eval_cmd->add_option("--out", eval_out, "output file (default stdout)");

  // report ---------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "draw a label timeline");
  std::string report_truth, report_pred, report_labels, report_risk, report_out;
  report_cmd->add_option("--truth", report_truth, "truth labels")->required();
  report_cmd->add_option("--pred", report_pred, "predicted labels")->required();
  report_cmd->add_option("--labels", report_labels, "label set file");
  report_cmd->add_option("--risk", report_risk, "action risk file from aggregate");
  report_cmd->add_option("--out", report_out, "output svg path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // 0 covers --help and --version
  }

  if (!common.config_path.empty())
    common.config = ConfigFile::parse_file(common.config_path);
  const ConfigFile& config = common.config;

  if (*score) {
    Thresholds thresholds;
    thresholds.zero = zero_th > 0 ? zero_th : config.get_double("thresholds.zero", 5.0);
    thresholds.binary =
        binary_th > 0 ? binary_th : config.get_double("thresholds.binary", 10.0);
    thresholds.abduction = abduction_th > 0
                               ? abduction_th
                               : config.get_double("thresholds.abduction", 30.0);
    Adjustments adjustments;
    adjustments.load_score =
        adj_load >= 0 ? adj_load : config.get_int("reba.load", 0);
    adjustments.coupling_score =
        adj_coupling >= 0 ? adj_coupling : config.get_int("reba.coupling", 0);
    adjustments.activity_score =
        adj_activity >= 0 ? adj_activity : config.get_int("reba.activity", 0);
    const RebaTables tables = load_tables(score_tables, config);

    JointLayout layout = score_layout == "kinect25" ? JointLayout::kinect25()
                         : score_layout == "tum33"
                             ? JointLayout::tum33()
                             : (fail(Errc::config_error,
                                     "unknown layout '" + score_layout + "'"),
                                JointLayout{});
    if (!score_role_map.empty()) {
      std::ifstream map(score_role_map);
      if (!map) fail(Errc::io_error, "cannot open role map '" + score_role_map + "'");
      layout.apply_role_map(map);
    }

    // Per-action adjustments: "[adjustments] <canonical> = load,coupling,activity".
    std::optional<LabelSet> score_label_set;
    if (!score_annotations.empty()) {
      if (score_annotations.size() != score_inputs.size())
        fail(Errc::length_mismatch, "need one --annotations per input");
      if (score_labels.empty())
        fail(Errc::config_error, "--annotations needs --labels");
      score_label_set = load_labels(score_labels);
    }
    const auto adjustments_for = [&](const std::string& canonical) {
      const std::string value = config.get("adjustments." + canonical, "");
      if (value.empty()) return adjustments;
      Adjustments adj;
      if (std::sscanf(value.c_str(), "%d,%d,%d", &adj.load_score,
                      &adj.coupling_score, &adj.activity_score) != 3)
        fail(Errc::config_error,
             "[adjustments] values are 'load,coupling,activity': " + value);
      return adj;
    };

    fs::create_directories(score_out);
    for (std::size_t i = 0; i < score_inputs.size(); ++i) {
      const std::string& input = score_inputs[i];
      try {
        const SkeletonSequence seq =
            ingest_skeleton(input, score_layout, layout, score_fps, score_header);
        const ResolvedLayout resolved = resolve_layout(layout, seq.joint_names);
        const std::vector<PostureAngles> angles =
            posture_angles_sequence(seq, resolved);
        std::vector<FrameScore> scores;
        if (score_label_set) {
          if (stem_of(input) != stem_of(score_annotations[i]))
            fail(Errc::config_error,
                 "video id mismatch: '" + input + "' vs '" +
                     score_annotations[i] + "'");
          const AnnotationTrack track =
              load_annotations(score_annotations[i], *score_label_set);
          const std::vector<int> frame_labels = to_frame_labels(track);
          if (frame_labels.size() != angles.size())
            fail(Errc::length_mismatch,
                 "annotations cover " + std::to_string(frame_labels.size()) +
                     " frames, skeleton has " + std::to_string(angles.size()));
          std::vector<Adjustments> per_frame;
          per_frame.reserve(angles.size());
          for (const int id : frame_labels)
            per_frame.push_back(adjustments_for(
                score_label_set->labels[static_cast<std::size_t>(id)].canonical()));
          scores = score_sequence(angles, thresholds, tables, per_frame);
        } else {
          scores = score_sequence(angles, thresholds, tables, adjustments);
        }
        std::string out_text;
        for (std::size_t f = 0; f < scores.size(); ++f)
          out_text += std::to_string(f) + "," + std::to_string(scores[f].value) +
                      "," + risk_name(risk_category(scores[f].value)) + "\n";
        const std::string out_path =
            (fs::path(score_out) / (stem_of(input) + ".scores.csv")).string();
        write_file(out_path, out_text);
      } catch (const Error& e) {
        // prefix the offending file without repeating the code name
        std::string inner = e.what();
        const std::string prefix = std::string(errc_name(e.code())) + ": ";
        if (inner.rfind(prefix, 0) == 0) inner = inner.substr(prefix.size());
        throw Error(e.code(), input + ": " + inner);
      }
    }
    return 0;
  }

  if (*aggregate) {
    if (agg_scores.size() != agg_annotations.size())
      fail(Errc::length_mismatch, "need one annotation file per score file");
    const LabelSet labels = load_labels(agg_labels);
    std::vector<std::vector<double>> scores;
    std::vector<AnnotationTrack> tracks;
    for (std::size_t i = 0; i < agg_scores.size(); ++i) {
      if (stem_of(agg_scores[i]) != stem_of(agg_annotations[i]))
        fail(Errc::config_error,
             "video id mismatch: '" + agg_scores[i] + "' vs '" +
                 agg_annotations[i] + "'");
      std::vector<double> video;
      std::istringstream in(read_file(agg_scores[i]));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
          fail(Errc::config_error,
               "'" + agg_scores[i] + "': rows must be frame,score,category");
        video.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
      }
      scores.push_back(std::move(video));
      tracks.push_back(load_annotations(agg_annotations[i], labels));
    }
    const auto result = agg_scheme == "median"
                            ? aggregate_median(scores, tracks, labels)
                        : agg_scheme == "resample_max"
                            ? aggregate_resample_max(scores, tracks, labels)
                            : (fail(Errc::config_error,
                                    "unknown scheme '" + agg_scheme + "'"),
                               std::map<std::string, ActionRisk>{});
    std::string out_text;
    for (const auto& label : labels.labels) {
      const ActionRisk& risk = result.at(label.canonical());
      out_text += label.canonical() + "," + format_score(risk.score) + "," +
                  risk_name(risk.category) + "\n";
    }
    if (agg_out.empty())
      std::cout << out_text;
    else
      write_file(agg_out, out_text);
    return 0;
  }

  if (*synth) {
    synth_params.seed = synth_seed;
    const Dataset data = synth_generate(synth_params);
    fs::create_directories(synth_out);
    write_file((fs::path(synth_out) / "labels.txt").string(),
               data.label_set.to_text());
    std::string manifest;
    for (const auto& item : data.items) {
      const std::string id = item.features.video_id;
      write_features_file(item.features,
                          (fs::path(synth_out) / (id + ".fseq")).string());
      const SegmentRun runs = run_length_encode(item.frame_labels);
      std::string annotations;
      std::int64_t start = 0;
      for (const auto& [class_id, length] : runs.runs) {
        annotations +=
            std::to_string(start) + "," + std::to_string(start + length - 1) +
            "," +
            data.label_set.labels[static_cast<std::size_t>(class_id)].canonical() +
            "\n";
        start += length;
      }
      write_file((fs::path(synth_out) / (id + ".csv")).string(), annotations);
      manifest += id + ".fseq," + id + ".csv\n";
    }
    write_file((fs::path(synth_out) / "manifest.txt").string(), manifest);
    return 0;
  }

  if (*split) {
    std::vector<std::string> ids;
    std::istringstream manifest(read_file(split_manifest));
    std::string line;
    while (std::getline(manifest, line)) {
      if (line.empty() || line[0] == '#') continue;
      ids.push_back(stem_of(line.substr(0, line.find(','))));
    }
    const SplitSpec spec = make_splits(ids, split_count, split_fraction, split_seed);
    const std::string text = splits_to_text(spec);
    if (split_out.empty())
      std::cout << text;
    else
      write_file(split_out, text);
    return 0;
  }

  if (*train_cmd) {
    const LabelSet labels = load_labels(train_labels);
    Dataset data = load_dataset(train_manifest, labels);
    if (!train_splits.empty()) {
      std::istringstream in(read_file(train_splits));
      const SplitSpec spec = splits_from_stream(in);
      if (train_split_index < 0 ||
          static_cast<std::size_t>(train_split_index) >= spec.splits.size())
        fail(Errc::config_error, "split index out of range");
      const auto& train_ids = spec.splits[static_cast<std::size_t>(train_split_index)].first;
      Dataset filtered;
      filtered.label_set = data.label_set;
      for (auto& item : data.items)
        for (const auto& id : train_ids)
          if (item.features.video_id == id) {
            filtered.items.push_back(std::move(item));
            break;
          }
      if (filtered.items.empty())
        fail(Errc::empty_input, "no manifest videos are in the chosen split");
      data = std::move(filtered);
    }

    TrainSpec spec;
    spec.arch = parse_arch(train_arch);
    const int epochs =
        train_epochs >= 0 ? train_epochs : config.get_int("train.epochs", 500);
    const double lr =
        train_lr >= 0 ? train_lr : config.get_double("train.lr", 0.001);
    spec.ed.epochs = spec.dt.epochs = spec.fw.epochs = epochs;
    spec.ed.learning_rate = spec.dt.learning_rate = spec.fw.learning_rate = lr;
    if (!train_filters.empty()) {
      spec.ed.encoder_filters = train_filters;
      spec.dt.filters_per_layer = train_filters;
      spec.dt.layers_per_stack = static_cast<int>(train_filters.size());
    }
    if (train_filter_duration > 0) spec.ed.filter_duration_s = train_filter_duration;
    if (!train_filter_mode.empty())
      spec.ed.filter_mode = train_filter_mode == "shortest_class"
                                ? FilterDurationMode::shortest_class_mean
                                : FilterDurationMode::fixed_seconds;
    if (train_stacks > 0) spec.dt.stacks = train_stacks;
    if (train_layers > 0) spec.dt.layers_per_stack = train_layers;

    auto [model, report] = train(data, spec, train_seed);
    save_model_file(model, train_out);
    if (!train_report.empty()) {
      std::string text = "epoch,loss,accuracy\n";
      for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.8f,%.4f\n", e,
                      report.epoch_loss[e], report.epoch_accuracy[e]);
        text += buf;
      }
      write_file(train_report, text);
    }
    return 0;
  }

  if (*predict_cmd) {
    const ModelParams model = load_model_file(predict_model);
    const FeatureSequence features = read_features_file(predict_features);
    const std::vector<int> ids =
        predict_window > 0 ? predict_windowed(model, features.data, predict_window)
                           : predict(model, features.data);
    std::string text;
    for (const int id : ids) text += std::to_string(id) + "\n";
    if (predict_out.empty())
      std::cout << text;
    else
      write_file(predict_out, text);
    return 0;
  }

  if (*stream_cmd) {
    const ModelParams model = load_model_file(stream_model);
    StreamingPredictor predictor(model, stream_window);
    std::istream& in = std::cin;
    while (in.peek() != std::char_traits<char>::eof()) {
      const FeatureSequence chunk = read_features(in);
      predictor.push(chunk.data);
      for (const int id : predictor.drain()) std::cout << id << "\n";
      std::cout.flush();
    }
    predictor.finish();
    for (const int id : predictor.drain()) std::cout << id << "\n";
    std::cout.flush();
    return 0;
  }

  if (*eval_cmd) {
    std::optional<LabelSet> labels;
    if (!eval_labels.empty()) labels = load_labels(eval_labels);
    const double tau = eval_tau > 0 ? eval_tau : config.get_double("eval.tau", 0.10);
    std::vector<EvalReport> reports;
    std::string text;
    for (const auto& pair : eval_pairs) {
      const std::size_t colon = pair.find(':');
      if (colon == std::string::npos)
        fail(Errc::config_error, "--pair wants PRED:TRUTH, got '" + pair + "'");
      const std::string pred_path = pair.substr(0, colon);
      const std::string truth_path = pair.substr(colon + 1);
      const std::vector<int> pred =
          load_frame_ids(pred_path, labels ? &*labels : nullptr);
      const std::vector<int> truth =
          load_frame_ids(truth_path, labels ? &*labels : nullptr);
      const EvalReport report = evaluate(pred, truth, tau);
      reports.push_back(report);
      text += eval_row(stem_of(pred_path), report) + "\n";
    }
    text += eval_aggregate_row(reports) + "\n";
    if (eval_out.empty())
      std::cout << text;
    else
      write_file(eval_out, text);
    return 0;
  }

  if (*report_cmd) {
    std::optional<LabelSet> labels;
    if (!report_labels.empty()) labels = load_labels(report_labels);
    const std::vector<int> truth =
        load_frame_ids(report_truth, labels ? &*labels : nullptr);
    const std::vector<int> pred =
        load_frame_ids(report_pred, labels ? &*labels : nullptr);
    std::optional<std::vector<RiskCategory>> risk;
    if (!report_risk.empty()) {
      if (!labels)
        fail(Errc::config_error, "--risk needs --labels to map class ids");
      std::map<std::string, RiskCategory> by_action;
      std::istringstream in(read_file(report_risk));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
          fail(Errc::config_error, "risk rows must be action,score,category");
        by_action[line.substr(0, c1)] = parse_risk(line.substr(c2 + 1));
      }
      const auto by_id = attach_risk(*labels, by_action);
      std::vector<RiskCategory> track;
      track.reserve(pred.size());
      for (const int id : pred) track.push_back(by_id.at(id));
      risk = std::move(track);
    }
    write_file(report_out, render_timeline_svg(truth, pred, risk));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::non_finite_loss ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
