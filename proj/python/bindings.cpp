#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ergoseg/bvh.hpp"
#include "ergoseg/error.hpp"
#include "ergoseg/features.hpp"
#include "ergoseg/kinematics.hpp"
#include "ergoseg/labels.hpp"
#include "ergoseg/metrics.hpp"
#include "ergoseg/reba.hpp"
#include "ergoseg/report.hpp"
#include "ergoseg/tcn.hpp"

namespace py = pybind11;
using namespace ergoseg;

namespace {

// Nested list of rows <-> Matrix keeps the bindings free of a numpy build
// dependency; sequences here are desk scale.
Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) fail(Errc::dims_mismatch, "matrix needs at least one row");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols())
      fail(Errc::dims_mismatch, "ragged rows in matrix literal");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return rows;
}

}  // namespace

PYBIND11_MODULE(_ergoseg, m) {
  m.doc() = "REBA ergonomic scoring and temporal action segmentation";

  py::register_exception<Error>(m, "ErgosegError");

  // --- skeletons ---
  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("__repr__", [](const Vec3& v) {
        return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
               ", " + std::to_string(v.z) + ")";
      });

  py::class_<BvhDocument>(m, "BvhDocument")
      .def_readonly("frame_count", &BvhDocument::frame_count)
      .def_readonly("frame_time", &BvhDocument::frame_time)
      .def_property_readonly("channel_count", &BvhDocument::channel_count);

  py::class_<SkeletonSequence>(m, "SkeletonSequence")
      .def_readonly("joint_names", &SkeletonSequence::joint_names)
      .def_readonly("fps", &SkeletonSequence::fps)
      .def_readonly("positions", &SkeletonSequence::positions)
      .def_property_readonly("frame_count", &SkeletonSequence::frame_count);

  m.def("parse_bvh", &parse_bvh, py::arg("text"));
  m.def("serialize_bvh", &serialize_bvh, py::arg("doc"));
  m.def("forward_kinematics", &forward_kinematics, py::arg("doc"));

  py::class_<JointLayout>(m, "JointLayout")
      .def_static("kinect25", &JointLayout::kinect25)
      .def_static("tum33", &JointLayout::tum33)
      .def_readonly("name", &JointLayout::name)
      .def_readonly("joint_names", &JointLayout::joint_names);

  m.def(
      "read_joint_table",
      [](const std::string& text, const JointLayout& layout, bool has_header,
         double fps) {
        std::istringstream in(text);
        TableOptions options;
        options.has_header = has_header;
        options.fps = fps;
        return read_joint_table(in, layout, options);
      },
      py::arg("text"), py::arg("layout"), py::arg("has_header") = false,
      py::arg("fps") = 12.0);

  // --- kinematics / scoring ---
  py::class_<PostureAngles>(m, "PostureAngles")
      .def(py::init<>())
      .def_readwrite("trunk_flexion", &PostureAngles::trunk_flexion)
      .def_readwrite("trunk_side_flexion", &PostureAngles::trunk_side_flexion)
      .def_readwrite("trunk_twist", &PostureAngles::trunk_twist)
      .def_readwrite("neck_flexion", &PostureAngles::neck_flexion)
      .def_readwrite("knee_flexion_left", &PostureAngles::knee_flexion_left)
      .def_readwrite("knee_flexion_right", &PostureAngles::knee_flexion_right)
      .def_readwrite("upper_arm_flexion_left", &PostureAngles::upper_arm_flexion_left)
      .def_readwrite("upper_arm_flexion_right", &PostureAngles::upper_arm_flexion_right)
      .def_readwrite("shoulder_abduction_left", &PostureAngles::shoulder_abduction_left)
      .def_readwrite("shoulder_abduction_right", &PostureAngles::shoulder_abduction_right)
      .def_readwrite("lower_arm_flexion_left", &PostureAngles::lower_arm_flexion_left)
      .def_readwrite("lower_arm_flexion_right", &PostureAngles::lower_arm_flexion_right)
      .def_readwrite("wrist_flexion_left", &PostureAngles::wrist_flexion_left)
      .def_readwrite("wrist_flexion_right", &PostureAngles::wrist_flexion_right);

  m.def(
      "posture_angles_sequence",
      [](const SkeletonSequence& seq, const JointLayout& layout) {
        return posture_angles_sequence(seq, resolve_layout(layout, seq.joint_names));
      },
      py::arg("sequence"), py::arg("layout"));

  py::class_<Thresholds>(m, "Thresholds")
      .def(py::init<>())
      .def_readwrite("zero", &Thresholds::zero)
      .def_readwrite("binary", &Thresholds::binary)
      .def_readwrite("abduction", &Thresholds::abduction);

  py::class_<Adjustments>(m, "Adjustments")
      .def(py::init<>())
      .def_readwrite("load_score", &Adjustments::load_score)
      .def_readwrite("coupling_score", &Adjustments::coupling_score)
      .def_readwrite("activity_score", &Adjustments::activity_score);

  py::class_<PartScores>(m, "PartScores")
      .def(py::init<>())
      .def_readwrite("trunk", &PartScores::trunk)
      .def_readwrite("neck", &PartScores::neck)
      .def_readwrite("legs", &PartScores::legs)
      .def_readwrite("upper_arm", &PartScores::upper_arm)
      .def_readwrite("lower_arm", &PartScores::lower_arm)
      .def_readwrite("wrist", &PartScores::wrist);

  py::class_<FrameScore>(m, "FrameScore")
      .def_readonly("value", &FrameScore::value)
      .def_readonly("parts", &FrameScore::parts);

  py::enum_<RiskCategory>(m, "RiskCategory")
      .value("LOW", RiskCategory::low)
      .value("MEDIUM", RiskCategory::medium)
      .value("HIGH", RiskCategory::high);

  py::class_<RebaTables>(m, "RebaTables")
      .def_static("defaults", &RebaTables::defaults,
                  py::return_value_policy::reference)
      .def_static("parse", [](const std::string& text) {
        std::istringstream in(text);
        return RebaTables::parse(in);
      });

  m.def("score_parts", &score_parts, py::arg("angles"), py::arg("thresholds"),
        py::arg("tables"));
  m.def("frame_reba", &frame_reba, py::arg("parts"), py::arg("adjustments"),
        py::arg("tables"));
  m.def("risk_category", &risk_category, py::arg("score"));
  m.def(
      "score_sequence",
      [](const std::vector<PostureAngles>& angles, const Thresholds& thresholds,
         const RebaTables& tables, const Adjustments& adjustments) {
        return score_sequence(angles, thresholds, tables, adjustments);
      },
      py::arg("angles"), py::arg("thresholds"), py::arg("tables"),
      py::arg("adjustments") = Adjustments{});
  m.def("downsample_to_100",
        [](const std::vector<double>& seq) { return downsample_to_100(seq); });

  // --- labels ---
  py::class_<ActionLabel>(m, "ActionLabel")
      .def_static("from_canonical", &ActionLabel::from_canonical)
      .def_readonly("tiers", &ActionLabel::tiers)
      .def("canonical", &ActionLabel::canonical);

  py::class_<LabelSet>(m, "LabelSet")
      .def(py::init<>())
      .def_static("from_text",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return LabelSet::from_stream(in);
                  })
      .def("add", &LabelSet::add)
      .def("id_of", &LabelSet::id_of)
      .def("to_text", &LabelSet::to_text)
      .def_readonly("labels", &LabelSet::labels)
      .def("__len__", &LabelSet::size);

  m.def("default_labels_uw_iom", &default_labels_uw_iom);
  m.def("default_labels_tum", &default_labels_tum);

  py::class_<AnnotationTrack>(m, "AnnotationTrack")
      .def_readonly("total_frames", &AnnotationTrack::total_frames)
      .def_property_readonly("spans", [](const AnnotationTrack& track) {
        std::vector<std::tuple<std::int64_t, std::int64_t, int>> out;
        for (const auto& span : track.spans)
          out.emplace_back(span.start, span.end, span.class_id);
        return out;
      });

  m.def(
      "parse_annotations",
      [](const std::string& text, const LabelSet& labels) {
        std::istringstream in(text);
        return parse_annotations(in, labels);
      },
      py::arg("text"), py::arg("labels"));
  m.def("to_frame_labels", &to_frame_labels);
  m.def("run_length_encode",
        [](const std::vector<int>& frames) { return run_length_encode(frames).runs; });
  m.def("run_length_decode", [](const std::vector<std::pair<int, std::int64_t>>& runs) {
    SegmentRun r;
    r.runs = runs;
    return run_length_decode(r);
  });
  m.def("attach_risk", &attach_risk, py::arg("labels"), py::arg("risk"));

  // --- features / datasets ---
  py::class_<FeatureSequence>(m, "FeatureSequence")
      .def(py::init([](const std::string& video_id, double fps,
                       const std::vector<std::vector<double>>& rows) {
             FeatureSequence seq;
             seq.video_id = video_id;
             seq.fps = fps;
             seq.data = matrix_from_rows(rows);
             return seq;
           }),
           py::arg("video_id"), py::arg("fps"), py::arg("rows"))
      .def_readonly("video_id", &FeatureSequence::video_id)
      .def_readonly("fps", &FeatureSequence::fps)
      .def_property_readonly("frames", &FeatureSequence::frames)
      .def_property_readonly("dims", &FeatureSequence::dims)
      .def_property_readonly(
          "rows", [](const FeatureSequence& seq) { return matrix_to_rows(seq.data); });

  m.def("write_features_file", &write_features_file, py::arg("sequence"),
        py::arg("path"));
  m.def("read_features_file", &read_features_file, py::arg("path"));

  py::class_<DatasetItem>(m, "DatasetItem")
      .def_readonly("features", &DatasetItem::features)
      .def_readonly("frame_labels", &DatasetItem::frame_labels);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("items", &Dataset::items)
      .def_readonly("label_set", &Dataset::label_set);

  py::class_<SplitSpec>(m, "SplitSpec")
      .def_readonly("seed", &SplitSpec::seed)
      .def_readonly("splits", &SplitSpec::splits);

  m.def("make_splits", &make_splits, py::arg("video_ids"), py::arg("n_splits"),
        py::arg("test_fraction"), py::arg("seed"));

  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("n_videos", &SynthParams::n_videos)
      .def_readwrite("n_classes", &SynthParams::n_classes)
      .def_readwrite("dims", &SynthParams::dims)
      .def_readwrite("fps", &SynthParams::fps)
      .def_readwrite("mean_segment_frames", &SynthParams::mean_segment_frames)
      .def_readwrite("noise_sigma", &SynthParams::noise_sigma)
      .def_readwrite("seed", &SynthParams::seed)
      .def_readwrite("segments_per_video", &SynthParams::segments_per_video);

  m.def("synth_generate", &synth_generate, py::arg("params"));
  m.def("load_dataset", &load_dataset, py::arg("manifest_path"), py::arg("labels"));

  // --- models ---
  py::enum_<Arch>(m, "Arch")
      .value("ED_TCN", Arch::ed_tcn)
      .value("D_TCN", Arch::d_tcn)
      .value("FRAMEWISE", Arch::framewise);

  py::class_<EdTcnConfig>(m, "EdTcnConfig")
      .def(py::init<>())
      .def_readwrite("encoder_filters", &EdTcnConfig::encoder_filters)
      .def_readwrite("filter_duration_s", &EdTcnConfig::filter_duration_s)
      .def_readwrite("learning_rate", &EdTcnConfig::learning_rate)
      .def_readwrite("epochs", &EdTcnConfig::epochs);

  py::class_<DTcnConfig>(m, "DTcnConfig")
      .def(py::init<>())
      .def_readwrite("stacks", &DTcnConfig::stacks)
      .def_readwrite("layers_per_stack", &DTcnConfig::layers_per_stack)
      .def_readwrite("filters_per_layer", &DTcnConfig::filters_per_layer)
      .def_readwrite("learning_rate", &DTcnConfig::learning_rate)
      .def_readwrite("epochs", &DTcnConfig::epochs);

  py::class_<FramewiseConfig>(m, "FramewiseConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &FramewiseConfig::learning_rate)
      .def_readwrite("epochs", &FramewiseConfig::epochs);

  py::class_<TrainSpec>(m, "TrainSpec")
      .def(py::init<>())
      .def_readwrite("arch", &TrainSpec::arch)
      .def_readwrite("ed", &TrainSpec::ed)
      .def_readwrite("dt", &TrainSpec::dt)
      .def_readwrite("fw", &TrainSpec::fw);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("epoch_loss", &TrainReport::epoch_loss)
      .def_readonly("epoch_accuracy", &TrainReport::epoch_accuracy)
      .def_readonly("wall_seconds", &TrainReport::wall_seconds)
      .def_readonly("seed", &TrainReport::seed);

  py::class_<ModelParams>(m, "ModelParams")
      .def_readonly("arch", &ModelParams::arch)
      .def_readonly("n_classes", &ModelParams::n_classes)
      .def_readonly("input_dims", &ModelParams::input_dims)
      .def_readonly("fps_at_train", &ModelParams::fps_at_train)
      .def_readonly("filter_width", &ModelParams::filter_width);

  m.def(
      "train",
      [](const Dataset& data, const TrainSpec& spec, std::uint64_t seed) {
        return train(data, spec, seed);
      },
      py::arg("dataset"), py::arg("spec"), py::arg("seed"));
  m.def(
      "predict",
      [](const ModelParams& model, const std::vector<std::vector<double>>& rows) {
        return predict(model, matrix_from_rows(rows));
      },
      py::arg("model"), py::arg("rows"));
  m.def(
      "predict_features",
      [](const ModelParams& model, const FeatureSequence& seq) {
        return predict(model, seq.data);
      },
      py::arg("model"), py::arg("features"));
  m.def(
      "predict_windowed",
      [](const ModelParams& model, const FeatureSequence& seq, int window) {
        return predict_windowed(model, seq.data, window);
      },
      py::arg("model"), py::arg("features"), py::arg("window"));
  m.def("save_model_file", &save_model_file, py::arg("model"), py::arg("path"));
  m.def("load_model_file", &load_model_file, py::arg("path"));

  // --- metrics / report ---
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("edit_score", &EvalReport::edit_score)
      .def_readonly("f1_overlap", &EvalReport::f1_overlap)
      .def_readonly("tau", &EvalReport::tau)
      .def_readonly("n_frames", &EvalReport::n_frames)
      .def_readonly("n_segments_pred", &EvalReport::n_segments_pred)
      .def_readonly("n_segments_true", &EvalReport::n_segments_true);

  m.def("frame_accuracy", &frame_accuracy, py::arg("pred"), py::arg("truth"));
  m.def("edit_score", &edit_score, py::arg("pred"), py::arg("truth"));
  m.def("f1_overlap", &f1_overlap, py::arg("pred"), py::arg("truth"), py::arg("tau"));
  m.def("evaluate", &evaluate, py::arg("pred"), py::arg("truth"), py::arg("tau"));

  m.def("render_timeline_svg", &render_timeline_svg, py::arg("truth"),
        py::arg("pred"), py::arg("risk") = std::nullopt);
  m.def("class_color", &class_color, py::arg("class_id"));
}
