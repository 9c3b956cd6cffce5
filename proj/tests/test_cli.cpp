#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ergoseg/features.hpp"
#include "ergoseg/reba.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace ergoseg;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(ERGOSEG_BIN) + " " + args + " 2>/dev/null";
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> chunk{};
  std::size_t got = 0;
  while ((got = fread(chunk.data(), 1, chunk.size(), pipe)) > 0)
    result.output.append(chunk.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ergoseg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (const char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("cli scores a neutral bvh as all ones") {
  const fs::path dir = fresh_dir("score");
  const fs::path bvh = dir / "pose.bvh";
  std::ofstream(bvh) << testing::tum33_bvh_text(5);
  const RunResult run = run_cli("reba score --layout tum33 --out " +
                                dir.string() + " " + bvh.string());
  REQUIRE(run.exit_code == 0);
  const std::string scores = slurp(dir / "pose.scores.csv");
  CHECK(count_lines(scores) == 5);
  std::istringstream in(scores);
  std::string line;
  int frame = 0;
  while (std::getline(in, line)) {
    CHECK(line == std::to_string(frame) + ",1,Low");
    ++frame;
  }
}

TEST_CASE("cli exits 2 on a missing input file") {
  const RunResult run = run_cli("reba score --layout tum33 /nonexistent.bvh");
  CHECK(run.exit_code == 2);
}

TEST_CASE("cli score errors name the offending file") {
  const fs::path dir = fresh_dir("badbvh");
  const fs::path bvh = dir / "broken.bvh";
  std::ofstream(bvh) << "HIERARCHY\nnot a joint tree\n";
  const std::string command = std::string(ERGOSEG_BIN) +
                              " reba score --layout tum33 " + bvh.string() +
                              " 2>" + (dir / "stderr.txt").string();
  const int status = std::system(command.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string message = slurp(dir / "stderr.txt");
  CHECK(message.find("broken.bvh") != std::string::npos);
}

TEST_CASE("ERGOSEG_TABLES overrides the scoring tables") {
  const fs::path dir = fresh_dir("tables_env");
  const fs::path bvh = dir / "pose.bvh";
  std::ofstream(bvh) << testing::tum33_bvh_text(2);
  // raise the B-table row a neutral pose hits so its frame score becomes 3
  std::string tables = RebaTables::default_text();
  const std::size_t at = tables.find("2 1 = 1 2 3");
  REQUIRE(at != std::string::npos);
  tables.replace(at, 11, "2 1 = 5 5 5");
  std::ofstream(dir / "tables.txt") << tables;
  const std::string command =
      "ERGOSEG_TABLES=" + (dir / "tables.txt").string() + " " + ERGOSEG_BIN +
      " reba score --layout tum33 --out " + dir.string() + " " + bvh.string();
  REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
  const std::string scores = slurp(dir / "pose.scores.csv");
  CHECK(scores.find("0,3,Medium") == 0);
}

TEST_CASE("cli scores a bending kinect table as elevated risk") {
  const fs::path dir = fresh_dir("bend");
  // 25-joint table of a deep forward bend: spine chain pitched ~70 degrees
  const auto joint = [](double x, double y, double z) {
    return "," + std::to_string(x) + "," + std::to_string(y) + "," +
           std::to_string(z);
  };
  std::string row = "0";
  const double lean = 70.0 * 3.14159265358979 / 180.0;
  const double s = std::sin(lean), c = std::cos(lean);
  // kinect25 column order; only role joints matter, the rest sit at origin-ish
  for (int j = 0; j < 25; ++j) {
    switch (j) {
      case 0: row += joint(0.0, 1.0, 0.0); break;         // SpineBase
      case 1: row += joint(0.0, 1.0 + 0.25 * c, 0.25 * s); break;  // SpineMid
      case 20: row += joint(0.0, 1.0 + 0.5 * c, 0.5 * s); break;   // SpineShoulder
      case 2: row += joint(0.0, 1.0 + 0.55 * c, 0.55 * s); break;  // Neck
      case 3: row += joint(0.0, 1.0 + 0.7 * c, 0.7 * s); break;    // Head
      case 4: row += joint(0.2, 1.0 + 0.5 * c, 0.5 * s); break;    // ShoulderLeft
      case 8: row += joint(-0.2, 1.0 + 0.5 * c, 0.5 * s); break;   // ShoulderRight
      case 5: row += joint(0.2, 1.0 + 0.2 * c, 0.5 * s); break;    // ElbowLeft
      case 9: row += joint(-0.2, 1.0 + 0.2 * c, 0.5 * s); break;   // ElbowRight
      case 6: row += joint(0.2, 1.0 - 0.05 * c, 0.5 * s); break;   // WristLeft
      case 10: row += joint(-0.2, 1.0 - 0.05 * c, 0.5 * s); break; // WristRight
      case 7: row += joint(0.2, 1.0 - 0.15 * c, 0.5 * s); break;   // HandLeft
      case 11: row += joint(-0.2, 1.0 - 0.15 * c, 0.5 * s); break; // HandRight
      case 12: row += joint(0.1, 1.0, 0.0); break;        // HipLeft
      case 16: row += joint(-0.1, 1.0, 0.0); break;       // HipRight
      case 13: row += joint(0.1, 0.5, 0.0); break;        // KneeLeft
      case 17: row += joint(-0.1, 0.5, 0.0); break;       // KneeRight
      case 14: row += joint(0.1, 0.05, 0.0); break;       // AnkleLeft
      case 18: row += joint(-0.1, 0.05, 0.0); break;      // AnkleRight
      default: row += joint(0.0, 0.0, 0.0); break;        // feet, tips, thumbs
    }
  }
  std::ofstream(dir / "bend.csv") << row << "\n";
  REQUIRE(run_cli("reba score --layout kinect25 --fps 12 --out " + dir.string() +
                  " " + (dir / "bend.csv").string())
              .exit_code == 0);
  const std::string scores = slurp(dir / "bend.scores.csv");
  CHECK((scores.find("Medium") != std::string::npos ||
         scores.find("High") != std::string::npos));
}

TEST_CASE("cli exits 2 on usage errors") {
  CHECK(run_cli("reba score").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("cli applies per-action adjustments from config") {
  const fs::path dir = fresh_dir("adjust");
  const fs::path bvh = dir / "take.bvh";
  std::ofstream(bvh) << testing::tum33_bvh_text(6);
  std::ofstream(dir / "labels.txt") << "lift\nrest\n";
  std::ofstream(dir / "take.csv") << "0,2,lift\n3,5,rest\n";
  std::ofstream(dir / "pipeline.cfg") << "[adjustments]\nlift = 1,1,1\n";
  REQUIRE(run_cli("--config " + (dir / "pipeline.cfg").string() +
                  " reba score --layout tum33 --labels " +
                  (dir / "labels.txt").string() + " --annotations " +
                  (dir / "take.csv").string() + " --out " + dir.string() + " " +
                  bvh.string())
              .exit_code == 0);
  const std::string scores = slurp(dir / "take.scores.csv");
  // neutral pose scores 1; load+coupling push A,B to 2 -> C 2, activity +1
  CHECK(scores.find("0,3,Medium") == 0);
  CHECK(scores.find("\n3,1,Low") != std::string::npos);
}

TEST_CASE("cli aggregate computes per-action medians") {
  const fs::path dir = fresh_dir("aggregate");
  std::ofstream(dir / "labels.txt") << "walk\ncarry\n";
  std::ofstream(dir / "v0.scores.csv")
      << "0,2,Low\n1,2,Low\n2,8,High\n3,8,High\n4,8,High\n";
  std::ofstream(dir / "v0.csv") << "0,1,walk\n2,4,carry\n";
  const RunResult run = run_cli(
      "reba aggregate --scheme median --labels " + (dir / "labels.txt").string() +
      " --scores " + (dir / "v0.scores.csv").string() + " --annotations " +
      (dir / "v0.csv").string());
  REQUIRE(run.exit_code == 0);
  CHECK(run.output == "walk,2,Low\ncarry,8,High\n");
}

TEST_CASE("cli aggregate rejects a 99-frame video under resample_max") {
  const fs::path dir = fresh_dir("short");
  std::ofstream(dir / "labels.txt") << "only\n";
  {
    std::ofstream scores(dir / "v0.scores.csv");
    for (int f = 0; f < 99; ++f) scores << f << ",2,Low\n";
    std::ofstream(dir / "v0.csv") << "0,98,only\n";
  }
  const RunResult run = run_cli(
      "reba aggregate --scheme resample_max --labels " +
      (dir / "labels.txt").string() + " --scores " +
      (dir / "v0.scores.csv").string() + " --annotations " +
      (dir / "v0.csv").string());
  CHECK(run.exit_code == 2);
}

TEST_CASE("cli pipeline: synth, split, train, predict, eval, report") {
  const fs::path dir = fresh_dir("pipeline");
  // noiseless features make even a tiny training budget sufficient
  REQUIRE(run_cli("dataset synth --out " + dir.string() +
                  " --seed 5 --videos 4 --classes 3 --dims 6 --fps 2 "
                  "--mean-seg 20 --segments 5 --sigma 0")
              .exit_code == 0);
  REQUIRE(fs::exists(dir / "manifest.txt"));
  REQUIRE(fs::exists(dir / "labels.txt"));

  const RunResult split =
      run_cli("split --manifest " + (dir / "manifest.txt").string() +
              " --seed 9 --n-splits 2 --fraction 0.25 --out " +
              (dir / "splits.txt").string());
  REQUIRE(split.exit_code == 0);
  const std::string splits_text = slurp(dir / "splits.txt");
  CHECK(splits_text.find("split 0 train") != std::string::npos);
  CHECK(splits_text.find("split 1 test") != std::string::npos);

  REQUIRE(run_cli("train --manifest " + (dir / "manifest.txt").string() +
                  " --labels " + (dir / "labels.txt").string() +
                  " --seed 3 --arch framewise --epochs 40 --lr 0.1 --out " +
                  (dir / "model.tcnm").string() + " --report " +
                  (dir / "train.csv").string())
              .exit_code == 0);
  REQUIRE(fs::exists(dir / "model.tcnm"));
  CHECK(count_lines(slurp(dir / "train.csv")) == 41);  // header + epochs

  const RunResult predict =
      run_cli("predict --model " + (dir / "model.tcnm").string() +
              " --features " + (dir / "video00.fseq").string() + " --out " +
              (dir / "pred.txt").string());
  REQUIRE(predict.exit_code == 0);
  const FeatureSequence video = read_features_file((dir / "video00.fseq").string());
  CHECK(count_lines(slurp(dir / "pred.txt")) ==
        static_cast<int>(video.frames()));

  const RunResult eval = run_cli(
      "eval --labels " + (dir / "labels.txt").string() + " --tau 0.1 --pair " +
      (dir / "pred.txt").string() + ":" + (dir / "video00.csv").string());
  REQUIRE(eval.exit_code == 0);
  // one row for the video plus the aggregate row
  CHECK(count_lines(eval.output) == 2);
  CHECK(eval.output.find("pred,100.00,100.00,100.00") != std::string::npos);
  CHECK(eval.output.find("aggregate,100.00±0.00") != std::string::npos);

  // five-pair eval emits five rows plus one aggregate
  std::string pairs;
  for (int i = 0; i < 5; ++i)
    pairs += " --pair " + (dir / "pred.txt").string() + ":" +
             (dir / "video00.csv").string();
  const RunResult eval5 =
      run_cli("eval --labels " + (dir / "labels.txt").string() + pairs);
  REQUIRE(eval5.exit_code == 0);
  CHECK(count_lines(eval5.output) == 6);

  const RunResult report = run_cli(
      "report --truth " + (dir / "video00.csv").string() + " --pred " +
      (dir / "pred.txt").string() + " --labels " + (dir / "labels.txt").string() +
      " --out " + (dir / "timeline.svg").string());
  REQUIRE(report.exit_code == 0);
  const std::string svg = slurp(dir / "timeline.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<rect") != std::string::npos);
  // deterministic rerun
  REQUIRE(run_cli("report --truth " + (dir / "video00.csv").string() +
                  " --pred " + (dir / "pred.txt").string() + " --labels " +
                  (dir / "labels.txt").string() + " --out " +
                  (dir / "timeline2.svg").string())
              .exit_code == 0);
  CHECK(slurp(dir / "timeline2.svg") == svg);
}

TEST_CASE("cli stream matches windowed prediction") {
  const fs::path dir = fresh_dir("stream");
  REQUIRE(run_cli("dataset synth --out " + dir.string() +
                  " --seed 8 --videos 2 --classes 3 --dims 5 --fps 2 "
                  "--mean-seg 45 --segments 4 --sigma 0.05")
              .exit_code == 0);
  REQUIRE(run_cli("train --manifest " + (dir / "manifest.txt").string() +
                  " --labels " + (dir / "labels.txt").string() +
                  " --seed 2 --arch framewise --epochs 10 --lr 0.1 --out " +
                  (dir / "model.tcnm").string())
              .exit_code == 0);

  // split the first video into two FSEQ chunks on stdin
  const FeatureSequence video = read_features_file((dir / "video00.fseq").string());
  const std::size_t half = video.frames() / 2;
  FeatureSequence a = video, b = video;
  a.data = Matrix(half, video.dims());
  b.data = Matrix(video.frames() - half, video.dims());
  for (std::size_t t = 0; t < video.frames(); ++t)
    for (std::size_t d = 0; d < video.dims(); ++d) {
      if (t < half)
        a.data(t, d) = video.data(t, d);
      else
        b.data(t - half, d) = video.data(t, d);
    }
  write_features_file(a, (dir / "chunk_a.fseq").string());
  write_features_file(b, (dir / "chunk_b.fseq").string());

  const std::string stream_command =
      "cat " + (dir / "chunk_a.fseq").string() + " " +
      (dir / "chunk_b.fseq").string() + " | " + ERGOSEG_BIN +
      " stream --window 90 --model " + (dir / "model.tcnm").string();
  RunResult streamed;
  {
    FILE* pipe = popen(stream_command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> chunk{};
    std::size_t got = 0;
    while ((got = fread(chunk.data(), 1, chunk.size(), pipe)) > 0)
      streamed.output.append(chunk.data(), got);
    streamed.exit_code = WEXITSTATUS(pclose(pipe));
  }
  REQUIRE(streamed.exit_code == 0);

  const RunResult windowed =
      run_cli("predict --window 90 --model " + (dir / "model.tcnm").string() +
              " --features " + (dir / "video00.fseq").string());
  REQUIRE(windowed.exit_code == 0);
  CHECK(streamed.output == windowed.output);
  CHECK(count_lines(streamed.output) == static_cast<int>(video.frames()));
}
