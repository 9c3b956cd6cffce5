#include "ergoseg/bvh.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "ergoseg/error.hpp"

namespace ergoseg {

const char* bvh_channel_name(BvhChannel channel) {
  switch (channel) {
    case BvhChannel::x_position: return "Xposition";
    case BvhChannel::y_position: return "Yposition";
    case BvhChannel::z_position: return "Zposition";
    case BvhChannel::x_rotation: return "Xrotation";
    case BvhChannel::y_rotation: return "Yrotation";
    case BvhChannel::z_rotation: return "Zrotation";
  }
  return "?";
}

std::size_t BvhDocument::channel_count() const {
  std::size_t count = 0;
  auto walk = [&count](const JointNode& node, auto&& self) -> void {
    count += node.channels.size();
    for (const auto& child : node.children) self(child, self);
  };
  walk(root, walk);
  return count;
}

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(const std::string& text) : text_(text) {}

  // Returns false at end of input.
  bool next(std::string& token) {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    token.assign(text_, start, pos_ - start);
    return true;
  }

  std::string expect(const char* what) {
    std::string token;
    if (!next(token))
      fail(Errc::malformed_hierarchy,
           "unexpected end of file, expected " + std::string(what));
    return token;
  }

  // Next non-blank line of the remaining input; false at end.
  bool next_line(std::string& line) {
    while (pos_ < text_.size()) {
      std::size_t eol = text_.find('\n', pos_);
      if (eol == std::string::npos) eol = text_.size();
      line.assign(text_, pos_, eol - pos_);
      pos_ = eol < text_.size() ? eol + 1 : eol;
      ++line_;
      bool blank = true;
      for (const char c : line)
        if (!is_space(c)) {
          blank = false;
          break;
        }
      if (!blank) return true;
    }
    return false;
  }

  void expect_keyword(const char* keyword) {
    const std::string token = expect(keyword);
    if (token != keyword)
      fail(Errc::malformed_hierarchy, "expected '" + std::string(keyword) +
                                          "', got '" + token + "' (line " +
                                          std::to_string(line_) + ")");
  }

  int line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

double parse_number(const std::string& token, Errc code, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + token.size())
    fail(code, "bad number '" + token + "' (line " + std::to_string(line) + ")");
  return value;
}

BvhChannel parse_channel(const std::string& token, int line) {
  for (int i = 0; i < 6; ++i) {
    const auto channel = static_cast<BvhChannel>(i);
    if (token == bvh_channel_name(channel)) return channel;
  }
  fail(Errc::malformed_hierarchy,
       "unknown channel '" + token + "' (line " + std::to_string(line) + ")");
}

Vec3 parse_offset(Tokenizer& tok) {
  tok.expect_keyword("OFFSET");
  Vec3 v;
  v.x = parse_number(tok.expect("offset x"), Errc::malformed_hierarchy, tok.line());
  v.y = parse_number(tok.expect("offset y"), Errc::malformed_hierarchy, tok.line());
  v.z = parse_number(tok.expect("offset z"), Errc::malformed_hierarchy, tok.line());
  return v;
}

JointNode parse_joint(Tokenizer& tok, const std::string& name,
                      std::vector<std::string>& seen_names) {
  for (const auto& existing : seen_names)
    if (existing == name)
      fail(Errc::malformed_hierarchy, "duplicate joint name '" + name + "'");
  seen_names.push_back(name);

  JointNode node;
  node.name = name;
  tok.expect_keyword("{");
  node.offset = parse_offset(tok);

  const std::string keyword = tok.expect("CHANNELS or }");
  std::string pending = keyword;
  if (keyword == "CHANNELS") {
    const int n = static_cast<int>(
        parse_number(tok.expect("channel count"), Errc::malformed_hierarchy, tok.line()));
    if (n != 3 && n != 6)
      fail(Errc::malformed_hierarchy,
           "channel count must be 3 or 6, got " + std::to_string(n));
    for (int i = 0; i < n; ++i)
      node.channels.push_back(parse_channel(tok.expect("channel name"), tok.line()));
    pending = tok.expect("JOINT, End, or }");
  }

  while (pending != "}") {
    if (pending == "JOINT") {
      const std::string child_name = tok.expect("joint name");
      node.children.push_back(parse_joint(tok, child_name, seen_names));
    } else if (pending == "End") {
      tok.expect_keyword("Site");
      JointNode end;
      end.name = name + "_end";
      end.is_end_site = true;
      tok.expect_keyword("{");
      end.offset = parse_offset(tok);
      tok.expect_keyword("}");
      node.children.push_back(std::move(end));
    } else {
      fail(Errc::malformed_hierarchy,
           "expected JOINT, End Site, or '}', got '" + pending + "' (line " +
               std::to_string(tok.line()) + ")");
    }
    pending = tok.expect("JOINT, End, or }");
  }
  return node;
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, result.ptr);
}

void serialize_joint(const JointNode& node, int depth, bool is_root,
                     std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  if (node.is_end_site) {
    out += indent + "End Site\n" + indent + "{\n";
    out += indent + "  OFFSET ";
  } else {
    out += indent + (is_root ? "ROOT " : "JOINT ") + node.name + "\n";
    out += indent + "{\n";
    out += indent + "  OFFSET ";
  }
  append_number(out, node.offset.x);
  out += ' ';
  append_number(out, node.offset.y);
  out += ' ';
  append_number(out, node.offset.z);
  out += '\n';
  if (!node.is_end_site) {
    out += indent + "  CHANNELS " + std::to_string(node.channels.size());
    for (const auto channel : node.channels) {
      out += ' ';
      out += bvh_channel_name(channel);
    }
    out += '\n';
    for (const auto& child : node.children)
      serialize_joint(child, depth + 1, false, out);
  }
  out += indent + "}\n";
}

}  // namespace

BvhDocument parse_bvh(const std::string& text) {
  Tokenizer tok(text);
  tok.expect_keyword("HIERARCHY");
  tok.expect_keyword("ROOT");

  BvhDocument doc;
  std::vector<std::string> seen_names;
  doc.root = parse_joint(tok, tok.expect("root name"), seen_names);

  tok.expect_keyword("MOTION");
  tok.expect_keyword("Frames:");
  const double frames = parse_number(tok.expect("frame count"),
                                     Errc::frame_count_mismatch, tok.line());
  if (frames < 1 || frames != static_cast<double>(static_cast<std::size_t>(frames)))
    fail(Errc::frame_count_mismatch, "frame count must be a positive integer");
  doc.frame_count = static_cast<std::size_t>(frames);
  tok.expect_keyword("Frame");
  tok.expect_keyword("Time:");
  doc.frame_time = parse_number(tok.expect("frame time"),
                                Errc::malformed_hierarchy, tok.line());
  if (!(doc.frame_time > 0.0))
    fail(Errc::malformed_hierarchy, "frame time must be > 0");

  const std::size_t width = doc.channel_count();
  doc.motion = Matrix(doc.frame_count, width);
  std::string line;
  for (std::size_t f = 0; f < doc.frame_count; ++f) {
    if (!tok.next_line(line))
      fail(Errc::frame_count_mismatch,
           "motion has " + std::to_string(f) + " rows, header promised " +
               std::to_string(doc.frame_count));
    std::size_t c = 0;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end) break;
      char* next = nullptr;
      const double value = std::strtod(p, &next);
      if (next == p || (*next != '\0' && *next != ' ' && *next != '\t' && *next != '\r'))
        fail(Errc::motion_width_mismatch,
             "bad motion value in frame " + std::to_string(f));
      if (c >= width)
        fail(Errc::motion_width_mismatch,
             "frame " + std::to_string(f) + " has more than " +
                 std::to_string(width) + " values");
      doc.motion(f, c++) = value;
      p = next;
    }
    if (c != width)
      fail(Errc::motion_width_mismatch,
           "frame " + std::to_string(f) + " has " + std::to_string(c) +
               " values, hierarchy defines " + std::to_string(width) + " channels");
  }
  if (tok.next_line(line))
    fail(Errc::frame_count_mismatch,
         "extra motion data after " + std::to_string(doc.frame_count) + " frames");
  return doc;
}

std::string serialize_bvh(const BvhDocument& doc) {
  std::string out = "HIERARCHY\n";
  serialize_joint(doc.root, 0, true, out);
  out += "MOTION\nFrames: " + std::to_string(doc.frame_count) + "\n";
  out += "Frame Time: ";
  append_number(out, doc.frame_time);
  out += '\n';
  for (std::size_t f = 0; f < doc.frame_count; ++f) {
    for (std::size_t c = 0; c < doc.motion.cols(); ++c) {
      if (c > 0) out += ' ';
      append_number(out, doc.motion(f, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

struct JointVisit {
  const JointNode* node;
  std::size_t channel_offset;
};

void fk_walk(const JointNode& node, std::size_t& channel_offset,
             const double* row, const Vec3& parent_pos, const Mat3& parent_rot,
             std::vector<Vec3>& out) {
  Vec3 local = node.offset;
  Mat3 rot = Mat3::identity();
  for (std::size_t i = 0; i < node.channels.size(); ++i) {
    const double value = row[channel_offset + i];
    switch (node.channels[i]) {
      case BvhChannel::x_position: local.x += value; break;
      case BvhChannel::y_position: local.y += value; break;
      case BvhChannel::z_position: local.z += value; break;
      case BvhChannel::x_rotation: rot = rot * Mat3::rotation_x(deg_to_rad(value)); break;
      case BvhChannel::y_rotation: rot = rot * Mat3::rotation_y(deg_to_rad(value)); break;
      case BvhChannel::z_rotation: rot = rot * Mat3::rotation_z(deg_to_rad(value)); break;
    }
  }
  channel_offset += node.channels.size();

  const Vec3 world = parent_pos + parent_rot * local;
  const Mat3 world_rot = parent_rot * rot;
  out.push_back(world);
  for (const auto& child : node.children)
    fk_walk(child, channel_offset, row, world, world_rot, out);
}

void collect_names(const JointNode& node, std::vector<std::string>& names) {
  names.push_back(node.name);
  for (const auto& child : node.children) collect_names(child, names);
}

}  // namespace

SkeletonSequence forward_kinematics(const BvhDocument& doc) {
  SkeletonSequence seq;
  collect_names(doc.root, seq.joint_names);
  seq.fps = 1.0 / doc.frame_time;
  seq.source = SkeletonSource::bvh_tum33;
  seq.positions.reserve(doc.frame_count);
  for (std::size_t f = 0; f < doc.frame_count; ++f) {
    std::vector<Vec3> frame;
    frame.reserve(seq.joint_names.size());
    std::size_t channel_offset = 0;
    fk_walk(doc.root, channel_offset, doc.motion.row(f), Vec3{},
            Mat3::identity(), frame);
    seq.positions.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace ergoseg
