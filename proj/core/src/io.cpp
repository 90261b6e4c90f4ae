#include "mfcons/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mfcons/error.hpp"

namespace mfcons {

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  /// Next non-blank line, with comments ('#') stripped when `comments` is set.
  bool next(std::string& line, bool comments = false) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (comments) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
      }
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::malformed_input, name_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream s(line);
  std::vector<std::string> out;
  std::string token;
  while (s >> token) out.push_back(token);
  return out;
}

bool to_integer(std::string_view text, long long& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool to_double(const std::string& text, double& value) {
  try {
    std::size_t used = 0;
    value = std::stod(text, &used);
    return used == text.size() && std::isfinite(value);
  } catch (const std::exception&) {
    return false;
  }
}

std::size_t read_count(LineReader& reader, const char* what) {
  std::string line;
  if (!reader.next(line)) reader.fail(std::string("missing ") + what + " count");
  const auto tokens = split(line);
  long long count = 0;
  if (tokens.size() != 1 || !to_integer(tokens[0], count) || count < 0) reader.fail(std::string("bad ") + what + " count");
  return static_cast<std::size_t>(count);
}

std::ostream& full_precision(std::ostream& out) {
  return out << std::setprecision(std::numeric_limits<double>::max_digits10);
}

std::vector<Triangle> fan(const std::vector<std::uint32_t>& polygon) {
  std::vector<Triangle> out;
  for (std::size_t k = 1; k + 1 < polygon.size(); ++k) out.push_back({polygon[0], polygon[k], polygon[k + 1]});
  return out;
}

}  // namespace

MatchSet read_matches(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  const std::size_t count = read_count(reader, "match");
  MatchSet matches;
  LabelVector gt;
  std::string line;
  std::optional<bool> with_flags;
  for (std::size_t k = 0; k < count; ++k) {
    if (!reader.next(line)) reader.fail("expected " + std::to_string(count) + " matches");
    const auto tokens = split(line);
    if (tokens.size() != 2 && tokens.size() != 3) reader.fail("expected \"src tgt [gt]\"");
    long long s = 0, t = 0;
    if (!to_integer(tokens[0], s) || !to_integer(tokens[1], t)) reader.fail("non-integer index");
    if (s < 0 || t < 0) reader.fail("negative index");
    const bool flagged = tokens.size() == 3;
    if (with_flags && *with_flags != flagged) reader.fail("ground-truth flag must be on every line or none");
    with_flags = flagged;
    if (flagged) {
      if (tokens[2] != "0" && tokens[2] != "1") reader.fail("ground-truth flag must be 0 or 1");
      gt.push_back(tokens[2] == "1" ? Label::outlier : Label::inlier);
    }
    matches.pairs.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(t)});
  }
  if (reader.next(line)) reader.fail("trailing data after " + std::to_string(count) + " matches");
  if (with_flags.value_or(false)) matches.gt_labels = std::move(gt);
  return matches;
}

void write_matches(std::ostream& out, const MatchSet& matches) {
  out << matches.size() << '\n';
  for (std::size_t i = 0; i < matches.size(); ++i) {
    out << matches.pairs[i].source << ' ' << matches.pairs[i].target;
    if (matches.gt_labels) out << ' ' << (is_outlier((*matches.gt_labels)[i]) ? 1 : 0);
    out << '\n';
  }
}

TriMesh read_obj(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  TriMesh mesh;
  std::vector<std::vector<std::uint32_t>> faces;
  std::string line;
  while (reader.next(line, true)) {
    const auto tokens = split(line);
    if (tokens[0] == "v") {
      if (tokens.size() < 4 || tokens.size() > 5) reader.fail("vertex needs x y z");
      Vec3 v;
      for (int k = 0; k < 3; ++k) {
        if (!to_double(tokens[k + 1], v[k])) reader.fail("bad vertex coordinate \"" + tokens[k + 1] + "\"");
      }
      mesh.vertices.push_back(v);
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) reader.fail("face needs at least 3 vertices");
      std::vector<std::uint32_t> polygon;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const std::string ref = tokens[k].substr(0, tokens[k].find('/'));
        long long idx = 0;
        if (!to_integer(ref, idx) || idx < 1) reader.fail("bad face index \"" + tokens[k] + "\"");
        if (static_cast<std::size_t>(idx) > mesh.vertices.size()) reader.fail("face references a later or missing vertex");
        polygon.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      auto sorted = polygon;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) reader.fail("degenerate face");
      for (const auto& t : fan(polygon)) mesh.triangles.push_back(t);
    }
  }
  return mesh;
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  full_precision(out);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

TriMesh read_ply(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  std::string line;
  if (!reader.next(line) || split(line) != std::vector<std::string>{"ply"}) reader.fail("missing \"ply\" magic");
  std::size_t num_vertices = 0, num_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  bool ascii = false;
  while (true) {
    if (!reader.next(line)) reader.fail("unterminated header");
    const auto tokens = split(line);
    if (tokens[0] == "end_header") break;
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2 || tokens[1] != "ascii") reader.fail("only ASCII PLY is supported");
      ascii = true;
    } else if (tokens[0] == "element") {
      long long count = 0;
      if (tokens.size() != 3 || !to_integer(tokens[2], count) || count < 0) reader.fail("bad element line");
      current = tokens[1];
      if (current == "vertex") num_vertices = static_cast<std::size_t>(count);
      else if (current == "face") num_faces = static_cast<std::size_t>(count);
      else if (count != 0) reader.fail("unsupported element \"" + current + "\"");
    } else if (tokens[0] == "property") {
      if (current == "vertex") vertex_props.push_back(tokens.back());
    } else {
      reader.fail("unexpected header line");
    }
  }
  if (!ascii) reader.fail("missing format line");
  if (vertex_props.size() < 3 || vertex_props[0] != "x" || vertex_props[1] != "y" || vertex_props[2] != "z") {
    reader.fail("vertex properties must start with x y z");
  }

  TriMesh mesh;
  for (std::size_t i = 0; i < num_vertices; ++i) {
    if (!reader.next(line)) reader.fail("missing vertex rows");
    const auto tokens = split(line);
    if (tokens.size() != vertex_props.size()) reader.fail("vertex row has the wrong number of values");
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
      if (!to_double(tokens[k], v[k])) reader.fail("bad vertex coordinate \"" + tokens[k] + "\"");
    }
    mesh.vertices.push_back(v);
  }
  for (std::size_t f = 0; f < num_faces; ++f) {
    if (!reader.next(line)) reader.fail("missing face rows");
    const auto tokens = split(line);
    long long count = 0;
    if (tokens.empty() || !to_integer(tokens[0], count) || count < 3 ||
        tokens.size() != static_cast<std::size_t>(count) + 1) {
      reader.fail("bad face row");
    }
    std::vector<std::uint32_t> polygon;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      long long idx = 0;
      if (!to_integer(tokens[k], idx) || idx < 0 || static_cast<std::size_t>(idx) >= num_vertices) {
        reader.fail("bad face index \"" + tokens[k] + "\"");
      }
      polygon.push_back(static_cast<std::uint32_t>(idx));
    }
    auto sorted = polygon;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) reader.fail("degenerate face");
    for (const auto& t : fan(polygon)) mesh.triangles.push_back(t);
  }
  if (reader.next(line)) reader.fail("trailing data after the last element");
  return mesh;
}

void write_ply(std::ostream& out, const TriMesh& mesh) {
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  full_precision(out);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

std::vector<Vec2> read_points2d(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  const std::size_t count = read_count(reader, "point");
  std::vector<Vec2> points;
  std::string line;
  for (std::size_t k = 0; k < count; ++k) {
    if (!reader.next(line)) reader.fail("expected " + std::to_string(count) + " points");
    const auto tokens = split(line);
    Vec2 p;
    if (tokens.size() != 2 || !to_double(tokens[0], p.x()) || !to_double(tokens[1], p.y())) {
      reader.fail("expected \"x y\"");
    }
    points.push_back(p);
  }
  if (reader.next(line)) reader.fail("trailing data after " + std::to_string(count) + " points");
  return points;
}

void write_points2d(std::ostream& out, const std::vector<Vec2>& points) {
  out << points.size() << '\n';
  full_precision(out);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << '\n';
}

CameraIntrinsics intrinsics_from_json(const nlohmann::json& doc) {
  CameraIntrinsics k;
  try {
    k.fx = doc.at("fx").get<double>();
    k.fy = doc.at("fy").get<double>();
    k.cx = doc.at("cx").get<double>();
    k.cy = doc.at("cy").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_input, std::string("intrinsics: ") + e.what());
  }
  try {
    k.validate();
  } catch (const Error& e) {
    throw Error(Errc::malformed_input, e.what());
  }
  return k;
}

nlohmann::ordered_json intrinsics_to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::malformed_input, path.string() + ": cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::invalid_argument, path.string() + ": cannot write file");
  return out;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

MatchSet load_matches(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matches(in, path.string());
}

TriMesh load_mesh(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string ext = lower_extension(path);
  if (ext == ".obj") return read_obj(in, path.string());
  if (ext == ".ply") return read_ply(in, path.string());
  throw Error(Errc::malformed_input, path.string() + ": unknown mesh extension");
}

std::vector<Vec2> load_points2d(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_points2d(in, path.string());
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_input, path.string() + ": " + e.what());
  }
  return intrinsics_from_json(doc);
}

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  auto out = open_output(path);
  if (lower_extension(path) == ".ply") {
    write_ply(out, mesh);
  } else {
    write_obj(out, mesh);
  }
}

nlohmann::ordered_json eval_to_json(const EvalReport& report, bool include_timing) {
  nlohmann::ordered_json doc{
      {"true_inliers_kept", report.true_inliers_kept},
      {"true_inliers_lost", report.true_inliers_lost},
      {"outliers_removed", report.outliers_removed},
      {"outliers_missed", report.outliers_missed},
      {"precision", report.precision},
      {"recall", report.recall},
      {"outlier_recall", report.outlier_recall},
      {"definitions",
       {{"precision", "kept / (kept + outliers_missed)"},
        {"recall", "kept / (kept + true_inliers_lost)"},
        {"outlier_recall", "outliers_removed / (outliers_removed + outliers_missed)"}}},
  };
  if (include_timing) doc["wall_time"] = report.wall_time;
  return doc;
}

nlohmann::ordered_json report_to_json(const RegistrationResult& result, const std::optional<EvalReport>& eval,
                                      const nlohmann::ordered_json& config_echo, bool include_timing) {
  nlohmann::ordered_json doc;
  auto& per_match = doc["matches"] = nlohmann::ordered_json::array();
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    const bool out = is_outlier(result.labels[i]);
    outliers += out ? 1 : 0;
    per_match.push_back({{"index", i},
                         {"label", out ? "outlier" : "inlier"},
                         {"unconstrained", i < result.unconstrained.size() && result.unconstrained[i]}});
  }
  doc["outliers"] = outliers;

  const bool any_solved = std::any_of(result.clusters.begin(), result.clusters.end(),
                                      [](const ClusterReport& c) { return c.result.has_value(); });
  if (any_solved) {
    nlohmann::ordered_json solver{{"objective", result.total_objective()},
                                  {"lower_bound", result.total_lower_bound()},
                                  {"optimal", result.all_optimal()}};
    if (include_timing) solver["wall_time"] = result.total_wall_time();
    doc["solver"] = std::move(solver);
  } else {
    doc["solver"] = nullptr;
  }

  auto& clusters = doc["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : result.clusters) {
    nlohmann::ordered_json entry{{"members", c.members.size()},
                                 {"skipped", c.skipped},
                                 {"graph_vertices", c.graph_vertices},
                                 {"graph_edges", c.graph_edges},
                                 {"violated_edges", c.violated_edges},
                                 {"constraints", c.constraints}};
    if (c.result) {
      entry["objective"] = c.result->objective;
      entry["lower_bound"] = c.result->lower_bound;
      entry["optimal"] = c.result->optimal;
      entry["nodes"] = c.result->nodes;
      entry["violated_constraints"] = c.result->violated_constraints;
      if (include_timing) entry["wall_time"] = c.result->wall_time;
    }
    clusters.push_back(std::move(entry));
  }
  doc["warnings"] = result.warnings;
  if (eval) doc["evaluation"] = eval_to_json(*eval, include_timing);
  doc["config"] = config_echo;
  return doc;
}

void emit_report(const nlohmann::ordered_json& report, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << report.dump(2) << '\n';
}

void emit_trace(const RegistrationResult& result, const std::filesystem::path& path) {
  std::vector<TraceEntry> all;
  for (const auto& c : result.clusters) {
    if (c.result) all.insert(all.end(), c.result->trace.begin(), c.result->trace.end());
  }
  auto out = open_output(path);
  write_trace_csv(out, all);
}

}  // namespace mfcons
