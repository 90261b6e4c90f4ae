#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfcons/evaluation.hpp"
#include "mfcons/mesh.hpp"
#include "mfcons/pipeline.hpp"
#include "mfcons/pose.hpp"
#include "mfcons/types.hpp"

namespace mfcons {

// All parsers throw Error(Errc::malformed_input) with "<name>:<line>: ..."
// locations. `name` is only used for messages.

/// Line 1: count. Then "src tgt [gt]" per line, 0-based; gt 0 = inlier,
/// 1 = outlier. The flag must be present on every line or on none.
MatchSet read_matches(std::istream& in, const std::string& name = "<matches>");
void write_matches(std::ostream& out, const MatchSet& matches);

/// ASCII OBJ: "v x y z" and "f a b c ..." (1-based, polygons fanned,
/// "a/b/c" references accepted). Other records are ignored.
TriMesh read_obj(std::istream& in, const std::string& name = "<obj>");
void write_obj(std::ostream& out, const TriMesh& mesh);

/// ASCII PLY with x y z leading the vertex properties and a face list.
TriMesh read_ply(std::istream& in, const std::string& name = "<ply>");
void write_ply(std::ostream& out, const TriMesh& mesh);

/// Line 1: count. Then "x y" per line.
std::vector<Vec2> read_points2d(std::istream& in, const std::string& name = "<points>");
void write_points2d(std::ostream& out, const std::vector<Vec2>& points);

CameraIntrinsics intrinsics_from_json(const nlohmann::json& doc);
nlohmann::ordered_json intrinsics_to_json(const CameraIntrinsics& k);

// Path-based helpers; the mesh reader dispatches on the .obj / .ply suffix.
MatchSet load_matches(const std::filesystem::path& path);
TriMesh load_mesh(const std::filesystem::path& path);
std::vector<Vec2> load_points2d(const std::filesystem::path& path);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh);

nlohmann::ordered_json eval_to_json(const EvalReport& report, bool include_timing);

/// Result document: per-match labels, aggregated solver summary, per-cluster
/// details, optional evaluation and the echoed configuration. Wall-clock
/// fields are written only when `include_timing` is set so that repeated
/// runs produce identical bytes.
nlohmann::ordered_json report_to_json(const RegistrationResult& result, const std::optional<EvalReport>& eval,
                              const nlohmann::ordered_json& config_echo, bool include_timing);

/// Pretty-printed JSON with a trailing newline.
void emit_report(const nlohmann::ordered_json& report, const std::filesystem::path& path);

/// Traces of all solved clusters, concatenated in cluster order.
void emit_trace(const RegistrationResult& result, const std::filesystem::path& path);

}  // namespace mfcons
