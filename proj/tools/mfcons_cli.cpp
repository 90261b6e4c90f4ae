#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfcons/covering_solver.hpp"
#include "mfcons/error.hpp"
#include "mfcons/evaluation.hpp"
#include "mfcons/io.hpp"
#include "mfcons/isometric.hpp"
#include "mfcons/synth.hpp"
#include "mfcons/template_matching.hpp"

namespace fs = std::filesystem;
using namespace mfcons;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMalformed = 2;
constexpr int kExitNoCertificate = 3;

struct Common {
  std::string mode = "exact";
  std::optional<std::size_t> clusters;
  double time_budget = 60.0;
  std::uint64_t seed = 0;
  std::string trace_out;
  std::string report_out;
  bool timing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--mode", c.mode, "exact, relaxed or local-filter")
      ->check(CLI::IsMember({"exact", "relaxed", "local-filter"}));
  cmd->add_option("--clusters", c.clusters, "number of k-means clusters")->check(CLI::PositiveNumber);
  cmd->add_option("--time-budget", c.time_budget, "seconds per solver call")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "seed for clustering and graph sampling");
  cmd->add_option("--trace-out", c.trace_out, "write the branch-and-bound trace as CSV");
  cmd->add_option("--report-out", c.report_out, "write the JSON report here instead of stdout");
  cmd->add_flag("--timing", c.timing, "include wall-clock fields in the report");
}

void write_report(const nlohmann::ordered_json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    emit_report(doc, path);
  }
}

int finish(const RegistrationResult& r, const std::optional<EvalReport>& eval, const nlohmann::ordered_json& echo,
           const Common& c, SolveMode mode) {
  write_report(report_to_json(r, eval, echo, c.timing), c.report_out);
  if (!c.trace_out.empty()) emit_trace(r, c.trace_out);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (mode == SolveMode::exact && !r.all_optimal()) {
    std::cerr << "budget exhausted before optimality was certified\n";
    return kExitNoCertificate;
  }
  return kExitOk;
}

std::optional<EvalReport> maybe_evaluate(const RegistrationResult& r, const MatchSet& m) {
  if (!m.gt_labels) return std::nullopt;
  return evaluate_labels(r.labels, *m.gt_labels);
}

// ---------------------------------------------------------------------------

struct ShapeArgs {
  Common common;
  std::string source, target, matches;
  double eps_rel = 0.20;
  double eps_abs_frac = 0.01;
};

int run_match_shapes(const ShapeArgs& a) {
  IsometryConfig cfg;
  cfg.eps_rel = a.eps_rel;
  cfg.eps_abs_frac = a.eps_abs_frac;
  cfg.clusters = a.common.clusters;
  cfg.mode = parse_solve_mode(a.common.mode);
  cfg.seed = a.common.seed;
  cfg.solver.time_budget = a.common.time_budget;
  cfg.validate();

  const TriMesh source = load_mesh(a.source);
  const TriMesh target = load_mesh(a.target);
  const MatchSet matches = load_matches(a.matches);
  const auto r = shape_registration(source, target, matches, cfg);

  nlohmann::ordered_json echo{{"command", "match-shapes"},  {"source", a.source},       {"target", a.target},
                              {"matches", a.matches},       {"mode", a.common.mode},    {"eps_rel", a.eps_rel},
                              {"eps_abs_frac", a.eps_abs_frac}, {"seed", a.common.seed}, {"time_budget", a.common.time_budget}};
  echo["clusters"] = cfg.cluster_count(matches.size());
  return finish(r, maybe_evaluate(r, matches), echo, a.common, cfg.mode);
}

struct TemplateArgs {
  Common common;
  std::string template_path, points, intrinsics, matches;
  double eps1_deg = 10.0;
  double eps2 = 0.40;
  std::size_t q = 15;
  std::size_t cap = 30;
};

int run_match_template(const TemplateArgs& a) {
  TemplateMatchConfig cfg;
  cfg.eps1 = a.eps1_deg * std::numbers::pi / 180.0;
  cfg.eps2 = a.eps2;
  cfg.q = a.q;
  cfg.edges_per_point_cap = a.cap;
  cfg.clusters = a.common.clusters.value_or(1);
  cfg.mode = parse_solve_mode(a.common.mode);
  cfg.seed = a.common.seed;
  cfg.solver.time_budget = a.common.time_budget;
  cfg.validate();

  const TriMesh tmpl = load_mesh(a.template_path);
  const auto pixels = load_points2d(a.points);
  const auto k = load_intrinsics(a.intrinsics);
  const MatchSet matches = load_matches(a.matches);
  const auto r = template_image_registration(tmpl.vertices, pixels, matches, k, cfg);

  const nlohmann::ordered_json echo{
      {"command", "match-template"}, {"template", a.template_path}, {"points", a.points},
      {"intrinsics", a.intrinsics},  {"matches", a.matches},        {"mode", a.common.mode},
      {"eps1_deg", a.eps1_deg},      {"eps2", a.eps2},              {"q", a.q},
      {"edge_cap", a.cap},           {"clusters", cfg.clusters},    {"seed", a.common.seed},
      {"time_budget", a.common.time_budget}};
  return finish(r, maybe_evaluate(r, matches), echo, a.common, cfg.mode);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "isometric-grid";
  std::size_t n = 100;
  double ratio = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double bend_radius = 2.0;
  std::string out_dir = ".";
};

SynthSpec make_spec(const SynthArgs& a) {
  SynthSpec s;
  s.kind = a.kind == "template-bend" ? SynthKind::template_bend : SynthKind::isometric_grid;
  s.num_points = a.n;
  s.outlier_ratio = a.ratio;
  s.noise = a.noise;
  s.seed = a.seed;
  s.bend_radius = a.bend_radius;
  return s;
}

void write_text(const fs::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::invalid_argument, path.string() + ": cannot write file");
  writer(out);
}

int run_synth(const SynthArgs& a) {
  const SynthSpec spec = make_spec(a);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  if (spec.kind == SynthKind::isometric_grid) {
    const auto inst = synth_isometric_instance(spec);
    save_mesh(dir / "source.obj", inst.source);
    save_mesh(dir / "target.obj", inst.target);
    write_text(dir / "matches.txt", [&](std::ostream& o) { write_matches(o, inst.matches); });
  } else {
    const auto inst = synth_template_instance(spec);
    TriMesh tmpl;
    tmpl.vertices = inst.template_points;
    save_mesh(dir / "template.obj", tmpl);
    write_text(dir / "points2d.txt", [&](std::ostream& o) { write_points2d(o, inst.image_points); });
    write_text(dir / "intrinsics.json", [&](std::ostream& o) { o << intrinsics_to_json(inst.camera).dump(2) << '\n'; });
    write_text(dir / "matches.txt", [&](std::ostream& o) { write_matches(o, inst.matches); });
  }
  std::cout << "wrote " << a.kind << " instance to " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  SynthArgs synth;
  Common common;
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::size_t seeds = 5;
  std::size_t jobs = 1;
};

nlohmann::ordered_json bench_one(const BenchArgs& a, double ratio, std::uint64_t seed) {
  SynthArgs sa = a.synth;
  sa.ratio = ratio;
  sa.seed = seed;
  const SynthSpec spec = make_spec(sa);
  const SolveMode mode = parse_solve_mode(a.common.mode);
  RegistrationResult r;
  MatchSet matches;
  if (spec.kind == SynthKind::isometric_grid) {
    const auto inst = synth_isometric_instance(spec);
    IsometryConfig cfg;
    cfg.mode = mode;
    cfg.clusters = a.common.clusters;
    cfg.seed = a.common.seed;
    cfg.solver.time_budget = a.common.time_budget;
    cfg.solver.trace_enabled = false;
    r = shape_registration(inst.source, inst.target, inst.matches, cfg);
    matches = inst.matches;
  } else {
    const auto inst = synth_template_instance(spec);
    TemplateMatchConfig cfg;
    cfg.mode = mode;
    cfg.clusters = a.common.clusters.value_or(1);
    cfg.seed = seed;
    cfg.solver.time_budget = a.common.time_budget;
    cfg.solver.trace_enabled = false;
    r = template_image_registration(inst.template_points, inst.image_points, inst.matches, inst.camera, cfg);
    matches = inst.matches;
  }
  EvalReport e = evaluate_labels(r.labels, *matches.gt_labels);
  e.wall_time = r.total_wall_time();
  nlohmann::ordered_json row{{"ratio", ratio}, {"seed", seed}, {"objective", r.total_objective()},
                             {"optimal", r.all_optimal()}};
  row["evaluation"] = eval_to_json(e, a.common.timing);
  return row;
}

int run_bench(const BenchArgs& a) {
  struct Job {
    double ratio;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double ratio : a.ratios)
    for (std::uint64_t s = 0; s < a.seeds; ++s) jobs.push_back({ratio, a.synth.seed + s});

  std::vector<nlohmann::ordered_json> rows(jobs.size());
  const std::size_t width = std::max<std::size_t>(a.jobs, 1);
  for (std::size_t begin = 0; begin < jobs.size(); begin += width) {
    std::vector<std::future<nlohmann::ordered_json>> batch;
    const std::size_t end = std::min(jobs.size(), begin + width);
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                 [&a, job = jobs[i]] { return bench_one(a, job.ratio, job.seed); }));
    for (std::size_t i = begin; i < end; ++i) rows[i] = batch[i - begin].get();
  }

  bool all_optimal = true;
  for (const auto& row : rows) all_optimal = all_optimal && row["optimal"].get<bool>();
  nlohmann::ordered_json doc{{"kind", a.synth.kind}, {"points", a.synth.n},   {"mode", a.common.mode},
                             {"noise", a.synth.noise}, {"seeds", a.seeds}, {"time_budget", a.common.time_budget},
                             {"runs", rows}};
  write_report(doc, a.common.report_out);
  if (parse_solve_mode(a.common.mode) == SolveMode::exact && !all_optimal) return kExitNoCertificate;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  Common common;
};

int run_solve(const SolveArgs& a) {
  std::ifstream in(a.instance);
  if (!in) throw Error(Errc::malformed_input, a.instance + ": cannot open file");
  const CoveringProgram program = read_instance(in);
  const SolveMode mode = parse_solve_mode(a.common.mode);
  if (mode == SolveMode::local_filter) throw Error(Errc::invalid_argument, "solve supports exact and relaxed only");
  SolverConfig cfg;
  cfg.time_budget = a.common.time_budget;
  const auto r = solve_program(program, mode, cfg);

  nlohmann::ordered_json doc;
  std::vector<std::size_t> outliers;
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    if (is_outlier(r.labels[i])) outliers.push_back(i);
  doc["outliers"] = outliers;
  doc["objective"] = r.objective;
  doc["lower_bound"] = r.lower_bound;
  doc["optimal"] = r.optimal;
  doc["nodes"] = r.nodes;
  if (a.common.timing) doc["wall_time"] = r.wall_time;
  doc["config"] = {{"command", "solve"}, {"instance", a.instance}, {"mode", a.common.mode},
                   {"time_budget", a.common.time_budget}};
  write_report(doc, a.common.report_out);
  if (!a.common.trace_out.empty()) {
    std::ofstream out(a.common.trace_out);
    if (!out) throw Error(Errc::invalid_argument, a.common.trace_out + ": cannot write file");
    write_trace_csv(out, r.trace);
  }
  if (mode == SolveMode::exact && !r.optimal) return kExitNoCertificate;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free consensus maximization for non-rigid matching"};
  app.require_subcommand(1);

  ShapeArgs shape;
  auto* ms = app.add_subcommand("match-shapes", "filter correspondences between two surfaces");
  ms->add_option("--source", shape.source, "source mesh (.obj or .ply)")->required()->check(CLI::ExistingFile);
  ms->add_option("--target", shape.target, "target mesh (.obj or .ply)")->required()->check(CLI::ExistingFile);
  ms->add_option("--matches", shape.matches, "correspondence file")->required()->check(CLI::ExistingFile);
  ms->add_option("--eps-rel", shape.eps_rel, "relative geodesic tolerance");
  ms->add_option("--eps-abs-frac", shape.eps_abs_frac, "absolute floor as a fraction of the diameter");
  add_common(ms, shape.common);

  TemplateArgs tmpl;
  auto* mt = app.add_subcommand("match-template", "filter 3D template to image correspondences");
  mt->add_option("--template", tmpl.template_path, "template vertices (.obj or .ply)")->required()->check(CLI::ExistingFile);
  mt->add_option("--points", tmpl.points, "image points file")->required()->check(CLI::ExistingFile);
  mt->add_option("--intrinsics", tmpl.intrinsics, "camera JSON with fx, fy, cx, cy")->required()->check(CLI::ExistingFile);
  mt->add_option("--matches", tmpl.matches, "correspondence file")->required()->check(CLI::ExistingFile);
  mt->add_option("--eps1-deg", tmpl.eps1_deg, "rotation tolerance in degrees");
  mt->add_option("--eps2", tmpl.eps2, "relative translation tolerance");
  mt->add_option("--q", tmpl.q, "nearest neighbours per point");
  mt->add_option("--edge-cap", tmpl.cap, "maximum edges per point");
  add_common(mt, tmpl.common);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "write a synthetic instance with ground truth");
  auto add_synth = [](CLI::App* cmd, SynthArgs& s) {
    cmd->add_option("--kind", s.kind, "isometric-grid or template-bend")
        ->check(CLI::IsMember({"isometric-grid", "template-bend"}));
    cmd->add_option("--n", s.n, "number of points");
    cmd->add_option("--noise", s.noise, "pixel or model-unit noise");
    cmd->add_option("--bend-radius", s.bend_radius, "cylinder radius of the template bend");
  };
  add_synth(sy, synth);
  sy->add_option("--ratio", synth.ratio, "outlier ratio in [0, 1)");
  sy->add_option("--seed", synth.seed, "generator seed");
  sy->add_option("--out-dir", synth.out_dir, "output directory");

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "sweep outlier ratios over seeded synthetic instances");
  add_synth(be, bench.synth);
  add_common(be, bench.common);
  be->add_option("--ratios", bench.ratios, "outlier ratios")->delimiter(',');
  be->add_option("--seeds", bench.seeds, "instances per ratio");
  be->add_option("--first-seed", bench.synth.seed, "seed of the first instance");
  be->add_option("--jobs", bench.jobs, "instances solved concurrently");

  SolveArgs solve;
  auto* so = app.add_subcommand("solve", "solve a covering program file");
  so->add_option("instance", solve.instance, "instance file")->required();
  add_common(so, solve.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*ms) return run_match_shapes(shape);
    if (*mt) return run_match_template(tmpl);
    if (*sy) return run_synth(synth);
    if (*be) return run_bench(bench);
    if (*so) return run_solve(solve);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::malformed_input ? kExitMalformed : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
