#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "mfcons/covering_lp.hpp"
#include "mfcons/covering_solver.hpp"
#include "mfcons/isometric.hpp"
#include "mfcons/mesh.hpp"
#include "mfcons/pose.hpp"
#include "mfcons/synth.hpp"
#include "mfcons/template_matching.hpp"

using namespace mfcons;

namespace {

// Covering program of a self-matched grid, built the same way the pipeline does.
CoveringProgram isometric_program(std::size_t n, double ratio) {
  SynthSpec spec;
  spec.num_points = n;
  spec.outlier_ratio = ratio;
  spec.seed = 1;
  const auto inst = synth_isometric_instance(spec);
  std::vector<std::uint32_t> src_ids, tgt_ids;
  for (const auto& p : inst.matches.pairs) {
    src_ids.push_back(static_cast<std::uint32_t>(p.source));
    tgt_ids.push_back(static_cast<std::uint32_t>(p.target));
  }
  const auto src = geodesic_distances(inst.source, src_ids);
  const auto tgt = geodesic_distances(inst.target, tgt_ids);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto graph = isometry_graph(src, rows, tgt, rows, 0.2, 0.01);
  return build_covering_program(graph, n);
}

}  // namespace

static void BM_SolveExact(benchmark::State& state) {
  const auto program = isometric_program(static_cast<std::size_t>(state.range(0)), 0.5);
  SolverConfig cfg;
  cfg.trace_enabled = false;
  for (auto _ : state) {
    auto r = solve_exact(program, cfg);
    benchmark::DoNotOptimize(r.objective);
  }
  state.counters["constraints"] = static_cast<double>(program.constraints.size());
}
BENCHMARK(BM_SolveExact)->Arg(50)->Arg(100)->Arg(150)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_CoveringLp(benchmark::State& state) {
  const auto program = isometric_program(static_cast<std::size_t>(state.range(0)), 0.5);
  for (auto _ : state) {
    auto r = solve_covering_lp(program.num_vars, program.constraints, 1e-7);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_CoveringLp)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_P3P(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> box(-0.5, 0.5), depth(2.0, 4.0);
  const Mat3 r = axis_angle(Vec3(1, 2, 3), 0.4);
  const Vec3 t(0.2, -0.1, 0.3);
  std::array<Vec3, 3> pts, bearings;
  for (int i = 0; i < 3; ++i) {
    const Vec3 cam(box(rng), box(rng), depth(rng));
    pts[i] = r.transpose() * (cam - t);
    bearings[i] = cam.normalized();
  }
  for (auto _ : state) {
    auto sols = p3p_solve(pts, bearings);
    benchmark::DoNotOptimize(sols.data());
  }
}
BENCHMARK(BM_P3P);

static void BM_Geodesics(benchmark::State& state) {
  const TriMesh mesh = grid_mesh(static_cast<std::size_t>(state.range(0)), 1.0);
  std::vector<std::uint32_t> ids(mesh.vertices.size());
  std::iota(ids.begin(), ids.end(), 0u);
  for (auto _ : state) {
    auto table = geodesic_distances(mesh, ids);
    benchmark::DoNotOptimize(table.distances.data());
  }
}
BENCHMARK(BM_Geodesics)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_Delaunay(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = Vec2(u(rng), u(rng));
  for (auto _ : state) {
    auto mesh = delaunay_triangulate_2d(pts);
    benchmark::DoNotOptimize(mesh.triangles.data());
  }
}
BENCHMARK(BM_Delaunay)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_TemplateGraph(benchmark::State& state) {
  SynthSpec spec;
  spec.kind = SynthKind::template_bend;
  spec.num_points = 225;
  spec.outlier_ratio = 0.3;
  const auto inst = synth_template_instance(spec);
  const TemplateMatchConfig cfg;
  for (auto _ : state) {
    auto g = build_triangle_graph(inst.template_points, inst.image_points, inst.camera, cfg);
    benchmark::DoNotOptimize(g.edges.data());
  }
}
BENCHMARK(BM_TemplateGraph)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
