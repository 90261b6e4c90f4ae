#include "mfcons/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfcons/error.hpp"

namespace mfcons {

Pose SynthSpec::default_pose() {
  Pose pose;
  pose.rotation = axis_angle(Vec3(1.0, 0.2, 0.0), 0.35);
  pose.translation = Vec3(0.05, -0.05, 3.0);
  return pose;
}

void SynthSpec::validate() const {
  if (num_points < 4) throw Error(Errc::invalid_spec, "synthetic instances need at least 4 points");
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) throw Error(Errc::invalid_spec, "outlier ratio must lie in [0, 1)");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(Errc::invalid_spec, "noise must be non-negative");
  if (!(grid_side > 0.0)) throw Error(Errc::invalid_spec, "grid side must be positive");
  if (!is_rotation(pose.rotation)) throw Error(Errc::invalid_spec, "pose rotation is not a rotation");
  if (kind == SynthKind::template_bend) {
    if (!(bend_radius > 0.0) || !std::isfinite(bend_radius)) throw Error(Errc::invalid_spec, "bend radius must be positive");
    if (!(image_width > 0.0 && image_height > 0.0)) throw Error(Errc::invalid_spec, "image size must be positive");
    if (!(min_outlier_offset >= 0.0)) throw Error(Errc::invalid_spec, "outlier offset must be non-negative");
    try {
      camera.validate();
    } catch (const Error& e) {
      throw Error(Errc::invalid_spec, e.what());
    }
  }
  if (outlier_count() >= num_points) throw Error(Errc::invalid_spec, "outlier ratio leaves no inliers");
}

std::size_t SynthSpec::outlier_count() const {
  return static_cast<std::size_t>(std::floor(outlier_ratio * static_cast<double>(num_points) + 0.5 + 1e-9));
}

namespace {

std::size_t grid_columns(std::size_t n) {
  auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (cols * cols < n) ++cols;
  return std::max<std::size_t>(cols, 2);
}

std::vector<Vec2> grid_coords(std::size_t n, double side) {
  const std::size_t cols = grid_columns(n);
  const double spacing = side / static_cast<double>(cols - 1);
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(static_cast<double>(i % cols) * spacing, static_cast<double>(i / cols) * spacing);
  }
  return out;
}

std::vector<std::size_t> pick_outliers(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

TriMesh grid_mesh(std::size_t num_points, double grid_side) {
  if (num_points < 3) throw Error(Errc::invalid_spec, "grid needs at least 3 points");
  const auto coords = grid_coords(num_points, grid_side);
  return delaunay_triangulate_2d(coords);
}

IsometricInstance synth_isometric_instance(const SynthSpec& spec) {
  if (spec.kind != SynthKind::isometric_grid) throw Error(Errc::invalid_spec, "expected an isometric-grid spec");
  spec.validate();
  const std::size_t n = spec.num_points;
  std::mt19937_64 rng(spec.seed);

  IsometricInstance inst;
  inst.source = grid_mesh(n, spec.grid_side);
  inst.target = inst.source;
  for (auto& v : inst.target.vertices) v = spec.pose.apply(v);
  if (spec.noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, spec.noise);
    for (auto& v : inst.target.vertices) v += Vec3(gauss(rng), gauss(rng), gauss(rng));
  }

  inst.matches.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) inst.matches.pairs[i] = {i, i};
  LabelVector gt(n, Label::inlier);
  std::uniform_int_distribution<std::size_t> other(0, n - 2);
  for (std::size_t i : pick_outliers(n, spec.outlier_count(), rng)) {
    std::size_t t = other(rng);
    if (t >= i) ++t;
    inst.matches.pairs[i].target = t;
    gt[i] = Label::outlier;
  }
  inst.matches.gt_labels = std::move(gt);
  return inst;
}

TemplateInstance synth_template_instance(const SynthSpec& spec) {
  if (spec.kind != SynthKind::template_bend) throw Error(Errc::invalid_spec, "expected a template-bend spec");
  spec.validate();
  const std::size_t n = spec.num_points;
  std::mt19937_64 rng(spec.seed);

  TemplateInstance inst;
  inst.camera = spec.camera;
  const auto coords = grid_coords(n, spec.grid_side);
  const double half = 0.5 * spec.grid_side;
  const double r = spec.bend_radius;
  for (const auto& c : coords) {
    const Vec3 flat(c.x() - half, c.y() - half, 0.0);
    inst.template_points.push_back(flat);
    // Cylinder around the y axis: arc length along x is preserved.
    const Vec3 bent(r * std::sin(flat.x() / r), flat.y(), r * (1.0 - std::cos(flat.x() / r)));
    inst.deformed_points.push_back(spec.pose.apply(bent));
  }

  std::normal_distribution<double> gauss(0.0, spec.noise > 0.0 ? spec.noise : 1.0);
  for (const auto& x : inst.deformed_points) {
    Vec2 uv = project_point(spec.camera, Pose{}, x);
    if (spec.noise > 0.0) uv += Vec2(gauss(rng), gauss(rng));
    inst.image_points.push_back(uv);
  }

  inst.matches.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) inst.matches.pairs[i] = {i, i};
  LabelVector gt(n, Label::inlier);
  std::uniform_real_distribution<double> ux(0.0, spec.image_width), uy(0.0, spec.image_height);
  for (std::size_t i : pick_outliers(n, spec.outlier_count(), rng)) {
    const Vec2 truth = inst.image_points[i];
    Vec2 uv;
    do {
      uv = Vec2(ux(rng), uy(rng));
    } while ((uv - truth).norm() < spec.min_outlier_offset);
    inst.image_points[i] = uv;
    gt[i] = Label::outlier;
  }
  inst.matches.gt_labels = std::move(gt);
  return inst;
}

}  // namespace mfcons
