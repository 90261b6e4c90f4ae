#include "mfcons/pose.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mfcons/error.hpp"

namespace mfcons {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw Error(Errc::invalid_argument, "intrinsics need finite fx, fy > 0");
  }
}

Vec3 CameraIntrinsics::bearing(const Vec2& uv) const {
  return Vec3((uv.x() - cx) / fx, (uv.y() - cy) / fy, 1.0).normalized();
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

namespace {

// Ascending-power polynomial helpers.
using Poly = std::vector<double>;

Poly mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly add(const Poly& a, const Poly& b, double sb = 1.0) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += sb * b[i];
  return out;
}

Poly scale(Poly a, double s) {
  for (double& c : a) c *= s;
  return a;
}

double eval(const Poly& p, double x) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

double eval_derivative(const Poly& p, double x) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 1;) v = v * x + static_cast<double>(i) * p[i];
  return v;
}

/// Real roots via companion-matrix eigenvalues. Roots with a small imaginary
/// part are kept; later reprojection checks discard spurious ones.
std::vector<double> real_roots(Poly p) {
  double largest = 0.0;
  for (double c : p) largest = std::max(largest, std::abs(c));
  if (largest == 0.0) return {};
  while (p.size() > 1 && std::abs(p.back()) <= 1e-14 * largest) p.pop_back();
  const std::size_t degree = p.size() - 1;
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (std::size_t i = 0; i < degree; ++i) companion(0, i) = -p[degree - 1 - i] / p[degree];
  for (std::size_t i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<double> roots;
  for (const std::complex<double>& z : solver.eigenvalues()) {
    if (std::abs(z.imag()) <= 1e-4 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  return roots;
}

Pose align(const std::array<Vec3, 3>& model, const std::array<Vec3, 3>& camera) {
  const Vec3 pm = (model[0] + model[1] + model[2]) / 3.0;
  const Vec3 pc = (camera[0] + camera[1] + camera[2]) / 3.0;
  Mat3 h = Mat3::Zero();
  for (int i = 0; i < 3; ++i) h += (model[i] - pm) * (camera[i] - pc).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Pose pose;
  pose.rotation = svd.matrixV() * fix * svd.matrixU().transpose();
  pose.translation = pc - pose.rotation * pm;
  return pose;
}

double bearing_error(const Vec3& predicted, const Vec3& bearing) {
  return std::atan2(predicted.cross(bearing).norm(), predicted.dot(bearing));
}

}  // namespace

std::vector<Pose> p3p_solve(const std::array<Vec3, 3>& points, const std::array<Vec3, 3>& bearings) {
  const Vec3& p1 = points[0];
  const Vec3& p2 = points[1];
  const Vec3& p3 = points[2];
  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();
  const double diameter = std::sqrt(std::max({a2, b2, c2}));
  const double twice_area = (p2 - p1).cross(p3 - p1).norm();
  // Smallest altitude = twice_area / longest side.
  if (!(diameter > 0.0) || twice_area <= 1e-9 * diameter * diameter) {
    throw Error(Errc::degenerate_configuration, "P3P points are collinear");
  }

  std::array<Vec3, 3> j;
  for (int i = 0; i < 3; ++i) {
    const double norm = bearings[i].norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(Errc::degenerate_configuration, "zero bearing");
    j[i] = bearings[i] / norm;
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = i + 1; k < 3; ++k) {
      if (j[i].cross(j[k]).norm() <= 1e-12 && j[i].dot(j[k]) > 0.0) {
        throw Error(Errc::degenerate_configuration, "P3P bearings coincide");
      }
    }
  }

  const double cos_a = j[1].dot(j[2]);
  const double cos_b = j[0].dot(j[2]);
  const double cos_g = j[0].dot(j[1]);
  // Distances normalised by |P1 P3|^2; depths s2 = u s1, s3 = v s1.
  const double ra = a2 / b2;
  const double rc = c2 / b2;

  const Poly k_poly{1.0, -2.0 * cos_b, 1.0};
  const Poly n_poly = add(Poly{1.0, 0.0, -1.0}, scale(k_poly, ra - rc));
  const Poly d_poly{2.0 * cos_g, -2.0 * cos_a};
  const Poly dd = mul(d_poly, d_poly);
  // (1 + u^2 - 2 u cos_g) = rc K with u = N / D, multiplied through by D^2.
  Poly quartic = add(dd, mul(n_poly, n_poly));
  quartic = add(quartic, scale(mul(n_poly, d_poly), -2.0 * cos_g));
  quartic = add(quartic, scale(mul(k_poly, dd), -rc));

  const double b = std::sqrt(b2);
  std::vector<Pose> solutions;
  for (double v : real_roots(quartic)) {
    const double slope = eval_derivative(quartic, v);
    if (slope != 0.0) v -= eval(quartic, v) / slope;
    if (!(v > 0.0)) continue;
    const double d = eval(d_poly, v);
    if (std::abs(d) <= 1e-14) continue;
    const double u = eval(n_poly, v) / d;
    if (!(u > 0.0)) continue;
    const double k = eval(k_poly, v);
    if (!(k > 0.0)) continue;

    // Gauss-Newton polish of the depths on the three side-length equations.
    Vec3 s(b / std::sqrt(k), 0.0, 0.0);
    s(1) = u * s(0);
    s(2) = v * s(0);
    auto residual = [&](const Vec3& x) {
      return Vec3(x(1) * x(1) + x(2) * x(2) - 2.0 * x(1) * x(2) * cos_a - a2,
                  x(0) * x(0) + x(2) * x(2) - 2.0 * x(0) * x(2) * cos_b - b2,
                  x(0) * x(0) + x(1) * x(1) - 2.0 * x(0) * x(1) * cos_g - c2);
    };
    for (int it = 0; it < 3; ++it) {
      const Vec3 r = residual(s);
      Mat3 jac;
      jac << 0.0, 2.0 * (s(1) - s(2) * cos_a), 2.0 * (s(2) - s(1) * cos_a),
          2.0 * (s(0) - s(2) * cos_b), 0.0, 2.0 * (s(2) - s(0) * cos_b),
          2.0 * (s(0) - s(1) * cos_g), 2.0 * (s(1) - s(0) * cos_g), 0.0;
      const Vec3 step = jac.fullPivLu().solve(r);
      const Vec3 next = s - step;
      if (!next.allFinite() || residual(next).norm() >= r.norm()) break;
      s = next;
    }
    if (!(s.minCoeff() > 0.0)) continue;

    const std::array<Vec3, 3> camera{s(0) * j[0], s(1) * j[1], s(2) * j[2]};
    const Pose pose = align(points, camera);

    bool consistent = true;
    for (int i = 0; i < 3 && consistent; ++i) {
      consistent = bearing_error(pose.apply(points[i]), j[i]) <= 1e-6;
    }
    if (!consistent) continue;

    const bool duplicate = std::any_of(solutions.begin(), solutions.end(), [&](const Pose& other) {
      return (other.rotation - pose.rotation).norm() <= 1e-8 &&
             (other.translation - pose.translation).norm() <= 1e-8 * (1.0 + pose.translation.norm());
    });
    if (!duplicate) solutions.push_back(pose);
  }
  if (solutions.size() > 4) solutions.resize(4);
  return solutions;
}

double rotation_geodesic_distance(const Mat3& ra, const Mat3& rb) {
  if (!is_rotation(ra) || !is_rotation(rb)) {
    throw Error(Errc::invalid_rotation, "matrix is not a proper rotation");
  }
  const double c = ((ra.transpose() * rb).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

PoseComparison closest_pose_pair(const std::vector<Pose>& a, const std::vector<Pose>& b) {
  if (a.empty() || b.empty()) throw Error(Errc::empty_solutions, "pose candidate list is empty");
  PoseComparison best;
  bool have = false;
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      PoseComparison cur;
      cur.rotation_distance = rotation_geodesic_distance(pa.rotation, pb.rotation);
      cur.translation_gap = (pa.translation - pb.translation).lpNorm<1>();
      cur.translation_scale = std::max(pa.translation.norm(), pb.translation.norm());
      if (!have || cur.rotation_distance < best.rotation_distance ||
          (cur.rotation_distance == best.rotation_distance && cur.translation_gap < best.translation_gap)) {
        best = cur;
        have = true;
      }
    }
  }
  return best;
}

bool pose_agreement(const std::vector<Pose>& a, const std::vector<Pose>& b, double eps1, double eps2) {
  const PoseComparison c = closest_pose_pair(a, b);
  return c.rotation_distance <= eps1 && c.translation_gap <= eps2 * c.translation_scale;
}

Vec2 project_point(const CameraIntrinsics& k, const Pose& pose, const Vec3& x) {
  const Vec3 c = pose.apply(x);
  if (!(c.z() > 0.0)) throw Error(Errc::behind_camera, "point has non-positive depth");
  return {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

}  // namespace mfcons
