#pragma once

#include "projlab/curve.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace projlab {

/// The union of lines span(curve(theta)) over theta in the interval.
struct ConeFamily {
  Curve3 curve;
  Interval interval;

  ConeFamily(Curve3 c, Interval i);
};

/// min over grid theta in I of d(x, span(curve(theta))).
double cone_distance(const Vector3d& x, const ConeFamily& cone, double grid_step);

/// Tabulated cone directions for repeated distance and membership queries.
class ConeSampler {
 public:
  ConeSampler(const ConeFamily& cone, double grid_step);

  /// Same value as cone_distance on the same grid.
  double distance(const Vector3d& x) const;

  /// Whether some grid line lies within `width` of x. Uses the Lipschitz bound
  /// of theta -> d(x, line) to skip nodes that cannot qualify; the answer is
  /// identical to distance(x) <= width.
  bool within(const Vector3d& x, double width) const;

  std::size_t size() const { return theta_.size(); }

 private:
  std::vector<double> theta_;
  std::vector<Vector3d> dir_;
  double speed_ = 0.0;
};

struct NonParallelCert {
  Interval I;
  Interval J;
  double lipschitz_L = 1.0;
  double chord_gap_c = 0.0;
  double sample_density = 0.0;
  std::size_t chords = 0;

  bool valid() const { return lipschitz_L < 1.0 - 1e-9 && chord_gap_c > 0.0; }
};

/// Sampled constants of the relation C_I(curveA) not-parallel-to C_J(curveB):
/// chords between points r*curveA(theta) with |r| <= 1 plus all tangent-plane
/// chords, tested against the directions curveB(theta), theta in J.
NonParallelCert non_parallel_constant(const Curve3& curve_a, const Interval& I, const Curve3& curve_b,
                                      const Interval& J, int n_samples);

/// |gamma(theta2) . (gamma(theta1) x gamma'(theta1))|
double nonparallel_hypothesis(const Curve3& curve, double theta1, double theta2);

struct NonParallelIntervals {
  Interval I;
  Interval J;
  NonParallelCert cert;
  double epsilon = 0.0;
  double hypothesis_value = 0.0;
};

NonParallelIntervals find_nonparallel_intervals(const Curve3& curve, double theta1, double theta2,
                                                int n_samples = 24);

struct PointPair {
  Vector3d first;
  Vector3d second;
};

struct AngularSeparationReport {
  double min_gap = 0.0;
  double threshold = 0.0;
  double lipschitz_bound = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  bool pass = false;
};

/// Chordal gap between normalized differences y - y' of admissible pairs and
/// the unit directions of C_J. A pair is admissible when both points lie in
/// x + C_I(delta^tau) and |y - y'| >= C delta^tau; others are skipped.
AngularSeparationReport angular_separation_check(const Vector3d& x, const ConeFamily& cone_i,
                                                 const ConeFamily& cone_j, double tau, double delta, double C,
                                                 const std::vector<PointPair>& pairs, const NonParallelCert& cert,
                                                 double grid_step = 0.0);

/// X(y, l, alpha) = {x : d(x - y, l) < alpha |x - y|}.
struct AxisCone {
  Vector3d apex = Vector3d::Zero();
  Vector3d axis = Vector3d::UnitZ();
  double alpha = 0.5;

  AxisCone(const Vector3d& y, const Vector3d& direction, double a);

  bool contains(const Vector3d& x) const;
};

struct StaysOffResult {
  bool holds = true;
  bool plane_consistent = true;
  double min_ratio = 1.0;
  double min_plane_ratio = 1.0;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
};

/// Whether d(x - y, span(axis)) >= alpha |x - y| for all distinct pairs; the
/// same inequality is re-checked through the projection onto axis^perp.
StaysOffResult stays_off(const std::vector<Vector3d>& points, const Vector3d& axis, double alpha);

}  // namespace projlab
