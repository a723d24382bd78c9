#pragma once

#include "projlab/cones.hpp"

#include <algorithm>
#include <array>

namespace projlab {

/// Occupied-bin measure of one projection: count * delta^d.
struct OccupancyMeasure {
  ProjectionKind kind = ProjectionKind::line;
  double theta = 0.0;
  double bin_width = 0.0;
  std::size_t occupied_count = 0;
  double measure = 0.0;
};

/// Distinct cells of the grid width * Z^Dim anchored at the origin.
template <int Dim>
std::size_t occupied_bins(const std::vector<Point<double, Dim>>& values, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "bin width must be positive");
  std::vector<std::array<std::int64_t, Dim>> keys(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (int a = 0; a < Dim; ++a) keys[i][static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(values[i][a] / width));
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

std::vector<double> project_line(const PointCloud& points, const Curve3& curve, double theta);
std::vector<Vector2d> project_plane(const PointCloud& points, const Curve3& curve, double theta);

OccupancyMeasure occupied_measure(const PointCloud& points, const Curve3& curve, double theta, double delta,
                                  ProjectionKind kind);

struct BoxDimEstimate {
  std::vector<double> scales;
  std::vector<double> counts;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Dyadic scales from scale_hi down to scale_lo.
std::vector<double> dyadic_scales(double scale_lo, double scale_hi);

/// Least-squares slope of log N(delta) against log(1/delta), N = occupied
/// grid cells, over the dyadic scales in [scale_lo, scale_hi].
template <int Dim>
BoxDimEstimate box_dimension(const std::vector<Point<double, Dim>>& values, double scale_lo, double scale_hi) {
  BoxDimEstimate est;
  est.scales = dyadic_scales(scale_lo, scale_hi);
  std::vector<double> x, y;
  for (double d : est.scales) {
    const auto n = static_cast<double>(occupied_bins<Dim>(values, d));
    est.counts.push_back(n);
    x.push_back(-std::log(d));
    y.push_back(std::log(std::max(n, 1.0)));
  }
  const LinearFit fit = least_squares(x, y);
  est.slope = std::clamp(fit.slope, 0.0, static_cast<double>(Dim));
  est.intercept = fit.intercept;
  est.r2 = fit.r2;
  return est;
}

BoxDimEstimate box_dimension(const std::vector<double>& values, double scale_lo, double scale_hi);
inline BoxDimEstimate box_dimension(const PointCloud& values, double scale_lo, double scale_hi) {
  return box_dimension<3>(values, scale_lo, scale_hi);
}

/// A quadrature grid over a theta-set with tabulated projection frames.
class ThetaSampler {
 public:
  /// The set must consist of disjoint intervals inside the curve domain.
  ThetaSampler(const Curve3& curve, std::vector<Interval> set, double step);

  const MidpointGrid& grid() const { return grid_; }
  const std::vector<Interval>& set() const { return set_; }
  double measure() const { return grid_.total_weight(); }
  std::size_t size() const { return grid_.size(); }
  const Vector3d& gamma(std::size_t i) const { return gamma_[i]; }
  /// Orthonormal basis (gamma'/|gamma'|, eta) of gamma(theta_i)^perp.
  const Eigen::Matrix<double, 3, 2>& basis(std::size_t i) const { return basis_[i]; }
  double speed() const { return speed_; }

  /// |rho(d)| (line) or |pi(d)| (plane) at node i.
  double separation(std::size_t i, const Vector3d& d, ProjectionKind kind) const;

 private:
  std::vector<Interval> set_;
  MidpointGrid grid_;
  std::vector<Vector3d> gamma_;
  std::vector<Eigen::Matrix<double, 3, 2>> basis_;
  double speed_ = 0.0;
};

/// Grid measure of {theta in E : x ~_theta y}; x ~_theta y means the
/// projections of x and y lie within delta.
double T_I(const Vector3d& x, const Vector3d& y, const ThetaSampler& sampler, double delta, ProjectionKind kind);

struct IncidenceEnergy {
  ProjectionKind kind = ProjectionKind::line;
  std::vector<Interval> E;
  double delta = 0.0;
  double value = 0.0;
  std::size_t nodes = 0;
};

/// Sum over ordered pairs x != y of T_I(x, y), integrated over theta: each
/// node counts its incident pairs by binning the projected points.
IncidenceEnergy energy(const PointCloud& points, const ThetaSampler& sampler, double delta, ProjectionKind kind);

/// The same quantity as a direct sum of T_I over unordered pairs, doubled.
IncidenceEnergy energy_pair_sum(const PointCloud& points, const ThetaSampler& sampler, double delta,
                                ProjectionKind kind);

/// Incident ordered pairs at one projection with coordinates as given.
std::size_t incident_pairs(std::vector<double> values, double delta);
std::size_t incident_pairs(const std::vector<Vector2d>& values, double delta);

/// The cone whose thin neighbourhood holds the incidences: lines span(eta)
/// for line projections, span(gamma) for plane projections.
ConeFamily bad_cone(const Curve3& curve, const Interval& I, ProjectionKind kind);

/// Indices of y in P with cone_distance(y - x, cone) <= width, on a theta grid
/// of step min(|I| / 256, width / 8) unless given.
std::vector<std::size_t> cone_neighborhood(const PointCloud& points, const Vector3d& x, const ConeFamily& cone,
                                           double width, double grid_step = 0.0);

struct TBoundsReport {
  ProjectionKind kind = ProjectionKind::line;
  double delta = 0.0;
  double tau = 0.0;
  /// max T_I (|x - y| / delta)^(1/2) for lines, max T_I |x - y| / delta for planes.
  double universal_constant = 0.0;
  /// max T_I delta^(tau - 1) over pairs with y - x off the delta^tau cone.
  double off_cone_constant = 0.0;
  std::size_t pairs = 0;
  std::size_t off_cone_pairs = 0;
};

TBoundsReport verify_T_bounds(const std::vector<PointPair>& pairs, const ThetaSampler& sampler, double delta,
                              ProjectionKind kind, double tau, const ConeFamily& cone);

}  // namespace projlab
