#include "projlab/cones.hpp"

namespace projlab {

namespace {

double line_distance(const Vector3d& x, const Vector3d& dir) {
  return (x - dir.dot(x) * dir).norm();
}

Interval clip(const Interval& i, const Interval& domain) {
  return {std::max(i.lo, domain.lo), std::min(i.hi, domain.hi)};
}

}  // namespace

ConeFamily::ConeFamily(Curve3 c, Interval i) : curve(std::move(c)), interval(i) {
  if (interval.hi < interval.lo) throw Error(ErrorCode::invalid_argument, "cone interval is empty");
  if (!curve.domain().contains(interval, 1e-12))
    throw Error(ErrorCode::domain, "cone interval lies outside the curve domain");
}

double cone_distance(const Vector3d& x, const ConeFamily& cone, double grid_step) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : grid_nodes(cone.interval, grid_step)) best = std::min(best, line_distance(x, cone.curve(t)));
  return best;
}

ConeSampler::ConeSampler(const ConeFamily& cone, double grid_step) : theta_(grid_nodes(cone.interval, grid_step)) {
  dir_.reserve(theta_.size());
  for (double t : theta_) dir_.push_back(cone.curve(t));
  speed_ = speed_bound(cone.curve, cone.interval);
}

double ConeSampler::distance(const Vector3d& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : dir_) best = std::min(best, line_distance(x, d));
  return best;
}

bool ConeSampler::within(const Vector3d& x, double width) const {
  const double norm = x.norm();
  if (norm <= width) return true;
  const double rate = norm * speed_;
  std::size_t i = 0;
  while (i < theta_.size()) {
    const double v = line_distance(x, dir_[i]);
    if (v <= width) return true;
    const double jump = (v - width) / rate * (1.0 - 1e-9);
    const double target = theta_[i] + jump;
    const auto next = static_cast<std::size_t>(std::lower_bound(theta_.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                                                theta_.end(), target) -
                                               theta_.begin());
    i = std::max(i + 1, next);
  }
  return false;
}

NonParallelCert non_parallel_constant(const Curve3& curve_a, const Interval& I, const Curve3& curve_b,
                                      const Interval& J, int n_samples) {
  if (n_samples < 2) throw Error(ErrorCode::invalid_argument, "non-parallel sampling needs at least two samples");
  if (!(I.length() > 0.0) || !(J.length() > 0.0))
    throw Error(ErrorCode::invalid_argument, "non-parallel sampling needs intervals of positive length");
  if (!curve_a.domain().contains(I, 1e-12) || !curve_b.domain().contains(J, 1e-12))
    throw Error(ErrorCode::domain, "non-parallel intervals lie outside the curve domains");

  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<Vector3d> xi(n);
  for (std::size_t k = 0; k < n; ++k) {
    xi[k] = curve_b(J.lo + J.length() * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  const std::size_t n_r = std::max<std::size_t>(4, (n + 1) / 2);
  std::vector<Vector3d> pts;
  std::vector<Vector3d> gammas(n), tangents(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = I.lo + I.length() * static_cast<double>(i) / static_cast<double>(n - 1);
    gammas[i] = curve_a(t);
    tangents[i] = curve_a.d1(t).normalized();
    for (std::size_t k = 0; k < n_r; ++k) {
      const double r = -1.0 + (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n_r);
      pts.push_back(r * gammas[i]);
    }
  }

  std::vector<double> row_max(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t a) {
    double m = 0.0;
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const Vector3d d = pts[a] - pts[b];
      const double len = d.norm();
      if (len < 1e-12) continue;
      const Vector3d u = d / len;
      for (const auto& x : xi) m = std::max(m, std::abs(u.dot(x)));
    }
    row_max[a] = m;
  });
  double L = 0.0;
  for (double m : row_max) L = std::max(L, m);
  // Limits of chords between nearby points sweep the whole tangent plane.
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& x : xi) L = std::max(L, std::hypot(x.dot(gammas[i]), x.dot(tangents[i])));
  }
  L = std::min(L, 1.0);

  NonParallelCert cert;
  cert.I = I;
  cert.J = J;
  cert.lipschitz_L = L;
  cert.chord_gap_c = std::sqrt(std::max(0.0, 2.0 - 2.0 * L));
  cert.sample_density = static_cast<double>(n) / I.length();
  cert.chords = pts.size() * (pts.size() - 1) / 2 + n;
  return cert;
}

double nonparallel_hypothesis(const Curve3& curve, double theta1, double theta2) {
  require_in_domain(curve.domain(), theta1);
  require_in_domain(curve.domain(), theta2);
  return std::abs(curve(theta2).dot(curve(theta1).cross(curve.d1(theta1))));
}

NonParallelIntervals find_nonparallel_intervals(const Curve3& curve, double theta1, double theta2, int n_samples) {
  NonParallelIntervals out;
  out.hypothesis_value = nonparallel_hypothesis(curve, theta1, theta2);
  if (!(out.hypothesis_value > 1e-9))
    throw Error(ErrorCode::hypothesis_violation, "gamma(theta2) lies in span{gamma(theta1), gamma'(theta1)}");
  const double gap = std::abs(theta2 - theta1);
  for (double eps = std::min(0.2, gap / 4.0); eps >= 1e-6; eps *= 0.5) {
    const Interval I = clip({theta1 - eps, theta1 + eps}, curve.domain());
    const Interval J = clip({theta2 - eps, theta2 + eps}, curve.domain());
    const auto cert = non_parallel_constant(curve, I, curve, J, n_samples);
    if (cert.valid()) {
      out.I = I;
      out.J = J;
      out.cert = cert;
      out.epsilon = eps;
      return out;
    }
  }
  throw Error(ErrorCode::search_failure, "no non-parallel interval pair above width 1e-6");
}

AngularSeparationReport angular_separation_check(const Vector3d& x, const ConeFamily& cone_i,
                                                 const ConeFamily& cone_j, double tau, double delta, double C,
                                                 const std::vector<PointPair>& pairs, const NonParallelCert& cert,
                                                 double grid_step) {
  if (!(delta > 0.0) || !(C > 0.0)) throw Error(ErrorCode::invalid_argument, "delta and C must be positive");
  const double width = std::pow(delta, tau);
  if (grid_step <= 0.0) grid_step = std::max(cone_i.interval.length() / 256.0, 1e-9);
  const ConeSampler near_i(cone_i, grid_step);
  const double j_step = std::max(cone_j.interval.length() / 256.0, 1e-9);
  std::vector<Vector3d> xi;
  for (double t : grid_nodes(cone_j.interval, j_step)) xi.push_back(cone_j.curve(t));

  AngularSeparationReport rep;
  rep.threshold = 0.5 * cert.chord_gap_c;
  rep.lipschitz_bound = cert.chord_gap_c - 4.0 / C;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const Vector3d d = p.first - p.second;
    const double len = d.norm();
    const bool admissible = len > 0.0 && len >= C * width * (1.0 - 1e-12) &&
                            near_i.distance(p.first - x) <= width * (1.0 + 1e-12) &&
                            near_i.distance(p.second - x) <= width * (1.0 + 1e-12);
    if (!admissible) {
      ++rep.skipped;
      continue;
    }
    const Vector3d u = d / len;
    double best = 0.0;
    for (const auto& e : xi) best = std::max(best, std::abs(u.dot(e)));
    rep.min_gap = std::min(rep.min_gap, std::sqrt(std::max(0.0, 2.0 - 2.0 * best)));
    ++rep.evaluated;
  }
  rep.pass = rep.evaluated > 0 && rep.min_gap >= rep.threshold;
  return rep;
}

AxisCone::AxisCone(const Vector3d& y, const Vector3d& direction, double a) : apex(y), alpha(a) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::invalid_argument, "cone axis is zero");
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::invalid_argument, "cone aperture must lie in (0, 1)");
  axis = direction / n;
}

bool AxisCone::contains(const Vector3d& x) const {
  const Vector3d d = x - apex;
  return distance_to_line(d, axis) < alpha * d.norm();
}

StaysOffResult stays_off(const std::vector<Vector3d>& points, const Vector3d& axis, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
  const double n = axis.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::invalid_argument, "axis is zero");
  const Vector3d a = axis / n;
  StaysOffResult out;
  for (std::size_t i = 0; i < points.size() && out.holds; ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) continue;
      const Vector3d d = points[i] - points[j];
      const double len = d.norm();
      if (len == 0.0) continue;
      const double dist = distance_to_line(d, a);
      out.min_ratio = std::min(out.min_ratio, dist / len);
      if (dist < alpha * len) {
        out.holds = false;
        out.witness = std::make_pair(i, j);
        break;
      }
    }
  }
  if (!out.holds) return out;
  const auto basis = plane_basis(a);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const Vector3d d = points[i] - points[j];
      const double len = d.norm();
      if (len == 0.0) continue;
      const double proj = (basis.transpose() * d).norm();
      out.min_plane_ratio = std::min(out.min_plane_ratio, proj / len);
      if (proj < alpha * len * (1.0 - 1e-12)) out.plane_consistent = false;
    }
  }
  return out;
}

}  // namespace projlab
