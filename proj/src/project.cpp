#include "projlab/project.hpp"

#include <unordered_map>

namespace projlab {

std::vector<double> project_line(const PointCloud& points, const Curve3& curve, double theta) {
  require_in_domain(curve.domain(), theta);
  const Vector3d g = curve(theta);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = g.dot(points[i]);
  return out;
}

std::vector<Vector2d> project_plane(const PointCloud& points, const Curve3& curve, double theta) {
  const auto f = frame(curve, theta);
  std::vector<Vector2d> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = f.plane_basis.transpose() * points[i];
  return out;
}

OccupancyMeasure occupied_measure(const PointCloud& points, const Curve3& curve, double theta, double delta,
                                  ProjectionKind kind) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  OccupancyMeasure m;
  m.kind = kind;
  m.theta = theta;
  m.bin_width = delta;
  if (points.empty()) return m;
  if (kind == ProjectionKind::line) {
    const auto v = project_line(points, curve, theta);
    m.occupied_count = occupied_bins<1>(std::vector<Point<double, 1>>(v.begin(), v.end()), delta);
  } else {
    m.occupied_count = occupied_bins<2>(project_plane(points, curve, theta), delta);
  }
  m.measure = static_cast<double>(m.occupied_count) * std::pow(delta, target_dimension(kind));
  return m;
}

std::vector<double> dyadic_scales(double scale_lo, double scale_hi) {
  if (!(scale_lo > 0.0) || !(scale_lo < scale_hi))
    throw Error(ErrorCode::invalid_argument, "box scales need 0 < scale_lo < scale_hi");
  for (double v : {scale_lo, scale_hi}) {
    const double e = std::log2(v);
    if (std::abs(e - std::round(e)) > 1e-9) throw Error(ErrorCode::invalid_argument, "box scales must be powers of 2");
  }
  std::vector<double> out;
  for (double d = scale_hi; d >= scale_lo * (1.0 - 1e-12); d *= 0.5) out.push_back(d);
  if (out.size() < 3) throw Error(ErrorCode::invalid_argument, "box dimension needs at least 3 scales");
  return out;
}

BoxDimEstimate box_dimension(const std::vector<double>& values, double scale_lo, double scale_hi) {
  return box_dimension<1>(std::vector<Point<double, 1>>(values.begin(), values.end()), scale_lo, scale_hi);
}

ThetaSampler::ThetaSampler(const Curve3& curve, std::vector<Interval> set, double step) : set_(std::move(set)) {
  if (set_.empty()) throw Error(ErrorCode::invalid_argument, "theta set is empty");
  std::sort(set_.begin(), set_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < set_.size(); ++i) {
    if (!curve.domain().contains(set_[i], 1e-12))
      throw Error(ErrorCode::domain, "theta set leaves the curve domain");
    if (i > 0 && set_[i].lo < set_[i - 1].hi)
      throw Error(ErrorCode::invalid_argument, "theta set intervals overlap");
  }
  grid_ = midpoint_grid(set_, step);
  for (double t : grid_.theta) {
    const auto f = frame(curve, t);
    gamma_.push_back(f.gamma);
    basis_.push_back(f.plane_basis);
  }
  speed_ = speed_bound(curve, Interval{set_.front().lo, set_.back().hi});
}

double ThetaSampler::separation(std::size_t i, const Vector3d& d, ProjectionKind kind) const {
  const double a = gamma_[i].dot(d);
  if (kind == ProjectionKind::line) return std::abs(a);
  return std::sqrt(std::max(0.0, d.squaredNorm() - a * a));
}

double T_I(const Vector3d& x, const Vector3d& y, const ThetaSampler& sampler, double delta, ProjectionKind kind) {
  const Vector3d d = x - y;
  const double len = d.norm();
  if (len == 0.0) throw Error(ErrorCode::invalid_argument, "T_I needs distinct points");
  // Both |rho(d)| and |pi(d)| are |d| * speed Lipschitz in theta.
  const double rate = len * sampler.speed();
  const auto& theta = sampler.grid().theta;
  const auto& weight = sampler.grid().weight;
  double total = 0.0;
  std::size_t i = 0;
  while (i < theta.size()) {
    const double f = sampler.separation(i, d, kind);
    if (f <= delta) {
      total += weight[i];
      ++i;
      continue;
    }
    if (!(rate > 0.0)) {
      ++i;
      continue;
    }
    const double target = theta[i] + (f - delta) / rate * (1.0 - 1e-9);
    const auto next = static_cast<std::size_t>(
        std::lower_bound(theta.begin() + static_cast<std::ptrdiff_t>(i) + 1, theta.end(), target) - theta.begin());
    i = std::max(i + 1, next);
  }
  return total;
}

std::size_t incident_pairs(std::vector<double> values, double delta) {
  std::sort(values.begin(), values.end());
  std::size_t count = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    j = std::max(j, i + 1);
    while (j < values.size() && values[j] - values[i] <= delta) ++j;
    count += j - i - 1;
  }
  return 2 * count;
}

std::size_t incident_pairs(const std::vector<Vector2d>& values, double delta) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> bins;
  const auto key = [](std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) ^ (static_cast<std::uint64_t>(b) & 0xffffffffULL);
  };
  std::vector<std::pair<std::int64_t, std::int64_t>> cell(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    cell[i] = {static_cast<std::int64_t>(std::floor(values[i].x() / delta)),
               static_cast<std::int64_t>(std::floor(values[i].y() / delta))};
    bins[key(cell[i].first, cell[i].second)].push_back(i);
  }
  const double d2 = delta * delta;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::int64_t a = -1; a <= 1; ++a) {
      for (std::int64_t b = -1; b <= 1; ++b) {
        const auto it = bins.find(key(cell[i].first + a, cell[i].second + b));
        if (it == bins.end()) continue;
        for (std::size_t j : it->second) {
          if (j != i && (values[j] - values[i]).squaredNorm() <= d2) ++count;
        }
      }
    }
  }
  return count;
}

IncidenceEnergy energy(const PointCloud& points, const ThetaSampler& sampler, double delta, ProjectionKind kind) {
  if (points.empty()) throw Error(ErrorCode::invalid_argument, "energy needs a nonempty point set");
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  std::vector<double> per_node(sampler.size());
  parallel_for(sampler.size(), [&](std::size_t i) {
    std::size_t n = 0;
    if (kind == ProjectionKind::line) {
      std::vector<double> v(points.size());
      for (std::size_t p = 0; p < points.size(); ++p) v[p] = sampler.gamma(i).dot(points[p]);
      n = incident_pairs(std::move(v), delta);
    } else {
      std::vector<Vector2d> v(points.size());
      for (std::size_t p = 0; p < points.size(); ++p) v[p] = sampler.basis(i).transpose() * points[p];
      n = incident_pairs(v, delta);
    }
    per_node[i] = static_cast<double>(n) * sampler.grid().weight[i];
  });
  IncidenceEnergy e;
  e.kind = kind;
  e.E = sampler.set();
  e.delta = delta;
  e.nodes = sampler.size();
  for (double v : per_node) e.value += v;
  return e;
}

IncidenceEnergy energy_pair_sum(const PointCloud& points, const ThetaSampler& sampler, double delta,
                                ProjectionKind kind) {
  if (points.empty()) throw Error(ErrorCode::invalid_argument, "energy needs a nonempty point set");
  std::vector<double> rows(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = i + 1; j < points.size(); ++j) sum += T_I(points[i], points[j], sampler, delta, kind);
    rows[i] = sum;
  });
  IncidenceEnergy e;
  e.kind = kind;
  e.E = sampler.set();
  e.delta = delta;
  e.nodes = sampler.size();
  for (double v : rows) e.value += 2.0 * v;
  return e;
}

ConeFamily bad_cone(const Curve3& curve, const Interval& I, ProjectionKind kind) {
  return kind == ProjectionKind::line ? ConeFamily(eta_curve(curve), I) : ConeFamily(curve, I);
}

std::vector<std::size_t> cone_neighborhood(const PointCloud& points, const Vector3d& x, const ConeFamily& cone,
                                           double width, double grid_step) {
  if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "neighbourhood width must be positive");
  if (!(grid_step > 0.0)) {
    grid_step = width / 8.0;
    if (cone.interval.length() > 0.0) grid_step = std::min(grid_step, cone.interval.length() / 256.0);
  }
  const ConeSampler sampler(cone, grid_step);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (sampler.within(points[i] - x, width)) out.push_back(i);
  }
  return out;
}

TBoundsReport verify_T_bounds(const std::vector<PointPair>& pairs, const ThetaSampler& sampler, double delta,
                              ProjectionKind kind, double tau, const ConeFamily& cone) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  TBoundsReport rep;
  rep.kind = kind;
  rep.delta = delta;
  rep.tau = tau;
  const double width = std::pow(delta, tau);
  double step = width / 8.0;
  if (cone.interval.length() > 0.0) step = std::min(step, cone.interval.length() / 1024.0);
  const ConeSampler near(cone, step);
  std::vector<double> universal(pairs.size()), off(pairs.size(), -1.0);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const Vector3d d = pairs[k].first - pairs[k].second;
    const double len = d.norm();
    const double t = T_I(pairs[k].first, pairs[k].second, sampler, delta, kind);
    universal[k] = kind == ProjectionKind::line ? t * std::sqrt(len / delta) : t * len / delta;
    if (!near.within(d, width)) off[k] = t * std::pow(delta, tau - 1.0);
  });
  rep.pairs = pairs.size();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rep.universal_constant = std::max(rep.universal_constant, universal[k]);
    if (off[k] >= 0.0) {
      ++rep.off_cone_pairs;
      rep.off_cone_constant = std::max(rep.off_cone_constant, off[k]);
    }
  }
  return rep;
}

}  // namespace projlab
