#include "projlab/common.hpp"

#include <atomic>
#include <numeric>

namespace projlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_curve: return "invalid-curve";
    case ErrorCode::empty_grid: return "empty-grid";
    case ErrorCode::domain: return "domain";
    case ErrorCode::degenerate_frame: return "degenerate-frame";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::search_failure: return "search-failure";
    case ErrorCode::not_a_net: return "not-a-net";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::separation_failure: return "separation-failure";
    case ErrorCode::degenerate_pair: return "degenerate-pair";
    case ErrorCode::config: return "config";
    case ErrorCode::certification_failure: return "certification-failure";
  }
  return "unknown";
}

const char* to_string(ProjectionKind kind) { return kind == ProjectionKind::line ? "line" : "plane"; }

ProjectionKind parse_projection_kind(const std::string& name) {
  if (name == "line") return ProjectionKind::line;
  if (name == "plane") return ProjectionKind::plane;
  throw Error(ErrorCode::invalid_argument, "projection kind must be 'line' or 'plane', got '" + name + "'");
}

std::vector<double> grid_nodes(const Interval& interval, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be positive");
  if (interval.hi < interval.lo) throw Error(ErrorCode::invalid_argument, "interval is empty");
  std::vector<double> nodes;
  const double length = interval.length();
  const auto n = static_cast<std::size_t>(std::floor(length / step));
  nodes.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = interval.lo + static_cast<double>(i) * step;
    if (t > interval.hi - 1e-12 * std::max(1.0, std::abs(interval.hi))) break;
    nodes.push_back(t);
  }
  nodes.push_back(interval.hi);
  return nodes;
}

double MidpointGrid::total_weight() const {
  double sum = 0.0;
  for (double w : weight) sum += w;
  return sum;
}

MidpointGrid midpoint_grid(const std::vector<Interval>& set, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be positive");
  MidpointGrid grid;
  for (const auto& interval : set) {
    if (interval.hi < interval.lo) throw Error(ErrorCode::invalid_argument, "interval is empty");
    const double length = interval.length();
    const auto full = static_cast<std::size_t>(std::floor(length / step));
    for (std::size_t i = 0; i < full; ++i) {
      const double a = interval.lo + static_cast<double>(i) * step;
      grid.theta.push_back(a + 0.5 * step);
      grid.weight.push_back(step);
    }
    const double rest = length - static_cast<double>(full) * step;
    if (rest > 1e-14 * std::max(1.0, length)) {
      const double a = interval.lo + static_cast<double>(full) * step;
      grid.theta.push_back(a + 0.5 * rest);
      grid.weight.push_back(rest);
    }
  }
  return grid;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::invalid_argument, "least squares needs at least two matched samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::invalid_argument, "least squares abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(); }

void set_worker_count(int threads) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  g_workers.store(threads);
}

Vector3d Rng::unit_vector() {
  const double z = 2.0 * uniform() - 1.0;
  const double phi = kTwoPi * uniform();
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

Eigen::Matrix<double, 3, 2> plane_basis(const Vector3d& normal) {
  const double norm = normal.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::invalid_argument, "plane normal is zero");
  const Vector3d n = normal / norm;
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < std::abs(n[axis])) axis = i;
  }
  Vector3d e1 = Vector3d::Unit(axis) - n[axis] * n;
  e1.normalize();
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = e1;
  basis.col(1) = n.cross(e1);
  return basis;
}

}  // namespace projlab
