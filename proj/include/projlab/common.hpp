#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace projlab {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar, int Dim>
using Point = Eigen::Matrix<Scalar, Dim, 1>;

using Eigen::Vector2d;
using Eigen::Vector3d;

using PointCloud = std::vector<Vector3d>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorCode {
  invalid_argument,
  invalid_curve,
  empty_grid,
  domain,
  degenerate_frame,
  hypothesis_violation,
  search_failure,
  not_a_net,
  size_limit,
  separation_failure,
  degenerate_pair,
  config,
  certification_failure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class ProjectionKind { line, plane };

const char* to_string(ProjectionKind kind);
ProjectionKind parse_projection_kind(const std::string& name);

/// Dimension of the projection target: 1 for lines, 2 for planes.
inline int target_dimension(ProjectionKind kind) { return kind == ProjectionKind::line ? 1 : 2; }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double t, double tol = 1e-12) const { return t >= lo - tol && t <= hi + tol; }
  bool contains(const Interval& other, double tol = 1e-12) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }
};

/// Nodes lo, lo + h, lo + 2h, ... below hi, followed by hi itself.
std::vector<double> grid_nodes(const Interval& interval, double step);

/// A cell-midpoint quadrature grid. Cells have width `step`; the last cell of
/// each interval is truncated and carries its own weight.
struct MidpointGrid {
  std::vector<double> theta;
  std::vector<double> weight;

  std::size_t size() const { return theta.size(); }
  double total_weight() const;
};

MidpointGrid midpoint_grid(const std::vector<Interval>& set, double step);
inline MidpointGrid midpoint_grid(const Interval& interval, double step) {
  return midpoint_grid(std::vector<Interval>{interval}, step);
}

/// Least-squares slope and coefficient of determination of y against x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Worker count used by the data-parallel loops; capped by --threads.
int worker_count();
void set_worker_count(int threads);

/// Runs body(i) for i in [0, n). Results must be written to per-index slots so
/// that any later reduction runs in index order.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, worker_count())), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Seeded 64-bit generator with portable real-valued draws. The engine name is
/// written into report headers.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) from the top 53 bits; identical on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform point on the unit sphere.
  Vector3d unit_vector();

 private:
  std::mt19937_64 engine_;
};

template <typename Derived>
auto triple_product(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b,
                    const Eigen::MatrixBase<Derived>& c) {
  return a.dot(b.cross(c));
}

/// Distance from x to the line spanned by the unit vector `direction`.
template <typename DerivedX, typename DerivedD>
auto distance_to_line(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedD>& direction) {
  return (x - x.dot(direction) * direction).norm();
}

/// Fixed Gram-Schmidt orthonormal basis (columns) of the plane normal^⊥.
Eigen::Matrix<double, 3, 2> plane_basis(const Vector3d& normal);

}  // namespace projlab
