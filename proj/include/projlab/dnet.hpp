#pragma once

#include "projlab/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace projlab {

/// The cube corner * 2^-level + [0, 2^-level)^3. Levels may be negative for
/// cubes larger than the unit cube.
struct DyadicCube {
  int level = 0;
  Eigen::Vector3i corner = Eigen::Vector3i::Zero();

  double side() const { return std::ldexp(1.0, -level); }
  double diameter() const { return std::sqrt(3.0) * side(); }
  Vector3d center() const { return (corner.cast<double>() + Vector3d::Constant(0.5)) * side(); }
  /// The ancestor at a coarser (smaller) level.
  DyadicCube ancestor(int coarser_level) const;
  bool contains(const Vector3d& p) const;

  friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
    return a.level == b.level && a.corner == b.corner;
  }
  friend bool operator<(const DyadicCube& a, const DyadicCube& b);
};

DyadicCube cube_containing(const Vector3d& p, int level);

struct DeltaSSet {
  PointCloud points;
  double delta = 0.0;
  double s = 0.0;
  double counting_constant = 0.0;
};

/// max over centers x (every point plus centers of occupied dyadic cubes at
/// levels 0..k, delta = 2^-k) and radii r = delta 2^j of
/// |P cap B(x, r)| (delta / r)^s. Throws not-a-net when two points are closer
/// than delta.
double verify_delta_s(const PointCloud& points, double delta, double s);

/// 8 (4 sqrt 3)^s: the ball-to-cube transfer constant for nets whose dyadic
/// counts obey |P cap Q| <= (d(Q)/delta)^s.
double frostman_dimensional_bound(double s);

struct OccupiedCube {
  DyadicCube cube;
  Vector3d point = Vector3d::Zero();
};

struct FrostmanLevelTrace {
  int level = 0;
  std::size_t cubes = 0;
  std::size_t thinned = 0;
  std::size_t survivors = 0;
  /// max over cubes of count / (d(Q)/delta)^s after the sweep of this level.
  double max_upper_ratio = 0.0;
  /// min over thinned cubes of count / (0.5 (d(Q)/delta)^s); 0 if none.
  double min_thinned_lower_ratio = 0.0;
};

struct FrostmanOptions {
  bool verify = true;
};

struct FrostmanResult {
  DeltaSSet net;
  std::vector<DyadicCube> survivor_cubes;
  PointCloud representatives;
  std::vector<DyadicCube> partition;
  /// partition index assigned to each input cube, in sorted input order.
  std::vector<std::size_t> assignment;
  DyadicCube top_cube;
  double content_certificate = 0.0;
  double ratio = 0.0;
  double dimensional_bound = 0.0;
  std::vector<FrostmanLevelTrace> trace;
  std::vector<std::string> failures;

  bool postconditions_hold() const { return failures.empty(); }
};

/// Level sweep over dyadic ancestors: over-full cubes are thinned to
/// floor((d(Q)/delta)^s) points, deleting in descending lexicographic order of
/// the representatives, until the survivors share one dyadic cube.
FrostmanResult discrete_frostman(std::vector<OccupiedCube> occupancy, double s, const FrostmanOptions& options = {});

/// One occupied cube per distinct level-k cube met by points + shift; the
/// first point seen in each cube is its representative. Sorted by corner.
std::vector<OccupiedCube> occupancy_from_points(const PointCloud& points, int level,
                                                const Vector3d& shift = Vector3d::Zero());

/// Text format: one cube per line, "k cx cy cz [px py pz]"; '#' starts a
/// comment. A missing point defaults to the cube center.
std::vector<OccupiedCube> read_occupancy(std::istream& in);
void write_occupancy(std::ostream& out, const std::vector<OccupiedCube>& occupancy);

/// CSV with header "x,y,z" and full-precision rows.
void write_points_csv(std::ostream& out, const PointCloud& points);
PointCloud read_points_csv(std::istream& in);

}  // namespace projlab
