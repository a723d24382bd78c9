#include "projlab/dnet.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace projlab {

namespace {

std::int64_t floor_index(double v) { return static_cast<std::int64_t>(std::floor(v)); }

std::uint64_t pack(std::int64_t a, std::int64_t b, std::int64_t c) {
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  constexpr std::uint64_t kMask = (std::uint64_t{1} << 21) - 1;
  return ((static_cast<std::uint64_t>(a + kOffset) & kMask) << 42) |
         ((static_cast<std::uint64_t>(b + kOffset) & kMask) << 21) | (static_cast<std::uint64_t>(c + kOffset) & kMask);
}

std::uint64_t cell_key(const Vector3d& p, double size) {
  return pack(floor_index(p.x() / size), floor_index(p.y() / size), floor_index(p.z() / size));
}

bool lex_greater(const Vector3d& a, const Vector3d& b) {
  if (a.x() != b.x()) return a.x() > b.x();
  if (a.y() != b.y()) return a.y() > b.y();
  return a.z() > b.z();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Points bucketed into hashed cubic cells of one size.
class CellGrid {
 public:
  CellGrid(const PointCloud& points, double size) : points_(points), size_(size) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[cell_key(points[i], size)].push_back(i);
  }

  /// First pair closer than `min_dist`, if any (requires min_dist <= size).
  bool find_close_pair(double min_dist, std::size_t& i_out, std::size_t& j_out) const {
    const double m2 = min_dist * min_dist;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      const std::int64_t cx = floor_index(p.x() / size_), cy = floor_index(p.y() / size_),
                         cz = floor_index(p.z() / size_);
      for (std::int64_t a = cx - 1; a <= cx + 1; ++a) {
        for (std::int64_t b = cy - 1; b <= cy + 1; ++b) {
          for (std::int64_t d = cz - 1; d <= cz + 1; ++d) {
            const auto it = cells_.find(pack(a, b, d));
            if (it == cells_.end()) continue;
            for (std::size_t j : it->second) {
              if (j > i && (points_[j] - p).squaredNorm() < m2) {
                i_out = i;
                j_out = j;
                return true;
              }
            }
          }
        }
      }
    }
    return false;
  }

 private:
  const PointCloud& points_;
  double size_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};


/// Exact closed-ball counts over a dense cell grid. Points are stored in cell
/// order with z fastest, so a run of cells along z is one offset range and
/// cells fully inside the ball are added without visiting their points.
class BallCounter {
 public:
  BallCounter(const PointCloud& points, double min_cell) {
    lo_ = points.front();
    hi_ = points.front();
    for (const auto& p : points) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    cell_ = std::max(min_cell, (hi_ - lo_).maxCoeff() / 128.0);
    for (int a = 0; a < 3; ++a) dims_[a] = static_cast<std::int64_t>(std::floor((hi_[a] - lo_[a]) / cell_)) + 1;
    std::vector<std::pair<std::int64_t, std::size_t>> order(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) order[i] = {index(cell_of(points[i])), i};
    std::sort(order.begin(), order.end());
    offsets_.assign(static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2] + 1), 0);
    for (const auto& [cell, i] : order) {
      ++offsets_[static_cast<std::size_t>(cell) + 1];
      sorted_.push_back(points[i]);
    }
    for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];
  }

  std::size_t count(const Vector3d& x, double r) const {
    const double r2 = r * r * (1.0 + 1e-12);
    const Vector3d far_corner = (x - lo_).cwiseAbs().cwiseMax((x - hi_).cwiseAbs());
    if (far_corner.squaredNorm() <= r2) return sorted_.size();
    const double margin = 1e-9 * cell_;
    std::size_t total = 0;
    const auto range = [&](int a, double half) {
      return std::make_pair(clamp_cell(a, std::floor((x[a] - half - lo_[a]) / cell_) - 1),
                            clamp_cell(a, std::floor((x[a] + half - lo_[a]) / cell_) + 1));
    };
    const auto [i0, i1] = range(0, r);
    for (std::int64_t i = i0; i <= i1; ++i) {
      const double ax = lo_.x() + static_cast<double>(i) * cell_;
      const double nx = std::max({0.0, ax - x.x(), x.x() - ax - cell_});
      const double fx = std::max(std::abs(x.x() - ax), std::abs(x.x() - ax - cell_)) + margin;
      if (nx * nx > r2) continue;
      const auto [j0, j1] = range(1, std::sqrt(r2 - nx * nx));
      for (std::int64_t j = j0; j <= j1; ++j) {
        const double ay = lo_.y() + static_cast<double>(j) * cell_;
        const double ny = std::max({0.0, ay - x.y(), x.y() - ay - cell_});
        const double near2 = nx * nx + ny * ny;
        if (near2 > r2) continue;
        const auto [z0, z1] = range(2, std::sqrt(r2 - near2));
        const std::int64_t base = (i * dims_[1] + j) * dims_[2];
        std::int64_t f0 = z1 + 1, f1 = z1;
        const double fy = std::max(std::abs(x.y() - ay), std::abs(x.y() - ay - cell_)) + margin;
        const double far2 = fx * fx + fy * fy;
        if (far2 < r * r) {
          const double zin = std::sqrt(r * r - far2) - margin;
          f0 = std::max(z0, static_cast<std::int64_t>(std::ceil((x.z() - zin - lo_.z()) / cell_)));
          f1 = std::min(z1, static_cast<std::int64_t>(std::floor((x.z() + zin - lo_.z()) / cell_)) - 1);
          if (f1 < f0) {
            f0 = z1 + 1;
            f1 = z1;
          }
        }
        const auto scan = [&](std::int64_t a, std::int64_t b) {
          if (b < a) return;
          for (std::size_t p = offsets_[static_cast<std::size_t>(base + a)];
               p < offsets_[static_cast<std::size_t>(base + b + 1)]; ++p) {
            total += (sorted_[p] - x).squaredNorm() <= r2;
          }
        };
        if (f0 > z1) {
          scan(z0, z1);
        } else {
          scan(z0, f0 - 1);
          total += offsets_[static_cast<std::size_t>(base + f1 + 1)] - offsets_[static_cast<std::size_t>(base + f0)];
          scan(f1 + 1, z1);
        }
      }
    }
    return total;
  }

 private:
  Eigen::Matrix<std::int64_t, 3, 1> cell_of(const Vector3d& p) const {
    Eigen::Matrix<std::int64_t, 3, 1> c;
    for (int a = 0; a < 3; ++a) c[a] = clamp_cell(a, std::floor((p[a] - lo_[a]) / cell_));
    return c;
  }
  std::int64_t clamp_cell(int a, double v) const {
    return static_cast<std::int64_t>(std::clamp(v, 0.0, static_cast<double>(dims_[a] - 1)));
  }
  std::int64_t index(const Eigen::Matrix<std::int64_t, 3, 1>& c) const { return (c[0] * dims_[1] + c[1]) * dims_[2] + c[2]; }

  Vector3d lo_, hi_;
  double cell_ = 1.0;
  std::int64_t dims_[3] = {1, 1, 1};
  std::vector<std::size_t> offsets_;
  PointCloud sorted_;
};

}  // namespace

DyadicCube DyadicCube::ancestor(int coarser_level) const {
  if (coarser_level > level) throw Error(ErrorCode::invalid_argument, "ancestor level must not be finer");
  const int shift = level - coarser_level;
  if (shift > 30) throw Error(ErrorCode::invalid_argument, "ancestor level out of range");
  DyadicCube out;
  out.level = coarser_level;
  out.corner = Eigen::Vector3i(corner.x() >> shift, corner.y() >> shift, corner.z() >> shift);
  return out;
}

bool DyadicCube::contains(const Vector3d& p) const {
  const double h = side();
  for (int i = 0; i < 3; ++i) {
    const double lo = corner[i] * h;
    if (p[i] < lo || p[i] >= lo + h) return false;
  }
  return true;
}

bool operator<(const DyadicCube& a, const DyadicCube& b) {
  if (a.level != b.level) return a.level < b.level;
  for (int i = 0; i < 3; ++i) {
    if (a.corner[i] != b.corner[i]) return a.corner[i] < b.corner[i];
  }
  return false;
}

DyadicCube cube_containing(const Vector3d& p, int level) {
  const double scale = std::ldexp(1.0, level);
  DyadicCube q;
  q.level = level;
  for (int i = 0; i < 3; ++i) q.corner[i] = static_cast<int>(std::floor(p[i] * scale));
  return q;
}

double verify_delta_s(const PointCloud& points, double delta, double s) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  if (!(s > 0.0)) throw Error(ErrorCode::invalid_argument, "s must be positive");
  if (points.empty()) return 0.0;

  {
    const CellGrid grid(points, delta);
    std::size_t i = 0, j = 0;
    if (grid.find_close_pair(delta * (1.0 - 1e-9), i, j)) {
      throw Error(ErrorCode::not_a_net, "points " + std::to_string(i) + " and " + std::to_string(j) +
                                            " are closer than delta (distance " +
                                            format_double((points[i] - points[j]).norm()) + ")");
    }
  }

  const int k = static_cast<int>(std::ceil(-std::log2(delta) - 1e-9));
  std::set<DyadicCube> cube_set;
  for (const auto& p : points) {
    for (int l = 0; l <= k; ++l) cube_set.insert(cube_containing(p, l));
  }
  PointCloud centers = points;
  for (const auto& q : cube_set) centers.push_back(q.center());

  const BallCounter counter(points, delta);
  Vector3d lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::vector<double> radii;
  for (double r = delta;; r *= 2.0) {
    radii.push_back(r);
    if (r > 2.0 * (hi - lo).norm() + delta) break;
  }

  // Best-first branch and bound: a dyadic group of centers with circumradius e
  // never beats the count of B(group center, r + e).
  struct Group {
    double bound;
    std::size_t radius;
    DyadicCube cube;
    std::vector<std::uint32_t> members;
    bool operator<(const Group& o) const { return bound < o.bound; }
  };
  std::priority_queue<Group> queue;
  const auto push = [&](std::size_t ri, const DyadicCube& q, std::vector<std::uint32_t> members) {
    const double r = radii[ri];
    const double inflated = r + 0.5 * q.diameter();
    const double b = static_cast<double>(counter.count(q.center(), inflated)) * std::pow(delta / r, s);
    queue.push({b, ri, q, std::move(members)});
  };
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const int level = std::clamp(static_cast<int>(std::floor(std::log2(4.0 / radii[ri]))), -20, k + 1);
    std::map<DyadicCube, std::vector<std::uint32_t>> roots;
    for (std::size_t c = 0; c < centers.size(); ++c)
      roots[cube_containing(centers[c], level)].push_back(static_cast<std::uint32_t>(c));
    for (auto& [q, members] : roots) push(ri, q, std::move(members));
  }

  double best = 0.0;
  while (!queue.empty() && queue.top().bound > best) {
    Group g = queue.top();
    queue.pop();
    const double r = radii[g.radius];
    if (g.members.size() <= 8 || g.cube.level > k + 1) {
      for (auto c : g.members)
        best = std::max(best, static_cast<double>(counter.count(centers[c], r)) * std::pow(delta / r, s));
      continue;
    }
    std::map<DyadicCube, std::vector<std::uint32_t>> children;
    for (auto c : g.members) children[cube_containing(centers[c], g.cube.level + 1)].push_back(c);
    for (auto& [q, members] : children) push(g.radius, q, std::move(members));
  }
  return best;
}

double frostman_dimensional_bound(double s) { return 8.0 * std::pow(4.0 * std::sqrt(3.0), s); }

FrostmanResult discrete_frostman(std::vector<OccupiedCube> occupancy, double s, const FrostmanOptions& options) {
  if (!(s > 0.0)) throw Error(ErrorCode::invalid_argument, "Frostman exponent s must be positive");
  if (occupancy.empty()) throw Error(ErrorCode::invalid_argument, "occupancy is empty");
  const int k = occupancy.front().cube.level;
  for (const auto& o : occupancy) {
    if (o.cube.level != k) throw Error(ErrorCode::invalid_argument, "occupancy cubes are at mixed levels");
    const double tol = 1e-9 * o.cube.side();
    const Vector3d lo = o.cube.corner.cast<double>() * o.cube.side();
    if (((o.point - lo).array() < -tol).any() || ((o.point - lo).array() > o.cube.side() + tol).any())
      throw Error(ErrorCode::invalid_argument, "representative point lies outside its cube");
  }
  std::sort(occupancy.begin(), occupancy.end(),
            [](const OccupiedCube& a, const OccupiedCube& b) { return a.cube < b.cube; });
  for (std::size_t i = 1; i < occupancy.size(); ++i) {
    if (occupancy[i].cube == occupancy[i - 1].cube)
      throw Error(ErrorCode::invalid_argument, "occupancy lists a cube twice");
  }

  const std::size_t n = occupancy.size();
  const double delta = std::ldexp(1.0, -k);
  std::vector<char> alive(n, 1);
  FrostmanResult out;
  out.top_cube = occupancy.front().cube;

  auto band = [&](int level) { return std::pow(std::sqrt(3.0) * std::ldexp(1.0, k - level), s); };

  bool single = n == 1;
  for (int l = k - 1; !single; --l) {
    if (l < -30) throw Error(ErrorCode::size_limit, "occupancy does not fit in any dyadic cube");
    std::map<DyadicCube, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i]) groups[occupancy[i].cube.ancestor(l)].push_back(i);
    }
    const double bound = band(l);
    FrostmanLevelTrace tr;
    tr.level = l;
    tr.cubes = groups.size();
    double min_lower = std::numeric_limits<double>::infinity();
    for (auto& [cube, members] : groups) {
      if (static_cast<double>(members.size()) > bound) {
        const auto target = static_cast<std::size_t>(std::floor(bound));
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
          return lex_greater(occupancy[a].point, occupancy[b].point);
        });
        const std::size_t remove = members.size() - target;
        for (std::size_t r = 0; r < remove; ++r) alive[members[r]] = 0;
        members.erase(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(remove));
        ++tr.thinned;
        min_lower = std::min(min_lower, static_cast<double>(members.size()) / (0.5 * bound));
      }
      tr.max_upper_ratio = std::max(tr.max_upper_ratio, static_cast<double>(members.size()) / bound);
      tr.survivors += members.size();
    }
    tr.min_thinned_lower_ratio = tr.thinned > 0 ? min_lower : 0.0;
    out.trace.push_back(tr);
    if (groups.size() == 1) {
      single = true;
      out.top_cube = groups.begin()->first;
    }
  }

  // Maximal cubes with |P cap Q| >= (1/2)(side/delta)^s.
  const int top = out.top_cube.level;
  std::vector<std::map<DyadicCube, std::size_t>> alive_count(static_cast<std::size_t>(k - top + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    for (int l = top; l <= k; ++l) ++alive_count[static_cast<std::size_t>(l - top)][occupancy[i].cube.ancestor(l)];
  }
  std::vector<DyadicCube> chosen(n);
  std::vector<char> found(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int l = top; l <= k; ++l) {
      const DyadicCube q = occupancy[i].cube.ancestor(l);
      const auto& counts = alive_count[static_cast<std::size_t>(l - top)];
      const auto it = counts.find(q);
      const double need = 0.5 * std::pow(std::ldexp(1.0, k - l), s);
      if (it != counts.end() && static_cast<double>(it->second) >= need) {
        chosen[i] = q;
        found[i] = 1;
        break;
      }
    }
    if (!found[i]) out.failures.push_back("input cube without a partition cube");
  }
  std::set<DyadicCube> part(chosen.begin(), chosen.end());
  out.partition.assign(part.begin(), part.end());
  for (std::size_t i = 0; i < n; ++i) {
    out.assignment.push_back(static_cast<std::size_t>(
        std::lower_bound(out.partition.begin(), out.partition.end(), chosen[i]) - out.partition.begin()));
  }
  for (const auto& q : out.partition) {
    out.content_certificate += std::pow(q.diameter(), s);
    for (int l = top; l < q.level; ++l) {
      if (part.count(q.ancestor(l))) out.failures.push_back("partition cubes are nested");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    out.survivor_cubes.push_back(occupancy[i].cube);
    out.representatives.push_back(occupancy[i].point);
    out.net.points.push_back(occupancy[i].cube.center());
  }
  out.net.delta = delta;
  out.net.s = s;
  const double size = static_cast<double>(out.net.points.size());
  out.ratio = size * std::pow(delta, s) / out.content_certificate;
  out.dimensional_bound = frostman_dimensional_bound(s);

  const double lower = 0.5 * std::pow(delta, -s) * std::pow(std::sqrt(3.0), -s) * out.content_certificate;
  if (size < lower * (1.0 - 1e-12)) out.failures.push_back("cardinality below the content bound");
  if (options.verify) {
    out.net.counting_constant = verify_delta_s(out.net.points, delta, s);
    if (out.net.counting_constant > out.dimensional_bound) out.failures.push_back("counting constant too large");
  }
  return out;
}

std::vector<OccupiedCube> occupancy_from_points(const PointCloud& points, int level, const Vector3d& shift) {
  std::map<DyadicCube, Vector3d> first;
  for (const auto& p : points) {
    const Vector3d q = p + shift;
    first.emplace(cube_containing(q, level), q);
  }
  std::vector<OccupiedCube> out;
  out.reserve(first.size());
  for (const auto& [cube, point] : first) out.push_back({cube, point});
  return out;
}

std::vector<OccupiedCube> read_occupancy(std::istream& in) {
  std::vector<OccupiedCube> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw Error(ErrorCode::invalid_argument, "occupancy line " + std::to_string(lineno) + ": bad number");
    if (v.empty()) continue;
    if (v.size() != 4 && v.size() != 7)
      throw Error(ErrorCode::invalid_argument,
                  "occupancy line " + std::to_string(lineno) + ": expected 'k cx cy cz [px py pz]'");
    OccupiedCube o;
    o.cube.level = static_cast<int>(v[0]);
    o.cube.corner = Eigen::Vector3i(static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3]));
    o.point = v.size() == 7 ? Vector3d(v[4], v[5], v[6]) : o.cube.center();
    out.push_back(o);
  }
  return out;
}

void write_occupancy(std::ostream& out, const std::vector<OccupiedCube>& occupancy) {
  for (const auto& o : occupancy) {
    out << o.cube.level << ' ' << o.cube.corner.x() << ' ' << o.cube.corner.y() << ' ' << o.cube.corner.z() << ' '
        << format_double(o.point.x()) << ' ' << format_double(o.point.y()) << ' ' << format_double(o.point.z())
        << '\n';
  }
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  out << "x,y,z\n";
  for (const auto& p : points) {
    out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << '\n';
  }
}

PointCloud read_points_csv(std::istream& in) {
  PointCloud out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "x,y,z") continue;
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream ss(line);
    Vector3d p;
    if (!(ss >> p.x() >> p.y() >> p.z()))
      throw Error(ErrorCode::invalid_argument, "point CSV line " + std::to_string(lineno) + " is malformed");
    out.push_back(p);
  }
  return out;
}

}  // namespace projlab
