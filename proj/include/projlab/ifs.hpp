#pragma once

#include "projlab/common.hpp"
#include "projlab/project.hpp"

#include <optional>
#include <string>
#include <vector>

namespace projlab {

/// x -> ratio * x + translation.
template <int Dim>
struct Similitude {
  double ratio = 0.5;
  Point<double, Dim> translation = Point<double, Dim>::Zero();

  template <typename Derived>
  Point<double, Dim> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return ratio * x + translation;
  }
  Point<double, Dim> fixed_point() const { return translation / (1.0 - ratio); }
};

/// A rotation-free iterated function system whose maps send B(0, 1/2) into
/// itself.
template <int Dim>
class SimilitudeSystem {
 public:
  static constexpr int dimension = Dim;

  explicit SimilitudeSystem(std::vector<Similitude<Dim>> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw Error(ErrorCode::invalid_argument, "similitude system has no maps");
    for (const auto& m : maps_) {
      if (!(m.ratio > 0.0 && m.ratio < 1.0))
        throw Error(ErrorCode::invalid_argument, "similitude ratio must lie in (0, 1)");
      if (!m.translation.allFinite()) throw Error(ErrorCode::invalid_argument, "similitude translation is not finite");
      if (m.ratio / 2.0 + m.translation.norm() > 0.5 + 1e-12)
        throw Error(ErrorCode::invalid_argument, "similitude does not map B(0, 1/2) into itself");
    }
  }

  const std::vector<Similitude<Dim>>& maps() const { return maps_; }
  const Similitude<Dim>& operator[](std::size_t i) const { return maps_[i]; }
  std::size_t size() const { return maps_.size(); }
  std::vector<double> ratios() const {
    std::vector<double> r;
    for (const auto& m : maps_) r.push_back(m.ratio);
    return r;
  }

 private:
  std::vector<Similitude<Dim>> maps_;
};

using System1 = SimilitudeSystem<1>;
using System2 = SimilitudeSystem<2>;
using System3 = SimilitudeSystem<3>;

/// The s >= 0 with sum r_j^s = 1, by bisection to 1e-12.
double similarity_dimension(const std::vector<double>& ratios);
template <int Dim>
double similarity_dimension(const SimilitudeSystem<Dim>& system) {
  return similarity_dimension(system.ratios());
}

using Word = std::vector<int>;

/// psi_word(B(0, 1/2)) for psi_word = psi_{w1} o ... o psi_{wn}.
template <int Dim>
struct Ball {
  Point<double, Dim> center = Point<double, Dim>::Zero();
  double diameter = 1.0;
  Word word;
};

template <int Dim>
struct BallCollection {
  int generation = 0;
  std::vector<Ball<Dim>> balls;
};

inline constexpr std::size_t kDefaultBallCap = std::size_t{1} << 22;

inline std::size_t checked_power(std::size_t q, int n, std::size_t cap) {
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > cap / q) throw Error(ErrorCode::size_limit, "generation exceeds the ball cap");
    total *= q;
  }
  if (total > cap) throw Error(ErrorCode::size_limit, "generation exceeds the ball cap");
  return total;
}

/// Generation-n balls in lexicographic word order.
template <int Dim>
BallCollection<Dim> generation_balls(const SimilitudeSystem<Dim>& system, int n, std::size_t cap = kDefaultBallCap) {
  if (n < 0) throw Error(ErrorCode::invalid_argument, "generation must be nonnegative");
  checked_power(system.size(), n, cap);
  BallCollection<Dim> out;
  out.balls.push_back({});
  for (int g = 0; g < n; ++g) {
    std::vector<Ball<Dim>> next;
    next.reserve(out.balls.size() * system.size());
    for (std::size_t j = 0; j < system.size(); ++j) {
      const auto& m = system[j];
      for (const auto& b : out.balls) {
        Ball<Dim> c;
        c.center = m(b.center);
        c.diameter = m.ratio * b.diameter;
        c.word.reserve(b.word.size() + 1);
        c.word.push_back(static_cast<int>(j));
        c.word.insert(c.word.end(), b.word.begin(), b.word.end());
        next.push_back(std::move(c));
      }
    }
    out.balls = std::move(next);
  }
  out.generation = n;
  return out;
}

/// Generation-depth ball centers psi_word(0).
template <int Dim>
std::vector<Point<double, Dim>> attractor_points(const SimilitudeSystem<Dim>& system, int depth,
                                                 std::size_t cap = kDefaultBallCap) {
  const auto balls = generation_balls(system, depth, cap);
  std::vector<Point<double, Dim>> out;
  out.reserve(balls.balls.size());
  for (const auto& b : balls.balls) out.push_back(b.center);
  return out;
}

/// psi_word(p) for the fixed point p of the first map: points of the
/// attractor itself, in lexicographic word order.
template <int Dim>
std::vector<Point<double, Dim>> word_points(const SimilitudeSystem<Dim>& system, int depth,
                                            std::size_t cap = kDefaultBallCap) {
  const auto balls = generation_balls(system, depth, cap);
  const Point<double, Dim> p = system[0].fixed_point();
  std::vector<Point<double, Dim>> out;
  out.reserve(balls.balls.size());
  for (const auto& b : balls.balls) out.push_back(b.center + b.diameter * p);
  return out;
}

struct SeparationResult {
  bool separated = true;
  double min_gap = std::numeric_limits<double>::infinity();
};

/// Disjointness of the closed generation-1 balls: min over pairs of
/// |w_i - w_j| - (r_i + r_j) / 2, required to be positive.
template <int Dim>
SeparationResult very_strong_separation(const SimilitudeSystem<Dim>& system) {
  SeparationResult out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      const double gap = (system[i].translation - system[j].translation).norm() -
                         0.5 * (system[i].ratio + system[j].ratio);
      out.min_gap = std::min(out.min_gap, gap);
    }
  }
  out.separated = out.min_gap > 0.0;
  return out;
}

/// psi_{j,V}(x) = r_j x + pi_V(w_j) in the basis plane_basis(normal).
System2 project_system(const System3& system, const Vector3d& normal);

template <int Dim>
struct DistinctMaps {
  SimilitudeSystem<Dim> system;
  std::vector<std::size_t> multiplicity;
};

/// Collapses maps with equal ratio and translation (to 1e-12), keeping the
/// first occurrence.
template <int Dim>
DistinctMaps<Dim> distinct_maps(const SimilitudeSystem<Dim>& system) {
  std::vector<Similitude<Dim>> maps;
  std::vector<std::size_t> mult;
  for (const auto& m : system.maps()) {
    bool found = false;
    for (std::size_t k = 0; k < maps.size() && !found; ++k) {
      if (std::abs(maps[k].ratio - m.ratio) <= 1e-12 && (maps[k].translation - m.translation).norm() <= 1e-12) {
        ++mult[k];
        found = true;
      }
    }
    if (!found) {
      maps.push_back(m);
      mult.push_back(1);
    }
  }
  return {SimilitudeSystem<Dim>(std::move(maps)), std::move(mult)};
}

/// Box-dimension estimate of the attractor from generation-n centers of the
/// distinct maps, with n the deepest generation within max_points; scales run
/// from 4 r_max^n (rounded up to a power of 2) to 1/2.
template <int Dim>
BoxDimEstimate attractor_box_dimension(const SimilitudeSystem<Dim>& system, std::size_t max_points = 1u << 16) {
  const auto distinct = distinct_maps(system).system;
  int depth = 0;
  std::size_t count = 1;
  while (distinct.size() > 1 && count * distinct.size() <= max_points) {
    count *= distinct.size();
    ++depth;
  }
  double rmax = 0.0;
  for (double r : distinct.ratios()) rmax = std::max(rmax, r);
  // Two dyadic steps above the finest ball size, where the finite sample
  // stops resolving the attractor.
  const double lo = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(std::pow(rmax, depth)))) + 2);
  const double hi = std::max(0.5, 4.0 * lo);
  return box_dimension<Dim>(attractor_points(distinct, depth), lo, hi);
}

struct ExtractionResult {
  int generation = 0;
  std::vector<Ball<2>> selection;
  double s_tilde = 0.0;
  double target = 0.0;
  bool converged = false;
  /// s_tilde per generation tried.
  std::vector<double> trace;
};

/// Greedy disjoint subfamily of B_{n,V} (largest diameter first, ties in word
/// order, positive gaps) for n = 1, 2, ... until its similarity dimension
/// reaches target - epsilon. The target defaults to the attractor box
/// dimension estimate.
ExtractionResult extract_separated_subsystem(const System2& plane_system, double epsilon, int depth_cap = 6,
                                             std::optional<double> target = std::nullopt,
                                             std::size_t cap = kDefaultBallCap);

/// Pairwise-disjoint greedy selection used by the extraction.
std::vector<Ball<2>> greedy_disjoint(std::vector<Ball<2>> balls);

/// Largest alpha with B cap X(y, axis, alpha) empty for all y in B' over the
/// two closed balls, scale-free in the ball geometry.
double pair_alpha(const Vector3d& c1, double r1, const Vector3d& c2, double r2, const Vector3d& axis);

struct BlpResult {
  System3 system;
  double alpha = 0.0;
  ExtractionResult extraction;
  std::vector<Word> lifted_words;
  /// Cone separation over distinct balls of generations 1..3.
  bool cone_separation_clean = false;
  std::size_t cone_pairs_checked = 0;
  bool stays_off_consistent = false;
};

/// Lifts the extracted planar selection to generation-n balls of the 3D
/// system (smallest preimage word) and finds alpha by bisection to 1e-6.
BlpResult build_blp_subset(const System3& system, const Vector3d& normal, double epsilon, int depth_cap = 6,
                           std::optional<double> target = std::nullopt, std::uint64_t seed = 1);

/// Declarative form used by configs and built-ins; dim is 1, 2 or 3.
struct SystemSpec {
  std::string name;
  int dim = 3;
  std::vector<double> ratios;
  std::vector<std::vector<double>> translations;
};

/// "cantor3", "cantor3_cube", "fourcorner_plane", "dust08".
SystemSpec builtin_system(const std::string& name);
std::vector<std::string> builtin_system_names();

template <int Dim>
SimilitudeSystem<Dim> make_system(const SystemSpec& spec) {
  if (spec.dim > Dim) throw Error(ErrorCode::config, "system '" + spec.name + "' has dimension above the target");
  if (spec.ratios.size() != spec.translations.size())
    throw Error(ErrorCode::config, "system '" + spec.name + "' lists unequal ratios and translations");
  std::vector<Similitude<Dim>> maps;
  for (std::size_t i = 0; i < spec.ratios.size(); ++i) {
    if (spec.translations[i].size() != static_cast<std::size_t>(spec.dim))
      throw Error(ErrorCode::config, "system '" + spec.name + "' translation has the wrong length");
    Similitude<Dim> m;
    m.ratio = spec.ratios[i];
    for (int a = 0; a < spec.dim; ++a) m.translation[a] = spec.translations[i][static_cast<std::size_t>(a)];
    maps.push_back(m);
  }
  return SimilitudeSystem<Dim>(std::move(maps));
}

}  // namespace projlab
