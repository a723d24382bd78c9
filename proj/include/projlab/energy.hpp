#pragma once

#include "projlab/common.hpp"
#include "projlab/curve.hpp"
#include "projlab/ifs.hpp"

#include <complex>
#include <iosfwd>
#include <vector>

namespace projlab {

template <int Dim>
struct Atom {
  Point<double, Dim> point = Point<double, Dim>::Zero();
  double weight = 1.0;
};

/// Finitely many weighted atoms in R^Dim. Weights are positive and finite.
template <int Dim>
class DiscreteMeasure {
 public:
  static constexpr int dimension = Dim;

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom<Dim>> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight))
        throw Error(ErrorCode::invalid_argument, "atom weights must be positive and finite");
      if (!a.point.allFinite()) throw Error(ErrorCode::invalid_argument, "atom position is not finite");
    }
  }

  const std::vector<Atom<Dim>>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight;
    return m;
  }

 private:
  std::vector<Atom<Dim>> atoms_;
};

using Measure1 = DiscreteMeasure<1>;
using Measure2 = DiscreteMeasure<2>;
using Measure3 = DiscreteMeasure<3>;

/// Equal weights summing to `mass`.
template <int Dim>
DiscreteMeasure<Dim> uniform_measure(const std::vector<Point<double, Dim>>& points, double mass = 1.0) {
  std::vector<Atom<Dim>> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) atoms.push_back({p, mass / static_cast<double>(points.size())});
  return DiscreteMeasure<Dim>(std::move(atoms));
}

/// Natural self-similar measure at a finite generation: an atom at each ball
/// center with weight diam^s, s the similarity dimension.
template <int Dim>
DiscreteMeasure<Dim> attractor_measure(const SimilitudeSystem<Dim>& system, int depth,
                                       std::size_t cap = kDefaultBallCap) {
  const double s = similarity_dimension(system);
  const auto balls = generation_balls(system, depth, cap);
  std::vector<Atom<Dim>> atoms;
  atoms.reserve(balls.balls.size());
  for (const auto& b : balls.balls) atoms.push_back({b.center, std::pow(b.diameter, s)});
  return DiscreteMeasure<Dim>(std::move(atoms));
}

/// Minimum distance between distinct atoms; infinity below two atoms.
template <int Dim>
double min_atom_distance(const DiscreteMeasure<Dim>& mu) {
  double best = std::numeric_limits<double>::infinity();
  const auto& a = mu.atoms();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) best = std::min(best, (a[i].point - a[j].point).norm());
  return best;
}

namespace detail {

template <int Dim>
double energy_row(const std::vector<Atom<Dim>>& a, std::size_t i, double t) {
  double sum = 0.0;
  for (std::size_t j = i + 1; j < a.size(); ++j) {
    const double d = (a[i].point - a[j].point).norm();
    if (d == 0.0) throw Error(ErrorCode::invalid_argument, "coincident atoms in energy; merge weights first");
    sum += a[j].weight * (t == 0.0 ? 1.0 : std::pow(d, -t));
  }
  return a[i].weight * sum;
}

template <int Dim>
double energy_serial(const DiscreteMeasure<Dim>& mu, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) total += energy_row(mu.atoms(), i, t);
  return 2.0 * total;
}

inline void require_energy_exponent(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::invalid_argument, "energy exponent must be nonnegative");
}

}  // namespace detail

/// Sum over ordered pairs i != j of w_i w_j |x_i - x_j|^-t. The diagonal is
/// dropped; t = 0 gives the off-diagonal mass.
template <int Dim>
double t_energy(const DiscreteMeasure<Dim>& mu, double t) {
  detail::require_energy_exponent(t);
  std::vector<double> rows(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) { rows[i] = detail::energy_row(mu.atoms(), i, t); });
  double total = 0.0;
  for (double r : rows) total += r;
  return 2.0 * total;
}

/// Merges atoms whose positions agree to within tol * max(1, |x|), adding
/// weights. The result is sorted by first coordinate.
template <int Dim>
DiscreteMeasure<Dim> merge_coincident(std::vector<Atom<Dim>> atoms, double tol = 1e-12) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom<Dim>& a, const Atom<Dim>& b) {
    for (int k = 0; k < Dim; ++k) {
      if (a.point[k] != b.point[k]) return a.point[k] < b.point[k];
    }
    return false;
  });
  std::vector<Atom<Dim>> out;
  for (const auto& a : atoms) {
    const double eps = tol * std::max(1.0, a.point.norm());
    bool merged = false;
    for (auto it = out.rbegin(); it != out.rend() && a.point[0] - it->point[0] <= eps; ++it) {
      if ((it->point - a.point).norm() <= eps) {
        it->weight += a.weight;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(a);
  }
  return DiscreteMeasure<Dim>(std::move(out));
}

/// rho_theta push-forward, coincident images merged.
Measure1 pushforward_line(const Measure3& mu, const Curve3& curve, double theta);
/// pi_theta push-forward in the frame basis of the plane gamma(theta)^perp.
Measure2 pushforward_plane(const Measure3& mu, const Curve3& curve, double theta);

/// mu1 x mu2 with the planar factor in the first two coordinates.
Measure3 product_measure(const Measure2& mu1, const Measure1& mu2);

struct ProjectedEnergyAverage {
  ProjectionKind kind = ProjectionKind::line;
  double t = 0.0;
  /// Grid mean of I_t over the theta set.
  double average = 0.0;
  double base_energy = 0.0;
  double ratio = 0.0;
  std::size_t nodes = 0;
  /// t < 1/2 for lines, t < 1 for planes; outside, the run is exploratory.
  bool admissible = false;
};

/// Mean of I_t(mu_theta) over a midpoint grid of the theta set with the given
/// step, against I_t(mu).
ProjectedEnergyAverage avg_projected_energy(const Measure3& mu, const Curve3& curve, double t,
                                            const std::vector<Interval>& theta_set, ProjectionKind kind,
                                            double step);

/// sum_j w_j exp(-2 pi i x_j . xi).
template <int Dim>
std::complex<double> fourier(const DiscreteMeasure<Dim>& mu, const Point<double, Dim>& xi) {
  double re = 0.0, im = 0.0;
  for (const auto& a : mu.atoms()) {
    const double phase = -kTwoPi * a.point.dot(xi);
    re += a.weight * std::cos(phase);
    im += a.weight * std::sin(phase);
  }
  return {re, im};
}

struct SphericalAverage {
  double r = 0.0;
  std::size_t n_theta = 0;
  /// Trapezoid estimate of the integral over [0, 2 pi) of |mu^(r cos, r sin)|^2.
  double value = 0.0;
  /// value * r^t / I_t(mu), when t was supplied.
  double t = 0.0;
  double bound_ratio = 0.0;
};

SphericalAverage spherical_average(const Measure2& mu, double r, std::size_t n_theta);
/// Also reports the bound ratio against a precomputed I_t(mu).
SphericalAverage spherical_average(const Measure2& mu, double r, std::size_t n_theta, double t, double energy_t);

/// CSV with header "x[,y[,z]],weight".
template <int Dim>
void write_measure_csv(std::ostream& out, const DiscreteMeasure<Dim>& mu);
template <int Dim>
DiscreteMeasure<Dim> read_measure_csv(std::istream& in);

}  // namespace projlab
