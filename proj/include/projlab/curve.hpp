#pragma once

#include "projlab/common.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace projlab {

/// A C^3 curve on the unit sphere with optional analytic derivatives. Missing
/// derivatives fall back to central differences taken from the highest
/// analytic derivative below the requested order.
template <typename Scalar>
class Curve {
 public:
  using Vec = Vector3<Scalar>;
  using Map = std::function<Vec(Scalar)>;

  Curve() = default;
  Curve(std::string name, Interval domain, Map eval, Map d1 = {}, Map d2 = {}, Map d3 = {})
      : name_(std::move(name)), domain_(domain), maps_{std::move(eval), std::move(d1), std::move(d2), std::move(d3)} {
    if (!maps_[0]) throw Error(ErrorCode::invalid_curve, "curve '" + name_ + "' has no evaluator");
    if (!(domain_.hi > domain_.lo)) throw Error(ErrorCode::invalid_curve, "curve domain must have positive length");
  }

  const std::string& name() const { return name_; }
  const Interval& domain() const { return domain_; }

  bool has_analytic(int order) const { return order >= 0 && order <= 3 && static_cast<bool>(maps_[order]); }

  /// Highest k such that orders 0..k are all analytic.
  int analytic_order() const {
    int k = 0;
    while (k < 3 && maps_[k + 1]) ++k;
    return k;
  }

  Vec operator()(Scalar theta) const { return maps_[0](theta); }

  /// Derivative of the given order (0..3). No domain check: evaluators are
  /// expected to extend smoothly a little past the domain ends.
  Vec derivative(int order, Scalar theta) const {
    if (order < 0 || order > 3) throw Error(ErrorCode::invalid_argument, "derivative order must be in 0..3");
    if (maps_[order]) return maps_[order](theta);
    int base = order - 1;
    while (!maps_[base]) --base;
    return finite_difference(base, order - base, theta);
  }

  Vec d1(Scalar theta) const { return derivative(1, theta); }
  Vec d2(Scalar theta) const { return derivative(2, theta); }
  Vec d3(Scalar theta) const { return derivative(3, theta); }

  /// Central-difference step used for an m-th difference (m = 1, 2, 3).
  static Scalar fd_step(int m) {
    switch (m) {
      case 1: return Scalar(1e-5);
      case 2: return Scalar(1e-4);
      default: return Scalar(1e-3);
    }
  }

  /// m-th central difference of derivative `base`, with an explicit step.
  Vec finite_difference(int base, int m, Scalar theta, Scalar h) const {
    const auto& f = maps_[base];
    switch (m) {
      case 1: return (f(theta + h) - f(theta - h)) / (Scalar(2) * h);
      case 2: return (f(theta + h) - Scalar(2) * f(theta) + f(theta - h)) / (h * h);
      case 3:
        return (f(theta + Scalar(2) * h) - Scalar(2) * f(theta + h) + Scalar(2) * f(theta - h) - f(theta - Scalar(2) * h)) /
               (Scalar(2) * h * h * h);
      default: throw Error(ErrorCode::invalid_argument, "difference order must be in 1..3");
    }
  }

  Vec finite_difference(int base, int m, Scalar theta) const { return finite_difference(base, m, theta, fd_step(m)); }

  /// Copy of this curve with analytic derivatives above `order` removed.
  Curve truncated(int order) const {
    Curve c = *this;
    for (int k = order + 1; k <= 3; ++k) c.maps_[k] = nullptr;
    c.name_ = name_ + "/fd" + std::to_string(order);
    return c;
  }

 private:
  std::string name_;
  Interval domain_;
  Map maps_[4];
};

using Curve3 = Curve<double>;

/// Normalized cone curve (cos t, sin t, 1)/sqrt(2) on [0, 2*pi].
Curve3 cone_curve();
/// Great circle (cos t, sin t, 0) on [0, 2*pi]; degenerate for the span test.
Curve3 great_circle_curve();

/// One term of a trigonometric coefficient table: cos(f t) * a + sin(f t) * b.
struct TrigTerm {
  double frequency = 0.0;
  Vector3d cos_amplitude = Vector3d::Zero();
  Vector3d sin_amplitude = Vector3d::Zero();
};

/// Curve u(t)/|u(t)| with u a finite trigonometric sum; derivatives are exact.
Curve3 trig_curve(const std::string& name, const std::vector<TrigTerm>& terms, Interval domain);

/// Built-in curve by identifier ("cone", "greatcircle").
Curve3 builtin_curve(const std::string& id);

/// Derivatives 0..3 of f = u/|u| given u and its first three derivatives.
struct NormalizedJet {
  Vector3d f, f1, f2, f3;
};
NormalizedJet normalized_derivatives(const Vector3d& u, const Vector3d& u1, const Vector3d& u2, const Vector3d& u3);

template <typename Scalar>
Scalar triple_at(const Curve<Scalar>& curve, Scalar theta) {
  const auto g = curve(theta);
  return g.dot(curve.d1(theta).cross(curve.d2(theta)));
}

struct NonDegeneracyCertificate {
  double grid_step = 0.0;
  double min_triple = 0.0;
  double argmin_theta = 0.0;
  std::size_t nodes = 0;

  bool passes() const { return min_triple > 0.0; }
};

NonDegeneracyCertificate check_nondegeneracy(const Curve3& curve, double grid_step);

/// The curve eta = (gamma x gamma')/|gamma x gamma'|.
Curve3 eta_curve(const Curve3& curve);

/// Max over the grid of |eta''.(eta x eta') - |gamma'|^-3 (gamma.(gamma' x gamma''))^2|.
double verify_eta_identity(const Curve3& curve, double grid_step);

struct FrameSample {
  double theta = 0.0;
  Vector3d gamma, dgamma, ddgamma, eta;
  Eigen::Matrix<double, 3, 2> plane_basis;
};

FrameSample frame(const Curve3& curve, double theta);

inline void require_in_domain(const Interval& domain, double theta) {
  if (!domain.contains(theta, 1e-12)) {
    throw Error(ErrorCode::domain, "theta " + std::to_string(theta) + " outside curve domain [" +
                                       std::to_string(domain.lo) + ", " + std::to_string(domain.hi) + "]");
  }
}

/// rho_theta(x) = gamma(theta) . x
template <typename Scalar, typename Derived>
Scalar rho(const Curve<Scalar>& curve, Scalar theta, const Eigen::MatrixBase<Derived>& x) {
  require_in_domain(curve.domain(), static_cast<double>(theta));
  return curve(theta).dot(x);
}

/// Coordinates of the projection of x onto gamma(theta)^perp in the basis
/// (gamma'/|gamma'|, eta).
template <typename Scalar, typename Derived>
Vector2<Scalar> pi(const Curve<Scalar>& curve, Scalar theta, const Eigen::MatrixBase<Derived>& x) {
  require_in_domain(curve.domain(), static_cast<double>(theta));
  const Vector3<Scalar> g = curve(theta);
  const Vector3<Scalar> dg = curve.d1(theta);
  const Vector3<Scalar> n = g.cross(dg);
  const Scalar speed = dg.norm();
  const Scalar nn = n.norm();
  if (!(speed > Scalar(1e-12)) || !(nn > Scalar(1e-12)))
    throw Error(ErrorCode::degenerate_frame, "projection frame degenerates at theta " + std::to_string(double(theta)));
  return {dg.dot(x) / speed, n.dot(x) / nn};
}

/// Curve values and first derivatives tabulated on fixed nodes, for inner
/// loops that would otherwise call the evaluators millions of times.
struct CurveSamples {
  std::vector<double> theta;
  std::vector<Vector3d> gamma;
  std::vector<Vector3d> dgamma;

  std::size_t size() const { return theta.size(); }
};

CurveSamples sample_curve(const Curve3& curve, const std::vector<double>& thetas);

/// Upper bound on |gamma'| over the domain (dense scan with a safety factor).
double speed_bound(const Curve3& curve, const Interval& interval);

struct ZeroSite {
  double theta = 0.0;
  int multiplicity = 1;
};

struct ZeroCount {
  std::vector<ZeroSite> zeros;
  int simple = 0;
  int doubles = 0;

  /// Zeros counted with multiplicity.
  int total() const { return simple + 2 * doubles; }
};

/// Zeros of theta -> rho_theta(x) on the window: sign changes, sign-preserving
/// pairs hidden inside one cell, and double zeros at critical points where
/// |rho| < tol.
ZeroCount count_zeros(const Curve3& curve, const Vector3d& x, const Interval& window, double tol = 1e-9,
                      double grid_step = 0.0);

/// Largest count (with multiplicity) of zeros inside any closed window of the
/// given length.
int max_zeros_in_window(const ZeroCount& zeros, double length);

/// Result of shrinking the window length until no sampled direction shows
/// more than two zeros in a window.
struct ZeroWindowSearch {
  double epsilon = 0.0;
  int worst_count = 0;
  std::size_t samples = 0;
  int max_total_zeros = 0;
};

ZeroWindowSearch find_zero_window(const Curve3& curve, const std::vector<Vector3d>& xs, double tol = 1e-9,
                                  double min_epsilon = 1e-4);

/// Grid estimate of |{theta : |rho_theta(x)| <= lambda}| (line) or
/// |{theta : |pi_theta(x)| <= lambda}| (plane) for each lambda, using a
/// midpoint grid of n_cells cells over the domain.
std::vector<double> sublevel_profile(const Curve3& curve, const Vector3d& x, const std::vector<double>& lambdas,
                                     ProjectionKind kind, std::size_t n_cells = 1u << 18);

/// Same as sublevel_profile for precomputed samples (the cell weights are
/// `cell_width` each).
std::vector<double> sublevel_profile(const CurveSamples& samples, double cell_width, const Vector3d& x,
                                     const std::vector<double>& lambdas, ProjectionKind kind);

double sublevel_measure(const Curve3& curve, const Vector3d& x, double lambda, ProjectionKind kind,
                        std::size_t n_cells = 1u << 18);

/// Least-squares slope of log(measure) against log(lambda) over positive
/// measures. `valid` is false when fewer than three measures are positive.
struct SublevelExponent {
  double exponent = 0.0;
  std::size_t points = 0;
  bool valid = false;
};

SublevelExponent sublevel_exponent(const std::vector<double>& lambdas, const std::vector<double>& measures);

/// Midpoint estimate of the integral of |rho_theta(x)|^-t over the domain on a
/// base grid of step grid_step, with cells near zeros bisected down to width
/// grid_step^2.
double kaufman_integral(const Curve3& curve, const Vector3d& x, double t, double grid_step);

/// Estimates at grid steps 2^-k for each k in levels, with successive ratios.
struct KaufmanSeries {
  std::vector<int> levels;
  std::vector<double> values;
  std::vector<double> growth;

  double min_growth() const;
  double max_relative_change() const;
};

KaufmanSeries kaufman_series(const Curve3& curve, const Vector3d& x, double t, const std::vector<int>& levels);

}  // namespace projlab
