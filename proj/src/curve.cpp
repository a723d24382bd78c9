#include "projlab/curve.hpp"

#include <array>
#include <limits>
#include <numeric>

namespace projlab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double bisect_root(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

Curve3 cone_curve() {
  return Curve3(
      "cone", Interval{0.0, kTwoPi},
      [](double t) -> Vector3d { return Vector3d(std::cos(t), std::sin(t), 1.0) * kInvSqrt2; },
      [](double t) -> Vector3d { return Vector3d(-std::sin(t), std::cos(t), 0.0) * kInvSqrt2; },
      [](double t) -> Vector3d { return Vector3d(-std::cos(t), -std::sin(t), 0.0) * kInvSqrt2; },
      [](double t) -> Vector3d { return Vector3d(std::sin(t), -std::cos(t), 0.0) * kInvSqrt2; });
}

Curve3 great_circle_curve() {
  return Curve3(
      "greatcircle", Interval{0.0, kTwoPi}, [](double t) { return Vector3d(std::cos(t), std::sin(t), 0.0); },
      [](double t) { return Vector3d(-std::sin(t), std::cos(t), 0.0); },
      [](double t) { return Vector3d(-std::cos(t), -std::sin(t), 0.0); },
      [](double t) { return Vector3d(std::sin(t), -std::cos(t), 0.0); });
}

NormalizedJet normalized_derivatives(const Vector3d& u, const Vector3d& u1, const Vector3d& u2, const Vector3d& u3) {
  const double n = u.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::degenerate_frame, "cannot normalize a zero vector");
  const double n3 = n * n * n;
  const double n5 = n3 * n * n;
  const double n7 = n5 * n * n;
  const double p = u.dot(u1);
  const double q = u1.dot(u1) + u.dot(u2);
  const double dq = 3.0 * u1.dot(u2) + u.dot(u3);
  const double g = 1.0 / n;
  const double g1 = -p / n3;
  const double g2 = -q / n3 + 3.0 * p * p / n5;
  const double g3 = -dq / n3 + 9.0 * p * q / n5 - 15.0 * p * p * p / n7;
  NormalizedJet jet;
  jet.f = g * u;
  jet.f1 = g1 * u + g * u1;
  jet.f2 = g2 * u + 2.0 * g1 * u1 + g * u2;
  jet.f3 = g3 * u + 3.0 * g2 * u1 + 3.0 * g1 * u2 + g * u3;
  return jet;
}

Curve3 trig_curve(const std::string& name, const std::vector<TrigTerm>& terms, Interval domain) {
  if (terms.empty()) throw Error(ErrorCode::invalid_curve, "trigonometric curve needs at least one term");
  auto raw = [terms](double t) {
    std::array<Vector3d, 4> u;
    for (auto& v : u) v.setZero();
    for (const auto& term : terms) {
      const double f = term.frequency;
      const double c = std::cos(f * t);
      const double s = std::sin(f * t);
      u[0] += c * term.cos_amplitude + s * term.sin_amplitude;
      u[1] += f * (-s * term.cos_amplitude + c * term.sin_amplitude);
      u[2] += -f * f * (c * term.cos_amplitude + s * term.sin_amplitude);
      u[3] += f * f * f * (s * term.cos_amplitude - c * term.sin_amplitude);
    }
    return normalized_derivatives(u[0], u[1], u[2], u[3]);
  };
  return Curve3(
      name, domain, [raw](double t) { return raw(t).f; }, [raw](double t) { return raw(t).f1; },
      [raw](double t) { return raw(t).f2; }, [raw](double t) { return raw(t).f3; });
}

Curve3 builtin_curve(const std::string& id) {
  if (id == "cone") return cone_curve();
  if (id == "greatcircle") return great_circle_curve();
  throw Error(ErrorCode::invalid_argument, "unknown curve '" + id + "' (expected cone or greatcircle)");
}

NonDegeneracyCertificate check_nondegeneracy(const Curve3& curve, double grid_step) {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be positive");
  if (grid_step > curve.domain().length())
    throw Error(ErrorCode::empty_grid, "grid step exceeds the domain length");
  const auto nodes = grid_nodes(curve.domain(), grid_step);
  NonDegeneracyCertificate cert;
  cert.grid_step = grid_step;
  cert.nodes = nodes.size();
  cert.min_triple = std::numeric_limits<double>::infinity();
  for (double t : nodes) {
    const Vector3d g = curve(t);
    if (std::abs(g.norm() - 1.0) > 1e-10)
      throw Error(ErrorCode::invalid_curve, "curve '" + curve.name() + "' leaves the unit sphere at theta " +
                                                std::to_string(t));
    const double v = std::abs(g.dot(curve.d1(t).cross(curve.d2(t))));
    if (v < cert.min_triple) {
      cert.min_triple = v;
      cert.argmin_theta = t;
    }
  }
  return cert;
}

Curve3 eta_curve(const Curve3& curve) {
  const auto probe = grid_nodes(curve.domain(), curve.domain().length() / 1024.0);
  for (double t : probe) {
    if (curve(t).cross(curve.d1(t)).norm() < 1e-10)
      throw Error(ErrorCode::degenerate_frame, "gamma x gamma' vanishes at theta " + std::to_string(t));
  }
  const int order = curve.analytic_order();
  auto jet = [curve](double t) {
    const Vector3d g = curve(t);
    const Vector3d g1 = curve.d1(t);
    const Vector3d g2 = curve.d2(t);
    const Vector3d u = g.cross(g1);
    const Vector3d u1 = g.cross(g2);
    Vector3d u2 = Vector3d::Zero();
    if (curve.has_analytic(3)) u2 = g1.cross(g2) + g.cross(curve.d3(t));
    return normalized_derivatives(u, u1, u2, Vector3d::Zero());
  };
  Curve3::Map e0 = [curve](double t) { return Vector3d(curve(t).cross(curve.d1(t)).normalized()); };
  Curve3::Map e1, e2;
  if (order >= 2) e1 = [jet](double t) { return jet(t).f1; };
  if (order >= 3) e2 = [jet](double t) { return jet(t).f2; };
  return Curve3("eta(" + curve.name() + ")", curve.domain(), e0, e1, e2);
}

double verify_eta_identity(const Curve3& curve, double grid_step) {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be positive");
  if (grid_step > curve.domain().length())
    throw Error(ErrorCode::empty_grid, "grid step exceeds the domain length");
  const Curve3 eta = eta_curve(curve);
  double residual = 0.0;
  for (double t : grid_nodes(curve.domain(), grid_step)) {
    const Vector3d e = eta(t);
    const double lhs = eta.d2(t).dot(e.cross(eta.d1(t)));
    const double speed = curve.d1(t).norm();
    const double triple = triple_at(curve, t);
    const double rhs = triple * triple / (speed * speed * speed);
    residual = std::max(residual, std::abs(lhs - rhs));
  }
  return residual;
}

FrameSample frame(const Curve3& curve, double theta) {
  require_in_domain(curve.domain(), theta);
  FrameSample s;
  s.theta = theta;
  s.gamma = curve(theta);
  s.dgamma = curve.d1(theta);
  s.ddgamma = curve.d2(theta);
  const Vector3d n = s.gamma.cross(s.dgamma);
  const double speed = s.dgamma.norm();
  if (!(speed > 1e-12) || !(n.norm() > 1e-12))
    throw Error(ErrorCode::degenerate_frame, "frame degenerates at theta " + std::to_string(theta));
  s.eta = n.normalized();
  s.plane_basis.col(0) = s.dgamma / speed;
  s.plane_basis.col(1) = s.eta;
  return s;
}

CurveSamples sample_curve(const Curve3& curve, const std::vector<double>& thetas) {
  CurveSamples s;
  s.theta = thetas;
  s.gamma.resize(thetas.size());
  s.dgamma.resize(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    s.gamma[i] = curve(thetas[i]);
    s.dgamma[i] = curve.d1(thetas[i]);
  }
  return s;
}

double speed_bound(const Curve3& curve, const Interval& interval) {
  double m = 0.0;
  const double step = std::max(interval.length() / 4096.0, 1e-12);
  for (double t : grid_nodes(interval, step)) m = std::max(m, curve.d1(t).norm());
  return 1.01 * m + 1e-12;
}

namespace {

ZeroCount count_zeros_sampled(const Curve3& curve, const CurveSamples& s, const Vector3d& x, double tol) {
  const std::size_t n = s.size();
  std::vector<double> f(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = s.gamma[i].dot(x);
    g[i] = s.dgamma[i].dot(x);
  }
  auto rho_at = [&](double t) { return curve(t).dot(x); };
  auto drho_at = [&](double t) { return curve.d1(t).dot(x); };

  std::vector<ZeroSite> doubles;
  std::vector<ZeroSite> simples;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] == 0.0) {
      simples.push_back({s.theta[i], std::abs(g[i]) < tol ? 2 : 1});
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = s.theta[i];
    const double b = s.theta[i + 1];
    bool has_critical = false;
    double tc = 0.0;
    if (sign_of(g[i]) * sign_of(g[i + 1]) < 0) {
      tc = bisect_root(drho_at, a, b);
      has_critical = true;
    }
    if (has_critical) {
      const double fc = rho_at(tc);
      if (std::abs(fc) < tol) {
        doubles.push_back({tc, 2});
        continue;
      }
      if (sign_of(f[i]) * sign_of(f[i + 1]) > 0 && sign_of(fc) != sign_of(f[i])) {
        simples.push_back({bisect_root(rho_at, a, tc), 1});
        simples.push_back({bisect_root(rho_at, tc, b), 1});
        continue;
      }
    }
    if (sign_of(f[i]) * sign_of(f[i + 1]) < 0) simples.push_back({bisect_root(rho_at, a, b), 1});
  }

  ZeroCount out;
  const double h = n > 1 ? (s.theta.back() - s.theta.front()) / static_cast<double>(n - 1) : 0.0;
  for (const auto& z : simples) {
    bool absorbed = false;
    for (const auto& d : doubles) {
      if (std::abs(z.theta - d.theta) <= 2.0 * h) absorbed = true;
    }
    if (absorbed) continue;
    out.zeros.push_back(z);
  }
  for (const auto& d : doubles) out.zeros.push_back(d);
  std::sort(out.zeros.begin(), out.zeros.end(), [](const ZeroSite& l, const ZeroSite& r) { return l.theta < r.theta; });
  for (const auto& z : out.zeros) {
    if (z.multiplicity == 2) {
      ++out.doubles;
    } else {
      ++out.simple;
    }
  }
  return out;
}

}  // namespace

ZeroCount count_zeros(const Curve3& curve, const Vector3d& x, const Interval& window, double tol, double grid_step) {
  if (!(x.norm() > 0.0)) throw Error(ErrorCode::invalid_argument, "count_zeros needs a nonzero direction");
  if (!curve.domain().contains(window, 1e-12) || window.hi < window.lo)
    throw Error(ErrorCode::domain, "zero-count window lies outside the curve domain");
  if (grid_step <= 0.0) grid_step = std::max(window.length() / 2048.0, 1e-9);
  const auto samples = sample_curve(curve, grid_nodes(window, grid_step));
  return count_zeros_sampled(curve, samples, x, tol);
}

int max_zeros_in_window(const ZeroCount& zeros, double length) {
  int best = 0;
  const auto& z = zeros.zeros;
  std::size_t j = 0;
  int running = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (j < i) {
      j = i;
      running = 0;
    }
    while (j < z.size() && z[j].theta <= z[i].theta + length) {
      running += z[j].multiplicity;
      ++j;
    }
    best = std::max(best, running);
    running -= z[i].multiplicity;
  }
  return best;
}

ZeroWindowSearch find_zero_window(const Curve3& curve, const std::vector<Vector3d>& xs, double tol,
                                  double min_epsilon) {
  const double step = curve.domain().length() / 2048.0;
  const auto samples = sample_curve(curve, grid_nodes(curve.domain(), step));
  std::vector<ZeroCount> counts(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { counts[i] = count_zeros_sampled(curve, samples, xs[i], tol); });

  ZeroWindowSearch out;
  out.samples = xs.size();
  for (const auto& c : counts) out.max_total_zeros = std::max(out.max_total_zeros, c.total());
  double eps = curve.domain().length();
  while (true) {
    int worst = 0;
    for (const auto& c : counts) worst = std::max(worst, max_zeros_in_window(c, eps));
    if (worst <= 2) {
      out.epsilon = eps;
      out.worst_count = worst;
      return out;
    }
    eps *= 0.5;
    if (eps < min_epsilon)
      throw Error(ErrorCode::search_failure, "no window length above the floor keeps at most two zeros");
  }
}

std::vector<double> sublevel_profile(const CurveSamples& samples, double cell_width, const Vector3d& x,
                                     const std::vector<double>& lambdas, ProjectionKind kind) {
  if (std::abs(x.norm() - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "sub-level direction must be unit");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  }
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] < lambdas[b]; });
  std::vector<double> sorted(lambdas.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = lambdas[order[i]] * (1.0 + 1e-12);

  std::vector<std::size_t> hist(sorted.size() + 1, 0);
  const double xx = x.squaredNorm();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = samples.gamma[i].dot(x);
    const double v = kind == ProjectionKind::line ? std::abs(r) : std::sqrt(std::max(0.0, xx - r * r));
    const auto idx = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    ++hist[idx];
  }
  std::vector<double> out(lambdas.size());
  std::size_t cumulative = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += hist[i];
    out[order[i]] = static_cast<double>(cumulative) * cell_width;
  }
  return out;
}

std::vector<double> sublevel_profile(const Curve3& curve, const Vector3d& x, const std::vector<double>& lambdas,
                                     ProjectionKind kind, std::size_t n_cells) {
  if (n_cells == 0) throw Error(ErrorCode::empty_grid, "sub-level grid needs at least one cell");
  const double width = curve.domain().length() / static_cast<double>(n_cells);
  std::vector<double> mids(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) mids[i] = curve.domain().lo + (static_cast<double>(i) + 0.5) * width;
  CurveSamples s;
  s.theta = mids;
  s.gamma.resize(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) s.gamma[i] = curve(mids[i]);
  return sublevel_profile(s, width, x, lambdas, kind);
}

double sublevel_measure(const Curve3& curve, const Vector3d& x, double lambda, ProjectionKind kind,
                        std::size_t n_cells) {
  return sublevel_profile(curve, x, {lambda}, kind, n_cells).front();
}

SublevelExponent sublevel_exponent(const std::vector<double>& lambdas, const std::vector<double>& measures) {
  SublevelExponent out;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (measures[i] > 0.0) {
      lx.push_back(std::log(lambdas[i]));
      ly.push_back(std::log(measures[i]));
    }
  }
  out.points = lx.size();
  if (lx.size() < 3) return out;
  out.exponent = least_squares(lx, ly).slope;
  out.valid = true;
  return out;
}

double kaufman_integral(const Curve3& curve, const Vector3d& x, double t, double grid_step) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "Kaufman exponent t must be positive");
  if (!(grid_step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be positive");
  const Interval dom = curve.domain();
  const int depth = grid_step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log2(grid_step) - 1e-9));
  const double lipschitz = x.norm() * speed_bound(curve, dom);

  auto value = [&](double a, double w) {
    double v = std::abs(curve(a + 0.5 * w).dot(x));
    if (v == 0.0) v = 0.5 * (std::abs(curve(a + 0.25 * w).dot(x)) + std::abs(curve(a + 0.75 * w).dot(x)));
    return v;
  };
  std::function<double(double, double, int)> cell = [&](double a, double w, int level) -> double {
    const double v = value(a, w);
    if (level < depth && v < 2.0 * w * lipschitz) {
      return cell(a, 0.5 * w, level + 1) + cell(a + 0.5 * w, 0.5 * w, level + 1);
    }
    return w * std::pow(v, -t);
  };

  const auto full = static_cast<std::size_t>(std::floor(dom.length() / grid_step));
  double sum = 0.0;
  for (std::size_t i = 0; i < full; ++i) sum += cell(dom.lo + static_cast<double>(i) * grid_step, grid_step, 0);
  const double rest = dom.length() - static_cast<double>(full) * grid_step;
  if (rest > 1e-14 * dom.length()) sum += cell(dom.lo + static_cast<double>(full) * grid_step, rest, 0);
  return sum;
}

double KaufmanSeries::min_growth() const {
  double m = std::numeric_limits<double>::infinity();
  for (double g : growth) m = std::min(m, g);
  return m;
}

double KaufmanSeries::max_relative_change() const {
  double m = 0.0;
  for (double g : growth) m = std::max(m, std::abs(g - 1.0));
  return m;
}

KaufmanSeries kaufman_series(const Curve3& curve, const Vector3d& x, double t, const std::vector<int>& levels) {
  KaufmanSeries out;
  out.levels = levels;
  for (int k : levels) out.values.push_back(kaufman_integral(curve, x, t, std::ldexp(1.0, -k)));
  for (std::size_t i = 1; i < out.values.size(); ++i) out.growth.push_back(out.values[i] / out.values[i - 1]);
  return out;
}

}  // namespace projlab
