#include "projlab/cones.hpp"
#include "projlab/dnet.hpp"
#include "projlab/harness.hpp"
#include "projlab/project.hpp"

#include <algorithm>

namespace projlab {

namespace {

ExperimentReport start_report(const ExperimentConfig& c, std::string claim) {
  ExperimentReport r;
  r.experiment = c.experiment;
  r.seed = c.seed;
  r.config = to_json(c);
  r.claim = std::move(claim);
  return r;
}

Json interval_json(const Interval& i) { return Json::array({number(i.lo), number(i.hi)}); }

Interval clipped(const Interval& domain, double center, double half_width) {
  return {std::max(domain.lo, center - half_width), std::min(domain.hi, center + half_width)};
}

std::vector<double> uniform_nodes(const Interval& i, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(i.lo + (k + 0.5) * i.length() / count);
  return out;
}

using Spans = std::vector<std::pair<double, double>>;

void merge_spans(Spans& spans) {
  std::sort(spans.begin(), spans.end());
  std::size_t w = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (w > 0 && spans[i].first <= spans[w - 1].second) {
      spans[w - 1].second = std::max(spans[w - 1].second, spans[i].second);
    } else {
      spans[w++] = spans[i];
    }
  }
  spans.resize(w);
}

}  // namespace

SumsetMeasure sumset_measure(const System1& system, double theta, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  const double r = system[0].ratio;
  for (const auto& m : system.maps()) {
    if (std::abs(m.ratio - r) > 1e-12) throw Error(ErrorCode::invalid_argument, "sumset needs an equicontractive system");
  }
  double a = std::numeric_limits<double>::infinity(), b = -a;
  for (const auto& m : system.maps()) {
    a = std::min(a, m.fixed_point()[0]);
    b = std::max(b, m.fixed_point()[0]);
  }
  const double cs = std::cos(theta), sn = std::sin(theta);
  int generations = 0;
  for (double len = b - a; len > delta * (1 + 1e-9); len *= r) ++generations;

  std::vector<double> offsets;
  for (const auto& mi : system.maps())
    for (const auto& mj : system.maps())
      for (const auto& mk : system.maps())
        offsets.push_back(cs * mi.translation[0] + sn * mj.translation[0] + mk.translation[0]);
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());

  const auto hull = [&](double c) { return std::make_pair(std::min(c * a, c * b), std::max(c * a, c * b)); };
  const auto hc = hull(cs), hs = hull(sn);
  Spans spans{{hc.first + hs.first + a, hc.second + hs.second + b}};
  for (int g = 0; g < generations; ++g) {
    Spans next;
    next.reserve(spans.size() * offsets.size());
    for (double o : offsets) {
      for (const auto& sp : spans) next.emplace_back(o + r * sp.first, o + r * sp.second);
    }
    merge_spans(next);
    spans = std::move(next);
  }

  SumsetMeasure out;
  out.theta = theta;
  out.delta = delta;
  out.intervals = spans.size();
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const auto& sp : spans) {
    auto lo = static_cast<std::int64_t>(std::floor(sp.first / delta));
    const auto hi = static_cast<std::int64_t>(std::floor(sp.second / delta));
    lo = std::max(lo, last + 1);
    if (hi >= lo) {
      out.bins += static_cast<std::size_t>(hi - lo + 1);
      last = hi;
    }
  }
  out.measure = static_cast<double>(out.bins) * delta;
  return out;
}

ExperimentReport run_discrete_theorem(const ExperimentConfig& c) {
  const bool line = c.kind == ProjectionKind::line;
  auto r = start_report(c, line ? "some theta in E_I u E_J has |rho_theta(P)| >= delta^(1 - sigma1(s))"
                                : "some theta in E_I u E_J has |pi_theta(P)| >= delta^(2 - sigma2(s))");
  const auto curve = config_curve(c);
  const auto sys = make_system<3>(c.system);
  const double s = c.s.value_or(similarity_dimension(sys));
  const auto sig = sigma_exponents(s);
  if (line && !sig.sigma1_applicable) throw Error(ErrorCode::hypothesis_violation, "line kind needs s > 1/2");
  if (!line && !sig.sigma2_applicable) throw Error(ErrorCode::hypothesis_violation, "plane kind needs s > 1");
  const double sigma = line ? sig.sigma1 : sig.sigma2;

  // Bad cones: eta-lines for line projections, gamma-lines for planes.
  const Curve3 bad = line ? eta_curve(curve) : curve;
  Interval I{}, J{};
  NonParallelCert cert;
  if (c.I.has_value() != c.J.has_value()) throw Error(ErrorCode::config, "give both I and J or neither");
  if (c.I) {
    I = *c.I;
    J = *c.J;
    cert = non_parallel_constant(bad, I, bad, J, 24);
    if (!cert.valid())
      throw Error(ErrorCode::certification_failure, "bad cones over I and J are not certified non-parallel (L = " +
                                                        std::to_string(cert.lipschitz_L) + ")");
  } else {
    const auto found = find_nonparallel_intervals(bad, c.theta1, c.theta2);
    I = found.I;
    J = found.J;
    cert = found.cert;
  }

  const double delta = *std::min_element(c.deltas.begin(), c.deltas.end());
  const int level = static_cast<int>(std::ceil(-std::log2(delta) - 1e-9));
  const int depth = c.depth >= 0 ? c.depth : depth_for_delta(c.system, delta);
  const auto pts = word_points(sys, depth);
  const auto net = discrete_frostman(occupancy_from_points(pts, level, octant_shift(pts)), s);
  if (!net.postconditions_hold())
    throw Error(ErrorCode::certification_failure, "net construction failed: " + net.failures.front());

  std::vector<std::pair<double, char>> thetas;
  for (double th : uniform_nodes(I, c.theta_count / 2)) thetas.emplace_back(th, 'I');
  for (double th : uniform_nodes(J, c.theta_count - c.theta_count / 2)) thetas.emplace_back(th, 'J');
  std::vector<OccupancyMeasure> m(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t i) {
    m[i] = occupied_measure(net.net.points, curve, thetas[i].first, delta, c.kind);
  });
  auto& t = r.table("scan", {"theta", "set", "occupied", "measure"});
  std::size_t best = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    t.rows.push_back({number(thetas[i].first), std::string(1, thetas[i].second), m[i].occupied_count, number(m[i].measure)});
    if (m[i].measure > m[best].measure) best = i;
  }
  const double threshold = std::pow(delta, target_dimension(c.kind) - sigma);
  r.summary["kind"] = to_string(c.kind);
  r.summary["system"] = c.system.name;
  r.summary["s"] = number(s);
  r.summary["sigma"] = number(sigma);
  r.summary["delta"] = number(delta);
  r.summary["net_level"] = level;
  r.summary["net_size"] = net.net.points.size();
  r.summary["net_ratio"] = number(net.ratio);
  r.summary["counting_constant"] = number(net.net.counting_constant);
  r.summary["I"] = interval_json(I);
  r.summary["J"] = interval_json(J);
  r.summary["lipschitz_L"] = number(cert.lipschitz_L);
  r.summary["chord_gap_c"] = number(cert.chord_gap_c);
  r.summary["threshold"] = number(threshold);
  r.summary["max_measure"] = number(m[best].measure);
  r.summary["theta_star"] = number(thetas[best].first);
  r.pass = m[best].measure >= threshold;
  return r;
}

ExperimentReport run_sumset(const ExperimentConfig& c) {
  auto r = start_report(c, "measure(delta/3) / measure(delta) >= ratio_threshold for >= quantile of grid theta");
  if (c.system.dim != 1) throw Error(ErrorCode::config, "sumset needs a one-dimensional system");
  const auto sys = make_system<1>(c.system);
  const double dim = similarity_dimension(sys);
  if (!(dim > 1.0 / 3)) r.notes.push_back("hypothesis warning: similarity dimension <= 1/3, failure expected");
  std::vector<double> deltas = c.deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  if (deltas.size() < 2) throw Error(ErrorCode::config, "sumset needs at least two deltas");

  const int n = c.theta_count;
  std::vector<std::vector<SumsetMeasure>> m(static_cast<std::size_t>(n));
  parallel_for(m.size(), [&](std::size_t k) {
    const double th = kTwoPi * static_cast<double>(k) / n;
    for (double d : deltas) m[k].push_back(sumset_measure(sys, th, d));
  });

  std::vector<std::string> cols{"theta"};
  for (double d : deltas) cols.push_back("measure@" + Json(d).dump());
  cols.push_back("min_ratio");
  auto& t = r.table("sumset", cols);
  std::size_t passing = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.size(); ++k) {
    std::vector<Json> row{number(m[k][0].theta)};
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      row.push_back(number(m[k][i].measure));
      if (i > 0) ratio = std::min(ratio, m[k][i].measure / m[k][i - 1].measure);
    }
    row.push_back(number(ratio));
    t.rows.push_back(std::move(row));
    if (ratio >= c.ratio_threshold) ++passing;
    worst = std::min(worst, ratio);
  }
  const double fraction = static_cast<double>(passing) / n;
  r.summary["system"] = c.system.name;
  r.summary["similarity_dimension"] = number(dim);
  r.summary["thetas"] = n;
  r.summary["passing_fraction"] = number(fraction);
  r.summary["min_ratio"] = number(worst);
  // theta = 0 collapses the middle summand: K + K.
  const auto zero = m[0].back();
  r.summary["theta0_measure"] = number(zero.measure);
  r.summary["theta0_delta"] = number(zero.delta);
  r.pass = fraction >= c.quantile;
  return r;
}

namespace {

/// theta0 with eta(theta0) parallel to the normal, or hypothesis-violation.
double theta_for_normal(const Curve3& eta, const Vector3d& normal) {
  const Vector3d n = normal.normalized();
  const Interval d = eta.domain();
  const int samples = 4096;
  const auto score = [&](double th) { return std::abs(eta(th).dot(n)); };
  double best = d.lo, best_val = -1.0;
  for (int k = 0; k <= samples; ++k) {
    const double th = d.lo + d.length() * k / samples;
    if (score(th) > best_val) {
      best_val = score(th);
      best = th;
    }
  }
  // Golden-section refinement of the maximum.
  double a = std::max(d.lo, best - d.length() / samples), b = std::min(d.hi, best + d.length() / samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    (score(x1) < score(x2) ? a : b) = score(x1) < score(x2) ? x1 : x2;
  }
  const double th = 0.5 * (a + b);
  if (1.0 - score(th) > 1e-10)
    throw Error(ErrorCode::hypothesis_violation, "the plane normal is not a bad line b_theta of the curve");
  return th;
}

}  // namespace

ExperimentReport run_transversality(const ExperimentConfig& c) {
  auto r = start_report(c, "on J, every normalized difference has |rho| >= alpha/5 or |d rho / d theta| >= c alpha/5");
  const auto curve = config_curve(c);
  const auto eta = eta_curve(curve);
  const double theta0 = c.normal ? theta_for_normal(eta, *c.normal) : c.theta0.value_or(0.0);
  require_in_domain(curve.domain(), theta0);
  const Vector3d axis = eta(theta0);
  const auto sys = make_system<3>(c.system);
  const auto blp = build_blp_subset(sys, axis, c.epsilon, c.depth >= 0 ? c.depth : 2);
  if (!(blp.alpha > 0.0)) throw Error(ErrorCode::separation_failure, "BLP aperture is not positive");
  if (!blp.extraction.converged) r.notes.push_back("extraction did not reach the dimension target");

  // Generation 1 always, then up to 4 while the center budget allows.
  const std::size_t budget = 1024;
  std::vector<Vector3d> centers;
  int generations = 0;
  for (std::size_t g = 1, count = blp.system.size(); g <= 4 && (g == 1 || centers.size() + count <= budget);
       ++g, count *= blp.system.size()) {
    for (const auto& b : generation_balls(blp.system, static_cast<int>(g), std::max(budget, count)).balls) centers.push_back(b.center);
    generations = static_cast<int>(g);
  }
  if (generations < 4) r.notes.push_back("difference directions use generations 1.." + std::to_string(generations));
  std::vector<Vector3d> dirs;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      const Vector3d d = centers[i] - centers[j];
      if (d.norm() > 1e-12) dirs.push_back(d.normalized());
    }
  }
  for (const auto& e : c.extra_directions) dirs.push_back(e.normalized());

  // Fixed node spacing, so each halved J uses a subset of the previous nodes.
  const double h = c.width / c.theta_count;
  const double a5 = blp.alpha / 5.0;
  auto& t = r.table("halving", {"half_width", "lo", "hi", "nodes", "speed_min", "margin", "holds"});
  double half = c.width;
  bool found = false;
  Interval J{theta0, theta0};
  double margin = 0.0, speed_min = 0.0;
  bool monotone = true;
  double prev_margin = -1.0;
  while (true) {
    std::vector<double> nodes;
    const int reach = static_cast<int>(std::floor(half / h + 1e-9));
    for (int k = -reach; k <= reach; ++k) {
      const double th = theta0 + k * h;
      if (th >= curve.domain().lo - 1e-12 && th <= curve.domain().hi + 1e-12) nodes.push_back(th);
    }
    const auto samples = sample_curve(curve, nodes);
    speed_min = std::numeric_limits<double>::infinity();
    for (const auto& v : samples.dgamma) speed_min = std::min(speed_min, v.norm());
    const double ca5 = speed_min * a5;
    std::vector<double> worst(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
      double w = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double q = std::max(std::abs(samples.gamma[k].dot(dirs[i])) / a5, std::abs(samples.dgamma[k].dot(dirs[i])) / ca5);
        w = std::min(w, q);
      }
      worst[i] = w;
    });
    margin = worst.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(worst.begin(), worst.end());
    J = {nodes.front(), nodes.back()};
    const bool holds = margin >= 1.0;
    t.rows.push_back({number(half), number(J.lo), number(J.hi), nodes.size(), number(speed_min), number(margin), holds});
    if (prev_margin >= 0.0 && margin < prev_margin) monotone = false;
    prev_margin = margin;
    if (holds) {
      found = true;
      break;
    }
    if (reach == 0) break;
    half /= 2;
  }
  if (!found) throw Error(ErrorCode::search_failure, "transversality dichotomy fails even at J = {theta0}");

  r.summary["theta0"] = number(theta0);
  r.summary["axis"] = Json::array({number(axis.x()), number(axis.y()), number(axis.z())});
  r.summary["alpha"] = number(blp.alpha);
  r.summary["s_tilde"] = number(blp.extraction.s_tilde);
  r.summary["subsystem_maps"] = blp.system.size();
  r.summary["generations"] = generations;
  r.summary["directions"] = dirs.size();
  r.summary["J"] = interval_json(J);
  r.summary["speed_min"] = number(speed_min);
  r.summary["margin"] = number(margin);
  r.summary["margin_monotone"] = monotone;
  r.pass = found;
  return r;
}

ExperimentReport run_pair_projection(const ExperimentConfig& c) {
  auto r = start_report(c, "determinant identity residual < 1e-9, c > 0 and dim Pi(K) <= dim rho_I(K) + dim rho_J(K) + 0.1");
  const auto curve = config_curve(c);
  if (c.theta1 == c.theta2) throw Error(ErrorCode::invalid_argument, "pair projection needs theta1 != theta2");
  require_in_domain(curve.domain(), c.theta1);
  require_in_domain(curve.domain(), c.theta2);
  const auto pair_value = [&](double ti, double tj) {
    return std::abs(curve(ti).cross(curve.d1(ti)).dot(curve.d1(tj)));
  };
  const Interval I = clipped(curve.domain(), c.theta1, c.width);
  const Interval J = clipped(curve.domain(), c.theta2, c.width);
  const double center = pair_value(c.theta1, c.theta2);
  double cmin = std::numeric_limits<double>::infinity();
  const int grid = 33;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      cmin = std::min(cmin, pair_value(I.lo + I.length() * a / (grid - 1), J.lo + J.length() * b / (grid - 1)));
    }
  }
  if (!(cmin > 1e-9)) throw Error(ErrorCode::degenerate_pair, "|(gamma x gamma') . gamma'| vanishes on I x J");

  // d/dt Pi(theta_I + t, theta_J + t)(x) at t = 0; its Gram determinant is
  // (gamma'(theta_I).x)^2 + (gamma'(theta_J).x)^2.
  Rng rng(c.seed);
  double residual = 0.0;
  const double h = 1e-3;
  for (int k = 0; k < c.samples; ++k) {
    const Vector3d x = rng.unit_vector();
    const double ti = rng.uniform(I.lo, I.hi), tj = rng.uniform(J.lo, J.hi);
    const auto diff = [&](double th) {
      const auto d = [&](double step) { return (curve(th + step).dot(x) - curve(th - step).dot(x)) / (2 * step); };
      return (4 * d(h / 2) - d(h)) / 3;
    };
    const double gram = diff(ti) * diff(ti) + diff(tj) * diff(tj);
    const double closed = std::pow(curve.d1(ti).dot(x), 2) + std::pow(curve.d1(tj).dot(x), 2);
    residual = std::max(residual, std::abs(gram - closed));
  }

  const auto sys = make_system<3>(c.system);
  const auto pts = word_points(sys, c.depth >= 0 ? c.depth : 5);
  const PointCloud cloud(pts.begin(), pts.end());
  const Vector3d gi = curve(c.theta1), gj = curve(c.theta2);
  std::vector<Vector2d> pair_pts;
  std::vector<double> proj_i, proj_j;
  for (const auto& p : cloud) {
    pair_pts.emplace_back(gi.dot(p), gj.dot(p));
    proj_i.push_back(gi.dot(p));
    proj_j.push_back(gj.dot(p));
  }
  const auto dim_pair = box_dimension<2>(pair_pts, c.scale_lo, c.scale_hi);
  const auto dim_i = box_dimension(proj_i, c.scale_lo, c.scale_hi);
  const auto dim_j = box_dimension(proj_j, c.scale_lo, c.scale_hi);
  const bool contained = dim_pair.slope <= dim_i.slope + dim_j.slope + 0.1;

  r.summary["theta1"] = number(c.theta1);
  r.summary["theta2"] = number(c.theta2);
  r.summary["I"] = interval_json(I);
  r.summary["J"] = interval_json(J);
  r.summary["c_center"] = number(center);
  r.summary["c_min"] = number(cmin);
  r.summary["determinant_residual"] = number(residual);
  r.summary["identity_samples"] = c.samples;
  r.summary["points"] = cloud.size();
  r.summary["dim_pair"] = number(dim_pair.slope);
  r.summary["dim_rho_I"] = number(dim_i.slope);
  r.summary["dim_rho_J"] = number(dim_j.slope);
  auto& t = r.table("box_counts", {"scale", "pair", "rho_I", "rho_J"});
  for (std::size_t i = 0; i < dim_pair.scales.size(); ++i) {
    t.rows.push_back({number(dim_pair.scales[i]), dim_pair.counts[i], dim_i.counts[i], dim_j.counts[i]});
  }
  r.pass = residual < 1e-9 && contained;
  return r;
}

}  // namespace projlab
