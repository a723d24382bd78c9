// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include "projlab/cones.hpp"
#include "projlab/dnet.hpp"
#include "projlab/harness.hpp"
#include "projlab/project.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace projlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Vector3d> random_units(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector3d> xs(n);
  for (auto& x : xs) x = rng.unit_vector();
  return xs;
}

Outcome exponents() {
  const auto one = sigma_exponents(1.0);
  const auto two = sigma_exponents(2.0);
  const double x = sigma_crossing();
  const bool ok = std::abs(one.sigma1 - 0.533333) <= 1e-6 && std::abs(two.sigma2 - 1.333333) <= 1e-6 && x >= 1.07 &&
                  x <= 1.09;
  return {ok, fmt("sigma1(1) = %.7f, sigma2(2) = %.7f, crossing s = %.5f", one.sigma1, two.sigma2, x)};
}

Outcome curve_identities() {
  const Curve3 c = cone_curve();
  const double step = c.domain().length() / 1e4;
  const auto cert = check_nondegeneracy(c, step);
  const double residual = verify_eta_identity(c, step);
  const bool ok = std::abs(cert.min_triple - std::pow(2.0, -1.5)) <= 1e-9 && residual < 1e-8;
  return {ok, fmt("min triple = %.12f at %zu nodes, eta residual = %.2e", cert.min_triple, cert.nodes, residual)};
}

Outcome sublevel() {
  const Curve3 c = cone_curve();
  const auto eta = eta_curve(c);
  std::vector<double> lambdas;
  for (int k = 4; k <= 12; ++k) lambdas.push_back(std::ldexp(1.0, -k));
  const std::size_t cells = 1u << 18;
  std::vector<double> thetas(cells);
  const double w = c.domain().length() / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) thetas[i] = c.domain().lo + (static_cast<double>(i) + 0.5) * w;
  const auto samples = sample_curve(c, thetas);

  bool ok = true;
  std::string detail;
  for (auto kind : {ProjectionKind::line, ProjectionKind::plane}) {
    const bool line = kind == ProjectionKind::line;
    auto xs = random_units(480, line ? 301 : 302);
    std::vector<Vector3d> bad;
    for (int k = 0; k < 20; ++k) {
      const double th = c.domain().lo + c.domain().length() * (k + 0.37) / 20;
      bad.push_back(line ? eta(th) : c(th));
    }
    xs.insert(xs.end(), bad.begin(), bad.end());
    std::vector<SublevelExponent> fits(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
      fits[i] = sublevel_exponent(lambdas, sublevel_profile(samples, w, xs[i], lambdas, kind));
    });
    double min_exp = std::numeric_limits<double>::infinity(), bad_lo = min_exp, bad_hi = -min_exp;
    std::size_t empty = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!fits[i].valid) {
        ++empty;
        continue;
      }
      min_exp = std::min(min_exp, fits[i].exponent);
      if (i >= 480) {
        bad_lo = std::min(bad_lo, fits[i].exponent);
        bad_hi = std::max(bad_hi, fits[i].exponent);
      }
    }
    const double floor = line ? 0.45 : 0.95;
    ok = ok && min_exp >= floor;
    // Bad lines give a double zero for lines; for planes gamma gives a simple one.
    if (line) ok = ok && bad_lo >= 0.45 && bad_hi <= 0.55;
    else ok = ok && bad_lo >= 0.95;
    detail += fmt("%s: min exponent %.3f (>= %.2f), bad lines [%.3f, %.3f], %zu of 500 with empty sublevel sets; ",
                  line ? "line" : "plane", min_exp, floor, bad_lo, bad_hi, empty);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome kaufman() {
  const Curve3 c = cone_curve();
  const auto xs = random_units(1000, 401);
  std::vector<KaufmanSeries> series(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { series[i] = kaufman_series(c, xs[i], 0.4, {8, 9}); });
  double sup = 0.0, spread = 1.0;
  for (const auto& s : series) {
    sup = std::max({sup, s.values[0], s.values[1]});
    const double r = s.values[1] / s.values[0];
    spread = std::max({spread, r, 1.0 / r});
  }
  const auto grow = kaufman_series(c, eta_curve(c)(1.0), 0.6, {5, 6, 7, 8, 9, 10});
  const bool ok = std::isfinite(sup) && spread < 2.0 && grow.min_growth() >= 1.3;
  return {ok, fmt("t = 0.4: sup over 1000 x = %.4f, halving spread %.4fx; t = 0.6 on a bad line: min growth %.3fx",
                  sup, spread, grow.min_growth())};
}

Outcome zero_window() {
  const Curve3 c = cone_curve();
  const auto search = find_zero_window(c, random_units(1000, 501));
  const bool ok = search.epsilon > 0.0 && search.worst_count <= 2 && search.samples == 1000;
  return {ok, fmt("epsilon* = %.6f, worst window count %d over %zu directions", search.epsilon, search.worst_count,
                  search.samples)};
}

using Key = std::array<int, 3>;

// Straightforward sweep: every cube at every level, scanning all points.
std::set<Key> naive_sweep(const std::vector<OccupiedCube>& occ, int k, double s) {
  std::vector<Key> cubes;
  std::vector<Vector3d> reps;
  for (const auto& o : occ) {
    cubes.push_back({o.cube.corner.x(), o.cube.corner.y(), o.cube.corner.z()});
    reps.push_back(o.point);
  }
  std::vector<bool> alive(cubes.size(), true);
  const auto parent = [&](std::size_t i, int l) {
    return Key{cubes[i][0] >> (k - l), cubes[i][1] >> (k - l), cubes[i][2] >> (k - l)};
  };
  const auto distinct = [&](int l) {
    std::set<Key> p;
    for (std::size_t i = 0; i < cubes.size(); ++i)
      if (alive[i]) p.insert(parent(i, l));
    return p.size();
  };
  for (int l = k - 1; l >= 0 && distinct(l + 1) > 1; --l) {
    const double bound = std::pow(std::sqrt(3.0) * std::pow(2.0, k - l), s);
    const int n = 1 << l;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int cc = 0; cc < n; ++cc) {
          std::vector<std::size_t> members;
          for (std::size_t i = 0; i < cubes.size(); ++i)
            if (alive[i] && parent(i, l) == Key{a, b, cc}) members.push_back(i);
          if (members.size() <= bound) continue;
          std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
            return std::make_tuple(reps[x].x(), reps[x].y(), reps[x].z()) >
                   std::make_tuple(reps[y].x(), reps[y].y(), reps[y].z());
          });
          const auto keep = static_cast<std::size_t>(std::floor(bound));
          for (std::size_t m = 0; m + keep < members.size(); ++m) alive[members[m]] = false;
        }
  }
  std::set<Key> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (alive[i]) out.insert(cubes[i]);
  return out;
}

Outcome frostman() {
  PointCloud grid;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < 16; ++l) grid.emplace_back((i + 0.5) / 16, (j + 0.5) / 16, (l + 0.5) / 16);
  const auto occ = occupancy_from_points(grid, 4);
  std::size_t mismatches = 0;
  for (double s : {3.0, 2.5, 2.0, 1.3, 0.7}) {
    const auto r = discrete_frostman(occ, s);
    std::set<Key> got;
    for (const auto& q : r.survivor_cubes) got.insert({q.corner.x(), q.corner.y(), q.corner.z()});
    if (got != naive_sweep(occ, 4, s) || !r.postconditions_hold()) ++mismatches;
  }

  const auto sys = make_system<3>(builtin_system("cantor3_cube"));
  const double s = similarity_dimension(sys);
  const double delta = 1.0 / 64;
  const auto pts = word_points(sys, depth_for_delta(builtin_system("cantor3_cube"), delta));
  const auto cantor = occupancy_from_points(pts, 6, octant_shift(pts));
  const auto r = discrete_frostman(cantor, s);
  const double measured = verify_delta_s(r.net.points, delta, s);
  bool bands = true;
  for (const auto& t : r.trace) {
    bands = bands && t.max_upper_ratio <= 1.0 + 1e-12;
    if (t.thinned > 0) bands = bands && t.min_thinned_lower_ratio >= 1.0 - 1e-12;
  }
  const double ratio = static_cast<double>(r.net.points.size()) * std::pow(delta, s) / r.content_certificate;
  const bool ok = mismatches == 0 && r.postconditions_hold() && bands && measured <= r.dimensional_bound &&
                  ratio >= 0.25;
  return {ok, fmt("16^3 vs naive sweep: %zu mismatches over 5 exponents; triple Cantor 2^-6: |P| = %zu, "
                  "counting constant %.3f (bound %.1f), |P| delta^s / content = %.4f",
                  mismatches, r.net.points.size(), measured, r.dimensional_bound, ratio)};
}

Outcome incidence() {
  const Curve3 c = cone_curve();
  const Interval I{0.5, 1.5};
  const double tau = 0.5;
  bool ok = true;
  std::string detail;

  // Integral and pair-sum forms of the energy on a triple Cantor sample.
  const auto sys = make_system<3>(builtin_system("cantor3_cube"));
  const auto net = word_points(sys, 3);
  double worst_form = 0.0;
  for (auto kind : {ProjectionKind::line, ProjectionKind::plane}) {
    for (double d : {1.0 / 27, 1.0 / 81}) {
      const ThetaSampler s(c, {Interval{0.6, 0.9}}, d / 4);
      const double a = energy(net, s, d, kind).value, b = energy_pair_sum(net, s, d, kind).value;
      worst_form = std::max(worst_form, std::abs(a - b) / b);
    }
  }
  ok = ok && worst_form <= 0.01;
  detail += fmt("energy forms differ by <= %.2e; ", worst_form);

  // Probes built in delta units so each bound's normalized constant is scale free.
  Rng rng(701);
  const auto eta = eta_curve(c);
  struct Probe {
    Vector3d x, dir, perp;
    double r, off;
  };
  std::vector<Probe> line_probes, plane_probes, far_probes;
  const auto perp_to = [&](const Vector3d& v) {
    Vector3d p = rng.unit_vector();
    return Vector3d((p - p.dot(v) * v).normalized());
  };
  for (int k = 0; k < 150; ++k) {
    const double t0 = rng.uniform(I.lo, I.hi);
    const Vector3d e = eta(t0), g = c(t0);
    line_probes.push_back({rng.unit_vector() * rng.uniform(0, 0.5), e, perp_to(e), rng.uniform(0.05, 1.0), rng.uniform(0, 1)});
    plane_probes.push_back({rng.unit_vector() * rng.uniform(0, 0.5), g, perp_to(g), rng.uniform(0.05, 1.0), rng.uniform(0, 1)});
    far_probes.push_back({rng.unit_vector() * rng.uniform(0, 0.5), rng.unit_vector(), Vector3d::Zero(), rng.uniform(1.5, 3.0), 0});
  }
  std::vector<double> uline, uplane, offc;
  std::size_t off_pairs_min = std::numeric_limits<std::size_t>::max();
  for (int e : {9, 10, 11}) {
    const double delta = std::ldexp(1.0, -e);
    const ThetaSampler s(c, {I}, delta / 4);
    std::vector<PointPair> lp, pp, fp;
    for (const auto& p : line_probes) lp.push_back({p.x + p.r * p.dir + p.off * delta * p.perp, p.x});
    for (const auto& p : plane_probes) pp.push_back({p.x + p.r * p.dir + p.off * delta * p.perp, p.x});
    // Short generic differences of length ~ delta^tau sit off the delta^tau cone.
    for (const auto& p : far_probes) fp.push_back({p.x + p.r * std::pow(delta, tau) * p.dir, p.x});
    uline.push_back(verify_T_bounds(lp, s, delta, ProjectionKind::line, tau, bad_cone(c, I, ProjectionKind::line)).universal_constant);
    uplane.push_back(verify_T_bounds(pp, s, delta, ProjectionKind::plane, tau, bad_cone(c, I, ProjectionKind::plane)).universal_constant);
    const auto rep = verify_T_bounds(fp, s, delta, ProjectionKind::line, tau, bad_cone(c, I, ProjectionKind::line));
    offc.push_back(rep.off_cone_constant);
    off_pairs_min = std::min(off_pairs_min, rep.off_cone_pairs);
  }
  const auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0 ? (*hi - *lo) / *lo : std::numeric_limits<double>::infinity();
  };
  ok = ok && spread(uline) < 0.2 && spread(uplane) < 0.2 && spread(offc) < 0.2 && off_pairs_min >= 100;
  detail += fmt("constants over 2^-9..2^-11: line %.3f/%.3f/%.3f, plane %.3f/%.3f/%.3f, off-cone %.3f/%.3f/%.3f "
                "(%zu+ off-cone pairs); ",
                uline[0], uline[1], uline[2], uplane[0], uplane[1], uplane[2], offc[0], offc[1], offc[2], off_pairs_min);

  // Plane exclusion: points outside the 2 delta cone neighbourhood never incide.
  const double delta = 1.0 / 128;
  const ThetaSampler s(c, {I}, delta / 4);
  const ConeFamily cone = bad_cone(c, I, ProjectionKind::plane);
  std::size_t violations = 0, checked = 0;
  for (int trial = 0; trial < 4; ++trial) {
    const Vector3d x = rng.unit_vector() * rng.uniform(0, 0.3);
    PointCloud pts;
    for (int i = 0; i < 300; ++i) pts.push_back(rng.unit_vector() * rng.uniform(0.0, 1.0));
    for (int i = 0; i < 300; ++i) pts.push_back(x + c(rng.uniform(I.lo, I.hi)) * rng.uniform(-1, 1));
    const auto near = cone_neighborhood(pts, x, cone, 2 * delta);
    std::vector<char> in(pts.size(), 0);
    for (auto i : near) in[i] = 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (in[i] || pts[i] == x) continue;
      ++checked;
      if (T_I(x, pts[i], s, delta, ProjectionKind::plane) > 0) ++violations;
    }
  }
  ok = ok && violations == 0;
  detail += fmt("plane exclusion: %zu violations over %zu pairs", violations, checked);
  return {ok, detail};
}

Outcome discrete_theorem() {
  const auto line = run_discrete_theorem(default_config("discrete-theorem"));
  auto plane_cfg = parse_config(R"({"kind": "plane", "system": "cantor3_cube", "deltas": "3^-5"})",
                                default_config("discrete-theorem"));
  const auto plane = run_discrete_theorem(plane_cfg);
  const double dl = line.summary["delta"].get<double>(), dp = plane.summary["delta"].get<double>();
  const double ml = line.summary["max_measure"].get<double>(), mp = plane.summary["max_measure"].get<double>();
  const double stated = std::pow(dp, 2 - 1.2281);
  const bool ok = line.pass && ml >= std::pow(dl, 1 - 0.51822) && plane.pass && mp >= stated;
  return {ok, fmt("line: max |rho| = %.4f >= %.4f at theta* = %.4f; plane: max |pi| = %.4f >= %.4f "
                  "(sigma2 = %.5f) and >= %.4f (exponent 1.2281)",
                  ml, line.summary["threshold"].get<double>(), line.summary["theta_star"].get<double>(), mp,
                  plane.summary["threshold"].get<double>(), plane.summary["sigma"].get<double>(), stated)};
}

Outcome blp() {
  const auto sys = make_system<3>(builtin_system("cantor3_cube"));
  const auto r = build_blp_subset(sys, Vector3d(0, 0, 1), 0.05);
  const double floor = std::log(4.0) / std::log(3.0) - 0.05;
  const bool ok = r.extraction.s_tilde >= floor && r.alpha > 0 && r.cone_separation_clean && r.stays_off_consistent;
  return {ok, fmt("s~ = %.5f (>= %.5f), %zu maps, alpha = %.5f, cone separation clean over %zu pairs: %s, "
                  "stays_off consistent: %s",
                  r.extraction.s_tilde, floor, r.system.size(), r.alpha, r.cone_pairs_checked,
                  r.cone_separation_clean ? "yes" : "no", r.stays_off_consistent ? "yes" : "no")};
}

Outcome sumset() {
  const auto r = run_sumset(default_config("sumset"));
  const double d = r.summary["theta0_delta"].get<double>();
  const double m0 = r.summary["theta0_measure"].get<double>();
  const bool ok = r.pass && r.summary["thetas"].get<int>() == 256 && std::abs(m0 - 2.0) <= 2 * d;
  return {ok, fmt("%.1f%% of 256 theta have ratio >= 0.5 (min %.4f); theta = 0: |C + C| = %.6f vs 2 at delta %.2e",
                  100 * r.summary["passing_fraction"].get<double>(), r.summary["min_ratio"].get<double>(), m0, d)};
}

Outcome pair_projection() {
  auto cfg = default_config("pair-projection");
  cfg.system = builtin_system("cantor3_cube");
  const auto r = run_pair_projection(cfg);
  const double cv = r.summary["c_center"].get<double>();
  const bool ok = r.pass && std::abs(cv - 0.353553) <= 1e-6;
  return {ok, fmt("residual %.2e, c(0, pi/2) = %.7f, dim Pi(K) = %.3f <= %.3f + %.3f + 0.1",
                  r.summary["determinant_residual"].get<double>(), cv, r.summary["dim_pair"].get<double>(),
                  r.summary["dim_rho_I"].get<double>(), r.summary["dim_rho_J"].get<double>())};
}

Outcome determinism() {
  std::size_t identical = 0, total = 0;
  for (const auto& name : experiment_names()) {
    const auto cfg = default_config(name);
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    std::ostringstream ca, cb;
    write_report_csv(ca, a);
    write_report_csv(cb, b);
    ++total;
    if (dump_report(a) == dump_report(b) && ca.str() == cb.str()) ++identical;
  }
  // Worker count must not leak into results.
  const int workers = worker_count();
  const auto cfg = default_config("energy");
  set_worker_count(1);
  const auto serial = dump_report(run_experiment(cfg));
  set_worker_count(3);
  const auto threaded = dump_report(run_experiment(cfg));
  set_worker_count(workers);
  const bool ok = identical == total && serial == threaded;
  return {ok, fmt("%zu of %zu experiments byte-identical on rerun; 1 vs 3 workers identical: %s", identical, total,
                  serial == threaded ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "exponent formulas", 1, exponents},
      {2, "curve identities", 1, curve_identities},
      {3, "sub-level exponents", 30, sublevel},
      {4, "Kaufman integral", 60, kaufman},
      {5, "zero counting", 30, zero_window},
      {6, "discrete Frostman", 60, frostman},
      {7, "incidence machinery", 300, incidence},
      {8, "discrete theorem", 300, discrete_theorem},
      {9, "BLP construction", 60, blp},
      {10, "sumset", 300, sumset},
      {11, "pair projection", 60, pair_projection},
      {12, "determinism", 600, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << ": " << out.detail
              << fmt(" [%.2f s of %.0f s]", secs, c.budget_seconds) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
