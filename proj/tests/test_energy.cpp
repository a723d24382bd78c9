#include "doctest.h"

#include "projlab/energy.hpp"

#include <sstream>

using namespace projlab;

namespace {

Measure1 cantor_measure(int depth) { return uniform_measure(attractor_points(make_system<1>(builtin_system("cantor3")), depth)); }

Interval full_circle() { return {0.0, kTwoPi}; }

}  // namespace

TEST_CASE("t_energy examples") {
  const Measure3 two({{Vector3d::Zero(), 1.0}, {Vector3d(1, 0, 0), 1.0}});
  CHECK(t_energy(two, 0.7) == doctest::Approx(2.0));
  const Measure2 weighted({{Vector2d::Zero(), 2.0}, {Vector2d(0, 0.5), 3.0}});
  CHECK(t_energy(weighted, 1.0) == doctest::Approx(2.0 * 6.0 * 2.0));
  CHECK(t_energy(weighted, 0.0) == doctest::Approx(12.0));
  CHECK(t_energy(Measure1({{Point<double, 1>(0.3), 1.0}}), 0.5) == 0.0);

  CHECK_THROWS_AS(t_energy(Measure3({{Vector3d::Zero(), 1.0}, {Vector3d::Zero(), 1.0}}), 0.5), Error);
  CHECK_THROWS_AS(t_energy(two, -0.1), Error);
  CHECK_THROWS_AS(Measure1({{Point<double, 1>(0.0), 0.0}}), Error);
}

TEST_CASE("Cantor energies below and above the dimension") {
  const double dim = std::log(2.0) / std::log(3.0);
  SUBCASE("t below the dimension is stable") {
    const double t = 0.4;
    REQUIRE(t < dim);
    const double a = t_energy(cantor_measure(9), t);
    const double b = t_energy(cantor_measure(10), t);
    CHECK(b / a == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("t above the dimension grows by 3^t / 2") {
    // One step of the recursion: I_{n+1} = (3^t / 2) I_n + cross terms.
    for (double t : {0.8, 1.0}) {
      CAPTURE(t);
      const double a = t_energy(cantor_measure(10), t);
      const double b = t_energy(cantor_measure(11), t);
      CHECK(b / a > 1.0);
      CHECK(b / a == doctest::Approx(std::pow(3.0, t) / 2.0).epsilon(0.05));
    }
  }
}

TEST_CASE("t_energy is monotone in t for small sets") {
  Rng rng(3);
  std::vector<Vector3d> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(0.25 * rng.unit_vector() * rng.uniform());
  const auto mu = uniform_measure(pts);
  double prev = 0.0;
  for (double t = 0.0; t <= 2.5; t += 0.25) {
    const double e = t_energy(mu, t);
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("pushforward examples") {
  const auto g = cone_curve();
  const Measure3 one({{Vector3d(0.2, -0.1, 0.4), 0.7}});
  const auto p = pushforward_line(one, g, 1.1);
  REQUIRE(p.size() == 1);
  CHECK(p.atoms()[0].weight == 0.7);
  CHECK(p.atoms()[0].point[0] == doctest::Approx(g(1.1).dot(Vector3d(0.2, -0.1, 0.4))));

  // x - y perpendicular to gamma(0) = (1, 0, 1)/sqrt(2).
  const Measure3 pair({{Vector3d(0.3, 0.1, 0.0), 1.0}, {Vector3d(0.0, -0.2, 0.3), 2.5}});
  const auto merged = pushforward_line(pair, g, 0.0);
  REQUIRE(merged.size() == 1);
  CHECK(merged.atoms()[0].weight == doctest::Approx(3.5));
  CHECK(pushforward_line(pair, g, 0.3).size() == 2);

  // Plane kind merges along gamma(theta) only.
  const Vector3d x(0.1, 0.2, -0.1);
  const Measure3 along({{x, 1.0}, {x + 0.2 * g(2.0), 1.0}, {x + 0.2 * frame(g, 2.0).eta, 1.0}});
  CHECK(pushforward_plane(along, g, 2.0).size() == 2);
}

TEST_CASE("pushforward preserves mass") {
  const auto mu = attractor_measure(make_system<3>(builtin_system("cantor3_cube")), 3);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  for (double th : {0.0, kPi / 4, 1.0, 3.0, kPi}) {
    CHECK(pushforward_line(mu, cone_curve(), th).total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-13));
    CHECK(pushforward_plane(mu, cone_curve(), th).total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-13));
  }
  // The symmetric direction theta = 0 collapses atoms of the triple Cantor set.
  CHECK(pushforward_line(mu, cone_curve(), 0.0).size() < mu.size());
}

TEST_CASE("avg_projected_energy examples") {
  const auto g = cone_curve();
  SUBCASE("two atoms follow the Kaufman integral") {
    const Vector3d x(0.1, 0.2, 0.3), y(-0.2, 0.1, 0.05);
    const Measure3 two({{x, 1.0}, {y, 1.0}});
    const double step = kTwoPi / 4096;
    const auto r = avg_projected_energy(two, g, 0.4, {full_circle()}, ProjectionKind::line, step);
    CHECK(r.admissible);
    const double oracle = kaufman_integral(g, (x - y).normalized(), 0.4, step) / kTwoPi;
    CHECK(r.ratio == doctest::Approx(oracle).epsilon(0.01));
    CHECK(r.base_energy == doctest::Approx(2.0 * std::pow((x - y).norm(), -0.4)));
  }
  SUBCASE("t = 0 gives ratio 1") {
    const auto mu = attractor_measure(make_system<3>(builtin_system("dust08")), 3);
    // Midpoints (2k + 1) pi / 64 avoid the multiples of pi / 2, where
    // generation-1 atoms of the dust project to the same point.
    const auto r = avg_projected_energy(mu, g, 0.0, {full_circle()}, ProjectionKind::line, kTwoPi / 64);
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    // On it, the merged atoms drop their pair from the off-diagonal mass.
    CHECK(pushforward_line(mu, g, kPi).size() < mu.size());
    CHECK(avg_projected_energy(mu, g, 0.0, {full_circle()}, ProjectionKind::line, kTwoPi / 37).ratio < 1.0);
  }
  SUBCASE("Cantor-type measure at t = 0.4 is stable under refinement") {
    const auto dust = make_system<3>(builtin_system("dust08"));
    std::vector<double> ratios;
    for (int depth : {3, 4, 5}) {
      ratios.push_back(
          avg_projected_energy(attractor_measure(dust, depth), g, 0.4, {full_circle()}, ProjectionKind::line, kTwoPi / 64)
              .ratio);
    }
    for (double r : ratios) CHECK(r < 3.0);
    CHECK(ratios[2] / ratios[1] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(ratios[1] / ratios[0] == doctest::Approx(1.0).epsilon(0.1));
  }
  CHECK_FALSE(avg_projected_energy(Measure3({{Vector3d::Zero(), 1.0}}), g, 0.6, {full_circle()}, ProjectionKind::line, 0.5)
                  .admissible);
  CHECK(avg_projected_energy(Measure3({{Vector3d::Zero(), 1.0}}), g, 0.6, {full_circle()}, ProjectionKind::plane, 0.5)
            .admissible);
}

TEST_CASE("projected energy ratio survives theta-grid halving") {
  const auto g = cone_curve();
  const auto cube = attractor_measure(make_system<3>(builtin_system("cantor3_cube")), 2);
  const auto dust = attractor_measure(make_system<3>(builtin_system("dust08")), 4);
  struct Case {
    const Measure3* mu;
    double t;
    ProjectionKind kind;
  };
  for (const auto& c : {Case{&cube, 0.4, ProjectionKind::line}, Case{&dust, 0.3, ProjectionKind::line},
                        Case{&cube, 0.8, ProjectionKind::plane}, Case{&dust, 0.6, ProjectionKind::plane}}) {
    const auto a = avg_projected_energy(*c.mu, g, c.t, {full_circle()}, c.kind, kTwoPi / 32);
    const auto b = avg_projected_energy(*c.mu, g, c.t, {full_circle()}, c.kind, kTwoPi / 64);
    CHECK(a.admissible);
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(0.2));
  }
}

TEST_CASE("fourier examples") {
  const Measure2 origin({{Vector2d::Zero(), 1.0}});
  const Measure2 pair({{Vector2d(0.5, 0), 1.0}, {Vector2d(-0.5, 0), 1.0}});
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vector2d xi(rng.uniform(-20, 20), rng.uniform(-20, 20));
    const auto f0 = fourier(origin, xi);
    CHECK(f0.real() == doctest::Approx(1.0));
    CHECK(f0.imag() == doctest::Approx(0.0));
    const auto f = fourier(pair, xi);
    CHECK(f.real() == doctest::Approx(2.0 * std::cos(kPi * xi.x())));
    CHECK(std::abs(f.imag()) < 1e-12);
  }
}

TEST_CASE("fourier properties") {
  const auto mu = attractor_measure(make_system<3>(builtin_system("dust08")), 3);
  CHECK(std::abs(fourier(mu, Vector3d(Vector3d::Zero()))) == doctest::Approx(mu.total_mass()));
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    const Vector3d xi = rng.uniform(0, 50) * rng.unit_vector();
    const auto a = fourier(mu, xi), b = fourier(mu, Vector3d(-xi));
    CHECK(std::abs(a) <= mu.total_mass() * (1 + 1e-12));
    CHECK(std::abs(b - std::conj(a)) < 1e-12);
  }
}

TEST_CASE("spherical_average examples") {
  const Measure2 origin({{Vector2d::Zero(), 1.0}});
  for (double r : {0.1, 1.0, 40.0}) CHECK(spherical_average(origin, r, 64).value == doctest::Approx(kTwoPi));

  const auto four = make_system<2>(builtin_system("fourcorner_plane"));
  const auto mu = attractor_measure(four, 6);
  const double t = 0.4;
  const double energy = t_energy(mu, t);
  std::vector<double> ratios;
  for (int k = 1; k <= 8; ++k) {
    const auto s = spherical_average(mu, std::ldexp(1.0, k), 4096, t, energy);
    CHECK(s.value >= 0.0);
    ratios.push_back(s.bound_ratio);
  }
  // The decay bound holds with the constant fitted at the coarsest radius.
  for (double r : ratios) CHECK(r <= ratios.front() * (1 + 1e-9));
  // And the fitted constants do not depend on the depth.
  const auto coarse = attractor_measure(four, 5);
  const double ec = t_energy(coarse, t);
  for (int k : {1, 3, 5}) {
    const double r = spherical_average(coarse, std::ldexp(1.0, k), 4096, t, ec).bound_ratio;
    CHECK(r == doctest::Approx(ratios[static_cast<std::size_t>(k - 1)]).epsilon(0.1));
  }
  CHECK_THROWS_AS(spherical_average(origin, 0.0, 64), Error);
}

TEST_CASE("spherical average tends to 2 pi mass^2 at small radius") {
  const auto mu = attractor_measure(make_system<2>(builtin_system("fourcorner_plane")), 3);
  const double m = mu.total_mass();
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double r : {0.5, 0.1, 0.01, 0.001}) {
    const double gap = std::abs(spherical_average(mu, r, 256).value - kTwoPi * m * m);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-4);
}

TEST_CASE("product measure projections along the vertical cone") {
  // Planar four-corner set (dimension 1) times the middle-thirds set.
  const auto k1 = make_system<2>(builtin_system("fourcorner_plane"));
  const auto k2 = make_system<1>(builtin_system("cantor3"));
  const auto energy_at = [&](int depth, double t) {
    const auto mu = product_measure(attractor_measure(k1, depth), attractor_measure(k2, depth));
    CHECK(mu.total_mass() == doctest::Approx(1.0));
    return avg_projected_energy(mu, cone_curve(), t, {full_circle()}, ProjectionKind::line, kTwoPi / 64).average;
  };
  // t1 + t2 with t1 < 1/2 and t2 < log 2 / log 3 stays finite.
  const double low = energy_at(3, 0.9) / energy_at(2, 0.9);
  // Beyond 1/2 + log 2 / log 3 the averages diverge with depth.
  const double high = energy_at(3, 1.4) / energy_at(2, 1.4);
  CHECK(low < 1.25);
  CHECK(high > 1.5);
}

TEST_CASE("measure CSV round trip") {
  const auto mu = attractor_measure(make_system<2>(builtin_system("fourcorner_plane")), 2);
  std::stringstream ss;
  write_measure_csv(ss, mu);
  CHECK(ss.str().rfind("x,y,weight\n", 0) == 0);
  const auto back = read_measure_csv<2>(ss);
  REQUIRE(back.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(back.atoms()[i].point == mu.atoms()[i].point);
    CHECK(back.atoms()[i].weight == mu.atoms()[i].weight);
  }
  std::stringstream bad("x,weight\n0.1\n");
  CHECK_THROWS_AS(read_measure_csv<1>(bad), Error);
}
