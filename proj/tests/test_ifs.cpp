#include "doctest.h"

#include "projlab/dnet.hpp"
#include "projlab/ifs.hpp"

using namespace projlab;

namespace {

System3 cube() { return make_system<3>(builtin_system("cantor3_cube")); }

System2 twin_overlap() {
  return System2({{0.5, Vector2d(-1.0 / 16, 0)}, {0.5, Vector2d(1.0 / 16, 0)}});
}

}  // namespace

TEST_CASE("similarity_dimension examples") {
  CHECK(similarity_dimension({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(similarity_dimension({1.0 / 3, 1.0 / 3}) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-11));
  CHECK(similarity_dimension(std::vector<double>(8, 1.0 / 3)) ==
        doctest::Approx(std::log(8.0) / std::log(3.0)).epsilon(1e-11));
  CHECK(similarity_dimension({0.4}) == 0.0);
  CHECK(similarity_dimension(make_system<3>(builtin_system("dust08"))) == doctest::Approx(0.8).epsilon(1e-11));
  CHECK_THROWS_AS(similarity_dimension({}), Error);
  CHECK_THROWS_AS(similarity_dimension({0.5, 1.0}), Error);
  CHECK_THROWS_AS(similarity_dimension({0.0}), Error);
}

TEST_CASE("system validation") {
  CHECK_THROWS_AS(System1({}), Error);
  CHECK_THROWS_AS(System1({{1.2, Point<double, 1>(0.0)}}), Error);
  CHECK_THROWS_AS(System1({{0.5, Point<double, 1>(0.3)}}), Error);
  CHECK_NOTHROW(System1({{0.5, Point<double, 1>(0.25)}}));
  for (const auto& name : builtin_system_names()) {
    CAPTURE(name);
    CHECK_NOTHROW(make_system<3>(builtin_system(name)));
  }
  CHECK_THROWS_AS(builtin_system("nope"), Error);
  CHECK_THROWS_AS(make_system<2>(builtin_system("cantor3_cube")), Error);
}

TEST_CASE("generation_balls examples") {
  const auto b0 = generation_balls(cube(), 0);
  REQUIRE(b0.balls.size() == 1);
  CHECK(b0.balls[0].center.norm() == 0.0);
  CHECK(b0.balls[0].diameter == 1.0);

  const auto b2 = generation_balls(cube(), 2);
  CHECK(b2.balls.size() == 64);
  for (const auto& b : b2.balls) CHECK(b.diameter == doctest::Approx(1.0 / 9));
  CHECK(b2.balls.front().word == Word{0, 0});
  CHECK(b2.balls[1].word == Word{0, 1});
  CHECK(b2.balls.back().word == Word{7, 7});

  // The ball is psi_word(B(0, 1/2)) with psi_word = psi_w1 o psi_w2.
  const auto s = cube();
  const auto& b = b2.balls[13];
  CHECK((b.center - s[static_cast<std::size_t>(b.word[0])](s[static_cast<std::size_t>(b.word[1])](Vector3d::Zero()))).norm() < 1e-15);

  CHECK_THROWS_AS(generation_balls(cube(), -1), Error);
  try {
    generation_balls(cube(), 9, 1000);
    FAIL("expected size error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::size_limit);
  }
}

TEST_CASE("generation balls carry unit s-mass") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Similitude<3>> maps;
    const int q = 2 + trial;
    for (int i = 0; i < q; ++i) {
      const double r = rng.uniform(0.05, 0.5);
      maps.push_back({r, rng.unit_vector() * rng.uniform(0.0, 0.5 - r / 2)});
    }
    const System3 sys(maps);
    const double s = similarity_dimension(sys);
    for (int n = 0; n <= 4; ++n) {
      double sum = 0.0;
      for (const auto& b : generation_balls(sys, n).balls) sum += std::pow(b.diameter, s);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("project_system examples") {
  const System3 flat({{0.25, Vector3d(0.1, -0.2, 0)}, {0.3, Vector3d(-0.3, 0.1, 0)}});
  const auto p = project_system(flat, Vector3d::UnitZ());
  CHECK(p[0].translation.isApprox(Vector2d(0.1, -0.2)));
  CHECK(p[1].translation.isApprox(Vector2d(-0.3, 0.1)));

  const auto pc = project_system(cube(), Vector3d::UnitZ());
  CHECK(pc.size() == 8);
  const auto d = distinct_maps(pc);
  CHECK(d.system.size() == 4);
  for (auto m : d.multiplicity) CHECK(m == 2);

  // Projection commutes with generation.
  Rng rng(6);
  for (int k = 0; k < 5; ++k) {
    const Vector3d n = rng.unit_vector();
    const auto basis = plane_basis(n);
    const auto b3 = generation_balls(cube(), 2);
    const auto b2 = generation_balls(project_system(cube(), n), 2);
    REQUIRE(b3.balls.size() == b2.balls.size());
    for (std::size_t i = 0; i < b3.balls.size(); ++i) {
      CHECK((basis.transpose() * b3.balls[i].center - b2.balls[i].center).norm() < 1e-12);
      CHECK(b3.balls[i].diameter == b2.balls[i].diameter);
    }
  }
  CHECK_THROWS_AS(project_system(cube(), Vector3d::Zero()), Error);
}

TEST_CASE("very_strong_separation examples") {
  const auto a = very_strong_separation(System3({{1.0 / 3, Vector3d(1.0 / 3, 0, 0)}, {1.0 / 3, Vector3d(-1.0 / 3, 0, 0)}}));
  CHECK(a.separated);
  CHECK(a.min_gap == doctest::Approx(1.0 / 3));
  const auto b = very_strong_separation(System3({{0.5, Vector3d(0.25, 0, 0)}, {0.5, Vector3d(-0.25, 0, 0)}}));
  CHECK_FALSE(b.separated);
  CHECK(b.min_gap == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(very_strong_separation(System3({{0.5, Vector3d::Zero()}})).separated);
}

TEST_CASE("extract_separated_subsystem examples") {
  SUBCASE("separated plane system keeps everything") {
    const auto four = make_system<2>(builtin_system("fourcorner_plane"));
    REQUIRE(very_strong_separation(four).separated);
    const auto r = extract_separated_subsystem(four, 0.05);
    CHECK(r.generation == 1);
    CHECK(r.selection.size() == 4);
    CHECK(r.s_tilde == doctest::Approx(similarity_dimension(four)).epsilon(1e-11));
    CHECK(r.converged);
  }
  SUBCASE("triple Cantor projected to the xy-plane") {
    const auto r = extract_separated_subsystem(project_system(cube(), Vector3d::UnitZ()), 0.05);
    CHECK(r.generation == 1);
    CHECK(r.selection.size() == 4);
    CHECK(r.s_tilde == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-11));
    CHECK(std::abs(r.target - std::log(4.0) / std::log(3.0)) < 0.05);
  }
  SUBCASE("overlapping twin maps") {
    const auto r = extract_separated_subsystem(twin_overlap(), 0.01, 6, 1.0);
    CHECK_FALSE(r.converged);
    REQUIRE(r.trace.size() == 6);
    CHECK(r.trace[0] < 1.0);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
    for (double s : r.trace) CHECK(s < 1.0);
  }
  CHECK_THROWS_AS(extract_separated_subsystem(twin_overlap(), 0.0), Error);
}

TEST_CASE("greedy selection is pairwise disjoint") {
  Rng rng(9);
  std::vector<Ball<2>> balls;
  for (int i = 0; i < 400; ++i) {
    Ball<2> b;
    b.center = Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    b.diameter = rng.uniform(0.01, 0.2);
    b.word = {i};
    balls.push_back(b);
  }
  const auto sel = greedy_disjoint(balls);
  for (std::size_t i = 0; i < sel.size(); ++i) {
    for (std::size_t j = i + 1; j < sel.size(); ++j) {
      CHECK((sel[i].center - sel[j].center).norm() - 0.5 * (sel[i].diameter + sel[j].diameter) > 0);
    }
    if (i > 0) CHECK(sel[i].diameter <= sel[i - 1].diameter);
  }
  // Maximality: every rejected ball meets a selected one.
  for (const auto& b : balls) {
    bool hit = false;
    for (const auto& s : sel) hit = hit || (s.center - b.center).norm() - 0.5 * (s.diameter + b.diameter) <= 1e-12;
    CHECK(hit);
  }
}

TEST_CASE("pair_alpha geometry") {
  const Vector3d z = Vector3d::UnitZ();
  // Points side by side in the plane: full aperture less the ball size.
  const double a = pair_alpha(Vector3d(1, 0, 0), 0.1, Vector3d(-1, 0, 0), 0.1, z);
  CHECK(a == doctest::Approx(std::sin(kPi / 2 - std::asin(0.1))));
  CHECK(pair_alpha(Vector3d(0, 0, 1), 0.1, Vector3d(0, 0, -1), 0.1, z) == 0.0);
  CHECK(pair_alpha(Vector3d(0, 0, 0), 0.5, Vector3d(0.5, 0, 0), 0.5, z) == 0.0);
  // Brute force over sampled ball points.
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vector3d c1 = rng.unit_vector(), c2 = -rng.unit_vector();
    const double r1 = 0.1, r2 = 0.15;
    const double alpha = pair_alpha(c1, r1, c2, r2, z);
    double worst = 1.0;
    for (int m = 0; m < 4000; ++m) {
      const Vector3d x = c1 + r1 * std::cbrt(rng.uniform()) * rng.unit_vector();
      const Vector3d y = c2 + r2 * std::cbrt(rng.uniform()) * rng.unit_vector();
      const Vector3d d = x - y;
      worst = std::min(worst, distance_to_line(d, z) / d.norm());
    }
    CHECK(worst >= alpha - 1e-12);
    // Differences x - y fill B(c1 - c2, r1 + r2); probe its boundary.
    double edge = 1.0;
    for (int m = 0; m < 20000; ++m) {
      const Vector3d u = rng.unit_vector();
      const Vector3d d = (c1 + r1 * u) - (c2 - r2 * u);
      edge = std::min(edge, distance_to_line(d, z) / d.norm());
    }
    CHECK(edge >= alpha - 1e-12);
    CHECK(edge - alpha < 0.01);
  }
}

TEST_CASE("build_blp_subset on the triple Cantor set") {
  const auto r = build_blp_subset(cube(), Vector3d::UnitZ(), 0.05);
  CHECK(r.system.size() == 4);
  CHECK(r.alpha > 0.0);
  CHECK(r.alpha < 1.0);
  double sum = 0.0;
  for (const auto& m : r.system.maps()) sum += std::pow(m.ratio, r.extraction.s_tilde);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.extraction.s_tilde >= std::log(4.0) / std::log(3.0) - 0.05);
  CHECK(r.cone_separation_clean);
  CHECK(r.cone_pairs_checked > 0);
  CHECK(r.stays_off_consistent);
  // Words are the smallest preimages: z-sign bit 0.
  for (const auto& w : r.lifted_words) CHECK(w[0] % 2 == 0);

  const auto centers = attractor_points(r.system, 2);
  CHECK(stays_off(std::vector<Vector3d>(centers.begin(), centers.end()), Vector3d::UnitZ(), r.alpha).holds);
}

TEST_CASE("build_blp_subset on a separated dust keeps its maps") {
  const auto dust = make_system<3>(builtin_system("dust08"));
  const Vector3d n = Vector3d(0.3, -0.2, 1).normalized();
  const auto r = build_blp_subset(dust, n, 0.05, 4, 0.8);
  CHECK(r.extraction.generation == 1);
  CHECK(r.system.size() == 4);
  CHECK(r.alpha > 0);
  CHECK(r.cone_separation_clean);
}

TEST_CASE("attractor_points examples") {
  const auto one = attractor_points(cube(), 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].norm() == 0.0);

  const auto c = make_system<1>(builtin_system("cantor3"));
  const auto pts = attractor_points(c, 3);
  REQUIRE(pts.size() == 8);
  // Centers of the depth-3 middle-thirds intervals of [-1/2, 1/2].
  std::vector<double> expect;
  for (int a : {0, 2})
    for (int b : {0, 2})
      for (int d : {0, 2}) expect.push_back(a / 3.0 + b / 9.0 + d / 27.0 + 1 / 54.0 - 0.5);
  for (std::size_t i = 0; i < 8; ++i) CHECK(pts[i][0] == doctest::Approx(expect[i]).epsilon(1e-14));

  const auto c3 = make_system<3>(builtin_system("cantor3"));
  const auto on_axis = attractor_points(c3, 3);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(on_axis[i].x() == doctest::Approx(expect[i]));
    CHECK(on_axis[i].y() == 0.0);
  }

  const auto wp = word_points(c, 4);
  for (const auto& p : wp) CHECK(std::abs(p[0]) <= 0.5 + 1e-15);
}

TEST_CASE("separated attractor samples form stable delta-s sets") {
  const auto sys = cube();
  REQUIRE(very_strong_separation(sys).separated);
  const double s = similarity_dimension(sys);
  std::vector<double> constants;
  for (int depth : {3, 4}) {
    const auto pts = attractor_points(sys, depth);
    // Centers of distinct generation-depth balls are at least 3^-depth apart.
    const double delta = std::ldexp(1.0, -static_cast<int>(std::ceil(depth * std::log2(3.0))));
    constants.push_back(verify_delta_s(PointCloud(pts.begin(), pts.end()), delta, s));
  }
  CHECK(constants[1] == doctest::Approx(constants[0]).epsilon(0.25));
}
