#include "projlab/ifs.hpp"

#include "projlab/cones.hpp"

#include <map>

namespace projlab {

double similarity_dimension(const std::vector<double>& ratios) {
  if (ratios.empty()) throw Error(ErrorCode::invalid_argument, "similarity dimension needs at least one ratio");
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::invalid_argument, "contraction ratios must lie in (0, 1)");
  }
  const auto f = [&](double s) {
    double sum = 0.0;
    for (double r : ratios) sum += std::pow(r, s);
    return sum - 1.0;
  };
  if (f(0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

System2 project_system(const System3& system, const Vector3d& normal) {
  const auto basis = plane_basis(normal);
  std::vector<Similitude<2>> maps;
  for (const auto& m : system.maps()) maps.push_back({m.ratio, basis.transpose() * m.translation});
  return System2(std::move(maps));
}

std::vector<Ball<2>> greedy_disjoint(std::vector<Ball<2>> balls) {
  std::stable_sort(balls.begin(), balls.end(),
                   [](const Ball<2>& a, const Ball<2>& b) { return a.diameter > b.diameter; });
  std::vector<Ball<2>> selected;
  if (balls.empty()) return selected;
  // Overlapping balls have centers within the largest diameter.
  const double cell = balls.front().diameter;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> grid;
  const auto key = [&](const Vector2d& c) {
    return std::make_pair(static_cast<std::int64_t>(std::floor(c.x() / cell)),
                          static_cast<std::int64_t>(std::floor(c.y() / cell)));
  };
  for (auto& b : balls) {
    const auto k = key(b.center);
    bool clear = true;
    for (std::int64_t a = -1; a <= 1 && clear; ++a) {
      for (std::int64_t c = -1; c <= 1 && clear; ++c) {
        const auto it = grid.find({k.first + a, k.second + c});
        if (it == grid.end()) continue;
        for (std::size_t s : it->second) {
          const auto& o = selected[s];
          if ((o.center - b.center).norm() - 0.5 * (o.diameter + b.diameter) <= 1e-12) {
            clear = false;
            break;
          }
        }
      }
    }
    if (!clear) continue;
    grid[k].push_back(selected.size());
    selected.push_back(std::move(b));
  }
  return selected;
}

ExtractionResult extract_separated_subsystem(const System2& plane_system, double epsilon, int depth_cap,
                                             std::optional<double> target, std::size_t cap) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  if (depth_cap < 1) throw Error(ErrorCode::invalid_argument, "depth cap must be at least 1");
  ExtractionResult best;
  best.target = target ? *target : attractor_box_dimension(plane_system).slope;
  best.s_tilde = -1.0;
  std::vector<double> trace;
  for (int n = 1; n <= depth_cap; ++n) {
    BallCollection<2> balls;
    try {
      balls = generation_balls(plane_system, n, cap);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::size_limit) throw;
      break;
    }
    auto selection = greedy_disjoint(std::move(balls.balls));
    std::vector<double> diameters;
    for (const auto& b : selection) diameters.push_back(b.diameter);
    const double s = similarity_dimension(diameters);
    trace.push_back(s);
    if (s > best.s_tilde) {
      best.s_tilde = s;
      best.generation = n;
      best.selection = std::move(selection);
    }
    if (s >= best.target - epsilon) {
      best.converged = true;
      break;
    }
  }
  best.trace = std::move(trace);
  return best;
}

double pair_alpha(const Vector3d& c1, double r1, const Vector3d& c2, double r2, const Vector3d& axis) {
  const Vector3d m = c1 - c2;
  const double len = m.norm();
  const double radius = r1 + r2;
  if (len <= radius) return 0.0;
  const double phi = std::acos(std::min(1.0, std::abs(m.dot(axis.normalized())) / len));
  return std::sin(std::max(0.0, phi - std::asin(radius / len)));
}

BlpResult build_blp_subset(const System3& system, const Vector3d& normal, double epsilon, int depth_cap,
                           std::optional<double> target, std::uint64_t seed) {
  const double nn = normal.norm();
  if (!(nn > 0.0)) throw Error(ErrorCode::invalid_argument, "plane normal is zero");
  const Vector3d axis = normal / nn;
  const auto basis = plane_basis(axis);
  auto extraction = extract_separated_subsystem(project_system(system, axis), epsilon, depth_cap, target);

  // Preimages of each selected planar ball among the 3D balls of the same
  // generation, sorted by the first projected coordinate.
  const auto gen = generation_balls(system, extraction.generation);
  std::vector<std::pair<double, std::size_t>> order;
  std::vector<Vector2d> projected(gen.balls.size());
  for (std::size_t i = 0; i < gen.balls.size(); ++i) {
    projected[i] = basis.transpose() * gen.balls[i].center;
    order.emplace_back(projected[i].x(), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<Similitude<3>> maps;
  std::vector<Word> words;
  for (const auto& b : extraction.selection) {
    const double tol = 1e-12 * std::max(1.0, b.center.norm());
    auto it = std::lower_bound(order.begin(), order.end(), std::make_pair(b.center.x() - tol, std::size_t{0}));
    const Ball<3>* pick = nullptr;
    for (; it != order.end() && it->first <= b.center.x() + tol; ++it) {
      const auto& cand = gen.balls[it->second];
      if ((projected[it->second] - b.center).norm() > tol) continue;
      if (std::abs(cand.diameter - b.diameter) > 1e-12 * b.diameter) continue;
      if (!pick || cand.word < pick->word) pick = &cand;
    }
    if (!pick) throw Error(ErrorCode::separation_failure, "selected planar ball has no preimage");
    maps.push_back({pick->diameter, pick->center});
    words.push_back(pick->word);
  }
  System3 lifted(std::move(maps));

  const auto g1 = generation_balls(lifted, 1);
  double lo = 0.0, hi = 1.0;
  const auto holds = [&](double alpha) {
    for (std::size_t i = 0; i < g1.balls.size(); ++i) {
      for (std::size_t j = 0; j < g1.balls.size(); ++j) {
        if (i == j) continue;
        if (pair_alpha(g1.balls[i].center, 0.5 * g1.balls[i].diameter, g1.balls[j].center,
                       0.5 * g1.balls[j].diameter, axis) < alpha)
          return false;
      }
    }
    return true;
  };
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw Error(ErrorCode::separation_failure, "no positive cone aperture separates the lifted balls");

  BlpResult out{std::move(lifted), lo, std::move(extraction), std::move(words), true, 0, false};
  Rng rng(seed);
  constexpr std::size_t kAllPairs = 2048;
  for (int n = 1; n <= 3; ++n) {
    std::vector<Ball<3>> balls;
    try {
      balls = generation_balls(out.system, n, std::size_t{1} << 20).balls;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::size_limit) throw;
      break;
    }
    const auto check = [&](std::size_t i, std::size_t j) {
      ++out.cone_pairs_checked;
      const double a = pair_alpha(balls[i].center, 0.5 * balls[i].diameter, balls[j].center,
                                  0.5 * balls[j].diameter, axis);
      if (a < out.alpha * (1.0 - 1e-9)) out.cone_separation_clean = false;
    };
    if (balls.size() <= kAllPairs) {
      for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j) check(i, j);
    } else {
      for (int k = 0; k < 200000; ++k) {
        const auto i = static_cast<std::size_t>(rng.next() % balls.size());
        const auto j = static_cast<std::size_t>(rng.next() % balls.size());
        if (i != j) check(i, j);
      }
    }
  }
  // Generation 2 when it fits, else generation 1.
  const int stays_gen = out.system.size() * out.system.size() <= (std::size_t{1} << 16) ? 2 : 1;
  std::vector<Vector3d> centers;
  for (const auto& b : generation_balls(out.system, stays_gen, std::size_t{1} << 16).balls) centers.push_back(b.center);
  out.stays_off_consistent = stays_off(centers, axis, out.alpha).holds;
  return out;
}

SystemSpec builtin_system(const std::string& name) {
  SystemSpec s;
  s.name = name;
  if (name == "cantor3") {
    s.dim = 1;
    s.ratios = {1.0 / 3, 1.0 / 3};
    s.translations = {{-1.0 / 3}, {1.0 / 3}};
  } else if (name == "cantor3_cube") {
    const double a = 1.0 / (3.0 * std::sqrt(3.0));
    for (int i : {-1, 1})
      for (int j : {-1, 1})
        for (int k : {-1, 1}) {
          s.ratios.push_back(1.0 / 3);
          s.translations.push_back({i * a, j * a, k * a});
        }
  } else if (name == "fourcorner_plane") {
    s.dim = 2;
    const double a = 3.0 / (8.0 * std::sqrt(2.0));
    for (int i : {-1, 1})
      for (int j : {-1, 1}) {
        s.ratios.push_back(0.25);
        s.translations.push_back({i * a, j * a});
      }
  } else if (name == "dust08") {
    // 4 r^0.8 = 1.
    const double r = std::pow(2.0, -2.5);
    const double a = 0.4 / std::sqrt(3.0);
    for (const auto& v : {Vector3d(1, 1, 1), Vector3d(1, -1, -1), Vector3d(-1, 1, -1), Vector3d(-1, -1, 1)}) {
      s.ratios.push_back(r);
      s.translations.push_back({a * v.x(), a * v.y(), a * v.z()});
    }
  } else {
    throw Error(ErrorCode::config, "unknown system '" + name + "'");
  }
  return s;
}

std::vector<std::string> builtin_system_names() { return {"cantor3", "cantor3_cube", "fourcorner_plane", "dust08"}; }

}  // namespace projlab
