#include "projlab/energy.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace projlab {

Measure1 pushforward_line(const Measure3& mu, const Curve3& curve, double theta) {
  require_in_domain(curve.domain(), theta);
  const Vector3d g = curve(theta);
  std::vector<Atom<1>> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) atoms.push_back({Point<double, 1>(g.dot(a.point)), a.weight});
  return merge_coincident(std::move(atoms));
}

Measure2 pushforward_plane(const Measure3& mu, const Curve3& curve, double theta) {
  const auto basis = frame(curve, theta).plane_basis;
  std::vector<Atom<2>> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) atoms.push_back({basis.transpose() * a.point, a.weight});
  return merge_coincident(std::move(atoms));
}

Measure3 product_measure(const Measure2& mu1, const Measure1& mu2) {
  std::vector<Atom<3>> atoms;
  atoms.reserve(mu1.size() * mu2.size());
  for (const auto& a : mu1.atoms()) {
    for (const auto& b : mu2.atoms()) atoms.push_back({Vector3d(a.point.x(), a.point.y(), b.point[0]), a.weight * b.weight});
  }
  return Measure3(std::move(atoms));
}

ProjectedEnergyAverage avg_projected_energy(const Measure3& mu, const Curve3& curve, double t,
                                            const std::vector<Interval>& theta_set, ProjectionKind kind,
                                            double step) {
  detail::require_energy_exponent(t);
  const auto grid = midpoint_grid(theta_set, step);
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double th = grid.theta[i];
    values[i] = kind == ProjectionKind::line ? detail::energy_serial(pushforward_line(mu, curve, th), t)
                                             : detail::energy_serial(pushforward_plane(mu, curve, th), t);
  });
  ProjectedEnergyAverage out;
  out.kind = kind;
  out.t = t;
  out.nodes = grid.size();
  out.admissible = t < (kind == ProjectionKind::line ? 0.5 : 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += grid.weight[i] * values[i];
  out.average = sum / grid.total_weight();
  out.base_energy = t_energy(mu, t);
  out.ratio = out.base_energy > 0.0 ? out.average / out.base_energy : 0.0;
  return out;
}

SphericalAverage spherical_average(const Measure2& mu, double r, std::size_t n_theta) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "spherical average radius must be positive");
  if (n_theta < 3) throw Error(ErrorCode::invalid_argument, "spherical average needs at least 3 angles");
  std::vector<double> values(n_theta);
  const double h = kTwoPi / static_cast<double>(n_theta);
  parallel_for(n_theta, [&](std::size_t k) {
    const double th = h * static_cast<double>(k);
    values[k] = std::norm(fourier(mu, Vector2d(r * std::cos(th), r * std::sin(th))));
  });
  SphericalAverage out;
  out.r = r;
  out.n_theta = n_theta;
  for (double v : values) out.value += h * v;
  return out;
}

SphericalAverage spherical_average(const Measure2& mu, double r, std::size_t n_theta, double t, double energy_t) {
  auto out = spherical_average(mu, r, n_theta);
  if (!(energy_t > 0.0)) throw Error(ErrorCode::invalid_argument, "reference energy must be positive");
  out.t = t;
  out.bound_ratio = out.value * std::pow(r, t) / energy_t;
  return out;
}

namespace {

constexpr const char* kAxes[] = {"x", "y", "z"};

template <int Dim>
std::string measure_header() {
  std::string h;
  for (int k = 0; k < Dim; ++k) h += std::string(kAxes[k]) + ",";
  return h + "weight";
}

}  // namespace

template <int Dim>
void write_measure_csv(std::ostream& out, const DiscreteMeasure<Dim>& mu) {
  out << measure_header<Dim>() << '\n';
  char buf[32];
  for (const auto& a : mu.atoms()) {
    for (int k = 0; k < Dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", a.point[k]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", a.weight);
    out << buf << '\n';
  }
}

template <int Dim>
DiscreteMeasure<Dim> read_measure_csv(std::istream& in) {
  std::vector<Atom<Dim>> atoms;
  const std::string header = measure_header<Dim>();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == header) continue;
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream ss(line);
    Atom<Dim> a;
    for (int k = 0; k < Dim; ++k) ss >> a.point[k];
    ss >> a.weight;
    std::string rest;
    if (!ss || (ss >> rest))
      throw Error(ErrorCode::invalid_argument, "measure CSV line " + std::to_string(lineno) + " is malformed");
    atoms.push_back(a);
  }
  return DiscreteMeasure<Dim>(std::move(atoms));
}

template void write_measure_csv<1>(std::ostream&, const Measure1&);
template void write_measure_csv<2>(std::ostream&, const Measure2&);
template void write_measure_csv<3>(std::ostream&, const Measure3&);
template Measure1 read_measure_csv<1>(std::istream&);
template Measure2 read_measure_csv<2>(std::istream&);
template Measure3 read_measure_csv<3>(std::istream&);

}  // namespace projlab
