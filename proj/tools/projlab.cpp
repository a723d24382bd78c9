#include "projlab/harness.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  bool quiet = false;
  std::optional<std::string> curve, system, deltas, kind;
  std::optional<int> depth, theta_count;
};

projlab::ExperimentConfig build_config(const std::string& experiment, const Overrides& o) {
  using projlab::Json;
  auto c = projlab::default_config(experiment);
  if (!o.config_path.empty()) {
    c = projlab::load_config(o.config_path, c);
    if (c.experiment != experiment)
      throw projlab::Error(projlab::ErrorCode::config,
                           "config field 'experiment': '" + c.experiment + "' does not match subcommand '" + experiment + "'");
  }
  Json flags = Json::object();
  if (o.curve) flags["curve"] = *o.curve;
  if (o.system) flags["system"] = *o.system;
  if (o.deltas) flags["deltas"] = *o.deltas;
  if (o.kind) flags["kind"] = *o.kind;
  if (o.depth) flags["depth"] = *o.depth;
  if (o.theta_count) flags["theta_count"] = *o.theta_count;
  if (o.seed) flags["seed"] = *o.seed;
  return projlab::config_from_json(flags, c);
}

void write_output(const std::string& path, const projlab::ExperimentReport& r) {
  std::ofstream out(path);
  if (!out) throw projlab::Error(projlab::ErrorCode::config, "cannot open output file '" + path + "'");
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv) projlab::write_report_csv(out, r);
  else out << projlab::dump_report(r);
}

void print_summary(const projlab::ExperimentReport& r) {
  std::cout << r.experiment << ": " << (r.pass ? "PASS" : "FAIL") << "  (" << r.claim << ")\n";
  for (const auto& [k, v] : r.summary.items()) {
    std::cout << "  " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  for (const auto& n : r.notes) std::cout << "  note: " << n << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection experiments for fractal sets along space curves"};
  app.require_subcommand(1);
  Overrides o;
  const std::map<std::string, std::string> about = {
      {"check-curve", "Non-degeneracy, eta identity and zero windows of a curve"},
      {"frostman", "Discrete Frostman net on an attractor occupancy"},
      {"project", "Occupied measure of projections over a theta grid"},
      {"boxdim", "Box dimension of a set and of its line projections"},
      {"energy", "Averaged t-energies of projected natural measures"},
      {"discrete-theorem", "Large projection of a (delta, s)-net for some theta in E_I or E_J"},
      {"sumset", "Stabilization of |cos(theta) K + sin(theta) K + K| under refinement"},
      {"transversality", "Transversality dichotomy on an interval around theta0"},
      {"pair-projection", "Pair projection constant, determinant identity and product bound"},
  };
  for (const auto& name : projlab::experiment_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", o.config_path, "JSON config overlaid on the experiment defaults");
    sub->add_option("--seed", o.seed, "Seed of the mt19937_64 generator");
    sub->add_option("--out", o.out, "Report file, CSV for .csv and JSON otherwise");
    sub->add_option("--threads", o.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "Suppress the summary on stdout");
    sub->add_option("--curve", o.curve, "Curve id (cone, greatcircle)");
    sub->add_option("--system", o.system, "Built-in system id");
    sub->add_option("--deltas", o.deltas, "Scales, e.g. 2^-10 or 3^-6..3^-9");
    sub->add_option("--kind", o.kind, "line or plane");
    sub->add_option("--depth", o.depth, "Attractor generation");
    sub->add_option("--theta-count", o.theta_count, "Size of the theta grid");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    if (o.threads > 0) projlab::set_worker_count(o.threads);
    const auto config = build_config(experiment, o);
    const auto start = std::chrono::steady_clock::now();
    const auto report = projlab::run_experiment(config);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    if (!o.out.empty()) write_output(o.out, report);
    if (!o.quiet) print_summary(report);
    std::cerr << "runtime: " << elapsed.count() << " s\n";
    return report.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
