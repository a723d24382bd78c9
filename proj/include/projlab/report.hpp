#pragma once

#include "projlab/common.hpp"
#include "projlab/curve.hpp"
#include "projlab/ifs.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace projlab {

using Json = nlohmann::ordered_json;

/// Parses "2^-10", "3^-5", "1/27" or a plain number.
double parse_scale(const std::string& text);
/// Comma-separated scales or a power range "3^-6..3^-9" (one exponent step).
std::vector<double> parse_scale_list(const std::string& text);
/// Whether the value is a power of 2 or of 3 (relative tolerance 1e-9).
bool is_dyadic_or_triadic(double delta);

/// Experiment parameters. Fields unused by an experiment are ignored by it;
/// defaults come from default_config.
struct ExperimentConfig {
  std::string experiment;
  std::string curve = "cone";
  /// Custom trigonometric curve; overrides `curve` when present.
  std::optional<std::vector<TrigTerm>> curve_terms;
  Interval curve_domain{0.0, kTwoPi};
  SystemSpec system = builtin_system("cantor3_cube");
  ProjectionKind kind = ProjectionKind::line;
  std::vector<double> deltas;
  /// Generation of the attractor sample; negative picks the first generation
  /// whose balls are no larger than the finest delta.
  int depth = -1;
  int theta_count = 256;
  std::optional<Interval> I;
  std::optional<Interval> J;
  double theta1 = 0.0;
  double theta2 = kPi / 2;
  std::optional<double> s;
  double tau = 0.5;
  double epsilon = 0.05;
  double t = 0.4;
  double width = 0.05;
  double grid_step = 1e-3;
  double scale_lo = 0.0;
  double scale_hi = 0.0;
  double quantile = 0.9;
  double ratio_threshold = 0.5;
  int samples = 1000;
  std::optional<double> theta0;
  /// Plane normal; when present it takes precedence over theta0.
  std::optional<Vector3d> normal;
  std::vector<Vector3d> extra_directions;
  std::uint64_t seed = 1;
};

/// Canonical setup of each experiment id; unknown ids raise a config error.
ExperimentConfig default_config(const std::string& experiment);
std::vector<std::string> experiment_names();

/// Overlays a JSON document on `base`. Syntax errors report line and column,
/// schema errors the offending field.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);
ExperimentConfig config_from_json(const Json& doc, ExperimentConfig base);
Json to_json(const ExperimentConfig& config);

/// Curve named by the config (built-in id or custom terms).
Curve3 config_curve(const ExperimentConfig& config);

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

struct ExperimentReport {
  std::string experiment;
  std::string rng = Rng::kName;
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::string claim;
  bool pass = false;
  Json summary = Json::object();
  std::vector<ReportTable> tables;
  std::vector<std::string> notes;

  ReportTable& table(const std::string& name, std::vector<std::string> columns);
};

/// Non-finite numbers serialize as null.
Json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const Json& doc);
std::string dump_report(const ExperimentReport& report);

/// Header block of "# key: value" lines, then each table as a CSV section
/// introduced by "# table <name>" with its fixed column order.
void write_report_csv(std::ostream& out, const ExperimentReport& report);

/// Finite doubles pass through; NaN and infinities become null.
Json number(double v);

}  // namespace projlab
