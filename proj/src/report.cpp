#include "projlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace projlab {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::config, "config field '" + field + "': " + what);
}

struct PowerForm {
  double base = 0.0;
  double exponent = 0.0;
};

std::optional<PowerForm> match_power(const std::string& text) {
  static const std::regex re(R"(\s*([0-9.]+)\s*\^\s*\(?\s*([+-]?[0-9.]+)\s*\)?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  return PowerForm{std::stod(m[1].str()), std::stod(m[2].str())};
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, "cannot parse scale '" + text + "'");
  }
  if (text.find_first_not_of(" \t", used) != std::string::npos)
    throw Error(ErrorCode::config, "cannot parse scale '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

double read_number(const Json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_scale(v.get<std::string>());
    } catch (const Error& e) {
      field_error(field, e.what());
    }
  }
  field_error(field, "expected a number");
}

long long read_integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) field_error(field, "expected an integer");
  return v.get<long long>();
}

std::string read_string(const Json& v, const std::string& field) {
  if (!v.is_string()) field_error(field, "expected a string");
  return v.get<std::string>();
}

Vector3d read_vector3(const Json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) field_error(field, "expected an array of 3 numbers");
  Vector3d out;
  for (int k = 0; k < 3; ++k) out[k] = read_number(v[static_cast<std::size_t>(k)], field + "[" + std::to_string(k) + "]");
  return out;
}

Interval read_interval(const Json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) field_error(field, "expected [lo, hi]");
  const Interval out{read_number(v[0], field + "[0]"), read_number(v[1], field + "[1]")};
  if (!(out.lo < out.hi)) field_error(field, "needs lo < hi");
  return out;
}

std::vector<double> read_numbers(const Json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<TrigTerm> read_terms(const Json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) field_error(field, "expected a nonempty array of terms");
  std::vector<TrigTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!v[i].is_object()) field_error(f, "expected an object");
    TrigTerm term;
    for (const auto& [key, val] : v[i].items()) {
      if (key == "frequency") term.frequency = read_number(val, f + ".frequency");
      else if (key == "cos") term.cos_amplitude = read_vector3(val, f + ".cos");
      else if (key == "sin") term.sin_amplitude = read_vector3(val, f + ".sin");
      else field_error(f + "." + key, "unknown field");
    }
    out.push_back(term);
  }
  return out;
}

SystemSpec read_system(const Json& v, const std::string& field) {
  if (v.is_string()) {
    try {
      return builtin_system(v.get<std::string>());
    } catch (const Error& e) {
      field_error(field, e.what());
    }
  }
  if (!v.is_object()) field_error(field, "expected a built-in name or an object");
  SystemSpec spec;
  spec.name = "custom";
  for (const auto& [key, val] : v.items()) {
    const std::string f = field + "." + key;
    if (key == "name") spec.name = read_string(val, f);
    else if (key == "dim") spec.dim = static_cast<int>(read_integer(val, f));
    else if (key == "ratios") spec.ratios = read_numbers(val, f);
    else if (key == "translations") {
      if (!val.is_array()) field_error(f, "expected an array of vectors");
      for (std::size_t i = 0; i < val.size(); ++i) spec.translations.push_back(read_numbers(val[i], f + "[" + std::to_string(i) + "]"));
    } else {
      field_error(f, "unknown field");
    }
  }
  if (spec.dim < 1 || spec.dim > 3) field_error(field + ".dim", "must be 1, 2 or 3");
  try {
    make_system<3>(spec);
  } catch (const Error& e) {
    field_error(field, e.what());
  }
  return spec;
}

std::vector<double> read_deltas(const Json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_string()) {
    try {
      out = parse_scale_list(v.get<std::string>());
    } catch (const Error& e) {
      field_error(field, e.what());
    }
  } else {
    out = read_numbers(v, field);
  }
  if (out.empty()) field_error(field, "needs at least one delta");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0 && out[i] < 1.0)) field_error(field, "deltas must lie in (0, 1)");
    if (!is_dyadic_or_triadic(out[i])) field_error(field, "deltas must be powers of 1/2 or 1/3");
  }
  return out;
}

Json interval_json(const Interval& i) { return Json::array({number(i.lo), number(i.hi)}); }
Json vector_json(const Vector3d& v) { return Json::array({number(v.x()), number(v.y()), number(v.z())}); }

void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& column) {
  line = 1;
  column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

}  // namespace

double parse_scale(const std::string& raw) {
  const std::string text = trim(raw);
  if (auto p = match_power(text)) return std::pow(p->base, p->exponent);
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double den = parse_number(text.substr(slash + 1));
    if (den == 0.0) throw Error(ErrorCode::config, "zero denominator in '" + text + "'");
    return parse_number(text.substr(0, slash)) / den;
  }
  return parse_number(text);
}

std::vector<double> parse_scale_list(const std::string& text) {
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto a = match_power(text.substr(0, dots));
    const auto b = match_power(text.substr(dots + 2));
    if (!a || !b || a->base != b->base) throw Error(ErrorCode::config, "range '" + text + "' needs b^m..b^n with one base");
    if (a->exponent != std::round(a->exponent) || b->exponent != std::round(b->exponent))
      throw Error(ErrorCode::config, "range '" + text + "' needs integer exponents");
    std::vector<double> out;
    const int lo = static_cast<int>(a->exponent), hi = static_cast<int>(b->exponent);
    const int step = lo <= hi ? 1 : -1;
    for (int e = lo;; e += step) {
      out.push_back(std::pow(a->base, e));
      if (e == hi) break;
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_scale(item));
  }
  return out;
}

bool is_dyadic_or_triadic(double delta) {
  if (!(delta > 0.0)) return false;
  for (double base : {2.0, 3.0}) {
    const double e = std::log(delta) / std::log(base);
    if (std::abs(std::pow(base, std::round(e)) - delta) <= 1e-9 * delta) return true;
  }
  return false;
}

std::vector<std::string> experiment_names() {
  return {"check-curve", "frostman", "project", "boxdim", "energy", "discrete-theorem", "sumset", "transversality",
          "pair-projection"};
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "check-curve") {
    c.grid_step = 1e-3;
    c.samples = 1000;
  } else if (experiment == "frostman") {
    c.deltas = {std::ldexp(1.0, -6)};
  } else if (experiment == "project") {
    c.deltas = {std::pow(3.0, -6)};
    c.depth = 6;
  } else if (experiment == "boxdim") {
    c.system = builtin_system("cantor3");
    c.depth = 8;
    c.scale_lo = std::ldexp(1.0, -11);
    c.scale_hi = 0.25;
    c.theta_count = 64;
  } else if (experiment == "energy") {
    c.system = builtin_system("dust08");
    c.depth = 5;
    c.theta_count = 64;
  } else if (experiment == "discrete-theorem") {
    c.system = builtin_system("dust08");
    c.deltas = {std::ldexp(1.0, -10)};
    c.theta_count = 512;
  } else if (experiment == "sumset") {
    c.system = builtin_system("cantor3");
    c.deltas = parse_scale_list("3^-6..3^-9");
  } else if (experiment == "transversality") {
    c.theta0 = kPi / 4;
    c.width = 0.5;
    c.depth = 2;
    c.theta_count = 64;
  } else if (experiment == "pair-projection") {
    c.samples = 100;
    c.depth = 5;
    c.scale_lo = std::ldexp(1.0, -7);
    c.scale_hi = 0.25;
  } else {
    throw Error(ErrorCode::config, "unknown experiment '" + experiment + "'");
  }
  return c;
}

ExperimentConfig config_from_json(const Json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "experiment") {
      const auto id = read_string(v, key);
      if (std::find(experiment_names().begin(), experiment_names().end(), id) == experiment_names().end())
        field_error(key, "unknown experiment '" + id + "'");
      c.experiment = id;
    } else if (key == "curve") {
      if (v.is_string()) {
        c.curve = v.get<std::string>();
        c.curve_terms.reset();
        try {
          builtin_curve(c.curve);
        } catch (const Error& e) {
          field_error(key, e.what());
        }
      } else if (v.is_object()) {
        c.curve = "custom";
        for (const auto& [ck, cv] : v.items()) {
          if (ck == "name") c.curve = read_string(cv, "curve.name");
          else if (ck == "domain") c.curve_domain = read_interval(cv, "curve.domain");
          else if (ck == "terms") c.curve_terms = read_terms(cv, "curve.terms");
          else field_error("curve." + ck, "unknown field");
        }
        if (!c.curve_terms) field_error("curve.terms", "missing");
      } else {
        field_error(key, "expected a built-in id or an object");
      }
    } else if (key == "system") {
      c.system = read_system(v, key);
    } else if (key == "kind") {
      try {
        c.kind = parse_projection_kind(read_string(v, key));
      } catch (const Error& e) {
        field_error(key, e.what());
      }
    } else if (key == "deltas") {
      c.deltas = read_deltas(v, key);
    } else if (key == "depth") {
      c.depth = static_cast<int>(read_integer(v, key));
    } else if (key == "theta_count") {
      const auto n = read_integer(v, key);
      if (n < 1) field_error(key, "must be positive");
      c.theta_count = static_cast<int>(n);
    } else if (key == "I") {
      c.I = read_interval(v, key);
    } else if (key == "J") {
      c.J = read_interval(v, key);
    } else if (key == "theta1") {
      c.theta1 = read_number(v, key);
    } else if (key == "theta2") {
      c.theta2 = read_number(v, key);
    } else if (key == "s") {
      c.s = read_number(v, key);
      if (!(*c.s > 0.0)) field_error(key, "must be positive");
    } else if (key == "tau") {
      c.tau = read_number(v, key);
    } else if (key == "epsilon") {
      c.epsilon = read_number(v, key);
      if (!(c.epsilon > 0.0)) field_error(key, "must be positive");
    } else if (key == "t") {
      c.t = read_number(v, key);
    } else if (key == "width") {
      c.width = read_number(v, key);
      if (!(c.width > 0.0)) field_error(key, "must be positive");
    } else if (key == "grid_step") {
      c.grid_step = read_number(v, key);
      if (!(c.grid_step > 0.0)) field_error(key, "must be positive");
    } else if (key == "scale_lo") {
      c.scale_lo = read_number(v, key);
    } else if (key == "scale_hi") {
      c.scale_hi = read_number(v, key);
    } else if (key == "quantile") {
      c.quantile = read_number(v, key);
      if (!(c.quantile > 0.0 && c.quantile <= 1.0)) field_error(key, "must lie in (0, 1]");
    } else if (key == "ratio_threshold") {
      c.ratio_threshold = read_number(v, key);
    } else if (key == "samples") {
      const auto n = read_integer(v, key);
      if (n < 1) field_error(key, "must be positive");
      c.samples = static_cast<int>(n);
    } else if (key == "theta0") {
      c.theta0 = read_number(v, key);
    } else if (key == "normal") {
      c.normal = read_vector3(v, key);
    } else if (key == "extra_directions") {
      if (!v.is_array()) field_error(key, "expected an array of vectors");
      c.extra_directions.clear();
      for (std::size_t i = 0; i < v.size(); ++i) c.extra_directions.push_back(read_vector3(v[i], key + "[" + std::to_string(i) + "]"));
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        field_error(key, "expected a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else {
      field_error(key, "unknown field");
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 0, column = 0;
    line_column(text, e.byte, line, column);
    std::string what = e.what();
    const auto p = what.find("syntax error");
    throw Error(ErrorCode::config, "config syntax error at line " + std::to_string(line) + ", column " +
                                       std::to_string(column) + ": " + (p == std::string::npos ? what : what.substr(p)));
  }
  return config_from_json(doc, std::move(base));
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  if (c.curve_terms) {
    Json terms = Json::array();
    for (const auto& t : *c.curve_terms) {
      terms.push_back({{"frequency", number(t.frequency)}, {"cos", vector_json(t.cos_amplitude)}, {"sin", vector_json(t.sin_amplitude)}});
    }
    j["curve"] = {{"name", c.curve}, {"domain", interval_json(c.curve_domain)}, {"terms", terms}};
  } else {
    j["curve"] = c.curve;
  }
  Json translations = Json::array();
  for (const auto& w : c.system.translations) {
    Json row = Json::array();
    for (double x : w) row.push_back(number(x));
    translations.push_back(row);
  }
  Json ratios = Json::array();
  for (double r : c.system.ratios) ratios.push_back(number(r));
  j["system"] = {{"name", c.system.name}, {"dim", c.system.dim}, {"ratios", ratios}, {"translations", translations}};
  j["kind"] = to_string(c.kind);
  Json deltas = Json::array();
  for (double d : c.deltas) deltas.push_back(number(d));
  if (!deltas.empty()) j["deltas"] = deltas;
  j["depth"] = c.depth;
  j["theta_count"] = c.theta_count;
  if (c.I) j["I"] = interval_json(*c.I);
  if (c.J) j["J"] = interval_json(*c.J);
  j["theta1"] = number(c.theta1);
  j["theta2"] = number(c.theta2);
  if (c.s) j["s"] = number(*c.s);
  j["tau"] = number(c.tau);
  j["epsilon"] = number(c.epsilon);
  j["t"] = number(c.t);
  j["width"] = number(c.width);
  j["grid_step"] = number(c.grid_step);
  j["scale_lo"] = number(c.scale_lo);
  j["scale_hi"] = number(c.scale_hi);
  j["quantile"] = number(c.quantile);
  j["ratio_threshold"] = number(c.ratio_threshold);
  j["samples"] = c.samples;
  if (c.theta0) j["theta0"] = number(*c.theta0);
  if (c.normal) j["normal"] = vector_json(*c.normal);
  if (!c.extra_directions.empty()) {
    Json dirs = Json::array();
    for (const auto& d : c.extra_directions) dirs.push_back(vector_json(d));
    j["extra_directions"] = dirs;
  }
  j["seed"] = c.seed;
  return j;
}

Curve3 config_curve(const ExperimentConfig& c) {
  if (c.curve_terms) return trig_curve(c.curve, *c.curve_terms, c.curve_domain);
  return builtin_curve(c.curve);
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

ReportTable& ExperimentReport::table(const std::string& name, std::vector<std::string> columns) {
  tables.push_back({name, std::move(columns), {}});
  return tables.back();
}

namespace {

Json sanitize(const Json& v) {
  if (v.is_number_float()) return number(v.get<double>());
  if (v.is_array() || v.is_object()) {
    Json out = v;
    for (auto it = out.begin(); it != out.end(); ++it) *it = sanitize(*it);
    return out;
  }
  return v;
}

}  // namespace

Json to_json(const ExperimentReport& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["rng"] = r.rng;
  j["seed"] = r.seed;
  j["claim"] = r.claim;
  j["pass"] = r.pass;
  j["summary"] = sanitize(r.summary);
  Json tables = Json::array();
  for (const auto& t : r.tables) {
    Json rows = Json::array();
    for (const auto& row : t.rows) rows.push_back(sanitize(Json(row)));
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
  }
  j["tables"] = tables;
  j["notes"] = r.notes;
  j["config"] = sanitize(r.config);
  return j;
}

ExperimentReport report_from_json(const Json& j) {
  ExperimentReport r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    r.rng = j.at("rng").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.claim = j.at("claim").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.summary = j.at("summary");
    for (const auto& t : j.at("tables")) {
      ReportTable table;
      table.name = t.at("name").get<std::string>();
      table.columns = t.at("columns").get<std::vector<std::string>>();
      for (const auto& row : t.at("rows")) table.rows.push_back(row.get<std::vector<Json>>());
      r.tables.push_back(std::move(table));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string dump_report(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_null()) return "nan";
  return v.dump();
}

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& r) {
  out << "# experiment: " << r.experiment << '\n';
  out << "# rng: " << r.rng << '\n';
  out << "# seed: " << r.seed << '\n';
  out << "# claim: " << r.claim << '\n';
  out << "# pass: " << (r.pass ? "true" : "false") << '\n';
  const Json summary = sanitize(r.summary);
  for (const auto& [k, v] : summary.items()) out << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  for (const auto& t : r.tables) {
    out << "# table " << t.name << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(sanitize(row[i]));
      out << '\n';
    }
  }
}

}  // namespace projlab
