#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "projint/bench.hpp"
#include "projint/error.hpp"

namespace projint {

using nlohmann::json;

namespace {

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN; it is written as null and read back as NaN.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::vector<double> get_nums(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_num(v));
  return out;
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Regime parse_regime(const std::string& s) {
  for (Regime r : {Regime::Macro, Regime::Micro, Regime::Deviation, Regime::Diverged}) {
    if (s == regime_name(r)) return r;
  }
  throw ConfigError("unknown regime '" + s + "'");
}

json constants_json(const BoundConstants& k) {
  return json{{"L_g", k.L_g},         {"L_h", k.L_h},         {"L_hprime", k.L_hprime}, {"C_g", k.C_g},
              {"C2_star", k.C2_star}, {"CP_star", k.CP_star}, {"L_G", k.L_G},           {"lambda_max", k.lambda_max}};
}

json spec_json(const ExperimentSpec& s) {
  json schemes = json::array();
  for (Scheme sc : s.schemes) schemes.push_back(scheme_name(sc));
  return json{{"id", experiment_slug(s.id)},
              {"alpha", s.alpha},
              {"epsilon", s.epsilon},
              {"schemes", schemes},
              {"macro_order", s.macro_order},
              {"micro_order", s.micro_order},
              {"M", s.m_budget},
              {"M1", s.m_first},
              {"dt_micro", s.dt_micro},
              {"dt_macro", s.dt_macro},
              {"n_steps", s.n_steps},
              {"T", s.t_final},
              {"y0", s.y0},
              {"x0_offset", s.x0_offset},
              {"grid", s.grid},
              {"constants", constants_json(s.constants)}};
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  reject_unknown(j,
                 {"id", "alpha", "epsilon", "schemes", "macro_order", "micro_order", "M", "M1", "dt_micro",
                  "dt_macro", "n_steps", "T", "y0", "x0_offset", "grid", "constants"},
                 "experiment config");
  if (!j.contains("id")) throw ConfigError("experiment config needs an \"id\"");
  ExperimentSpec s = default_spec(parse_experiment(j.at("id").get<std::string>()));
  if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
  if (j.contains("epsilon")) s.epsilon = j["epsilon"].get<double>();
  if (j.contains("schemes")) {
    s.schemes.clear();
    for (const auto& v : j["schemes"]) s.schemes.push_back(parse_scheme(v.get<std::string>()));
  }
  if (j.contains("macro_order")) s.macro_order = j["macro_order"].get<int>();
  if (j.contains("micro_order")) s.micro_order = j["micro_order"].get<int>();
  if (j.contains("M")) s.m_budget = j["M"].get<long>();
  if (j.contains("M1")) s.m_first = j["M1"].get<long>();
  if (j.contains("dt_micro")) s.dt_micro = j["dt_micro"].get<double>();
  if (j.contains("dt_macro")) s.dt_macro = j["dt_macro"].get<double>();
  if (j.contains("n_steps")) s.n_steps = j["n_steps"].get<long>();
  if (j.contains("T")) s.t_final = j["T"].get<double>();
  if (j.contains("y0")) s.y0 = j["y0"].get<double>();
  if (j.contains("x0_offset")) s.x0_offset = j["x0_offset"].get<double>();
  if (j.contains("grid")) s.grid = j["grid"].get<std::vector<double>>();
  if (j.contains("constants")) {
    const json& c = j["constants"];
    if (!c.is_object()) throw ConfigError("\"constants\" must be an object");
    reject_unknown(c, {"L_g", "L_h", "L_hprime", "C_g", "C2_star", "CP_star", "L_G", "lambda_max"}, "constants");
    BoundConstants& k = s.constants;
    if (c.contains("L_g")) k.L_g = c["L_g"].get<double>();
    if (c.contains("L_h")) k.L_h = c["L_h"].get<double>();
    if (c.contains("L_hprime")) k.L_hprime = c["L_hprime"].get<double>();
    if (c.contains("C_g")) k.C_g = c["C_g"].get<double>();
    if (c.contains("C2_star")) k.C2_star = c["C2_star"].get<double>();
    if (c.contains("CP_star")) k.CP_star = c["CP_star"].get<double>();
    if (c.contains("L_G")) k.L_G = c["L_G"].get<double>();
    if (c.contains("lambda_max")) k.lambda_max = c["lambda_max"].get<double>();
  }
  return s;
}

json point_json(const PointRecord& p) {
  return json{{"scheme", scheme_name(p.scheme)},
              {"grid_index", p.grid_index},
              {"abscissa", num(p.abscissa)},
              {"error", num(p.error)},
              {"dev_max", num(p.dev_max)},
              {"n_macro", p.n_macro},
              {"micro_evals", p.micro_evals},
              {"dt_macro", num(p.dt_macro)},
              {"dt_micro", num(p.dt_micro)},
              {"t_final", num(p.t_final)},
              {"sigma", num(p.sigma)},
              {"regime", regime_name(p.regime)},
              {"in_fit", p.in_fit},
              {"note", p.note}};
}

PointRecord point_from_json(const json& j) {
  PointRecord p;
  p.scheme = parse_scheme(j.at("scheme").get<std::string>());
  p.grid_index = j.at("grid_index").get<std::size_t>();
  p.abscissa = get_num(j.at("abscissa"));
  p.error = get_num(j.at("error"));
  p.dev_max = get_num(j.at("dev_max"));
  p.n_macro = j.at("n_macro").get<long>();
  p.micro_evals = j.at("micro_evals").get<long>();
  p.dt_macro = get_num(j.at("dt_macro"));
  p.dt_micro = get_num(j.at("dt_micro"));
  p.t_final = get_num(j.at("t_final"));
  p.sigma = get_num(j.at("sigma"));
  p.regime = parse_regime(j.at("regime").get<std::string>());
  p.in_fit = j.at("in_fit").get<bool>();
  p.note = j.at("note").get<std::string>();
  return p;
}

json series_json(const SchemeSeries& s) {
  return json{{"scheme", scheme_name(s.scheme)},
              {"abscissa", nums(s.series.abscissa)},
              {"error", nums(s.series.error)},
              {"slope", num(s.series.slope)},
              {"intercept", num(s.series.intercept)},
              {"r2", num(s.series.r2)},
              {"fit_points", s.fit_points},
              {"gate_passed", s.gate_passed},
              {"exclusions", s.exclusions}};
}

SchemeSeries series_from_json(const json& j) {
  SchemeSeries s;
  s.scheme = parse_scheme(j.at("scheme").get<std::string>());
  s.series.abscissa = get_nums(j.at("abscissa"));
  s.series.error = get_nums(j.at("error"));
  s.series.slope = get_num(j.at("slope"));
  s.series.intercept = get_num(j.at("intercept"));
  s.series.r2 = get_num(j.at("r2"));
  s.fit_points = j.at("fit_points").get<std::size_t>();
  s.gate_passed = j.at("gate_passed").get<bool>();
  s.exclusions = j.at("exclusions").get<std::vector<std::string>>();
  return s;
}

template <class F>
auto wrap_json_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "csv" || s == "CSV") return Format::CSV;
  if (s == "json" || s == "JSON") return Format::JSON;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

void write_csv(const ExperimentResult& r, std::ostream& os) {
  os << "scheme,abscissa,error,dev_max,n_macro,micro_evals\n";
  for (const auto& p : r.points) {
    os << scheme_name(p.scheme) << ',' << g17(p.abscissa) << ',' << g17(p.error) << ',' << g17(p.dev_max) << ','
       << p.n_macro << ',' << p.micro_evals << '\n';
  }
  for (const auto& s : r.series) {
    os << "# fit," << scheme_name(s.scheme) << ",slope=" << g17(s.series.slope)
       << ",intercept=" << g17(s.series.intercept) << ",r2=" << g17(s.series.r2) << ",points=" << s.fit_points
       << ",gate=" << (s.gate_passed ? "pass" : "fail") << '\n';
  }
  for (const auto& s : r.series) {
    for (const auto& e : s.exclusions) os << "# excluded," << e << '\n';
  }
}

void write_json(const ExperimentResult& r, std::ostream& os) {
  json series = json::array();
  for (const auto& s : r.series) series.push_back(series_json(s));
  json points = json::array();
  for (const auto& p : r.points) points.push_back(point_json(p));
  const json doc{{"spec", spec_json(r.spec)}, {"series", series}, {"points", points}};
  os << doc.dump(2) << '\n';
}

void emit(const ExperimentResult& r, Format fmt, const std::string& path) {
  auto write = [&](std::ostream& os) {
    if (fmt == Format::CSV) {
      write_csv(r, os);
    } else {
      write_json(r, os);
    }
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

ExperimentResult parse_result_json(const std::string& text) {
  return wrap_json_errors([&] {
    const json doc = json::parse(text);
    ExperimentResult r;
    r.spec = spec_from_json(doc.at("spec"));
    for (const auto& s : doc.at("series")) r.series.push_back(series_from_json(s));
    for (const auto& p : doc.at("points")) r.points.push_back(point_from_json(p));
    return r;
  });
}

ExperimentSpec parse_spec_json(const std::string& text) {
  ExperimentSpec s = wrap_json_errors([&] { return spec_from_json(json::parse(text)); });
  validate_spec(s);
  return s;
}

ExperimentSpec load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str());
}

std::string spec_to_json(const ExperimentSpec& spec) { return spec_json(spec).dump(2); }

}  // namespace projint
