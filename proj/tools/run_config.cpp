#include "run_config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "switchrep/errors.hpp"

namespace switchrep::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  std::stringstream stream(s);
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

double parse_double(const std::string& field, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": cannot parse number '" + text + "'");
  }
}

long long parse_int(const std::string& field, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": cannot parse integer '" + text + "'");
  }
}

std::vector<double> parse_double_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const std::string& token : split_commas(text))
    out.push_back(parse_double(field, token));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& key_setters() {
  static const std::map<std::string, Setter> setters = {
      {"omega", [](RunConfig& c, const std::string& v) { c.omega = parse_double("omega", v); }},
      {"degree",
       [](RunConfig& c, const std::string& v) { c.degree = static_cast<int>(parse_int("degree", v)); }},
      {"benefit",
       [](RunConfig& c, const std::string& v) { c.benefit = parse_double("benefit", v); }},
      {"cost", [](RunConfig& c, const std::string& v) { c.cost = parse_double("cost", v); }},
      {"pop-size",
       [](RunConfig& c, const std::string& v) { c.pop_size = static_cast<int>(parse_int("pop-size", v)); }},
      {"rules", [](RunConfig& c, const std::string& v) { c.rules = v; }},
      {"instants", [](RunConfig& c, const std::string& v) { c.instants = v; }},
      {"period",
       [](RunConfig& c, const std::string& v) { c.period = parse_double("period", v); }},
      {"x0", [](RunConfig& c, const std::string& v) { c.x0 = v; }},
      {"engine", [](RunConfig& c, const std::string& v) { c.engine = v; }},
      {"t-end", [](RunConfig& c, const std::string& v) { c.t_end = parse_double("t-end", v); }},
      {"dt", [](RunConfig& c, const std::string& v) { c.dt = parse_double("dt", v); }},
      {"step", [](RunConfig& c, const std::string& v) { c.step = parse_double("step", v); }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
       }},
      {"runs",
       [](RunConfig& c, const std::string& v) { c.runs = static_cast<int>(parse_int("runs", v)); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
      {"format", [](RunConfig& c, const std::string& v) { c.format = v; }},
  };
  return setters;
}

std::string current_value(const RunConfig& c, const std::string& key) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  if (key == "omega") return num(c.omega);
  if (key == "degree") return std::to_string(c.degree);
  if (key == "benefit") return num(c.benefit);
  if (key == "cost") return num(c.cost);
  if (key == "pop-size") return std::to_string(c.pop_size);
  if (key == "rules") return c.rules;
  if (key == "instants") return c.instants;
  if (key == "period") return num(c.period);
  if (key == "x0") return c.x0;
  if (key == "engine") return c.engine;
  if (key == "t-end") return num(c.t_end);
  if (key == "dt") return num(c.dt);
  if (key == "step") return num(c.step);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "runs") return std::to_string(c.runs);
  if (key == "out") return c.out;
  if (key == "format") return c.format;
  return "";
}

}  // namespace

void RunConfig::apply_file(const std::string& path, const std::set<std::string>& provided) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = key_setters().find(key);
    if (it == key_setters().end())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (provided.count(key) && current_value(*this, key) != value)
      std::cerr << "warning: " << path << ":" << line_no << ": config file overrides --"
                << key << " (" << current_value(*this, key) << " -> " << value << ")\n";
    try {
      it->second(*this, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string RunConfig::echo(const std::string& command) const {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "switchrep " << command << " omega=" << num(omega) << " degree=" << degree
      << " benefit=" << num(benefit) << " cost=" << num(cost) << " pop-size=" << pop_size
      << " rules=" << rules << " instants=" << (instants.empty() ? "-" : instants)
      << " period=" << num(period) << " x0=" << x0 << " engine=" << engine
      << " t-end=" << num(t_end) << " dt=" << num(dt) << " step=" << num(step)
      << " seed=" << seed << " runs=" << runs << " rng=" << Xoshiro256pp::kName;
  return out.str();
}

ResolvedRun resolve(const RunConfig& cfg) {
  ResolvedRun r;
  r.params = GameParams{cfg.omega, cfg.degree, cfg.benefit, cfg.cost, cfg.pop_size};
  try {
    r.params.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("game parameters: ") + e.what());
  }

  const std::vector<std::string> rule_tokens = split_commas(cfg.rules);
  if (rule_tokens.empty()) throw ConfigError("rules: need at least one rule");
  for (const std::string& token : rule_tokens) {
    if (token == "pc") {
      r.schedule.rules.push_back(UpdateRule::pairwise_comparison(r.params));
    } else if (token == "im") {
      r.schedule.rules.push_back(UpdateRule::imitation(r.params));
    } else {
      try {
        r.schedule.rules.push_back(UpdateRule::custom(parse_double("rules", token)));
      } catch (const ConfigError&) {
        throw ConfigError("rules: unknown rule '" + token +
                          "' (expected pc, im or a numeric coefficient)");
      }
    }
  }
  r.schedule.instants = parse_double_list("instants", cfg.instants);
  r.schedule.period = cfg.period;
  try {
    r.schedule.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }

  r.x0_list = parse_double_list("x0", cfg.x0);
  if (r.x0_list.empty()) throw ConfigError("x0: need at least one initial state");
  for (double x : r.x0_list)
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("x0: values must lie in [0,1]");

  if (cfg.engine == "closed-form") {
    r.engine = Engine::ClosedForm;
  } else if (cfg.engine == "reduced-ode") {
    r.engine = Engine::ReducedOde;
  } else if (cfg.engine == "pair-ode") {
    r.engine = Engine::PairOde;
  } else if (cfg.engine == "agent") {
    r.engine = Engine::Agent;
  } else {
    throw ConfigError("engine: unknown engine '" + cfg.engine +
                      "' (closed-form, reduced-ode, pair-ode, agent)");
  }

  if (!(cfg.t_end > 0.0)) throw ConfigError("t-end: must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt: must be positive");
  if (!(cfg.step > 0.0)) throw ConfigError("step: must be positive");
  if (cfg.runs < 1) throw ConfigError("runs: must be at least 1");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format: expected csv or json");
  r.t_end = cfg.t_end;
  r.sample_dt = cfg.dt;
  r.step = cfg.step;
  r.seed = cfg.seed;
  r.runs = cfg.runs;
  return r;
}

int thread_cap_from_env() {
  const char* env = std::getenv("SWITCHREP_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw ConfigError("SWITCHREP_THREADS: expected a positive integer");
  return static_cast<int>(v);
}

}  // namespace switchrep::cli
