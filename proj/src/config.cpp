#include "klflow/experiment.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace klflow {

using nlohmann::json;

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::flow: return "flow";
    case RunMode::prox: return "prox";
    case RunMode::condition: return "condition";
    case RunMode::recursion: return "recursion";
    case RunMode::all: return "all";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "flow") return RunMode::flow;
  if (name == "prox") return RunMode::prox;
  if (name == "condition") return RunMode::condition;
  if (name == "recursion") return RunMode::recursion;
  if (name == "all") return RunMode::all;
  throw ConfigError("unknown mode: " + name);
}

namespace {

std::optional<double> parse_number(const std::string& s) {
  if (s == "inf" || s == ".inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;
      if (s == "true") return true;
      if (s == "false") return false;
      if (const auto v = parse_number(s); v && std::isfinite(*v)) return *v;
      return s;
    }
  }
  return nullptr;
}

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(at(key), key);
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0)) throw ConfigError(where_ + "." + key + " must be positive");
    return v;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ConfigError(where_ + "." + key + " must be a string");
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(where_ + "." + key + " must be true or false");
    return v.get<bool>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const double v = number(key, static_cast<double>(fallback));
    if (!(v >= 1) || v != std::floor(v) || v > 1e12) throw ConfigError(where_ + "." + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  double as_number(const json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      if (const auto d = parse_number(v.get<std::string>())) return *d;
    }
    throw ConfigError(where_ + "." + key + " must be a number");
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + where_ + "." + k);
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

ExperimentConfig config_from_json(const json& root, const std::string& fallback_id) {
  ExperimentConfig c;
  Reader rd(root, "config");
  c.id = rd.string("id", fallback_id);
  if (!rd.has("functional")) throw ConfigError("config.functional is required");
  c.functional = rd.string("functional", "");
  c.mode = run_mode_from_string(rd.string("mode", "flow"));
  if (rd.has("x0")) {
    const auto& x = rd.at("x0");
    if (x.is_array()) {
      if (x.empty()) throw ConfigError("config.x0 must not be empty");
      c.x0.resize(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) c.x0(static_cast<Eigen::Index>(i)) = rd.as_number(x[i], "x0");
    } else {
      c.x0 = scalar_point(rd.as_number(x, "x0"));
    }
  }
  c.r = rd.number("r", c.r);
  c.alpha = rd.string("alpha", c.alpha);
  c.require = rd.string("require", c.require);
  c.condition_samples = rd.count("condition_samples", c.condition_samples);
  if (rd.has("theta")) {
    Reader t(rd.at("theta"), "theta");
    c.theta.kind = t.string("kind", "matched");
    c.theta.c = t.number("c", c.theta.c);
    c.theta.gamma = t.number("gamma", c.theta.gamma);
    c.theta.alpha = t.number("alpha", c.theta.alpha);
    t.finish();
  }
  if (rd.has("flow")) {
    Reader f(rd.at("flow"), "flow");
    c.horizon = f.number("horizon", c.horizon);
    c.flow.dt_max = f.positive("dt_max", c.flow.dt_max);
    c.flow.safety = f.positive("safety", c.flow.safety);
    c.flow.budget = f.positive("budget", c.flow.budget);
    c.flow.tail = f.positive("tail", c.flow.tail);
    c.flow.extinction_tol = f.positive("extinction_tol", c.flow.extinction_tol);
    c.flow.policy = branch_policy_from_string(f.string("policy", to_string(c.flow.policy)));
    if (f.has("improved_sqrt")) {
      Reader s(f.at("improved_sqrt"), "flow.improved_sqrt");
      c.sqrt_s = s.number("s", 0);
      c.sqrt_t = s.number("t", c.horizon);
      s.finish();
    }
    f.finish();
  }
  if (rd.has("prox")) {
    Reader p(rd.at("prox"), "prox");
    c.tau = p.positive("tau", c.tau);
    if (p.has("taus")) {
      const auto& ts = p.at("taus");
      if (!ts.is_array() || ts.empty()) throw ConfigError("prox.taus must be a non-empty list");
      for (const auto& t : ts) {
        const double v = p.as_number(t, "taus");
        if (!(v > 0)) throw ConfigError("prox.taus entries must be positive");
        c.taus.push_back(v);
      }
    }
    c.max_steps = p.count("max_steps", c.max_steps);
    c.prox.policy = tie_policy_from_string(p.string("policy", to_string(c.prox.policy)));
    c.prox.f_stop = p.number("f_stop", c.prox.f_stop);
    c.prox.compute_de_giorgi = p.boolean("de_giorgi", false);
    c.prox.resolvent.tau_bar = p.positive("tau_bar", c.prox.resolvent.tau_bar);
    c.prox.resolvent.grid_points = p.count("grid_points", c.prox.resolvent.grid_points);
    p.finish();
  }
  if (rd.has("recursion")) {
    Reader q(rd.at("recursion"), "recursion");
    RecursionSpec s;
    s.f0 = q.positive("f0", s.f0);
    s.alpha = q.positive("alpha", s.alpha);
    s.delta = q.positive("delta", s.delta);
    s.k_max = q.count("k_max", s.k_max);
    q.finish();
    c.recursion = s;
  }
  if (rd.has("tolerances")) {
    Reader t(rd.at("tolerances"), "tolerances");
    c.certificate_tol = t.positive("certificate", c.certificate_tol);
    c.slope_rel_tol = t.positive("slope_rel", c.slope_rel_tol);
    c.ede_tol = t.positive("ede", c.ede_tol);
    c.minimiser_tol = t.positive("minimiser", c.minimiser_tol);
    t.finish();
  }
  c.minimiser_check = rd.boolean("minimiser_check", c.minimiser_check);
  c.output_dir = rd.string("output_dir", c.id);
  c.seed = static_cast<std::uint64_t>(rd.number("seed", 0));
  c.expect_failure = rd.boolean("expect_failure", false);
  rd.finish();
  return c;
}

json parse_any(const std::string& text, bool as_json) {
  if (as_json) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
  }
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_json_path(const std::filesystem::path& path) { return path.extension() == ".json"; }

}  // namespace

void validate_config(const ExperimentConfig& c) {
  if (c.id.empty()) throw ConfigError("config.id must not be empty");
  CorpusEntry entry;
  try {
    entry = make_corpus_entry(c.functional);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.functional: ") + e.what());
  }
  if (c.mode != RunMode::recursion) {
    if (c.x0.size() == 0) throw ConfigError("config.x0 is required");
    if (c.x0.size() != entry.functional.dimension) throw ConfigError("config.x0 dimension does not match the functional");
    if (!c.x0.allFinite()) throw ConfigError("config.x0 must be finite");
    if (!(c.r > 0) || !std::isfinite(c.r)) throw ConfigError("config.r must be positive and finite");
  }
  if (c.mode == RunMode::recursion && !c.recursion) throw ConfigError("mode=recursion needs a recursion block");
  if (c.theta.kind != "matched" && c.theta.kind != "power" && c.theta.kind != "alpha") {
    throw ConfigError("theta.kind must be matched, power or alpha");
  }
  if (c.theta.kind == "power" && (!(c.theta.c > 0) || !(c.theta.gamma > 0) || c.theta.gamma > 1)) {
    throw ConfigError("power theta needs c > 0 and gamma in (0, 1]");
  }
  if (c.theta.kind == "alpha" && !(c.theta.alpha > 0)) throw ConfigError("alpha theta needs alpha > 0");
  if (c.alpha != "known" && c.alpha != "none") {
    const auto v = parse_number(c.alpha);
    if (!v || !(*v > 0)) throw ConfigError("config.alpha must be known, none or a positive number");
  }
  if (c.require != "A" && c.require != "A'" && c.require != "C" && c.require != "C'") {
    throw ConfigError("config.require must be one of A, A', C, C'");
  }
  if (!(c.horizon > 0)) throw ConfigError("flow.horizon must be positive");
  if (c.prox.f_stop < 0) throw ConfigError("prox.f_stop must be >= 0");
  if (c.sqrt_s && !(*c.sqrt_s <= *c.sqrt_t)) throw ConfigError("flow.improved_sqrt needs s <= t");
}

ExperimentConfig parse_config_text(const std::string& text, bool json_text, const std::string& fallback_id) {
  const json root = parse_any(text, json_text);
  if (!root.is_object()) throw ConfigError("config must be a mapping");
  ExperimentConfig c;
  try {
    c = config_from_json(root, fallback_id);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config_text(read_file(path), is_json_path(path), path.stem().string());
}

std::vector<ExperimentConfig> load_manifest(const std::filesystem::path& path) {
  const json root = parse_any(read_file(path), is_json_path(path));
  const json* list = &root;
  if (root.is_object()) {
    if (!root.contains("configs")) throw ConfigError("manifest needs a configs list");
    list = &root.at("configs");
  }
  if (!list->is_array() || list->empty()) throw ConfigError("manifest must list at least one config");
  std::vector<ExperimentConfig> out;
  std::set<std::string> ids;
  for (const auto& item : *list) {
    ExperimentConfig c;
    if (item.is_string()) {
      c = load_config(path.parent_path() / item.get<std::string>());
    } else if (item.is_object()) {
      try {
        c = config_from_json(item, "run" + std::to_string(out.size()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      validate_config(c);
    } else {
      throw ConfigError("manifest entries must be paths or mappings");
    }
    if (!ids.insert(c.id).second) throw ConfigError("duplicate config id in manifest: " + c.id);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace klflow
