#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "pfnts/errors.hpp"
#include "pfnts/harness.hpp"

namespace pfnts::harness {
namespace {

// Reads keys from one TOML table and remembers which were consumed, so that
// anything left over can be reported as unknown.
class Section {
 public:
  Section(const toml::table& table, std::string where) : table_(table), where_(std::move(where)) {}

  ~Section() = default;

  void finish() const {
    for (auto&& [key, node] : table_) {
      (void)node;
      if (!used_.count(std::string(key.str()))) {
        throw ConfigError("unknown key '" + std::string(key.str()) + "' in " + where_);
      }
    }
  }

  bool has(const std::string& key) const { return table_.contains(key); }

  const toml::node* node(const std::string& key) {
    used_.insert(key);
    return table_.get(key);
  }

  std::string string(const std::string& key, std::string fallback) {
    auto* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<std::string>()) return *v;
    throw bad(key, "a string");
  }

  double number(const std::string& key, double fallback) {
    auto* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) return *v;
    throw bad(key, "a number");
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 0) {
    auto* n = node(key);
    if (!n) return fallback;
    auto v = n->value_exact<std::int64_t>();
    if (!v || *v < static_cast<std::int64_t>(min)) {
      throw bad(key, "an integer >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(*v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    return static_cast<std::uint64_t>(count(key, fallback));
  }

  bool boolean(const std::string& key, bool fallback) {
    auto* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    throw bad(key, "a boolean");
  }

  template <typename T, typename Get>
  std::vector<T> list(const std::string& key, std::vector<T> fallback, Get get, const std::string& what) {
    auto* n = node(key);
    if (!n) return fallback;
    const auto* arr = n->as_array();
    if (!arr) throw bad(key, "an array of " + what);
    std::vector<T> out;
    for (const auto& item : *arr) {
      auto v = get(item);
      if (!v) throw bad(key, "an array of " + what);
      out.push_back(*v);
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback = {}) {
    return list<std::string>(key, std::move(fallback), [](const toml::node& x) { return x.value_exact<std::string>(); },
                             "strings");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    return list<double>(key, std::move(fallback), [](const toml::node& x) {
      return (x.is_integer() || x.is_floating_point()) ? x.value<double>() : std::nullopt;
    }, "numbers");
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    return list<std::size_t>(key, std::move(fallback), [](const toml::node& x) -> std::optional<std::size_t> {
      auto v = x.value_exact<std::int64_t>();
      if (!v || *v < 1) return std::nullopt;
      return static_cast<std::size_t>(*v);
    }, "positive integers");
  }

  const toml::table* table(const std::string& key) {
    auto* n = node(key);
    if (!n) return nullptr;
    if (auto* t = n->as_table()) return t;
    throw bad(key, "a table");
  }

  ConfigError bad(const std::string& key, const std::string& what) const {
    return ConfigError(where_ + "." + key + " must be " + what);
  }

  const std::string& where() const noexcept { return where_; }

 private:
  const toml::table& table_;
  std::string where_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

AgentKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "pfnts" || s == "pfn-ts") return AgentKind::kPfnTs;
  if (s == "ps" || s == "pfn-ps") return AgentKind::kPfnPs;
  if (s == "greedy" || s == "pfn-greedy") return AgentKind::kPfnGreedy;
  if (s == "lints") return AgentKind::kLinTs;
  if (s == "linucb") return AgentKind::kLinUcb;
  if (s == "uniform") return AgentKind::kUniform;
  if (s == "oracle") return AgentKind::kOracle;
  throw ConfigError(where + ".kind: unknown agent kind '" + s + "'");
}

std::string default_name(AgentKind k) {
  switch (k) {
    case AgentKind::kPfnTs: return "pfn-ts";
    case AgentKind::kPfnPs: return "pfn-ps";
    case AgentKind::kPfnGreedy: return "pfn-greedy";
    case AgentKind::kLinTs: return "lints";
    case AgentKind::kLinUcb: return "linucb";
    case AgentKind::kUniform: return "uniform";
    case AgentKind::kOracle: return "oracle";
  }
  return "agent";
}

AgentConfig parse_agent(const toml::table& t, const std::string& where) {
  Section s(t, where);
  AgentConfig a;
  a.kind = parse_kind(s.string("kind", "pfnts"), where);
  a.name = s.string("name", default_name(a.kind));
  if (a.name.empty()) throw ConfigError(where + ".name must not be empty");

  std::string backend = s.string("backend", "conjugate");
  if (backend == "conjugate") a.backend = Backend::kConjugate;
  else if (backend == "beta_bernoulli") a.backend = Backend::kBetaBernoulli;
  else if (backend == "bridge") a.backend = Backend::kBridge;
  else throw ConfigError(where + ".backend: unknown backend '" + backend + "'");

  a.base = s.number("base", a.base);
  if (!(a.base > 1.0)) throw s.bad("base", "> 1");
  a.warmup = s.count("warmup", a.warmup);
  a.v_floor = s.number("v_floor", a.v_floor);
  a.v_fallback = s.number("v_fallback", a.v_fallback);
  if (a.v_floor < 0.0 || a.v_fallback < 0.0) throw ConfigError(where + ": variances must be >= 0");
  a.switch_times = s.counts("switch_times", a.switch_times);
  for (std::size_t i = 1; i < a.switch_times.size(); ++i) {
    if (a.switch_times[i] <= a.switch_times[i - 1]) throw s.bad("switch_times", "strictly increasing");
  }
  a.k_threshold = s.count("k_thr", a.k_threshold);

  std::string enc = s.string("encoding", "adaptive");
  if (enc == "adaptive") a.encoding = EncodingMode::kAdaptive;
  else if (enc == "disjoint") a.encoding = EncodingMode::kDisjoint;
  else if (enc == "onehot") a.encoding = EncodingMode::kOneHot;
  else throw ConfigError(where + ".encoding: unknown encoding '" + enc + "'");

  a.prior_precision = s.number("prior_precision", a.prior_precision);
  a.noise_variance = s.number("noise_variance", a.noise_variance);
  if (!(a.prior_precision > 0.0) || !(a.noise_variance > 0.0)) {
    throw ConfigError(where + ": prior_precision and noise_variance must be > 0");
  }
  a.prior_a = s.number("prior_a", a.prior_a);
  a.prior_b = s.number("prior_b", a.prior_b);
  a.nu = s.number("nu", a.nu);
  a.alpha = s.number("alpha", a.alpha);
  a.lambda = s.number("lambda", a.lambda);
  if (!(a.lambda > 0.0)) throw s.bad("lambda", "> 0");
  s.finish();
  return a;
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig sc;
  sc.name = name;
  sc.synthetic = envs::scenario_spec(name);
  return sc;
}

ScenarioConfig parse_scenario(const toml::table& t, const std::string& where, const std::filesystem::path& base) {
  Section s(t, where);
  ScenarioConfig sc;
  std::string kind = s.string("kind", "synthetic");
  sc.name = s.string("name", "");
  if (kind == "classification") {
    sc.classification = true;
    if (sc.name.empty()) throw s.bad("name", "set");
    auto path = s.string("path", "");
    if (path.empty()) throw s.bad("path", "set");
    sc.path = resolve(base, path);
    sc.label = s.string("label", "");
    if (sc.label.empty()) throw s.bad("label", "set");
    sc.categorical = s.strings("categorical");
    sc.horizon_cap = s.count("horizon_cap", sc.horizon_cap, 1);
  } else if (kind == "synthetic") {
    std::string from = s.string("base", sc.name);
    if (from.empty()) throw s.bad("base", "a built-in scenario name");
    sc.synthetic = envs::scenario_spec(from);
    if (sc.name.empty()) sc.name = from;
    sc.synthetic.name = sc.name;
    sc.synthetic.dim = s.count("dim", sc.synthetic.dim, 1);
    sc.synthetic.arms = s.count("arms", sc.synthetic.arms, 1);
    sc.synthetic.noise_variance = s.number("noise_variance", sc.synthetic.noise_variance);
    if (sc.synthetic.noise_variance < 0.0) throw s.bad("noise_variance", ">= 0");
    sc.synthetic.heteroscedastic = s.boolean("heteroscedastic", sc.synthetic.heteroscedastic);
    if (s.has("variant")) {
      auto v = s.string("variant", "");
      if (v == "shared") sc.synthetic.variant = envs::Arm2Variant::kShared;
      else if (v == "disjoint") sc.synthetic.variant = envs::Arm2Variant::kDisjoint;
      else throw s.bad("variant", "'shared' or 'disjoint'");
    }
    if (sc.synthetic.kind == envs::DgpKind::kSynBart) sc.synthetic.bart.dim = sc.synthetic.dim;
    if (sc.synthetic.kind == envs::DgpKind::kSynBart) sc.synthetic.bart.arms = sc.synthetic.arms;
    if (sc.synthetic.kind != envs::DgpKind::kLinear && sc.synthetic.kind != envs::DgpKind::kSynBart &&
        sc.synthetic.dim < 5) {
      throw s.bad("dim", ">= 5 for Friedman scenarios");
    }
  } else {
    throw ConfigError(where + ".kind: unknown scenario kind '" + kind + "'");
  }
  s.finish();
  return sc;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }

  ExperimentConfig cfg;
  if (const char* env = std::getenv("PFNTS_OUT_DIR"); env && *env) cfg.output = env;

  Section top(root, "config");
  if (const auto* exp = top.table("experiment")) {
    Section s(*exp, "experiment");
    for (const auto& name : s.strings("scenarios")) cfg.scenarios.push_back(builtin_scenario(name));
    cfg.horizon = s.count("horizon", cfg.horizon, 1);
    cfg.replications = s.count("replications", cfg.replications, 1);
    cfg.seed = s.seed("seed", cfg.seed);
    if (s.has("output")) cfg.output = resolve(base_dir, s.string("output", ""));
    cfg.thin = s.count("thin", cfg.thin, 1);
    cfg.jobs = s.count("jobs", cfg.jobs, 1);
    s.finish();
  }

  if (const auto* n = top.node("scenario")) {
    const auto* arr = n->as_array();
    if (!arr || !arr->is_array_of_tables()) throw ConfigError("scenario must be an array of tables ([[scenario]])");
    std::size_t i = 0;
    for (const auto& item : *arr) {
      cfg.scenarios.push_back(parse_scenario(*item.as_table(), "scenario[" + std::to_string(i++) + "]", base_dir));
    }
  }

  if (const auto* n = top.node("agent")) {
    const auto* arr = n->as_array();
    if (!arr || !arr->is_array_of_tables()) throw ConfigError("agent must be an array of tables ([[agent]])");
    std::size_t i = 0;
    for (const auto& item : *arr) {
      cfg.agents.push_back(parse_agent(*item.as_table(), "agent[" + std::to_string(i++) + "]"));
    }
  }

  if (const auto* b = top.table("bridge")) {
    Section s(*b, "bridge");
    BridgeOptions opt;
    opt.command = s.strings("command");
    if (opt.command.empty()) throw s.bad("command", "a non-empty array of strings");
    opt.timeout = std::chrono::milliseconds(s.count("timeout_ms", 60'000, 1));
    s.finish();
    cfg.bridge = opt;
  }

  if (const auto* c = top.table("coverage")) {
    Section s(*c, "coverage");
    CoverageSection cov;
    cov.dgp = s.string("dgp", cov.dgp);
    envs::scenario_spec(cov.dgp);  // validates the name
    cov.sizes = s.counts("sizes", cov.sizes);
    cov.reps = s.count("reps", cov.reps, 1);
    cov.queries = s.count("queries", cov.queries, 1);
    cov.level = s.number("level", cov.level);
    if (!(cov.level > 0.0 && cov.level < 1.0)) throw s.bad("level", "in (0, 1)");
    auto method = s.string("method", "subclt");
    if (method == "exact") cov.exact = true;
    else if (method != "subclt") throw s.bad("method", "'subclt' or 'exact'");
    cov.base = s.number("base", cov.base);
    if (!(cov.base > 1.0)) throw s.bad("base", "> 1");
    cov.v_floor = s.number("v_floor", cov.v_floor);
    cov.prior_precision = s.number("prior_precision", cov.prior_precision);
    cov.noise_variance = s.number("noise_variance", cov.noise_variance);
    if (!(cov.prior_precision > 0.0) || !(cov.noise_variance > 0.0)) {
      throw ConfigError("coverage: prior_precision and noise_variance must be > 0");
    }
    s.finish();
    cfg.coverage = cov;
  }

  if (const auto* o = top.table("ope")) {
    Section s(*o, "ope");
    OpeSection ope;
    if (s.has("log")) ope.log = resolve(base_dir, s.string("log", ""));
    if (const auto* syn = s.table("synthetic")) {
      Section ss(*syn, "ope.synthetic");
      SyntheticLogSection sl;
      sl.users = ss.count("users", sl.users, 2);
      sl.days = ss.count("days", sl.days, 1);
      sl.propensities = ss.numbers("propensities", sl.propensities);
      sl.covariates = ss.count("covariates", sl.covariates);
      sl.user_onehot = ss.boolean("user_onehot", sl.user_onehot);
      ss.finish();
      double sum = 0.0;
      for (double p : sl.propensities) {
        if (!(p > 0.0)) throw ConfigError("ope.synthetic.propensities must be > 0");
        sum += p;
      }
      if (sl.propensities.size() < 2 || std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("ope.synthetic.propensities must have >= 2 entries summing to 1");
      }
      ope.synthetic = sl;
    }
    if (ope.log && ope.synthetic) throw ConfigError("ope: set either log or [ope.synthetic], not both");
    if (!ope.log && !ope.synthetic) throw ConfigError("ope: one of log or [ope.synthetic] is required");
    ope.estimators = s.strings("estimators", ope.estimators);
    for (const auto& e : ope.estimators) {
      if (e != "snips" && e != "dr") throw ConfigError("ope.estimators: unknown estimator '" + e + "'");
    }
    ope.bootstrap = s.count("bootstrap", ope.bootstrap, 2);
    ope.draws = s.count("M", ope.draws, 1);
    ope.horizons = s.counts("horizons", ope.horizons);
    ope.ridge = s.number("ridge", ope.ridge);
    if (!(ope.ridge > 0.0)) throw s.bad("ridge", "> 0");
    ope.folds = s.count("folds", ope.folds, 2);
    if (const auto* ag = s.table("agent")) ope.agent = parse_agent(*ag, "ope.agent");
    s.finish();
    cfg.ope = ope;
  }
  top.finish();

  std::set<std::string> names;
  for (const auto& a : cfg.agents) {
    if (!names.insert(a.name).second) throw ConfigError("duplicate agent name '" + a.name + "'");
    if (a.backend == Backend::kBridge && !cfg.bridge) {
      throw ConfigError("agent '" + a.name + "' uses the bridge backend but [bridge] is missing");
    }
  }
  names.clear();
  for (const auto& sc : cfg.scenarios) {
    if (!names.insert(sc.name).second) throw ConfigError("duplicate scenario '" + sc.name + "'");
  }
  if (cfg.ope && cfg.ope->agent.backend == Backend::kBridge && !cfg.bridge) {
    throw ConfigError("ope.agent uses the bridge backend but [bridge] is missing");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace pfnts::harness
