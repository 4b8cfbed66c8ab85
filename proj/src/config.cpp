// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace gdssm {

namespace {

std::vector<KeySpec> build_registry() {
  using K = KeyType;
  return {
      {"run.seed", K::kInt, "0", "master seed for tasks, init and batches", {}},
      {"run.out_dir", K::kString, "runs", "directory for artifacts", {}},
      {"run.id", K::kString, "", "artifact prefix; empty derives <command>-<config hash>", {}},

      {"model.variant", K::kChoice, "nd", "model variant", {"1d", "nd", "multilayer", "nonlinear"}},
      {"model.f", K::kInt, "10", "feature dimension f", {}},
      {"model.n_context", K::kInt, "10", "context pairs N", {}},
      {"model.layers", K::kInt, "2", "layers of the multilayer variant", {}},
      {"model.glu_hidden", K::kInt, "0", "GLU hidden width, 0 means f", {}},
      {"model.glu_placement", K::kChoice, "state", "GLU before output gating or after", {"state", "output"}},

      {"ablation.input_construction", K::kBool, "true", "1-D constructed context vectors", {}},
      {"ablation.sliding_window", K::kBool, "true", "N-D sliding window", {}},
      {"ablation.output_gating", K::kBool, "true", "readout gated by the window", {}},

      {"task.kind", K::kChoice, "auto", "auto picks sine for the nonlinear variant", {"auto", "linear", "sine"}},
      {"task.alpha", K::kReal, "1", "inputs ~ U(-alpha, alpha)", {}},

      {"train.batch_size", K::kInt, "64", "tasks per step", {}},
      {"train.total_steps", K::kInt, "20000", "optimizer steps", {}},
      {"train.lr_ssm", K::kReal, "1e-4", "peak rate for recurrence and gates", {}},
      {"train.lr_global", K::kReal, "2e-4", "peak rate for embeddings, GLU and readout vector", {}},
      {"train.weight_decay", K::kReal, "0.05", "decoupled weight decay", {}},
      {"train.warmup_steps", K::kIntOrAuto, "auto", "auto is 1% of total_steps", {}},
      {"train.eval_every", K::kInt, "500", "history cadence in steps, 0 logs only the ends", {}},
      {"train.eval_tasks", K::kInt, "1000", "tasks in the in-training eval set", {}},
      {"train.init_std", K::kReal, "0.02", "std of the random init", {}},
      {"train.train_beta", K::kBool, "true", "train the output scale", {}},
      {"train.divergence_threshold", K::kReal, "1e6", "abort when the batch loss exceeds this", {}},

      {"eval.n_tasks", K::kInt, "10000", "shared eval set size", {}},
      {"eval.sens_tasks", K::kInt, "1000", "tasks for sensitivity similarity", {}},
      {"eval.fd_step", K::kReal, "1e-5", "central difference step", {}},
      {"eval.checkpoint", K::kString, "", "checkpoint prefix of a trained model", {}},

      {"oracle.eta", K::kRealOrAuto, "auto", "GD rate; auto tunes on a held-out batch", {}},
      {"oracle.steps", K::kInt, "1", "GD steps of the oracle", {}},
      {"oracle.l2_lambda", K::kReal, "0", "L2 coefficient of the oracle loss", {}},
      {"oracle.newton_ridge", K::kReal, "1e-8", "ridge added to S_xx", {}},
      {"oracle.tune_tasks", K::kInt, "1000", "held-out tasks for the eta search", {}},
      {"oracle.eta_min", K::kReal, "0.01", "eta grid lower end", {}},
      {"oracle.eta_max", K::kReal, "2", "eta grid upper end", {}},
      {"oracle.eta_points", K::kInt, "31", "log-spaced eta grid points", {}},

      {"sweep.kind", K::kChoice, "alpha", "sweep axis", {"alpha", "dimension"}},
      {"sweep.alphas", K::kRealList, "0.5,1,2", "alpha grid", {}},
      {"sweep.dims", K::kRealList, "2,5,10,20", "dimension grid", {}},

      {"verify.seeds", K::kInt, "20", "tasks per grid point", {}},
      {"verify.grad_f", K::kInt, "3", "f for gradient checks", {}},
      {"verify.grad_n", K::kInt, "4", "N for gradient checks", {}},
      {"verify.grad_step", K::kReal, "1e-4", "central difference step of the gradient checks", {}},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

bool parse_int(const std::string& v, std::int64_t& out) {
  try {
    const double d = parse_double(v);
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) return false;
    out = static_cast<std::int64_t>(d);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

// Returns an error message, empty when the value fits the key.
std::string check_value(const KeySpec& spec, const std::string& v) {
  std::int64_t i = 0;
  bool b = false;
  switch (spec.type) {
    case KeyType::kInt:
      if (!parse_int(v, i) || i < 0) return "expected a non-negative integer";
      return "";
    case KeyType::kIntOrAuto:
      if (v == "auto") return "";
      if (!parse_int(v, i) || i < 0) return "expected a non-negative integer or auto";
      return "";
    case KeyType::kReal:
      try {
        parse_double(v);
      } catch (const std::invalid_argument&) {
        return "expected a number";
      }
      return "";
    case KeyType::kRealOrAuto:
      if (v == "auto") return "";
      try {
        parse_double(v);
      } catch (const std::invalid_argument&) {
        return "expected a number or auto";
      }
      return "";
    case KeyType::kBool:
      return parse_bool(v, b) ? "" : "expected true or false";
    case KeyType::kString:
      return "";
    case KeyType::kChoice:
      if (std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end()) return "";
      {
        std::string msg = "expected one of";
        for (const auto& c : spec.choices) msg += " " + c;
        return msg;
      }
    case KeyType::kRealList: {
      const auto items = split_list(v);
      if (items.empty()) return "expected a comma-separated list of numbers";
      for (const auto& it : items) {
        try {
          parse_double(it);
        } catch (const std::invalid_argument&) {
          return "expected a comma-separated list of numbers";
        }
      }
      return "";
    }
  }
  return "";
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = build_registry();
  return keys;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

std::string leaf_flag(const std::string& key) {
  std::string leaf = key.substr(key.rfind('.') + 1);
  std::replace(leaf.begin(), leaf.end(), '_', '-');
  return leaf;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.key] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown key '" + key + "'");
  const std::string err = check_value(*spec, value);
  if (!err.empty()) throw ConfigError("bad value '" + value + "' for " + key + ": " + err);
  values_[key] = value;
  explicit_[key] = true;
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  std::int64_t i = 0;
  if (!parse_int(raw(key), i)) throw ConfigError(key + " is not an integer");
  return i;
}

std::size_t RunConfig::count(const std::string& key) const {
  return static_cast<std::size_t>(integer(key));
}

double RunConfig::real(const std::string& key) const { return parse_double(raw(key)); }

bool RunConfig::flag(const std::string& key) const {
  bool b = false;
  if (!parse_bool(raw(key), b)) throw ConfigError(key + " is not a boolean");
  return b;
}

std::optional<double> RunConfig::real_or_auto(const std::string& key) const {
  if (raw(key) == "auto") return std::nullopt;
  return real(key);
}

std::optional<std::size_t> RunConfig::count_or_auto(const std::string& key) const {
  if (raw(key) == "auto") return std::nullopt;
  return count(key);
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) out.push_back(parse_double(item));
  return out;
}

std::map<std::string, std::string> RunConfig::explicit_values() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, on] : explicit_)
    if (on) out[k] = values_.at(k);
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    // Where artifacts go does not change what they contain.
    if (k == "run.out_dir" || k == "run.id") continue;
    out += k + " = " + v + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

void apply_config_text(RunConfig& base, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + why + "\n  " + line);
    };
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected `key = value`");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (value.empty()) fail("missing value for " + key);
    if (!seen.insert(key).second) fail("duplicate key " + key);
    try {
      base.set(key, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
}

void apply_config_file(RunConfig& base, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(base, buf.str(), path);
}

ModelSpec model_spec_from(const RunConfig& cfg) {
  ModelSpec s;
  s.variant = variant_from_string(cfg.raw("model.variant"));
  s.f = cfg.count("model.f");
  s.n_context = cfg.count("model.n_context");
  s.layers = s.variant == Variant::kMultilayer ? cfg.count("model.layers") : 1;
  s.glu_hidden = cfg.count("model.glu_hidden");
  s.glu_placement = glu_placement_from_string(cfg.raw("model.glu_placement"));
  s.ablation.input_construction = cfg.flag("ablation.input_construction");
  s.ablation.sliding_window = cfg.flag("ablation.sliding_window");
  s.ablation.output_gating = cfg.flag("ablation.output_gating");
  if (s.f == 0 || s.n_context == 0) throw ConfigError("model.f and model.n_context must be >= 1");
  return s;
}

TaskKind task_kind_from(const RunConfig& cfg) {
  const std::string& k = cfg.raw("task.kind");
  if (k == "auto") return cfg.raw("model.variant") == "nonlinear" ? TaskKind::kSine : TaskKind::kLinear;
  return task_kind_from_string(k);
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
  t.model = model_spec_from(cfg);
  t.task_kind = task_kind_from(cfg);
  t.alpha = cfg.real("task.alpha");
  t.batch_size = cfg.count("train.batch_size");
  t.total_steps = cfg.count("train.total_steps");
  t.lr_ssm = cfg.real("train.lr_ssm");
  t.lr_global = cfg.real("train.lr_global");
  t.weight_decay = cfg.real("train.weight_decay");
  t.warmup_steps = cfg.count_or_auto("train.warmup_steps");
  t.seed = static_cast<std::uint64_t>(cfg.integer("run.seed"));
  t.eval_every = cfg.count("train.eval_every");
  t.eval_tasks = cfg.count("train.eval_tasks");
  t.init_std = cfg.real("train.init_std");
  t.train_beta = cfg.flag("train.train_beta");
  t.divergence_threshold = cfg.real("train.divergence_threshold");
  return t;
}

GdConfig oracle_config_from(const RunConfig& cfg) {
  GdConfig g;
  g.eta = cfg.real_or_auto("oracle.eta").value_or(1.0);
  g.steps = cfg.count("oracle.steps");
  g.l2_lambda = cfg.real("oracle.l2_lambda");
  if (g.steps == 0) throw ConfigError("oracle.steps must be >= 1");
  return g;
}

}  // namespace gdssm
