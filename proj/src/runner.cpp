// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/runner.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "gdssm/checkpoint.hpp"

namespace gdssm {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kVerifyDomain = 0x76657269;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex32(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

// Owns the manifest and the artifact list of one run.
class Run {
 public:
  Run(const std::string& command, const RunConfig& cfg)
      : start_(std::chrono::steady_clock::now()) {
    id_ = resolve_run_id(command, cfg);
    dir_ = cfg.raw("run.out_dir");
    fs::create_directories(dir_);
    manifest_path_ = path("manifest.json");
    manifest_["schema_version"] = kManifestSchemaVersion;
    manifest_["spec_version"] = kSpecVersion;
    manifest_["command"] = command;
    manifest_["run_id"] = id_;
    manifest_["config_hash"] = hex32(cfg.hash());
    Json echo = Json::object();
    for (const auto& [k, v] : cfg.explicit_values()) echo[k] = v;
    manifest_["config"] = echo;
    Json resolved = Json::object();
    for (const auto& [k, v] : cfg.values()) resolved[k] = v;
    manifest_["resolved"] = resolved;
    manifest_["derived"] = Json::object();
    manifest_["status"] = "running";
    manifest_["started_at"] = utc_now();
    manifest_["artifacts"] = Json::array();
    write_manifest();
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / (id_ + "_" + name)).string(); }

  std::ofstream open(const std::string& name) {
    const std::string p = path(name);
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p);
    add_artifact(p);
    return os;
  }

  void add_artifact(const std::string& p) {
    artifacts_.push_back(p);
    manifest_["artifacts"].push_back(fs::path(p).filename().string());
  }

  void derive(const std::string& key, Json value) { manifest_["derived"][key] = std::move(value); }

  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  // A run that unwinds before finish() still gets a final manifest.
  ~Run() {
    if (finished_) return;
    try {
      finish(kExitError, "run ended by an exception");
    } catch (...) {
    }
  }

  RunOutcome finish(int exit_code, const std::string& failure = {}) {
    finished_ = true;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_["status"] = exit_code == kExitOk ? "ok" : (exit_code == kExitAborted ? "aborted" : "failed");
    manifest_["exit_code"] = exit_code;
    if (!failure.empty()) manifest_["failure"] = failure;
    manifest_["finished_at"] = utc_now();
    manifest_["wall_clock_seconds"] = secs;
    write_manifest();
    return {exit_code, id_, manifest_path_, artifacts_, failure};
  }

  const std::string& id() const { return id_; }

 private:
  void write_manifest() {
    std::ofstream os(manifest_path_);
    if (!os) throw std::runtime_error("cannot write " + manifest_path_);
    os << manifest_.dump(2) << '\n';
  }

  std::chrono::steady_clock::time_point start_;
  std::string id_;
  std::string dir_;
  std::string manifest_path_;
  Json manifest_;
  std::vector<std::string> artifacts_;
  bool finished_ = false;
};

std::uint64_t seed_of(const RunConfig& cfg) { return static_cast<std::uint64_t>(cfg.integer("run.seed")); }

TaskSpec eval_task_spec(const RunConfig& cfg) {
  return task_spec_for(model_spec_from(cfg), task_kind_from(cfg), cfg.real("task.alpha"));
}

GdConfig oracle_for(const RunConfig& cfg) {
  GdConfig g = oracle_config_from(cfg);
  const ModelSpec spec = model_spec_from(cfg);
  if (spec.variant == Variant::kMultilayer && !cfg.is_explicit("oracle.steps")) g.steps = spec.layers;
  return g;
}

// η from the config, or tuned on the held-out batch for this task spec.
double oracle_eta(const RunConfig& cfg, const TaskSpec& spec, const GdConfig& g, Run* run) {
  if (const auto eta = cfg.real_or_auto("oracle.eta")) return *eta;
  const auto tune = sample_task_set(spec, cfg.count("oracle.tune_tasks"), seed_of(cfg), kTuneDomain);
  const EtaSearch s = tune_gd_eta(tune, g, cfg.real("oracle.eta_min"), cfg.real("oracle.eta_max"),
                                  cfg.count("oracle.eta_points"));
  if (run) {
    const std::string key = "oracle_eta[f=" + std::to_string(spec.f_in) + ",alpha=" + format_double(spec.alpha) + "]";
    run->derive(key, Json{{"eta", s.eta}, {"tune_loss", s.loss}, {"steps", g.steps}});
  }
  return s.eta;
}

ModelSpec constructible(ModelSpec spec) {
  spec.ablation = Ablation{};
  return spec;
}

std::optional<Model> load_trained(const RunConfig& cfg) {
  const std::string& prefix = cfg.raw("eval.checkpoint");
  if (prefix.empty()) return std::nullopt;
  return load_checkpoint(prefix).first;
}

ResultRow loss_row(const Predictor& p, const LossStats& s, const TaskSpec& spec, std::uint64_t seed) {
  return {p.tag, "loss", spec.f_in, spec.n_context, spec.alpha, seed, s.mean, s.sem};
}

ResultRow value_row(const std::string& pred, const std::string& metric, const TaskSpec& spec,
                    std::uint64_t seed, std::optional<double> value) {
  return {pred, metric, spec.f_in, spec.n_context, spec.alpha, seed, value, std::nullopt};
}

// ---- verify --------------------------------------------------------------

double max_dev(const Vector& a, const Vector& b) { return max_abs_diff(a, b); }

}  // namespace

std::vector<VerifyCheck> verify_suite(const RunConfig& cfg) {
  const std::uint64_t seed = seed_of(cfg);
  std::set<std::size_t> fs_grid{1, 2, 5, 10};
  std::set<std::size_t> ns_grid{1, 2, 5, 20};
  fs_grid.insert(cfg.count("model.f"));
  ns_grid.insert(cfg.count("model.n_context"));
  const std::size_t seeds = cfg.count("verify.seeds");
  const std::vector<double> etas{0.1, 1.0};

  double dev_1d = 0.0, dev_nd = 0.0, dev_ml = 0.0, dev_glu = 0.0, dev_lsa = 0.0;
  double sens_fd = 0.0, sens_cos = 0.0, newton_err = 0.0;
  for (std::size_t f : fs_grid) {
    for (std::size_t n : ns_grid) {
      const std::uint64_t domain = stream_key(kVerifyDomain, f, n);
      const auto tasks_1d = sample_task_set({TaskKind::kLinear, f, 1, n, 1.0}, seeds, seed, domain);
      const auto tasks = sample_task_set({TaskKind::kLinear, f, f, n, 1.0}, seeds, seed, domain);
      for (double eta : etas) {
        GdConfig g;
        g.eta = eta;
        const auto p1 = construct_1d(f, eta, n);
        const auto layer = construct_nd(f, eta, n);
        const GluHead id = GluHead::identity(f);
        const LsaWeights lsa = construct_lsa_gd(f, f, eta, n);
        for (const auto& t : tasks_1d) {
          const Vector o = forward_1d(p1, context_vectors_1d(t));
          dev_1d = std::max(dev_1d, std::abs(o.back() - gd_predict(t, g)[0]));
        }
        for (const auto& t : tasks) {
          const auto windows = interleave_and_window(t);
          const Vector gd = gd_predict(t, g);
          const Vector nd = forward_nd(layer, windows).back();
          dev_nd = std::max(dev_nd, max_dev(nd, gd));
          dev_glu = std::max(dev_glu, max_dev(forward_nonlinear(layer, id, windows).back(), nd));
          dev_lsa = std::max(dev_lsa, max_dev(lsa_predict(t, lsa), gd));
          for (std::size_t l = 2; l <= 4; ++l) {
            GdConfig gl = g;
            gl.steps = l;
            const auto layers = construct_multilayer(f, eta, n, l);
            const Vector ml = forward_multilayer(layers, windows, Matrix(f, f)).back();
            dev_ml = std::max(dev_ml, max_dev(ml, gd_predict(t, gl)));
          }
        }
      }
      // Sensitivities of the constructed N-D model at η = 1.
      Model m;
      m.spec.variant = Variant::kNd;
      m.spec.f = f;
      m.spec.n_context = n;
      m = constructed_model(m.spec, 1.0);
      GdConfig g;
      for (const auto& t : tasks) {
        const Matrix a = sensitivity(m, t);
        const Matrix d = sensitivity(m, t, SensitivityMethod::kCentralFd, cfg.real("eval.fd_step"));
        const double scale = std::max(frobenius_norm(a), 1e-300);
        sens_fd = std::max(sens_fd, frobenius_norm(a - d) / scale);
        if (const auto c = cosine_similarity(a.data(), gd_fit(t, g).w.data())) sens_cos = std::max(sens_cos, std::abs(1.0 - *c));
        if (n >= f) {
          const double e = max_dev(newton_predict(t, 0.0).prediction, t.query_y());
          newton_err = std::max(newton_err, e * e);
        }
      }
    }
  }

  double wos = 0.0;
  {
    RngStream rng(seed, stream_key(kVerifyDomain, 0xC0));
    for (int i = 0; i < 1000; ++i) {
      const std::size_t f = 1 + rng.next_u64() % 10;
      const Matrix c(f, 3, rng_draw(rng, Distribution::kUniform, 3 * f));
      const Matrix q(3, 3, rng_draw(rng, Distribution::kUniform, 9));
      Matrix explicit_sum(f, f);
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) add_outer(explicit_sum, q(a, b), c.col(a), c.col(b));
      wos = std::max(wos, max_abs_diff(weighted_outer_sum(c, q).data(), explicit_sum.data()));
    }
  }

  std::vector<VerifyCheck> checks;
  auto add = [&](const std::string& name, double value, double threshold) {
    checks.push_back({name, value, threshold, value < threshold});
  };
  add("construction_1d_vs_gd", dev_1d, 1e-10);
  add("construction_nd_vs_gd", dev_nd, 1e-10);
  add("multilayer_vs_gd_steps", dev_ml, 1e-9);
  add("glu_identity_vs_nd", dev_glu, 1e-6);
  add("lsa_construction_vs_gd", dev_lsa, 1e-10);
  add("weighted_outer_sum_identity", wos, 1e-14);
  add("sensitivity_analytic_vs_fd", sens_fd, 1e-6);
  add("sensitivity_cosine_vs_gd", sens_cos, 1e-10);
  add("newton_interpolation", newton_err, 1e-20);

  // Gradient checks on small instances of every variant and ablation.
  const std::size_t gf = cfg.count("verify.grad_f");
  const std::size_t gn = cfg.count("verify.grad_n");
  struct Case {
    std::string name;
    ModelSpec spec;
    TaskKind kind;
    double threshold;
  };
  std::vector<Case> cases;
  auto spec_of = [&](Variant v) {
    ModelSpec s;
    s.variant = v;
    s.f = gf;
    s.n_context = gn;
    s.layers = v == Variant::kMultilayer ? 3 : 1;
    return s;
  };
  cases.push_back({"grad_check_1d", spec_of(Variant::k1d), TaskKind::kLinear, 1e-7});
  cases.push_back({"grad_check_nd", spec_of(Variant::kNd), TaskKind::kLinear, 1e-4});
  cases.push_back({"grad_check_multilayer", spec_of(Variant::kMultilayer), TaskKind::kLinear, 1e-4});
  cases.push_back({"grad_check_nonlinear", spec_of(Variant::kNonlinear), TaskKind::kSine, 1e-4});
  {
    ModelSpec s = spec_of(Variant::kNonlinear);
    s.glu_placement = GluPlacement::kOutput;
    cases.push_back({"grad_check_nonlinear_output_glu", s, TaskKind::kSine, 1e-4});
    s = spec_of(Variant::k1d);
    s.ablation.input_construction = false;
    cases.push_back({"grad_check_1d_no_input_construction", s, TaskKind::kLinear, 1e-4});
    s = spec_of(Variant::k1d);
    s.ablation.output_gating = false;
    cases.push_back({"grad_check_1d_no_output_gating", s, TaskKind::kLinear, 1e-4});
    s = spec_of(Variant::kNd);
    s.ablation.sliding_window = false;
    cases.push_back({"grad_check_nd_no_sliding_window", s, TaskKind::kLinear, 1e-4});
    s = spec_of(Variant::kNd);
    s.ablation.output_gating = false;
    cases.push_back({"grad_check_nd_no_output_gating", s, TaskKind::kLinear, 1e-4});
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    RngStream rng(seed, stream_key(kInitDomain, 0x6763, i));
    const Model m = init_model(cases[i].spec, rng, 0.5);
    const auto batch = sample_task_set(task_spec_for(cases[i].spec, cases[i].kind, 1.0), 3, seed,
                                       stream_key(kVerifyDomain, 0x6763, i));
    add(cases[i].name, grad_check(m, batch, cfg.real("verify.grad_step")).max_rel_error, cases[i].threshold);
  }
  return checks;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify", "train", "eval", "ablate", "sweep", "compare"};
  return names;
}

std::string resolve_run_id(const std::string& command, const RunConfig& cfg) {
  const std::string& id = cfg.raw("run.id");
  if (!id.empty()) return id;
  return command + "-" + hex32(cfg.hash());
}

namespace {

RunOutcome cmd_verify(const RunConfig& cfg, std::ostream& log) {
  Run run("verify", cfg);
  const auto checks = verify_suite(cfg);
  {
    auto os = run.open("verify.csv");
    os << "property,value,threshold,passed\n";
    for (const auto& c : checks)
      os << c.property << ',' << format_double(c.value) << ',' << format_double(c.threshold) << ','
         << (c.passed ? "true" : "false") << '\n';
  }
  std::string failed;
  for (const auto& c : checks) {
    log << (c.passed ? "ok   " : "FAIL ") << c.property << " = " << format_double(c.value) << " (< "
        << format_double(c.threshold) << ")\n";
    if (!c.passed && failed.empty()) failed = c.property;
  }
  if (!failed.empty()) {
    log << "verify failed: " << failed << '\n';
    return run.finish(kExitCheckFailed, failed);
  }
  return run.finish(kExitOk);
}

// Trains, writes `<prefix>history.csv` and a checkpoint; returns the result.
TrainResult train_and_save(Run& run, const TrainConfig& tc, const RunConfig& cfg, const std::string& suffix,
                           std::ostream& log) {
  log << "training " << to_string(tc.model.variant) << " (" << tc.model.ablation.label()
      << (tc.train_beta ? "" : ", beta fixed") << ") for " << tc.total_steps << " steps\n";
  TrainResult res = train(tc);
  {
    auto os = run.open("history" + suffix + ".csv");
    write_history_csv(os, res.history);
  }
  CheckpointMeta meta{tc.model, std::nullopt, cfg.hash()};
  const auto [tensors, meta_path] = save_checkpoint(run.path("model" + suffix), res.model, meta);
  run.add_artifact(tensors);
  run.add_artifact(meta_path);
  run.derive("warmup_steps", tc.resolved_warmup());
  if (!res.history.empty()) log << "final eval loss " << format_double(res.history.back().eval_loss) << '\n';
  return res;
}

RunOutcome cmd_train(const RunConfig& cfg, std::ostream& log) {
  Run run("train", cfg);
  const TrainConfig tc = train_config_from(cfg);
  const TrainResult res = train_and_save(run, tc, cfg, "", log);
  if (res.aborted) {
    log << "training aborted: " << res.abort_reason << '\n';
    return run.finish(kExitAborted, res.abort_reason);
  }
  return run.finish(kExitOk);
}

std::vector<Predictor> baseline_predictors(const RunConfig& cfg, const TaskSpec& spec, Run* run) {
  const ModelSpec ms = model_spec_from(cfg);
  GdConfig g = oracle_for(cfg);
  g.eta = oracle_eta(cfg, spec, g, run);
  std::vector<Predictor> ps;
  ModelSpec cs = constructible(ms);
  cs.f = spec.f_in;
  if (cs.variant == Variant::kMultilayer) cs.layers = g.steps;
  // The constructions realise unregularised GD; one step unless stacked.
  if (g.l2_lambda == 0.0 && (cs.variant == Variant::kMultilayer || g.steps == 1))
    ps.push_back(model_predictor(constructed_model(cs, g.eta), "constructed-gdssm"));
  ps.push_back(gd_predictor(g));
  if (spec.kind == TaskKind::kSine) {
    GdConfig gs = g;
    gs.nonlinearity = Nonlinearity::kSine;
    gs.eta = oracle_eta(cfg, spec, gs, nullptr);
    Predictor p = gd_predictor(gs);
    p.tag = "gd-oracle-sine(" + std::to_string(gs.steps) + ")";
    ps.push_back(p);
  }
  ps.push_back(newton_predictor(cfg.real("oracle.newton_ridge")));
  ps.push_back(lsa_predictor(spec.f_in, spec.f_out, g.eta, spec.n_context));
  ps.push_back(zero_predictor());
  return ps;
}

RunOutcome cmd_eval(const RunConfig& cfg, std::ostream& log) {
  Run run("eval", cfg);
  const TaskSpec spec = eval_task_spec(cfg);
  const std::uint64_t seed = seed_of(cfg);
  std::vector<Predictor> ps;
  if (auto trained = load_trained(cfg)) ps.push_back(model_predictor(*trained, "trained-gdssm"));
  for (auto& p : baseline_predictors(cfg, spec, &run)) ps.push_back(std::move(p));
  const auto tasks = sample_task_set(spec, cfg.count("eval.n_tasks"), seed, kEvalDomain);
  std::vector<ResultRow> rows;
  for (const auto& p : ps) {
    const LossStats s = eval_loss(p, tasks);
    log << p.tag << ": " << format_double(s.mean) << " ± " << format_double(s.sem) << '\n';
    rows.push_back(loss_row(p, s, spec, seed));
  }
  auto os = run.open("eval.csv");
  write_results_csv(os, rows);
  return run.finish(kExitOk);
}

RunOutcome cmd_compare(const RunConfig& cfg, std::ostream& log) {
  Run run("compare", cfg);
  const TaskSpec spec = eval_task_spec(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const ModelSpec ms = model_spec_from(cfg);
  GdConfig g = oracle_for(cfg);
  g.eta = oracle_eta(cfg, spec, g, &run);
  const auto trained = load_trained(cfg);
  ModelSpec cs = constructible(ms);
  if (cs.variant == Variant::kMultilayer) cs.layers = g.steps;
  const Model constructed = constructed_model(cs, g.eta);
  const Predictor subject =
      trained ? model_predictor(*trained, "trained-gdssm") : model_predictor(constructed, "constructed-gdssm");
  const Predictor oracle = gd_predictor(g);
  const Predictor newton = newton_predictor(cfg.real("oracle.newton_ridge"));

  const auto tasks = sample_task_set(spec, cfg.count("eval.n_tasks"), seed, kEvalDomain);
  const std::vector<RegressionTask> sens_tasks(
      tasks.begin(), tasks.begin() + static_cast<std::ptrdiff_t>(std::min(tasks.size(), cfg.count("eval.sens_tasks"))));
  const double h = cfg.real("eval.fd_step");
  std::vector<ResultRow> rows;
  auto pair_rows = [&](const Predictor& a, const Predictor& b) {
    const std::string tag = a.tag + "|" + b.tag;
    const PredictionDiff d = compare_predictions(a, b, tasks);
    rows.push_back(value_row(tag, "pred_l2_mean", spec, seed, d.mean));
    rows.push_back(value_row(tag, "pred_l2_max", spec, seed, d.max));
    rows.push_back(value_row(tag, "pred_l2_rel", spec, seed, d.mean / d.mean_target_norm));
    const SensitivitySimilarity s = sensitivity_similarity(a, b, sens_tasks, h);
    rows.push_back(value_row(tag, "sens_cosine", spec, seed,
                             s.defined ? std::optional<double>(s.mean_cosine) : std::nullopt));
    rows.push_back(value_row(tag, "sens_l2", spec, seed, s.mean_l2));
    rows.push_back(value_row(tag, "sens_undefined", spec, seed, static_cast<double>(s.undefined)));
    log << tag << ": pred L2 mean " << format_double(d.mean) << ", sens cosine " << format_double(s.mean_cosine)
        << '\n';
  };
  pair_rows(subject, oracle);
  pair_rows(oracle, newton);
  if (trained && !trained->layers.empty() && trained->layers.size() == constructed.layers.size()) {
    for (std::size_t l = 0; l < trained->layers.size(); ++l) {
      for (const auto& a : param_alignment(trained->layers[l], constructed.layers[l])) {
        const std::string tag = "layer" + std::to_string(l) + "." + a.name;
        rows.push_back(value_row(tag, "align_cosine", spec, seed, a.cosine));
        rows.push_back(value_row(tag, "align_distance", spec, seed, a.distance));
        rows.push_back(value_row(tag, "raw_mean", spec, seed, a.trained_mean));
      }
    }
    auto os = run.open("trained_tensors.csv");
    write_tensors_csv(os, *trained);
  }
  auto os = run.open("compare.csv");
  write_results_csv(os, rows);
  return run.finish(kExitOk);
}

RunOutcome cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  Run run("ablate", cfg);
  const TrainConfig base = train_config_from(cfg);
  if (base.model.ablation.any()) throw ConfigError("ablate: leave the ablation.* keys at true; the command toggles them");
  std::vector<std::pair<std::string, TrainConfig>> runs;
  runs.emplace_back("full", base);
  auto with = [&](auto&& edit) {
    TrainConfig t = base;
    edit(t);
    runs.emplace_back(t.model.ablation.label(), t);
  };
  switch (base.model.variant) {
    case Variant::k1d:
      with([](TrainConfig& t) { t.model.ablation.input_construction = false; });
      with([](TrainConfig& t) { t.model.ablation.output_gating = false; });
      break;
    case Variant::kNd:
      with([](TrainConfig& t) { t.model.ablation.sliding_window = false; });
      with([](TrainConfig& t) { t.model.ablation.output_gating = false; });
      break;
    default:
      throw ConfigError("ablate: model.variant must be 1d or nd");
  }
  {
    TrainConfig t = base;
    t.train_beta = !base.train_beta;
    runs.emplace_back(t.train_beta ? "full_beta_trained" : "full_beta_fixed", t);
  }

  const TaskSpec spec = task_spec_for(base.model, base.task_kind, base.alpha);
  const std::uint64_t seed = base.seed;
  const auto tasks = sample_task_set(spec, cfg.count("eval.n_tasks"), seed, kEvalDomain);
  std::vector<ResultRow> rows;
  int exit_code = kExitOk;
  std::string failure;
  for (const auto& [label, tc] : runs) {
    const TrainResult res = train_and_save(run, tc, cfg, "_" + label, log);
    if (res.aborted) {
      exit_code = kExitAborted;
      failure = label + ": " + res.abort_reason;
    }
    const Predictor p = model_predictor(res.model, "trained-gdssm[" + label + "]");
    const LossStats s = eval_loss(p, tasks);
    log << p.tag << ": " << format_double(s.mean) << '\n';
    rows.push_back(loss_row(p, s, spec, seed));
  }
  const Predictor zero = zero_predictor();
  rows.push_back(loss_row(zero, eval_loss(zero, tasks), spec, seed));
  GdConfig g = oracle_for(cfg);
  g.eta = oracle_eta(cfg, spec, g, &run);
  const Predictor gd = gd_predictor(g);
  rows.push_back(loss_row(gd, eval_loss(gd, tasks), spec, seed));
  auto os = run.open("ablate.csv");
  write_results_csv(os, rows);
  return run.finish(exit_code, failure);
}

RunOutcome cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  Run run("sweep", cfg);
  const SweepKind kind = sweep_kind_from_string(cfg.raw("sweep.kind"));
  const TaskSpec base = eval_task_spec(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const auto trained = load_trained(cfg);
  if (trained && kind == SweepKind::kDimension)
    throw ConfigError("sweep: a trained checkpoint has a fixed f; use sweep.kind = alpha");
  // The oracle η is tuned once per dimension at the base alpha and then held
  // fixed across alphas, as a trained model's would be.
  std::map<std::size_t, std::vector<Predictor>> cache;
  PredictorFactory factory = [&](const TaskSpec& spec) {
    auto it = cache.find(spec.f_in);
    if (it == cache.end()) {
      TaskSpec at_base = spec;
      at_base.alpha = base.alpha;
      it = cache.emplace(spec.f_in, baseline_predictors(cfg, at_base, &run)).first;
    }
    std::vector<Predictor> ps;
    if (trained) ps.push_back(model_predictor(*trained, "trained-gdssm"));
    for (const auto& p : it->second) ps.push_back(p);
    return ps;
  };
  const auto grid = kind == SweepKind::kAlpha ? cfg.real_list("sweep.alphas") : cfg.real_list("sweep.dims");
  const auto rows = sweep(kind, factory, grid, base, cfg.count("eval.n_tasks"), seed);
  for (const auto& r : rows)
    log << r.predictor << " f=" << r.f << " alpha=" << format_double(r.alpha) << ": " << format_double(*r.value) << '\n';
  auto os = run.open("sweep_" + to_string(kind) + ".csv");
  write_results_csv(os, rows);
  return run.finish(kExitOk);
}

}  // namespace

RunOutcome run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  if (command == "verify") return cmd_verify(cfg, log);
  if (command == "train") return cmd_train(cfg, log);
  if (command == "eval") return cmd_eval(cfg, log);
  if (command == "compare") return cmd_compare(cfg, log);
  if (command == "ablate") return cmd_ablate(cfg, log);
  if (command == "sweep") return cmd_sweep(cfg, log);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace gdssm
