// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values come from the small oracles in this
// file, not from the library's own oracle module.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "gdssm/checkpoint.hpp"
#include "gdssm/metrics.hpp"
#include "gdssm/runner.hpp"
#include "gdssm/training.hpp"

using namespace gdssm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// L full-batch GD steps from W = 0 on the context, then W x_query; plain
// loops over the raw task vectors.
std::vector<double> reference_gd(const RegressionTask& t, double eta, int steps) {
  const std::size_t fo = t.f_out, fi = t.f_in, n = t.n_context;
  std::vector<double> w(fo * fi, 0.0);
  for (int s = 0; s < steps; ++s) {
    std::vector<double> g(fo * fi, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < fo; ++r) {
        double pred = 0.0;
        for (std::size_t c = 0; c < fi; ++c) pred += w[r * fi + c] * t.xs[i][c];
        const double e = pred - t.ys[i][r];
        for (std::size_t c = 0; c < fi; ++c) g[r * fi + c] += e * t.xs[i][c];
      }
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= eta * g[k] / static_cast<double>(n);
  }
  std::vector<double> out(fo, 0.0);
  for (std::size_t r = 0; r < fo; ++r)
    for (std::size_t c = 0; c < fi; ++c) out[r] += w[r * fi + c] * t.query_x()[c];
  return out;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_files(const std::vector<std::string>& a, const std::vector<std::string>& b, std::string& detail) {
  if (a.size() != b.size()) {
    detail = "artifact counts differ";
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (fs::path(a[i]).extension() == ".json" && a[i].find("manifest") != std::string::npos) continue;
    if (fs::path(a[i]).filename() != fs::path(b[i]).filename() || slurp(a[i]) != slurp(b[i])) {
      detail = fs::path(a[i]).filename().string() + " differs";
      return false;
    }
  }
  return true;
}

RunOutcome run_quiet(const std::string& command, const RunConfig& cfg) {
  std::ostringstream log;
  return run_command(command, cfg, log);
}

Model train_model(const TrainConfig& tc) {
  const auto t0 = Clock::now();
  TrainResult r = train(tc);
  std::printf("  trained %s [%s] on %s tasks in %.0f s, history eval %.4g%s\n", to_string(tc.model.variant).c_str(),
              tc.model.ablation.label().c_str(), to_string(tc.task_kind).c_str(), seconds_since(t0),
              r.history.back().eval_loss, r.aborted ? " (aborted)" : "");
  std::fflush(stdout);
  return r.model;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("gdssm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);
  const std::uint64_t seed = 0;
  const std::size_t eval_n = 10000;

  // 1. Construction ≡ one-step GD.
  {
    const auto t0 = Clock::now();
    double dev = 0.0;
    for (std::size_t f : {1, 2, 5, 10}) {
      for (std::size_t n : {1, 2, 5, 20}) {
        const auto t1d = sample_task_set({TaskKind::kLinear, f, 1, n, 1.0}, 20, seed, stream_key(1, f, n));
        const auto tnd = sample_task_set({TaskKind::kLinear, f, f, n, 1.0}, 20, seed, stream_key(2, f, n));
        for (double eta : {0.1, 1.0}) {
          const auto p = construct_1d(f, eta, n);
          const auto layer = construct_nd(f, eta, n);
          for (const auto& t : t1d)
            dev = std::max(dev, std::abs(forward_1d(p, context_vectors_1d(t)).back() - reference_gd(t, eta, 1)[0]));
          for (const auto& t : tnd)
            dev = std::max(dev, max_abs(forward_nd(layer, interleave_and_window(t)).back(), reference_gd(t, eta, 1)));
        }
      }
    }
    const double secs = seconds_since(t0);
    report(1, dev < 1e-10 && secs < 10.0, "max |ssm - gd| = " + fmt(dev) + " (< 1e-10), " + fmt(secs) + " s (< 10)");
  }

  // 2. Multi-layer ≡ L-step GD.
  {
    const auto t0 = Clock::now();
    double dev = 0.0;
    for (std::size_t f : {1, 2, 5, 10}) {
      for (std::size_t n : {1, 2, 5, 20}) {
        const auto tasks = sample_task_set({TaskKind::kLinear, f, f, n, 1.0}, 20, seed, stream_key(3, f, n));
        for (double eta : {0.1, 1.0}) {
          for (int steps : {2, 3, 4}) {
            const auto layers = construct_multilayer(f, eta, n, steps);
            for (const auto& t : tasks) {
              const auto out = forward_multilayer(layers, interleave_and_window(t), Matrix(f, f)).back();
              dev = std::max(dev, max_abs(out, reference_gd(t, eta, steps)));
            }
          }
        }
      }
    }
    const double secs = seconds_since(t0);
    report(2, dev < 1e-9 && secs < 30.0, "max |ssm - gd_L| = " + fmt(dev) + " (< 1e-9), " + fmt(secs) + " s (< 30)");
  }

  // 3. Weighted-outer-product identity.
  {
    RngStream rng(seed, 3);
    double dev = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t f = 1 + rng.next_u64() % 10;
      const Matrix c(f, 3, rng_draw(rng, Distribution::kUniform, 3 * f));
      const Matrix q(3, 3, rng_draw(rng, Distribution::kUniform, 9));
      const Matrix got = weighted_outer_sum(c, q);
      for (std::size_t r = 0; r < f; ++r) {
        for (std::size_t s = 0; s < f; ++s) {
          double want = 0.0;
          for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) want += q(a, b) * c(r, a) * c(s, b);
          dev = std::max(dev, std::abs(got(r, s) - want));
        }
      }
    }
    report(3, dev < 1e-14, "max |CQCᵀ - double sum| = " + fmt(dev) + " (< 1e-14)");
  }

  // 4. Gradient engine.
  {
    double worst = 0.0;
    std::string where;
    int idx = 0;
    auto check = [&](ModelSpec s, TaskKind kind) {
      s.f = 3;
      s.n_context = 4;
      RngStream rng(seed, stream_key(kInitDomain, 4, idx));
      const Model m = init_model(s, rng, 0.5);
      const auto batch = sample_task_set(task_spec_for(s, kind, 1.0), 4, seed, stream_key(4, idx++));
      const auto r = grad_check(m, batch, 1e-5);
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        where = to_string(s.variant) + "/" + s.ablation.label() + "/" + r.worst_param;
      }
    };
    ModelSpec s;
    for (Variant v : {Variant::k1d, Variant::kNd, Variant::kNonlinear}) {
      s = ModelSpec{};
      s.variant = v;
      check(s, v == Variant::kNonlinear ? TaskKind::kSine : TaskKind::kLinear);
    }
    s = ModelSpec{};
    s.variant = Variant::kMultilayer;
    s.layers = 3;
    check(s, TaskKind::kLinear);
    s = ModelSpec{};
    s.variant = Variant::kNonlinear;
    s.glu_placement = GluPlacement::kOutput;
    check(s, TaskKind::kSine);
    s = ModelSpec{};
    s.variant = Variant::k1d;
    s.ablation.input_construction = false;
    check(s, TaskKind::kLinear);
    s.ablation = Ablation{};
    s.ablation.output_gating = false;
    check(s, TaskKind::kLinear);
    s = ModelSpec{};
    s.ablation.sliding_window = false;
    check(s, TaskKind::kLinear);
    s.ablation = Ablation{};
    s.ablation.output_gating = false;
    check(s, TaskKind::kLinear);
    report(4, worst < 1e-4, "worst FD relative error " + fmt(worst) + " at " + where + " (< 1e-4)");
  }

  // Desk-scale N-D training through the runner, twice (criterion 11 reuses it).
  RunConfig train_cfg;
  train_cfg.set("run.out_dir", (work / "train_a").string());
  train_cfg.set("run.seed", std::to_string(seed));
  const auto t_train = Clock::now();
  const RunOutcome train_a = run_quiet("train", train_cfg);
  const double train_secs = seconds_since(t_train);
  std::printf("  desk-scale N-D training: %.0f s, exit %d\n", train_secs, train_a.exit_code);
  const Model trained = load_checkpoint((work / "train_a" / (train_a.run_id + "_model")).string()).first;

  const TaskSpec spec = task_spec_for(trained.spec, TaskKind::kLinear, 1.0);
  const auto eval_set = sample_task_set(spec, eval_n, seed, kEvalDomain);
  const auto tune_set = sample_task_set(spec, 1000, seed, kTuneDomain);
  GdConfig gd;
  gd.eta = tune_gd_eta(tune_set, gd).eta;
  std::printf("  tuned one-step GD eta = %.6g\n", gd.eta);
  const Predictor trained_p = model_predictor(trained, "trained-gdssm");
  const Predictor gd_p = gd_predictor(gd);
  const LossStats trained_loss = eval_loss(trained_p, eval_set);
  const LossStats gd_loss = eval_loss(gd_p, eval_set);
  const LossStats zero_loss = eval_loss(zero_predictor(), eval_set);

  // 5. Trained-model convergence.
  {
    const double rel = std::abs(trained_loss.mean - gd_loss.mean) / gd_loss.mean;
    report(5, rel < 0.02 && train_secs < 1800.0,
           "trained " + fmt(trained_loss.mean) + " vs gd " + fmt(gd_loss.mean) + ", rel diff " + fmt(rel) +
               " (< 0.02), " + fmt(train_secs) + " s (< 1800)");
  }

  // 6. Trained-vs-GD alignment.
  {
    const std::vector<RegressionTask> sens_set(eval_set.begin(), eval_set.begin() + 1000);
    const auto sim = sensitivity_similarity(trained_p, gd_p, sens_set);
    const auto diff = compare_predictions(trained_p, gd_p, eval_set);
    const double rel = diff.mean / diff.mean_target_norm;
    report(6, sim.mean_cosine > 0.99 && rel < 0.05,
           "sensitivity cosine " + fmt(sim.mean_cosine) + " (> 0.99), prediction L2 " + fmt(rel) +
               " of target norm (< 0.05)");
    const Model constructed = constructed_model(trained.spec, gd.eta);
    for (const auto& a : param_alignment(trained.layers[0], constructed.layers[0]))
      std::printf("  alignment %-7s cosine %s  distance %.4g  raw mean %.4g\n", a.name.c_str(),
                  a.cosine ? fmt(*a.cosine).c_str() : "undefined", a.distance, a.trained_mean);
  }

  // 7. Newton < GD < zero.
  {
    const LossStats newton = eval_loss(newton_predictor(), eval_set);
    report(7, newton.mean < gd_loss.mean && gd_loss.mean < zero_loss.mean,
           "newton " + fmt(newton.mean) + " < gd " + fmt(gd_loss.mean) + " < zero " + fmt(zero_loss.mean));
  }

  // 8. Ablations, each trained on the default budget.
  {
    TrainConfig base;
    base.seed = seed;
    std::string detail;
    bool pass = true;
    auto ratio_of = [&](const TrainConfig& ablated_cfg, double full_loss, const std::vector<RegressionTask>& tasks) {
      const Model m = train_model(ablated_cfg);
      const double l = eval_loss(model_predictor(m, "ablated"), tasks).mean;
      const double r = l / full_loss;
      pass = pass && r >= 1.8;
      detail += ablated_cfg.model.variant == Variant::k1d ? "1d " : "nd ";
      detail += ablated_cfg.model.ablation.label() + " " + fmt(r) + "x; ";
    };
    TrainConfig nd_sw = base;
    nd_sw.model.ablation.sliding_window = false;
    ratio_of(nd_sw, trained_loss.mean, eval_set);
    TrainConfig nd_og = base;
    nd_og.model.ablation.output_gating = false;
    ratio_of(nd_og, trained_loss.mean, eval_set);

    TrainConfig one = base;
    one.model.variant = Variant::k1d;
    const Model full_1d = train_model(one);
    const auto eval_1d = sample_task_set(task_spec_for(one.model, TaskKind::kLinear, 1.0), eval_n, seed, kEvalDomain);
    const double full_1d_loss = eval_loss(model_predictor(full_1d, "full"), eval_1d).mean;
    TrainConfig one_ic = one;
    one_ic.model.ablation.input_construction = false;
    ratio_of(one_ic, full_1d_loss, eval_1d);
    report(8, pass, detail + "(each >= 1.8x the full model)");
  }

  // 9. OOD alpha sweep.
  {
    const Model constructed = constructed_model(trained.spec, gd.eta);
    double dev = 0.0;
    std::string detail;
    bool trained_ok = true;
    for (double alpha : {0.5, 1.0, 2.0}) {
      const auto tasks = sample_task_set(task_spec_for(trained.spec, TaskKind::kLinear, alpha), eval_n, seed, kEvalDomain);
      double l_con = 0.0, l_gd = 0.0;
      for (const auto& t : tasks) {
        const Vector yc = predict(constructed, t);
        const Vector yg = reference_gd(t, gd.eta, 1);
        dev = std::max(dev, max_abs(yc, yg));
        for (std::size_t r = 0; r < yc.size(); ++r) {
          l_con += (yc[r] - t.query_y()[r]) * (yc[r] - t.query_y()[r]);
          l_gd += (yg[r] - t.query_y()[r]) * (yg[r] - t.query_y()[r]);
        }
      }
      dev = std::max(dev, std::abs(l_con - l_gd) / static_cast<double>(tasks.size()));
      const double l_tr = eval_loss(trained_p, tasks).mean;
      const double gd_mean = l_gd / static_cast<double>(tasks.size());
      const double rel = std::abs(l_tr - gd_mean) / gd_mean;
      if (alpha == 1.0) trained_ok = trained_ok && rel < 0.05;
      if (alpha == 2.0) trained_ok = trained_ok && rel < 0.15;
      detail += "alpha " + fmt(alpha) + ": trained/gd " + fmt(l_tr) + "/" + fmt(gd_mean) + "; ";
    }
    report(9, dev < 1e-10 && trained_ok,
           "constructed vs gd max dev " + fmt(dev) + " (< 1e-10); " + detail + "(5% at alpha 1, 15% at alpha 2)");
  }

  // 10. Nonlinear variant on sine tasks.
  {
    TrainConfig nl;
    nl.seed = seed;
    nl.model.variant = Variant::kNonlinear;
    nl.task_kind = TaskKind::kSine;
    const Model m = train_model(nl);
    const TaskSpec sine = task_spec_for(nl.model, TaskKind::kSine, 1.0);
    const auto tasks = sample_task_set(sine, eval_n, seed, kEvalDomain);
    GdConfig lin;
    lin.eta = tune_gd_eta(sample_task_set(sine, 1000, seed, kTuneDomain), lin).eta;
    const double l_m = eval_loss(model_predictor(m, "trained-gdssm"), tasks).mean;
    const double l_gd = eval_loss(gd_predictor(lin), tasks).mean;
    report(10, l_m <= l_gd, "GD-SSM+GLU " + fmt(l_m) + " <= linear gd " + fmt(l_gd) + " (eta " + fmt(lin.eta) + ")");
  }

  // 11. Determinism of verify and train artifacts.
  {
    RunConfig v;
    v.set("run.out_dir", (work / "verify_a").string());
    const RunOutcome va = run_quiet("verify", v);
    v.set("run.out_dir", (work / "verify_b").string());
    const RunOutcome vb = run_quiet("verify", v);
    train_cfg.set("run.out_dir", (work / "train_b").string());
    const RunOutcome train_b = run_quiet("train", train_cfg);
    std::string d1 = "identical", d2 = "identical";
    const bool same_verify = same_files(va.artifacts, vb.artifacts, d1);
    const bool same_train = same_files(train_a.artifacts, train_b.artifacts, d2);
    report(11, same_verify && same_train && va.exit_code == 0,
           "verify exit " + std::to_string(va.exit_code) + ", verify CSVs " + d1 + ", train CSVs " + d2 +
               " (manifests carry wall-clock and are excluded)");
  }

  fs::remove_all(work);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
