// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace gdssm {

TaskSpec task_spec_for(const ModelSpec& spec, TaskKind kind, double alpha) {
  TaskSpec t;
  t.kind = kind;
  t.f_in = spec.f;
  t.f_out = spec.variant == Variant::k1d ? 1 : spec.f;
  t.n_context = spec.n_context;
  t.alpha = alpha;
  return t;
}

OptState init_opt_state(const Model& model) {
  OptState opt;
  for (const auto& v : param_views(model)) {
    opt.m.emplace_back(v.values.size(), 0.0);
    opt.v.emplace_back(v.values.size(), 0.0);
  }
  return opt;
}

void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, std::size_t step, double lr, double weight_decay) {
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    theta[i] -= lr * (m_hat / (std::sqrt(v_hat) + kAdamEps) + weight_decay * theta[i]);
  }
}

void adamw_step(Model& params, const Model& grads, OptState& opt, double lr_ssm, double lr_global,
                double weight_decay, const std::vector<std::string>& frozen) {
  auto pv = param_views(params);
  const auto gv = param_views(grads);
  if (pv.size() != gv.size() || pv.size() != opt.m.size())
    throw std::invalid_argument("adamw_step: parameter, gradient and state structures differ");
  ++opt.step;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (std::find(frozen.begin(), frozen.end(), pv[i].name) != frozen.end()) continue;
    const double lr = pv[i].group == ParamGroup::kSsm ? lr_ssm : lr_global;
    adamw_update(pv[i].values, gv[i].values, opt.m[i], opt.v[i], opt.step, lr, weight_decay);
  }
}

double lr_at(std::size_t step, double base, std::size_t warmup, std::size_t total) {
  if (step >= total) return 0.0;
  if (step < warmup) return base * static_cast<double>(step) / static_cast<double>(warmup);
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows) {
  os << "step,lr_ssm,lr_global,train_loss,eval_loss\n";
  for (const auto& r : rows) {
    os << r.step << ',' << format_double(r.lr_ssm) << ',' << format_double(r.lr_global) << ','
       << format_double(r.train_loss) << ',' << format_double(r.eval_loss) << '\n';
  }
}

std::vector<std::string> frozen_params(const TrainConfig& cfg, const Model& model) {
  std::vector<std::string> frozen;
  if (cfg.train_beta) return frozen;
  for (const auto& v : param_views(model)) {
    const std::string& n = v.name;
    if (n == "beta" || (n.size() > 5 && n.compare(n.size() - 5, 5, ".beta") == 0)) frozen.push_back(n);
  }
  return frozen;
}

namespace {

std::vector<RegressionTask> train_batch(const TrainConfig& cfg, const TaskSpec& ts, std::size_t step) {
  std::vector<RegressionTask> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t b = 0; b < cfg.batch_size; ++b) {
    RngStream rng(cfg.seed, stream_key(kTrainDomain, step, b));
    batch.push_back(sample_task(ts, rng));
  }
  return batch;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.eval_tasks == 0) throw std::invalid_argument("train: eval_tasks must be >= 1");
  if (cfg.resolved_warmup() > cfg.total_steps)
    throw std::invalid_argument("train: warmup_steps exceeds total_steps");

  const TaskSpec ts = task_spec_for(cfg.model, cfg.task_kind, cfg.alpha);
  RngStream init_rng(cfg.seed, stream_key(kInitDomain, 0));
  TrainResult result;
  result.model = init_model(cfg.model, init_rng, cfg.init_std);
  const auto eval_set = sample_task_set(ts, cfg.eval_tasks, cfg.seed, kHistoryEvalDomain);
  const auto frozen = frozen_params(cfg, result.model);
  const std::size_t warmup = cfg.resolved_warmup();
  OptState opt = init_opt_state(result.model);

  auto row = [&](std::size_t step, double train_loss) {
    HistoryRow r;
    r.step = step;
    r.lr_ssm = lr_at(step, cfg.lr_ssm, warmup, cfg.total_steps);
    r.lr_global = lr_at(step, cfg.lr_global, warmup, cfg.total_steps);
    r.train_loss = train_loss;
    r.eval_loss = batch_loss(result.model, eval_set);
    result.history.push_back(r);
  };
  auto abort_with = [&](std::size_t step, const std::string& why) {
    result.aborted = true;
    result.abort_reason = "step " + std::to_string(step) + ", seed " + std::to_string(cfg.seed) + ": " + why;
  };

  try {
    row(0, batch_loss(result.model, train_batch(cfg, ts, 1)));
  } catch (const NonFiniteLoss& e) {
    abort_with(0, e.what());
    return result;
  }
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    LossAndGrads lg;
    try {
      lg = loss_and_grads(result.model, train_batch(cfg, ts, step));
    } catch (const NonFiniteLoss& e) {
      abort_with(step, e.what());
      break;
    }
    if (lg.loss > cfg.divergence_threshold) {
      abort_with(step, "diverged, train loss " + format_double(lg.loss));
      break;
    }
    adamw_step(result.model, lg.grads, opt, lr_at(step, cfg.lr_ssm, warmup, cfg.total_steps),
               lr_at(step, cfg.lr_global, warmup, cfg.total_steps), cfg.weight_decay, frozen);
    result.steps_done = step;
    if ((cfg.eval_every && step % cfg.eval_every == 0) || step == cfg.total_steps) row(step, lg.loss);
  }
  return result;
}

}  // namespace gdssm
