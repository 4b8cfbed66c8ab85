// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Hand-written reverse mode for each model variant, AdamW with linear warmup
// and cosine decay, and the meta-training loop over freshly sampled tasks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdssm/model.hpp"
#include "gdssm/tasks.hpp"

namespace gdssm {

// Task layout a model consumes: 1-D models read scalar targets.
TaskSpec task_spec_for(const ModelSpec& spec, TaskKind kind, double alpha);

struct TrainConfig {
  ModelSpec model;
  TaskKind task_kind = TaskKind::kLinear;
  double alpha = 1.0;
  std::size_t batch_size = 64;
  std::size_t total_steps = 20000;
  double lr_ssm = 1e-4;
  double lr_global = 2e-4;
  double weight_decay = 0.05;
  std::optional<std::size_t> warmup_steps;  // default 1% of total_steps
  std::uint64_t seed = 0;
  std::size_t eval_every = 500;
  std::size_t eval_tasks = 1000;
  double init_std = 0.02;
  bool train_beta = true;
  double divergence_threshold = 1e6;

  std::size_t resolved_warmup() const { return warmup_steps ? *warmup_steps : total_steps / 100; }
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossAndGrads {
  double loss = 0.0;
  Model grads;  // same structure as the model
};

// Mean over the batch of ‖ŷ_query - y_query‖², with gradients for every
// trainable tensor. Throws NonFiniteLoss naming the parameter norms.
LossAndGrads loss_and_grads(const Model& model, const std::vector<RegressionTask>& batch);
double batch_loss(const Model& model, const std::vector<RegressionTask>& batch);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Symmetric differences on every coordinate. Relative error is
// |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const Model& model, const std::vector<RegressionTask>& batch,
                           double h = 1e-5, double floor = 1e-8);

struct OptState {
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::size_t step = 0;
};

OptState init_opt_state(const Model& model);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// One bias-corrected Adam update with decoupled decay θ -= lr·wd·θ on a flat
// tensor. `step` is the 1-based update count.
void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, std::size_t step, double lr, double weight_decay);

// Advances opt.step and updates every tensor with its group's rate. Tensors
// whose name is listed in `frozen` are left untouched.
void adamw_step(Model& params, const Model& grads, OptState& opt, double lr_ssm, double lr_global,
                double weight_decay, const std::vector<std::string>& frozen = {});

// Linear ramp 0 → base over warmup steps, then cosine decay to 0 at total.
double lr_at(std::size_t step, double base, std::size_t warmup, std::size_t total);

struct HistoryRow {
  std::size_t step = 0;
  double lr_ssm = 0.0;
  double lr_global = 0.0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
};

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows);

struct TrainResult {
  Model model;
  std::vector<HistoryRow> history;
  std::size_t steps_done = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Row 0 holds the initial model; later rows are written every eval_every
// steps and at the last step. Deterministic given the config.
TrainResult train(const TrainConfig& cfg);

// Frozen tensor names implied by the config (β when train_beta is off).
std::vector<std::string> frozen_params(const TrainConfig& cfg, const Model& model);

}  // namespace gdssm
