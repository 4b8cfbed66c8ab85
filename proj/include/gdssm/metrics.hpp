// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Evaluation battery: query loss, prediction and sensitivity agreement
// between predictors, alpha / dimension sweeps, parameter alignment against
// the construction, and the η search for the GD baselines.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gdssm/model.hpp"
#include "gdssm/oracles.hpp"
#include "gdssm/tasks.hpp"

namespace gdssm {

using JacobianFn = std::function<Matrix(const RegressionTask&)>;

// tag is one of trained-gdssm, constructed-gdssm, gd-oracle(L), newton, lsa,
// zero (plus free-form labels for ablations). Without a jacobian, central
// differences are used.
struct Predictor {
  std::string tag;
  PredictFn predict;
  JacobianFn jacobian;
};

Predictor zero_predictor();
Predictor gd_predictor(const GdConfig& cfg);
Predictor newton_predictor(double ridge = 1e-8);
Predictor lsa_predictor(std::size_t f_in, std::size_t f_out, double eta, std::size_t n);
// The model is copied into the closure.
Predictor model_predictor(const Model& model, std::string tag);
Predictor negated(const Predictor& p);

struct LossStats {
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

// Squared query error ‖ŷ - y‖² averaged over the tasks; sem from the
// per-task sample variance.
LossStats eval_loss(const Predictor& p, const std::vector<RegressionTask>& tasks);
// Shared eval set: task i of (spec, seed) is the same for every predictor.
LossStats eval_loss(const Predictor& p, std::size_t n_tasks, const TaskSpec& spec, std::uint64_t seed);

struct PredictionDiff {
  double mean = 0.0;
  double max = 0.0;
  double mean_target_norm = 0.0;  // mean ‖y_query‖ over the same tasks
};

PredictionDiff compare_predictions(const Predictor& a, const Predictor& b,
                                   const std::vector<RegressionTask>& tasks);

struct SensitivitySimilarity {
  double mean_cosine = 0.0;  // over tasks with a defined cosine
  double mean_l2 = 0.0;      // over all tasks
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

Matrix predictor_jacobian(const Predictor& p, const RegressionTask& task, double h = 1e-5);

SensitivitySimilarity sensitivity_similarity(const Predictor& a, const Predictor& b,
                                             const std::vector<RegressionTask>& tasks,
                                             double h = 1e-5);

struct ResultRow {
  std::string predictor;
  std::string metric;
  std::size_t f = 0;
  std::size_t n_context = 0;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> value;  // empty prints as "undefined"
  std::optional<double> sem;    // empty prints as an empty cell
};

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);

enum class SweepKind { kAlpha, kDimension };
std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

// Builds the predictors for one grid point's task spec.
using PredictorFactory = std::function<std::vector<Predictor>(const TaskSpec&)>;

// Alpha sweeps rescale inputs of `base` (w_true is unchanged because it is
// drawn first); dimension sweeps set f_in = f_out = f (f_out stays 1 for
// scalar-target specs). One eval_loss row per predictor per grid point.
std::vector<ResultRow> sweep(SweepKind kind, const PredictorFactory& factory,
                             const std::vector<double>& grid, const TaskSpec& base,
                             std::size_t n_tasks, std::uint64_t seed);

struct TensorAlignment {
  std::string name;
  std::optional<double> cosine;  // empty when either tensor is zero
  double distance = 0.0;         // between normalized tensors
  double trained_mean = 0.0;     // raw mean of the trained tensor
};

// Each tensor is scaled to unit Frobenius norm and its sign flipped so the
// largest-magnitude entry is positive; zero tensors stay zero.
Vector normalize_tensor(std::span<const double> t);

// Q, q, lambda, emb_x, emb_y, beta.
std::vector<TensorAlignment> param_alignment(const GdSsmNdLayer& trained,
                                             const GdSsmNdLayer& constructed);

struct EtaSearch {
  double eta = 0.0;
  double loss = 0.0;
  std::vector<std::pair<double, double>> grid;  // (η, loss) over the log grid
};

// 31 log-spaced points over [lo, hi], then golden-section refinement inside
// the bracket around the best grid point. cfg supplies steps, l2 and the
// nonlinearity; the loss is the mean squared query error on `tasks`.
EtaSearch tune_gd_eta(const std::vector<RegressionTask>& tasks, const GdConfig& cfg,
                      double lo = 0.01, double hi = 2.0, std::size_t points = 31);

}  // namespace gdssm
