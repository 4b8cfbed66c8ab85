// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// A GD-SSM of any variant as one value: the layer parameters, the optional
// GLU head and the ablation switches. This is what gets trained,
// checkpointed and evaluated.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gdssm/numerics.hpp"
#include "gdssm/ssm.hpp"
#include "gdssm/tasks.hpp"

namespace gdssm {

enum class Variant { k1d, kNd, kMultilayer, kNonlinear };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(GluPlacement p);
GluPlacement glu_placement_from_string(const std::string& s);

// Switches for the ablation study. input_construction applies to the 1-D
// variant (off: raw [x_t, y_t] tokens instead of [x_t y_t, x_{t+1}]);
// sliding_window applies to the N-D variant (off: one degenerate window per
// token); output_gating applies to both (off: the readout gate C_t q or Θ c_t
// is replaced by a learned fixed vector).
struct Ablation {
  bool input_construction = true;
  bool sliding_window = true;
  bool output_gating = true;

  bool any() const { return !input_construction || !sliding_window || !output_gating; }
  std::string label() const;
};

struct ModelSpec {
  Variant variant = Variant::kNd;
  std::size_t f = 10;          // token width (f_in for 1-D, max(f_in, f_out) otherwise)
  std::size_t n_context = 10;
  std::size_t layers = 1;      // multilayer only
  std::size_t glu_hidden = 0;  // nonlinear only; 0 means f
  GluPlacement glu_placement = GluPlacement::kState;
  Ablation ablation;
};

struct Model {
  ModelSpec spec;
  GdSsm1dParams p1d;                 // 1-D variant
  std::vector<GdSsmNdLayer> layers;  // N-D, multilayer and nonlinear variants
  GluHead glu;                       // nonlinear variant
  Vector skip;                       // fixed readout vector when output_gating is off
};

// Q, q, embeddings, Ψ and Θ ~ N(0, init_std²); λ = 1; β = -0.1. GLU weights
// ~ N(0, 1/fan_in) with zero gate bias. A larger init_std gives well-scaled
// gradients for finite-difference checks.
Model init_model(const ModelSpec& spec, RngStream& rng, double init_std = 0.02);

// Exact GD construction for the spec's variant at learning rate eta. The
// nonlinear variant gets an identity GLU head. Ablations are rejected.
Model constructed_model(const ModelSpec& spec, double eta);

// Query prediction ŷ_{N+1}, trimmed to the task's f_out.
Vector predict(const Model& model, const RegressionTask& task);

// The model's token layout for a task.
std::vector<Vector> model_tokens_1d(const Model& model, const RegressionTask& task);
std::vector<ContextWindow> model_windows(const Model& model, const RegressionTask& task);

enum class ParamGroup { kSsm, kGlobal };

struct ParamView {
  std::string name;
  std::span<double> values;
  std::size_t rows;
  std::size_t cols;
  ParamGroup group;
};

struct ConstParamView {
  std::string name;
  std::span<const double> values;
  std::size_t rows;
  std::size_t cols;
  ParamGroup group;
};

// Trainable tensors in a fixed order. Recurrence and gating tensors (Ψ, Θ,
// Q, Q̃, q, λ, β) are kSsm; embeddings, GLU and the ablation readout vector
// are kGlobal.
std::vector<ParamView> param_views(Model& model);
std::vector<ConstParamView> param_views(const Model& model);
std::size_t param_count(const Model& model);

// Same structure, every value zero.
Model zeros_like(const Model& model);

using PredictFn = std::function<Vector(const RegressionTask&)>;

enum class SensitivityMethod { kAnalytic, kCentralFd };

// ∂ŷ_{N+1}/∂x_{N+1} by symmetric differences, f_out x f_in.
Matrix fd_sensitivity(const PredictFn& predict_fn, const RegressionTask& task, double h = 1e-5);

// Analytic path for readouts that are linear in the gate input: the 1-D and
// single-layer N-D variants (including ablations). Throws std::logic_error
// for the nonlinear and multilayer variants.
Matrix sensitivity(const Model& model, const RegressionTask& task,
                   SensitivityMethod method = SensitivityMethod::kAnalytic, double h = 1e-5);

}  // namespace gdssm
