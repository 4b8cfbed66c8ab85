// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Reference predictors: explicit full-batch gradient descent on the implicit
// regression model (optionally L2-regularised or through an elementwise
// nonlinearity), one Newton step, and recurrent linear self-attention.
//
// Orientation is fixed repo-wide: the implicit model predicts ŷ = W x with
// W of shape f_out x f_in.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gdssm/numerics.hpp"
#include "gdssm/tasks.hpp"

namespace gdssm {

enum class Nonlinearity { kNone, kSine };

struct GdConfig {
  double eta = 1.0;
  std::size_t steps = 1;
  double l2_lambda = 0.0;
  Nonlinearity nonlinearity = Nonlinearity::kNone;
};

// W, learning rate and number of context samples. The loss is
// (1/2N) Σ ‖g(W x_i) - y_i‖² (+ l2 ‖W‖²) over the N context pairs.
struct ImplicitLinearModel {
  Matrix w;
  double eta = 1.0;
  std::size_t n = 0;

  Vector predict(std::span<const double> x, Nonlinearity g = Nonlinearity::kNone) const;
};

// (1/N) Σ ((g(W x_i) - y_i) ⊙ g'(W x_i)) x_iᵀ over the context pairs.
Matrix loss_gradient(const RegressionTask& task, const Matrix& w,
                     Nonlinearity g = Nonlinearity::kNone);
// (1/2N) Σ ‖g(W x_i) - y_i‖² + l2 ‖W‖²_F over the context pairs.
double context_loss(const RegressionTask& task, const Matrix& w,
                    Nonlinearity g = Nonlinearity::kNone, double l2_lambda = 0.0);

// Runs cfg.steps updates W ← W - η(∇ + 2·l2·W) from w0 (zero when absent).
ImplicitLinearModel gd_fit(const RegressionTask& task, const GdConfig& cfg,
                           const std::optional<Matrix>& w0 = std::nullopt);

// W_L x_{N+1}. Uses the linear model whatever cfg.nonlinearity says.
Vector gd_predict(const RegressionTask& task, const GdConfig& cfg,
                  const std::optional<Matrix>& w0 = std::nullopt);

// g(W_L x_{N+1}) after GD through g; cfg.nonlinearity = kNone reduces to
// gd_predict.
Vector nonlinear_gd_predict(const RegressionTask& task, const GdConfig& cfg,
                            const std::optional<Matrix>& w0 = std::nullopt);

struct NewtonResult {
  Vector prediction;
  Matrix w;
  bool used_pseudo_inverse = false;
};

// W = S_yx (S_xx + ridge·I)^{-1}. With a rank-deficient system the
// minimum-norm solution is returned and used_pseudo_inverse is set.
NewtonResult newton_predict(const RegressionTask& task, double ridge = 1e-8);

// Recurrent linear self-attention: Z ← Z + v(s) k(s)ᵀ over every token, then
// the output is Z q(s_last). Shapes: w_k, w_q are token_dim x m and w_v is
// token_dim x d, with v = w_vᵀ s, k = w_kᵀ s, q = w_qᵀ s.
struct LsaWeights {
  Matrix w_k;
  Matrix w_q;
  Matrix w_v;
};

Vector lsa_predict(std::span<const Vector> tokens, const LsaWeights& weights);

// Paired tokens [x_i; y_i] for the context and [x_{N+1}; 0] for the query.
std::vector<Vector> lsa_tokens(const RegressionTask& task);

Vector lsa_predict(const RegressionTask& task, const LsaWeights& weights);

// Keys and queries read the x block, values read (η/N)·y, so the output is
// the one-step GD prediction from W = 0.
LsaWeights construct_lsa_gd(std::size_t f_in, std::size_t f_out, double eta, std::size_t n);

}  // namespace gdssm
