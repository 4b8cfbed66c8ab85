// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// GD-SSM layers: a diagonal linear recurrence whose input is gated by a
// sliding window of tokens and whose readout is gated by the same window.
//
// Sign convention. Every state in this file accumulates the *negated* gated
// input,
//
//   z_t = λ ⊙ z_{t-1} - Ψ c_t                (1-D)
//   Z_t = Λ ⊙ Z_{t-1} - C_t Q C_tᵀ           (N-D)
//
// so with the constructed gates (Ψ c_t = x_t y_t, Q selecting y xᵀ) the
// state is the accumulated residual Σ (W₀ x_t - y_t) x_tᵀ at W₀ = 0, and the
// readout scale β = -η/N turns it into the one-step GD prediction. Trained
// models absorb the sign into their gates, so the convention only matters
// for the constructions.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gdssm/numerics.hpp"
#include "gdssm/tasks.hpp"

namespace gdssm {

// Σ_{i,j} Q_ij C[:,i] ⊗ C[:,j], computed as C Q Cᵀ.
Matrix weighted_outer_sum(const Matrix& c, const Matrix& q);

struct GdSsm1dParams {
  Matrix psi;     // f x 2f input gate
  Matrix theta;   // f x 2f output gate
  Vector lambda;  // f, diagonal recurrence
  double beta = 0.0;
};

// Ψ = [I | 0], Θ = [0 | I], λ = 1, β = -η/N.
GdSsm1dParams construct_1d(std::size_t f, double eta, std::size_t n);

// Outputs o_1..o_T for tokens c_1..c_T, o_t = β z_tᵀ Θ c_t. On constructed
// context vectors o_t is one GD step at fixed scale η/N applied to the first
// t pairs, and o_N is the query prediction.
Vector forward_1d(const GdSsm1dParams& params, std::span<const Vector> c_seq);

struct GdSsmNdLayer {
  Matrix emb_x;   // f x f
  Matrix emb_y;   // f x f
  Matrix q_in;    // 3 x 3 input gate Q
  Vector q_out;   // 3, output gate q
  Matrix lambda;  // f x f elementwise decay
  double beta = 0.0;
  std::optional<Matrix> q_dual;  // 3 x 3 second head Q̃ (multi-step layers)

  std::size_t width() const { return emb_x.rows(); }
};

// Identity embeddings, Q = e_y e_xᵀ (the single 1 at row y, column x),
// q = e_{x_next}, Λ = 1, β = -η/N. With dual_head the second head is
// Q̃ = e_x e_xᵀ, which accumulates -Σ x xᵀ.
GdSsmNdLayer construct_nd(std::size_t f, double eta, std::size_t n, bool dual_head = false);

// Applies the layer's x / y embedding to each window column by token kind.
Matrix embed_window(const GdSsmNdLayer& layer, const ContextWindow& window);

// Outputs o_t = β Z_t C_t q for every window; the last one is the query
// prediction.
std::vector<Vector> forward_nd(const GdSsmNdLayer& layer, std::span<const ContextWindow> windows);

// L dual-head layers, all constructed for the same η.
std::vector<GdSsmNdLayer> construct_multilayer(std::size_t f, double eta, std::size_t n,
                                               std::size_t layers);

// Each layer l keeps two states, Z (head Q) and Z̃ (head Q̃), and updates the
// implicit weights
//
//   W_l = W_{l-1} + β_l (Z - W_{l-1} Z̃ + 2 N l2 W_{l-1}),
//
// which for the constructed layers is W_{l-1} - η((1/N) Σ (W_{l-1} x - y) xᵀ
// + 2 l2 W_{l-1}). Output t is W_L(t) C^L_t q_L with states taken after
// window t; N is windows.size().
std::vector<Vector> forward_multilayer(std::span<const GdSsmNdLayer> layers,
                                       std::span<const ContextWindow> windows,
                                       const Matrix& w0, double l2_lambda = 0.0);

// w_out ((w1 z) ⊙ σ(w2 z + b2)).
struct GluHead {
  Matrix w1;     // h x f
  Matrix w2;     // h x f
  Matrix w_out;  // f x h
  Vector b2;     // h

  Vector apply(std::span<const double> z) const;

  // w1 = w_out = I, w2 = 0, b2 = gate_bias: σ(gate_bias) ≈ 1, so the head is
  // the identity to within σ(-gate_bias) relative.
  static GluHead identity(std::size_t f, double gate_bias = 40.0);
};

enum class GluPlacement { kState, kOutput };

// kState: each row of Z_t passes through the head before the output gate,
// o_t = β G(Z_t) C_t q. kOutput: o_t = G(β Z_t C_t q).
std::vector<Vector> forward_nonlinear(const GdSsmNdLayer& layer, const GluHead& glu,
                                      std::span<const ContextWindow> windows,
                                      GluPlacement placement = GluPlacement::kState);

}  // namespace gdssm
