// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Reverse mode through each variant's query output. Only the last output
// enters the loss, so the backward pass seeds the final state and walks the
// recurrence back to the first window.

#include <cmath>
#include <sstream>

#include "gdssm/training.hpp"

namespace gdssm {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Embedded windows and the states Z_0 = 0, Z_1..Z_T of one head.
struct Trace {
  std::vector<Matrix> z;
};

std::vector<Matrix> embed_all(const GdSsmNdLayer& layer, std::span<const ContextWindow> windows) {
  std::vector<Matrix> c;
  c.reserve(windows.size());
  for (const auto& w : windows) c.push_back(embed_window(layer, w));
  return c;
}

Trace run_head(const std::vector<Matrix>& c, const Matrix& lambda, const Matrix& q) {
  const std::size_t f = lambda.rows();
  Trace tr;
  tr.z.reserve(c.size() + 1);
  tr.z.emplace_back(f, f);
  for (const auto& ct : c) {
    const Matrix b = weighted_outer_sum(ct, q);
    Matrix z = hadamard(lambda, tr.z.back());
    z -= b;
    tr.z.push_back(std::move(z));
  }
  return tr;
}

// g holds ∂L/∂Z_T on entry. Accumulates into d_lambda, d_q and d_c.
void head_backward(const Trace& tr, const std::vector<Matrix>& c, const Matrix& lambda,
                   const Matrix& q, Matrix g, Matrix& d_lambda, Matrix& d_q,
                   std::vector<Matrix>& d_c) {
  const Matrix qt = q.transposed();
  for (std::size_t t = c.size(); t-- > 0;) {
    d_lambda += hadamard(g, tr.z[t]);
    // Z_t = Λ⊙Z_{t-1} - C Q Cᵀ
    const Matrix gc = mat_mul(g, c[t]);
    const Matrix gtc = mat_mul(g.transposed(), c[t]);
    d_q -= mat_mul(c[t].transposed(), gc);
    d_c[t] -= mat_mul(gc, qt);
    d_c[t] -= mat_mul(gtc, q);
    g = hadamard(lambda, g);
  }
}

void embedding_backward(std::span<const ContextWindow> windows, const std::vector<Matrix>& d_c,
                        GdSsmNdLayer& grad) {
  for (std::size_t t = 0; t < windows.size(); ++t) {
    for (std::size_t j = 0; j < 3; ++j) {
      Matrix& d_emb = windows[t].kinds[j] == TokenKind::kX ? grad.emb_x : grad.emb_y;
      add_outer(d_emb, 1.0, d_c[t].col(j), windows[t].columns.col(j));
    }
  }
}

struct GluCache {
  Vector a;  // w1 z
  Vector s;  // σ(w2 z + b2)
  Vector m;  // a ⊙ s
};

Vector glu_forward(const GluHead& glu, std::span<const double> z, GluCache& cache) {
  cache.a = mat_vec(glu.w1, z);
  Vector p = mat_vec(glu.w2, z);
  cache.s.resize(p.size());
  cache.m.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    cache.s[k] = sigmoid(p[k] + glu.b2[k]);
    cache.m[k] = cache.a[k] * cache.s[k];
  }
  return mat_vec(glu.w_out, cache.m);
}

// Returns ∂L/∂z.
Vector glu_backward(const GluHead& glu, std::span<const double> z, const GluCache& cache,
                    std::span<const double> d_out, GluHead& grad) {
  add_outer(grad.w_out, 1.0, d_out, cache.m);
  const Vector dm = mat_t_vec(glu.w_out, d_out);
  Vector da(dm.size());
  Vector dp(dm.size());
  for (std::size_t k = 0; k < dm.size(); ++k) {
    da[k] = dm[k] * cache.s[k];
    dp[k] = dm[k] * cache.a[k] * cache.s[k] * (1.0 - cache.s[k]);
    grad.b2[k] += dp[k];
  }
  add_outer(grad.w1, 1.0, da, z);
  add_outer(grad.w2, 1.0, dp, z);
  Vector dz = mat_t_vec(glu.w1, da);
  const Vector dz2 = mat_t_vec(glu.w2, dp);
  for (std::size_t i = 0; i < dz.size(); ++i) dz[i] += dz2[i];
  return dz;
}

// Squared error and ∂/∂o scaled by `scale`; rows beyond the target are padding.
double residual_seed(std::span<const double> o, std::span<const double> y, double scale, Vector& go) {
  go.assign(o.size(), 0.0);
  double loss = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double e = o[r] - y[r];
    loss += e * e;
    go[r] = scale * 2.0 * e;
  }
  return loss;
}

double task_1d(const Model& model, const RegressionTask& task, double scale, Model& grad) {
  const auto& p = model.p1d;
  const std::size_t f = p.lambda.size();
  const auto tokens = model_tokens_1d(model, task);
  std::vector<Vector> z(tokens.size() + 1, Vector(f, 0.0));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Vector in = mat_vec(p.psi, tokens[t]);
    for (std::size_t k = 0; k < f; ++k) z[t + 1][k] = p.lambda[k] * z[t][k] - in[k];
  }
  const bool gated = model.spec.ablation.output_gating;
  const Vector& c_last = tokens.back();
  const Vector v = gated ? mat_vec(p.theta, c_last) : model.skip;
  const Vector& z_last = z.back();
  const double o = p.beta * dot(z_last, v);

  Vector go;
  const double loss = residual_seed(std::span(&o, 1), task.query_y(), scale, go);
  auto& g = grad.p1d;
  g.beta += go[0] * dot(z_last, v);
  Vector dv(f);
  Vector dz(f);
  for (std::size_t k = 0; k < f; ++k) {
    dv[k] = go[0] * p.beta * z_last[k];
    dz[k] = go[0] * p.beta * v[k];
  }
  if (gated) {
    add_outer(g.theta, 1.0, dv, c_last);
  } else {
    for (std::size_t k = 0; k < f; ++k) grad.skip[k] += dv[k];
  }
  for (std::size_t t = tokens.size(); t-- > 0;) {
    add_outer(g.psi, -1.0, dz, tokens[t]);
    for (std::size_t k = 0; k < f; ++k) {
      g.lambda[k] += dz[k] * z[t][k];
      dz[k] *= p.lambda[k];
    }
  }
  return loss;
}

double task_nd(const Model& model, const RegressionTask& task, double scale, Model& grad) {
  const auto& layer = model.layers.front();
  auto& gl = grad.layers.front();
  const std::size_t f = layer.width();
  const auto windows = model_windows(model, task);
  const auto c = embed_all(layer, windows);
  const Trace tr = run_head(c, layer.lambda, layer.q_in);
  const Matrix& z_last = tr.z.back();
  const Matrix& c_last = c.back();
  const bool gated = model.spec.ablation.output_gating;
  const Vector u = gated ? mat_vec(c_last, layer.q_out) : model.skip;
  const bool nonlinear = model.spec.variant == Variant::kNonlinear;
  const bool state_side = nonlinear && model.spec.glu_placement == GluPlacement::kState;

  // Readout r = G(Z) u with G the identity for the plain layer.
  Matrix g_state;
  std::vector<GluCache> row_cache;
  if (state_side) {
    g_state = Matrix(f, f);
    row_cache.resize(f);
    for (std::size_t i = 0; i < f; ++i) {
      const Vector row = glu_forward(model.glu, z_last.row(i), row_cache[i]);
      std::copy(row.begin(), row.end(), g_state.row(i).begin());
    }
  }
  const Matrix& readout = state_side ? g_state : z_last;
  const Vector r = mat_vec(readout, u);
  Vector lin = r;
  for (auto& x : lin) x *= layer.beta;
  GluCache out_cache;
  const bool output_side = nonlinear && !state_side;
  const Vector o = output_side ? glu_forward(model.glu, lin, out_cache) : lin;

  Vector go;
  const double loss = residual_seed(o, task.query_y(), scale, go);
  const Vector d_lin = output_side ? glu_backward(model.glu, lin, out_cache, go, grad.glu) : go;

  gl.beta += dot(d_lin, r);
  Vector d_r = d_lin;
  for (auto& x : d_r) x *= layer.beta;
  Matrix d_readout(f, f);
  add_outer(d_readout, 1.0, d_r, u);
  const Vector du = mat_t_vec(readout, d_r);

  std::vector<Matrix> d_c(c.size(), Matrix(f, 3));
  if (gated) {
    const Vector dq = mat_t_vec(c_last, du);
    for (std::size_t k = 0; k < 3; ++k) gl.q_out[k] += dq[k];
    add_outer(d_c.back(), 1.0, du, layer.q_out);
  } else {
    for (std::size_t k = 0; k < f; ++k) grad.skip[k] += du[k];
  }

  Matrix d_z(f, f);
  if (state_side) {
    for (std::size_t i = 0; i < f; ++i) {
      const Vector dz_row = glu_backward(model.glu, z_last.row(i), row_cache[i], d_readout.row(i), grad.glu);
      std::copy(dz_row.begin(), dz_row.end(), d_z.row(i).begin());
    }
  } else {
    d_z = std::move(d_readout);
  }
  head_backward(tr, c, layer.lambda, layer.q_in, std::move(d_z), gl.lambda, gl.q_in, d_c);
  embedding_backward(windows, d_c, gl);
  return loss;
}

double task_multilayer(const Model& model, const RegressionTask& task, double scale, Model& grad) {
  const std::size_t n_layers = model.layers.size();
  const std::size_t f = model.layers.front().width();
  const auto windows = model_windows(model, task);

  std::vector<std::vector<Matrix>> c(n_layers);
  std::vector<Trace> tr(n_layers);
  std::vector<Trace> tr_dual(n_layers);
  std::vector<Matrix> w(n_layers + 1, Matrix(f, f));  // w[0] = W_0 = 0
  std::vector<Matrix> m(n_layers);                    // Z - W_{l-1} Z̃
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layers[l];
    c[l] = embed_all(layer, windows);
    tr[l] = run_head(c[l], layer.lambda, layer.q_in);
    tr_dual[l] = run_head(c[l], layer.lambda, *layer.q_dual);
    m[l] = tr[l].z.back() - mat_mul(w[l], tr_dual[l].z.back());
    w[l + 1] = w[l] + layer.beta * m[l];
  }
  const auto& last = model.layers.back();
  const Matrix& c_last = c.back().back();
  const Vector u = mat_vec(c_last, last.q_out);
  const Vector o = mat_vec(w.back(), u);

  Vector go;
  const double loss = residual_seed(o, task.query_y(), scale, go);

  auto& g_last = grad.layers.back();
  std::vector<std::vector<Matrix>> d_c(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) d_c[l].assign(windows.size(), Matrix(f, 3));
  const Vector du = mat_t_vec(w.back(), go);
  const Vector dq = mat_t_vec(c_last, du);
  for (std::size_t k = 0; k < 3; ++k) g_last.q_out[k] += dq[k];
  add_outer(d_c.back().back(), 1.0, du, last.q_out);

  Matrix d_w(f, f);
  add_outer(d_w, 1.0, go, u);
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = model.layers[l];
    auto& gl = grad.layers[l];
    double db = 0.0;
    const auto dwd = d_w.data();
    const auto md = m[l].data();
    for (std::size_t i = 0; i < dwd.size(); ++i) db += dwd[i] * md[i];
    gl.beta += db;
    const Matrix d_m = layer.beta * d_w;
    Matrix d_zdual = mat_mul(w[l].transposed(), d_m);
    d_zdual *= -1.0;
    // W_l = W_{l-1} + β (Z - W_{l-1} Z̃)
    d_w -= mat_mul(d_m, tr_dual[l].z.back().transposed());
    head_backward(tr[l], c[l], layer.lambda, layer.q_in, d_m, gl.lambda, gl.q_in, d_c[l]);
    head_backward(tr_dual[l], c[l], layer.lambda, *layer.q_dual, std::move(d_zdual), gl.lambda,
                  *gl.q_dual, d_c[l]);
    embedding_backward(windows, d_c[l], gl);
  }
  return loss;
}

std::string param_norms(const Model& model) {
  std::ostringstream os;
  for (const auto& v : param_views(model)) os << ' ' << v.name << '=' << format_double(norm2(v.values));
  return os.str();
}

}  // namespace

LossAndGrads loss_and_grads(const Model& model, const std::vector<RegressionTask>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  LossAndGrads out;
  out.grads = zeros_like(model);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& task : batch) {
    switch (model.spec.variant) {
      case Variant::k1d: total += task_1d(model, task, scale, out.grads); break;
      case Variant::kNd:
      case Variant::kNonlinear: total += task_nd(model, task, scale, out.grads); break;
      case Variant::kMultilayer: total += task_multilayer(model, task, scale, out.grads); break;
    }
  }
  out.loss = total * scale;
  if (!std::isfinite(out.loss))
    throw NonFiniteLoss("non-finite loss " + format_double(out.loss) + "; parameter norms:" + param_norms(model));
  return out;
}

double batch_loss(const Model& model, const std::vector<RegressionTask>& batch) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  double total = 0.0;
  for (const auto& task : batch) {
    const Vector o = predict(model, task);
    for (std::size_t r = 0; r < o.size(); ++r) {
      const double e = o[r] - task.query_y()[r];
      total += e * e;
    }
  }
  return total / static_cast<double>(batch.size());
}

GradCheckReport grad_check(const Model& model, const std::vector<RegressionTask>& batch, double h,
                           double floor) {
  const LossAndGrads lg = loss_and_grads(model, batch);
  GradCheckReport report;
  Model probe = model;
  auto probe_views = param_views(probe);
  const auto grad_views = param_views(lg.grads);
  for (std::size_t vi = 0; vi < probe_views.size(); ++vi) {
    auto& view = probe_views[vi];
    for (std::size_t i = 0; i < view.values.size(); ++i) {
      const double x0 = view.values[i];
      view.values[i] = x0 + h;
      const double plus = batch_loss(probe, batch);
      view.values[i] = x0 - h;
      const double minus = batch_loss(probe, batch);
      view.values[i] = x0;
      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = grad_views[vi].values[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = rel;
        report.worst_param = view.name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace gdssm
