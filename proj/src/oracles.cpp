// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace gdssm {

namespace {

double apply_g(Nonlinearity g, double v) { return g == Nonlinearity::kSine ? std::sin(v) : v; }
double apply_dg(Nonlinearity g, double v) { return g == Nonlinearity::kSine ? std::cos(v) : 1.0; }

}  // namespace

Vector ImplicitLinearModel::predict(std::span<const double> x, Nonlinearity g) const {
  Vector y = mat_vec(w, x);
  for (auto& v : y) v = apply_g(g, v);
  return y;
}

Matrix loss_gradient(const RegressionTask& task, const Matrix& w, Nonlinearity g) {
  const std::size_t n = task.n_context;
  Matrix grad(w.rows(), w.cols());
  Vector r(w.rows());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector pre = mat_vec(w, task.xs[i]);
    for (std::size_t k = 0; k < r.size(); ++k)
      r[k] = (apply_g(g, pre[k]) - task.ys[i][k]) * apply_dg(g, pre[k]);
    add_outer(grad, 1.0, r, task.xs[i]);
  }
  grad *= 1.0 / static_cast<double>(n);
  return grad;
}

double context_loss(const RegressionTask& task, const Matrix& w, Nonlinearity g,
                    double l2_lambda) {
  const std::size_t n = task.n_context;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector pre = mat_vec(w, task.xs[i]);
    for (std::size_t k = 0; k < pre.size(); ++k) {
      const double e = apply_g(g, pre[k]) - task.ys[i][k];
      s += e * e;
    }
  }
  const double fro = frobenius_norm(w);
  return s / (2.0 * static_cast<double>(n)) + l2_lambda * fro * fro;
}

ImplicitLinearModel gd_fit(const RegressionTask& task, const GdConfig& cfg,
                           const std::optional<Matrix>& w0) {
  if (cfg.steps == 0) throw std::invalid_argument("gd_fit: steps must be >= 1");
  ImplicitLinearModel model;
  model.eta = cfg.eta;
  model.n = task.n_context;
  model.w = w0 ? *w0 : Matrix(task.f_out, task.f_in);
  if (model.w.rows() != task.f_out || model.w.cols() != task.f_in)
    throw std::invalid_argument("gd_fit: w0 shape " + model.w.shape_string() +
                                " does not match task " + std::to_string(task.f_out) + "x" +
                                std::to_string(task.f_in));
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Matrix grad = loss_gradient(task, model.w, cfg.nonlinearity);
    if (cfg.l2_lambda != 0.0) {
      Matrix reg = model.w;
      reg *= 2.0 * cfg.l2_lambda;
      grad += reg;
    }
    grad *= cfg.eta;
    model.w -= grad;
  }
  return model;
}

Vector gd_predict(const RegressionTask& task, const GdConfig& cfg,
                  const std::optional<Matrix>& w0) {
  GdConfig linear = cfg;
  linear.nonlinearity = Nonlinearity::kNone;
  return gd_fit(task, linear, w0).predict(task.query_x());
}

Vector nonlinear_gd_predict(const RegressionTask& task, const GdConfig& cfg,
                            const std::optional<Matrix>& w0) {
  return gd_fit(task, cfg, w0).predict(task.query_x(), cfg.nonlinearity);
}

NewtonResult newton_predict(const RegressionTask& task, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("newton_predict: ridge must be >= 0");
  const auto fi = static_cast<Eigen::Index>(task.f_in);
  const auto fo = static_cast<Eigen::Index>(task.f_out);
  const auto n = static_cast<Eigen::Index>(task.n_context);
  // Least squares on the stacked system [X; √ridge·I] Wᵀ = [Y; 0], whose
  // normal equations are (S_xx + ridge I) Wᵀ = S_yxᵀ. Solving it directly
  // avoids squaring the condition number of X.
  const Eigen::Index rows = ridge > 0.0 ? n + fi : n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, fi);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, fo);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) = Eigen::Map<const Eigen::RowVectorXd>(task.xs[i].data(), fi);
    b.row(i) = Eigen::Map<const Eigen::RowVectorXd>(task.ys[i].data(), fo);
  }
  if (ridge > 0.0) a.bottomRows(fi).diagonal().setConstant(std::sqrt(ridge));

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::MatrixXd wt = cod.solve(b);

  NewtonResult result;
  result.used_pseudo_inverse = cod.rank() < fi;
  result.w = Matrix(task.f_out, task.f_in);
  for (Eigen::Index r = 0; r < fo; ++r)
    for (Eigen::Index c = 0; c < fi; ++c) result.w(r, c) = wt(c, r);
  result.prediction = mat_vec(result.w, task.query_x());
  return result;
}

Vector lsa_predict(std::span<const Vector> tokens, const LsaWeights& weights) {
  if (tokens.empty()) throw std::invalid_argument("lsa_predict: empty token sequence");
  if (weights.w_k.rows() != tokens.front().size() || weights.w_q.rows() != tokens.front().size() ||
      weights.w_v.rows() != tokens.front().size() || weights.w_k.cols() != weights.w_q.cols()) {
    throw std::invalid_argument("lsa_predict: projection shapes do not match token width " +
                                std::to_string(tokens.front().size()));
  }
  Matrix z(weights.w_v.cols(), weights.w_k.cols());
  for (const auto& s : tokens) add_outer(z, 1.0, mat_t_vec(weights.w_v, s), mat_t_vec(weights.w_k, s));
  return mat_vec(z, mat_t_vec(weights.w_q, tokens.back()));
}

std::vector<Vector> lsa_tokens(const RegressionTask& task) {
  std::vector<Vector> tokens;
  tokens.reserve(task.n_context + 1);
  for (std::size_t i = 0; i <= task.n_context; ++i) {
    Vector s(task.f_in + task.f_out, 0.0);
    std::copy(task.xs[i].begin(), task.xs[i].end(), s.begin());
    if (i < task.n_context) std::copy(task.ys[i].begin(), task.ys[i].end(), s.begin() + task.f_in);
    tokens.push_back(std::move(s));
  }
  return tokens;
}

Vector lsa_predict(const RegressionTask& task, const LsaWeights& weights) {
  return lsa_predict(lsa_tokens(task), weights);
}

LsaWeights construct_lsa_gd(std::size_t f_in, std::size_t f_out, double eta, std::size_t n) {
  const std::size_t dim = f_in + f_out;
  LsaWeights w{Matrix(dim, f_in), Matrix(dim, f_in), Matrix(dim, f_out)};
  for (std::size_t k = 0; k < f_in; ++k) {
    w.w_k(k, k) = 1.0;
    w.w_q(k, k) = 1.0;
  }
  const double scale = eta / static_cast<double>(n);
  for (std::size_t k = 0; k < f_out; ++k) w.w_v(f_in + k, k) = scale;
  return w;
}

}  // namespace gdssm
