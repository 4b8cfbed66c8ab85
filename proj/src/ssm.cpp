// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/ssm.hpp"

#include <cmath>
#include <stdexcept>

namespace gdssm {

namespace {

constexpr std::size_t kColX = 0;
constexpr std::size_t kColY = 1;
constexpr std::size_t kColNext = 2;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_window_width(const GdSsmNdLayer& layer, std::span<const ContextWindow> windows) {
  for (const auto& w : windows) {
    if (w.columns.rows() != layer.width() || w.columns.cols() != 3) {
      throw std::invalid_argument("window shape " + w.columns.shape_string() +
                                  " does not match layer width " +
                                  std::to_string(layer.width()));
    }
  }
}

// Z ← Λ ⊙ Z - C Q Cᵀ
void recur(Matrix& z, const Matrix& lambda, const Matrix& c, const Matrix& q) {
  const Matrix b = weighted_outer_sum(c, q);
  auto zd = z.data();
  const auto ld = lambda.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < zd.size(); ++i) zd[i] = ld[i] * zd[i] - bd[i];
}

}  // namespace

Matrix weighted_outer_sum(const Matrix& c, const Matrix& q) {
  if (c.cols() != q.rows() || q.rows() != q.cols()) {
    throw std::invalid_argument("weighted_outer_sum: C " + c.shape_string() + " and Q " +
                                q.shape_string() + " are incompatible");
  }
  return mat_mul(mat_mul(c, q), c.transposed());
}

GdSsm1dParams construct_1d(std::size_t f, double eta, std::size_t n) {
  if (f == 0 || n == 0) throw std::invalid_argument("construct_1d: f and n must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("construct_1d: eta must be > 0");
  GdSsm1dParams p;
  p.psi = Matrix(f, 2 * f);
  p.theta = Matrix(f, 2 * f);
  for (std::size_t k = 0; k < f; ++k) {
    p.psi(k, k) = 1.0;
    p.theta(k, f + k) = 1.0;
  }
  p.lambda = Vector(f, 1.0);
  p.beta = -eta / static_cast<double>(n);
  return p;
}

Vector forward_1d(const GdSsm1dParams& params, std::span<const Vector> c_seq) {
  const std::size_t f = params.lambda.size();
  Vector z(f, 0.0);
  Vector out;
  out.reserve(c_seq.size());
  for (const auto& c : c_seq) {
    if (c.size() != params.psi.cols())
      throw std::invalid_argument("forward_1d: token length " + std::to_string(c.size()) +
                                  " does not match Ψ " + params.psi.shape_string());
    const Vector in = mat_vec(params.psi, c);
    for (std::size_t k = 0; k < f; ++k) z[k] = params.lambda[k] * z[k] - in[k];
    out.push_back(params.beta * dot(z, mat_vec(params.theta, c)));
  }
  return out;
}

GdSsmNdLayer construct_nd(std::size_t f, double eta, std::size_t n, bool dual_head) {
  if (f == 0 || n == 0) throw std::invalid_argument("construct_nd: f and n must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("construct_nd: eta must be > 0");
  GdSsmNdLayer layer;
  layer.emb_x = Matrix::identity(f);
  layer.emb_y = Matrix::identity(f);
  layer.q_in = Matrix(3, 3);
  layer.q_in(kColY, kColX) = 1.0;
  layer.q_out = Vector(3, 0.0);
  layer.q_out[kColNext] = 1.0;
  layer.lambda = Matrix(f, f, 1.0);
  layer.beta = -eta / static_cast<double>(n);
  if (dual_head) {
    layer.q_dual = Matrix(3, 3);
    (*layer.q_dual)(kColX, kColX) = 1.0;
  }
  return layer;
}

Matrix embed_window(const GdSsmNdLayer& layer, const ContextWindow& window) {
  Matrix c(layer.width(), 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const Matrix& emb = window.kinds[j] == TokenKind::kX ? layer.emb_x : layer.emb_y;
    c.set_col(j, mat_vec(emb, window.columns.col(j)));
  }
  return c;
}

std::vector<Vector> forward_nd(const GdSsmNdLayer& layer, std::span<const ContextWindow> windows) {
  check_window_width(layer, windows);
  const std::size_t f = layer.width();
  Matrix z(f, f);
  std::vector<Vector> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const Matrix c = embed_window(layer, w);
    recur(z, layer.lambda, c, layer.q_in);
    Vector o = mat_vec(z, mat_vec(c, layer.q_out));
    for (auto& v : o) v *= layer.beta;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<GdSsmNdLayer> construct_multilayer(std::size_t f, double eta, std::size_t n,
                                               std::size_t layers) {
  if (layers == 0) throw std::invalid_argument("construct_multilayer: need at least one layer");
  return std::vector<GdSsmNdLayer>(layers, construct_nd(f, eta, n, true));
}

std::vector<Vector> forward_multilayer(std::span<const GdSsmNdLayer> layers,
                                       std::span<const ContextWindow> windows,
                                       const Matrix& w0, double l2_lambda) {
  if (layers.empty()) throw std::invalid_argument("forward_multilayer: no layers");
  const std::size_t f = layers.front().width();
  if (w0.rows() != f || w0.cols() != f)
    throw std::invalid_argument("forward_multilayer: w0 is " + w0.shape_string() +
                                ", expected " + std::to_string(f) + "x" + std::to_string(f));
  for (const auto& layer : layers) {
    if (!layer.q_dual) throw std::invalid_argument("forward_multilayer: layer lacks a dual head");
    if (layer.width() != f) throw std::invalid_argument("forward_multilayer: mixed layer widths");
    check_window_width(layer, windows);
  }
  const double n = static_cast<double>(windows.size());

  std::vector<Matrix> z(layers.size(), Matrix(f, f));
  std::vector<Matrix> z_dual(layers.size(), Matrix(f, f));
  std::vector<Vector> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    Matrix c_last;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Matrix c = embed_window(layers[l], w);
      recur(z[l], layers[l].lambda, c, layers[l].q_in);
      recur(z_dual[l], layers[l].lambda, c, *layers[l].q_dual);
      if (l + 1 == layers.size()) c_last = c;
    }
    Matrix wt = w0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Matrix update = z[l] - mat_mul(wt, z_dual[l]);
      if (l2_lambda != 0.0) update += (2.0 * n * l2_lambda) * wt;
      update *= layers[l].beta;
      wt += update;
    }
    out.push_back(mat_vec(wt, mat_vec(c_last, layers.back().q_out)));
  }
  return out;
}

Vector GluHead::apply(std::span<const double> z) const {
  const Vector a = mat_vec(w1, z);
  Vector p = mat_vec(w2, z);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = a[k] * sigmoid(p[k] + b2[k]);
  return mat_vec(w_out, p);
}

GluHead GluHead::identity(std::size_t f, double gate_bias) {
  GluHead g;
  g.w1 = Matrix::identity(f);
  g.w2 = Matrix(f, f);
  g.w_out = Matrix::identity(f);
  g.b2 = Vector(f, gate_bias);
  return g;
}

std::vector<Vector> forward_nonlinear(const GdSsmNdLayer& layer, const GluHead& glu,
                                      std::span<const ContextWindow> windows,
                                      GluPlacement placement) {
  check_window_width(layer, windows);
  const std::size_t f = layer.width();
  Matrix z(f, f);
  std::vector<Vector> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const Matrix c = embed_window(layer, w);
    recur(z, layer.lambda, c, layer.q_in);
    const Vector u = mat_vec(c, layer.q_out);
    Vector o;
    if (placement == GluPlacement::kState) {
      Matrix g(f, f);
      for (std::size_t i = 0; i < f; ++i) {
        const Vector row = glu.apply(z.row(i));
        std::copy(row.begin(), row.end(), g.row(i).begin());
      }
      o = mat_vec(g, u);
      for (auto& v : o) v *= layer.beta;
    } else {
      Vector lin = mat_vec(z, u);
      for (auto& v : lin) v *= layer.beta;
      o = glu.apply(lin);
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace gdssm
