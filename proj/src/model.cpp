// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace gdssm {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::k1d: return "1d";
    case Variant::kNd: return "nd";
    case Variant::kMultilayer: return "multilayer";
    case Variant::kNonlinear: return "nonlinear";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "1d") return Variant::k1d;
  if (s == "nd") return Variant::kNd;
  if (s == "multilayer") return Variant::kMultilayer;
  if (s == "nonlinear") return Variant::kNonlinear;
  throw std::invalid_argument("unknown variant '" + s + "' (expected 1d|nd|multilayer|nonlinear)");
}

std::string to_string(GluPlacement p) { return p == GluPlacement::kState ? "state" : "output"; }

GluPlacement glu_placement_from_string(const std::string& s) {
  if (s == "state") return GluPlacement::kState;
  if (s == "output") return GluPlacement::kOutput;
  throw std::invalid_argument("unknown GLU placement '" + s + "' (expected state|output)");
}

std::string Ablation::label() const {
  if (!any()) return "full";
  std::string s;
  auto add = [&](const char* part) {
    if (!s.empty()) s += "+";
    s += part;
  };
  if (!input_construction) add("no_input_construction");
  if (!sliding_window) add("no_sliding_window");
  if (!output_gating) add("no_output_gating");
  return s;
}

namespace {

void check_spec(const ModelSpec& spec) {
  if (spec.f == 0 || spec.n_context == 0)
    throw std::invalid_argument("model spec: f and n_context must be >= 1");
  if (spec.variant == Variant::kMultilayer && spec.layers == 0)
    throw std::invalid_argument("model spec: multilayer needs layers >= 1");
  if (!spec.ablation.input_construction && spec.variant != Variant::k1d)
    throw std::invalid_argument("model spec: input construction ablation applies to the 1d variant");
  if (!spec.ablation.sliding_window && spec.variant != Variant::kNd)
    throw std::invalid_argument("model spec: sliding window ablation applies to the nd variant");
  if (!spec.ablation.output_gating && spec.variant != Variant::k1d &&
      spec.variant != Variant::kNd)
    throw std::invalid_argument("model spec: output gating ablation applies to the 1d and nd variants");
}

Matrix normal_matrix(RngStream& rng, std::size_t r, std::size_t c, double std_dev) {
  Matrix m(r, c, rng_draw(rng, Distribution::kStandardNormal, r * c));
  m *= std_dev;
  return m;
}

Vector normal_vector(RngStream& rng, std::size_t n, double std_dev) {
  Vector v = rng_draw(rng, Distribution::kStandardNormal, n);
  for (auto& x : v) x *= std_dev;
  return v;
}

GdSsmNdLayer random_layer(std::size_t f, bool dual, RngStream& rng, double init_std) {
  GdSsmNdLayer layer;
  layer.emb_x = normal_matrix(rng, f, f, init_std);
  layer.emb_y = normal_matrix(rng, f, f, init_std);
  layer.q_in = normal_matrix(rng, 3, 3, init_std);
  layer.q_out = normal_vector(rng, 3, init_std);
  layer.lambda = Matrix(f, f, 1.0);
  layer.beta = -0.1;
  if (dual) layer.q_dual = normal_matrix(rng, 3, 3, init_std);
  return layer;
}

std::size_t glu_width(const ModelSpec& spec) { return spec.glu_hidden ? spec.glu_hidden : spec.f; }

// Final state of a single N-D layer.
Matrix final_state(const GdSsmNdLayer& layer, std::span<const ContextWindow> windows,
                   Matrix* last_c = nullptr) {
  const std::size_t f = layer.width();
  Matrix z(f, f);
  Matrix c;
  for (const auto& w : windows) {
    c = embed_window(layer, w);
    const Matrix b = weighted_outer_sum(c, layer.q_in);
    auto zd = z.data();
    const auto ld = layer.lambda.data();
    const auto bd = b.data();
    for (std::size_t i = 0; i < zd.size(); ++i) zd[i] = ld[i] * zd[i] - bd[i];
  }
  if (last_c) *last_c = c;
  return z;
}

Vector final_state_1d(const GdSsm1dParams& p, std::span<const Vector> tokens) {
  Vector z(p.lambda.size(), 0.0);
  for (const auto& c : tokens) {
    const Vector in = mat_vec(p.psi, c);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = p.lambda[k] * z[k] - in[k];
  }
  return z;
}

Vector trim(Vector v, std::size_t n) {
  v.resize(n);
  return v;
}

}  // namespace

Model init_model(const ModelSpec& spec, RngStream& rng, double init_std) {
  check_spec(spec);
  Model m;
  m.spec = spec;
  const std::size_t f = spec.f;
  switch (spec.variant) {
    case Variant::k1d:
      m.p1d.psi = normal_matrix(rng, f, 2 * f, init_std);
      m.p1d.theta = normal_matrix(rng, f, 2 * f, init_std);
      m.p1d.lambda = Vector(f, 1.0);
      m.p1d.beta = -0.1;
      break;
    case Variant::kNd:
    case Variant::kNonlinear:
      m.layers.push_back(random_layer(f, false, rng, init_std));
      break;
    case Variant::kMultilayer:
      for (std::size_t l = 0; l < spec.layers; ++l) m.layers.push_back(random_layer(f, true, rng, init_std));
      break;
  }
  if (spec.variant == Variant::kNonlinear) {
    const std::size_t h = glu_width(spec);
    m.glu.w1 = normal_matrix(rng, h, f, 1.0 / std::sqrt(double(f)));
    m.glu.w2 = normal_matrix(rng, h, f, 1.0 / std::sqrt(double(f)));
    m.glu.w_out = normal_matrix(rng, f, h, 1.0 / std::sqrt(double(h)));
    m.glu.b2 = Vector(h, 0.0);
  }
  if (!spec.ablation.output_gating) m.skip = normal_vector(rng, f, init_std);
  return m;
}

Model constructed_model(const ModelSpec& spec, double eta) {
  check_spec(spec);
  if (spec.ablation.any()) throw std::invalid_argument("constructed_model: ablated models have no construction");
  Model m;
  m.spec = spec;
  switch (spec.variant) {
    case Variant::k1d:
      m.p1d = construct_1d(spec.f, eta, spec.n_context);
      break;
    case Variant::kNd:
      m.layers.push_back(construct_nd(spec.f, eta, spec.n_context));
      break;
    case Variant::kMultilayer:
      m.layers = construct_multilayer(spec.f, eta, spec.n_context, spec.layers);
      break;
    case Variant::kNonlinear:
      m.layers.push_back(construct_nd(spec.f, eta, spec.n_context));
      if (glu_width(spec) != spec.f)
        throw std::invalid_argument("constructed_model: identity GLU needs glu_hidden == f");
      m.glu = GluHead::identity(spec.f);
      break;
  }
  return m;
}

std::vector<Vector> model_tokens_1d(const Model& model, const RegressionTask& task) {
  return model.spec.ablation.input_construction ? context_vectors_1d(task) : raw_tokens_1d(task);
}

std::vector<ContextWindow> model_windows(const Model& model, const RegressionTask& task) {
  return model.spec.ablation.sliding_window ? interleave_and_window(task)
                                            : single_token_windows(task);
}

Vector predict(const Model& model, const RegressionTask& task) {
  const auto& spec = model.spec;
  if (spec.variant == Variant::k1d) {
    const auto tokens = model_tokens_1d(model, task);
    if (spec.ablation.output_gating) return {forward_1d(model.p1d, tokens).back()};
    const Vector z = final_state_1d(model.p1d, tokens);
    return {model.p1d.beta * dot(z, model.skip)};
  }
  const auto windows = model_windows(model, task);
  switch (spec.variant) {
    case Variant::kNd: {
      if (spec.ablation.output_gating)
        return trim(forward_nd(model.layers.front(), windows).back(), task.f_out);
      Vector o = mat_vec(final_state(model.layers.front(), windows), model.skip);
      for (auto& v : o) v *= model.layers.front().beta;
      return trim(std::move(o), task.f_out);
    }
    case Variant::kMultilayer:
      return trim(forward_multilayer(model.layers, windows, Matrix(spec.f, spec.f)).back(),
                  task.f_out);
    case Variant::kNonlinear:
      return trim(forward_nonlinear(model.layers.front(), model.glu, windows, spec.glu_placement).back(),
                  task.f_out);
    case Variant::k1d: break;
  }
  throw std::logic_error("predict: unreachable");
}

namespace {

template <typename View, typename M>
std::vector<View> collect_views(M& model) {
  std::vector<View> views;
  auto add = [&](std::string name, auto& values, std::size_t rows, std::size_t cols, ParamGroup g) {
    views.push_back(View{std::move(name), std::span(values), rows, cols, g});
  };
  auto add_matrix = [&](std::string name, auto& m, ParamGroup g) {
    views.push_back(View{std::move(name), m.data(), m.rows(), m.cols(), g});
  };
  auto add_scalar = [&](std::string name, auto& v, ParamGroup g) {
    views.push_back(View{std::move(name), std::span(&v, 1), 1, 1, g});
  };
  const auto& spec = model.spec;
  if (spec.variant == Variant::k1d) {
    add_matrix("psi", model.p1d.psi, ParamGroup::kSsm);
    add_matrix("theta", model.p1d.theta, ParamGroup::kSsm);
    add("lambda", model.p1d.lambda, model.p1d.lambda.size(), 1, ParamGroup::kSsm);
    add_scalar("beta", model.p1d.beta, ParamGroup::kSsm);
  } else {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto& layer = model.layers[l];
      const std::string p = "layer" + std::to_string(l) + ".";
      add_matrix(p + "emb_x", layer.emb_x, ParamGroup::kGlobal);
      add_matrix(p + "emb_y", layer.emb_y, ParamGroup::kGlobal);
      add_matrix(p + "q_in", layer.q_in, ParamGroup::kSsm);
      if (layer.q_dual) add_matrix(p + "q_dual", *layer.q_dual, ParamGroup::kSsm);
      add(p + "q_out", layer.q_out, 3, 1, ParamGroup::kSsm);
      add_matrix(p + "lambda", layer.lambda, ParamGroup::kSsm);
      add_scalar(p + "beta", layer.beta, ParamGroup::kSsm);
    }
  }
  if (spec.variant == Variant::kNonlinear) {
    add_matrix("glu.w1", model.glu.w1, ParamGroup::kGlobal);
    add_matrix("glu.w2", model.glu.w2, ParamGroup::kGlobal);
    add("glu.b2", model.glu.b2, model.glu.b2.size(), 1, ParamGroup::kGlobal);
    add_matrix("glu.w_out", model.glu.w_out, ParamGroup::kGlobal);
  }
  if (!spec.ablation.output_gating) add("skip", model.skip, model.skip.size(), 1, ParamGroup::kGlobal);
  return views;
}

}  // namespace

std::vector<ParamView> param_views(Model& model) { return collect_views<ParamView>(model); }

std::vector<ConstParamView> param_views(const Model& model) {
  return collect_views<ConstParamView>(model);
}

std::size_t param_count(const Model& model) {
  std::size_t n = 0;
  for (const auto& v : param_views(model)) n += v.values.size();
  return n;
}

Model zeros_like(const Model& model) {
  Model z = model;
  for (auto& v : param_views(z))
    for (auto& x : v.values) x = 0.0;
  return z;
}

Matrix fd_sensitivity(const PredictFn& predict_fn, const RegressionTask& task, double h) {
  Matrix jac(task.f_out, task.f_in);
  RegressionTask probe = task;
  for (std::size_t k = 0; k < task.f_in; ++k) {
    const double x0 = task.query_x()[k];
    probe.xs.back()[k] = x0 + h;
    const Vector plus = predict_fn(probe);
    probe.xs.back()[k] = x0 - h;
    const Vector minus = predict_fn(probe);
    probe.xs.back()[k] = x0;
    for (std::size_t r = 0; r < task.f_out; ++r) jac(r, k) = (plus[r] - minus[r]) / (2.0 * h);
  }
  return jac;
}

namespace {

Matrix analytic_1d(const Model& model, const RegressionTask& task) {
  const auto& p = model.p1d;
  const std::size_t f = p.lambda.size();
  const auto tokens = model_tokens_1d(model, task);
  const Vector z = final_state_1d(p, tokens);
  const Vector& c_last = tokens.back();
  const bool gated = model.spec.ablation.output_gating;
  const Vector v = gated ? mat_vec(p.theta, c_last) : model.skip;
  // Position of query coordinate k inside the last token.
  const std::size_t offset = model.spec.ablation.input_construction ? f : 0;
  Matrix jac(1, task.f_in);
  for (std::size_t k = 0; k < task.f_in; ++k) {
    const std::size_t pos = offset + k;
    double d = 0.0;
    for (std::size_t i = 0; i < f; ++i) {
      d -= p.psi(i, pos) * v[i];
      if (gated) d += z[i] * p.theta(i, pos);
    }
    jac(0, k) = p.beta * d;
  }
  return jac;
}

Matrix analytic_nd(const Model& model, const RegressionTask& task) {
  const auto& layer = model.layers.front();
  const std::size_t f = layer.width();
  const auto windows = model_windows(model, task);
  Matrix c;
  const Matrix z = final_state(layer, windows, &c);
  const bool gated = model.spec.ablation.output_gating;
  const Vector u = gated ? mat_vec(c, layer.q_out) : model.skip;
  // Columns of the last window that hold the query token.
  std::vector<std::size_t> query_cols;
  if (model.spec.ablation.sliding_window) {
    query_cols = {2};
  } else {
    query_cols = {0, 1, 2};
  }
  Matrix jac(task.f_out, task.f_in);
  for (std::size_t k = 0; k < task.f_in; ++k) {
    Matrix dc(f, 3);
    const Vector e = layer.emb_x.col(k);
    for (std::size_t j : query_cols) dc.set_col(j, e);
    // dZ = -(dC Q Cᵀ + C Q dCᵀ)
    const Matrix dcq = mat_mul(dc, layer.q_in);
    const Matrix cq = mat_mul(c, layer.q_in);
    Matrix dz = mat_mul(dcq, c.transposed()) + mat_mul(cq, dc.transposed());
    dz *= -1.0;
    Vector d = mat_vec(dz, u);
    if (gated) {
      const Vector du = mat_vec(dc, layer.q_out);
      const Vector zdu = mat_vec(z, du);
      for (std::size_t i = 0; i < f; ++i) d[i] += zdu[i];
    }
    for (std::size_t r = 0; r < task.f_out; ++r) jac(r, k) = layer.beta * d[r];
  }
  return jac;
}

}  // namespace

Matrix sensitivity(const Model& model, const RegressionTask& task, SensitivityMethod method,
                   double h) {
  if (method == SensitivityMethod::kCentralFd)
    return fd_sensitivity([&](const RegressionTask& t) { return predict(model, t); }, task, h);
  switch (model.spec.variant) {
    case Variant::k1d: return analytic_1d(model, task);
    case Variant::kNd: return analytic_nd(model, task);
    case Variant::kNonlinear:
      throw std::logic_error("sensitivity: the GLU readout is nonlinear; use central_fd");
    case Variant::kMultilayer:
      throw std::logic_error("sensitivity: no analytic path for stacked layers; use central_fd");
  }
  throw std::logic_error("sensitivity: unreachable");
}

}  // namespace gdssm
