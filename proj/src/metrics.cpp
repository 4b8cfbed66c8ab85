// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gdssm {

Predictor zero_predictor() {
  return {"zero", [](const RegressionTask& t) { return Vector(t.f_out, 0.0); },
          [](const RegressionTask& t) { return Matrix(t.f_out, t.f_in); }};
}

Predictor gd_predictor(const GdConfig& cfg) {
  Predictor p;
  p.tag = "gd-oracle(" + std::to_string(cfg.steps) + ")";
  if (cfg.nonlinearity == Nonlinearity::kNone) {
    p.predict = [cfg](const RegressionTask& t) { return gd_predict(t, cfg); };
    // ŷ = W_L x is linear in the query.
    p.jacobian = [cfg](const RegressionTask& t) { return gd_fit(t, cfg).w; };
  } else {
    p.predict = [cfg](const RegressionTask& t) { return nonlinear_gd_predict(t, cfg); };
  }
  return p;
}

Predictor newton_predictor(double ridge) {
  return {"newton", [ridge](const RegressionTask& t) { return newton_predict(t, ridge).prediction; },
          [ridge](const RegressionTask& t) { return newton_predict(t, ridge).w; }};
}

Predictor lsa_predictor(std::size_t f_in, std::size_t f_out, double eta, std::size_t n) {
  const LsaWeights w = construct_lsa_gd(f_in, f_out, eta, n);
  return {"lsa", [w](const RegressionTask& t) { return lsa_predict(t, w); }, {}};
}

Predictor model_predictor(const Model& model, std::string tag) {
  Predictor p;
  p.tag = std::move(tag);
  p.predict = [model](const RegressionTask& t) { return predict(model, t); };
  const bool analytic = model.spec.variant == Variant::k1d || model.spec.variant == Variant::kNd;
  if (analytic) p.jacobian = [model](const RegressionTask& t) { return sensitivity(model, t); };
  return p;
}

Predictor negated(const Predictor& p) {
  Predictor n;
  n.tag = "-" + p.tag;
  n.predict = [f = p.predict](const RegressionTask& t) {
    Vector v = f(t);
    for (auto& x : v) x = -x;
    return v;
  };
  if (p.jacobian) {
    n.jacobian = [j = p.jacobian](const RegressionTask& t) {
      Matrix m = j(t);
      m *= -1.0;
      return m;
    };
  }
  return n;
}

LossStats eval_loss(const Predictor& p, const std::vector<RegressionTask>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("eval_loss: no tasks");
  std::vector<double> losses;
  losses.reserve(tasks.size());
  for (const auto& t : tasks) {
    const Vector y = p.predict(t);
    double l = 0.0;
    for (std::size_t r = 0; r < t.f_out; ++r) {
      const double e = y[r] - t.query_y()[r];
      l += e * e;
    }
    losses.push_back(l);
  }
  LossStats s;
  s.n = losses.size();
  for (double l : losses) s.mean += l;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double var = 0.0;
    for (double l : losses) var += (l - s.mean) * (l - s.mean);
    var /= static_cast<double>(s.n - 1);
    s.sem = std::sqrt(var / static_cast<double>(s.n));
  }
  return s;
}

LossStats eval_loss(const Predictor& p, std::size_t n_tasks, const TaskSpec& spec, std::uint64_t seed) {
  return eval_loss(p, sample_task_set(spec, n_tasks, seed, kEvalDomain));
}

PredictionDiff compare_predictions(const Predictor& a, const Predictor& b,
                                   const std::vector<RegressionTask>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("compare_predictions: no tasks");
  PredictionDiff d;
  for (const auto& t : tasks) {
    const Vector ya = a.predict(t);
    const Vector yb = b.predict(t);
    double s = 0.0;
    for (std::size_t r = 0; r < ya.size(); ++r) s += (ya[r] - yb[r]) * (ya[r] - yb[r]);
    const double l2 = std::sqrt(s);
    d.mean += l2;
    d.max = std::max(d.max, l2);
    d.mean_target_norm += norm2(t.query_y());
  }
  d.mean /= static_cast<double>(tasks.size());
  d.mean_target_norm /= static_cast<double>(tasks.size());
  return d;
}

Matrix predictor_jacobian(const Predictor& p, const RegressionTask& task, double h) {
  return p.jacobian ? p.jacobian(task) : fd_sensitivity(p.predict, task, h);
}

SensitivitySimilarity sensitivity_similarity(const Predictor& a, const Predictor& b,
                                             const std::vector<RegressionTask>& tasks, double h) {
  if (tasks.empty()) throw std::invalid_argument("sensitivity_similarity: no tasks");
  SensitivitySimilarity s;
  for (const auto& t : tasks) {
    const Matrix ja = predictor_jacobian(a, t, h);
    const Matrix jb = predictor_jacobian(b, t, h);
    const auto cos = cosine_similarity(ja.data(), jb.data());
    if (cos) {
      s.mean_cosine += *cos;
      ++s.defined;
    } else {
      ++s.undefined;
    }
    s.mean_l2 += frobenius_norm(ja - jb);
  }
  if (s.defined) s.mean_cosine /= static_cast<double>(s.defined);
  s.mean_l2 /= static_cast<double>(tasks.size());
  return s;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "predictor,metric,f,n_context,alpha,seed,value,sem\n";
  for (const auto& r : rows) {
    os << r.predictor << ',' << r.metric << ',' << r.f << ',' << r.n_context << ','
       << format_double(r.alpha) << ',' << r.seed << ','
       << (r.value ? format_double(*r.value) : std::string("undefined")) << ','
       << (r.sem ? format_double(*r.sem) : std::string()) << '\n';
  }
}

std::string to_string(SweepKind k) { return k == SweepKind::kAlpha ? "alpha" : "dimension"; }

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "alpha") return SweepKind::kAlpha;
  if (s == "dimension") return SweepKind::kDimension;
  throw std::invalid_argument("unknown sweep kind '" + s + "' (expected alpha|dimension)");
}

std::vector<ResultRow> sweep(SweepKind kind, const PredictorFactory& factory,
                             const std::vector<double>& grid, const TaskSpec& base,
                             std::size_t n_tasks, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<ResultRow> rows;
  for (double g : grid) {
    TaskSpec spec = base;
    if (kind == SweepKind::kAlpha) {
      spec.alpha = g;
    } else {
      if (g < 1.0 || g != std::floor(g)) throw std::invalid_argument("sweep: dimension must be a positive integer");
      spec.f_in = static_cast<std::size_t>(g);
      if (base.f_out != 1) spec.f_out = spec.f_in;
    }
    const auto tasks = sample_task_set(spec, n_tasks, seed, kEvalDomain);
    for (const auto& p : factory(spec)) {
      const LossStats s = eval_loss(p, tasks);
      rows.push_back({p.tag, "loss", spec.f_in, spec.n_context, spec.alpha, seed, s.mean, s.sem});
    }
  }
  return rows;
}

Vector normalize_tensor(std::span<const double> t) {
  Vector out(t.begin(), t.end());
  const double n = norm2(t);
  if (n == 0.0) return out;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i]) > std::abs(t[arg])) arg = i;
  const double s = (t[arg] < 0.0 ? -1.0 : 1.0) / n;
  for (auto& x : out) x *= s;
  return out;
}

std::vector<TensorAlignment> param_alignment(const GdSsmNdLayer& trained,
                                             const GdSsmNdLayer& constructed) {
  std::vector<TensorAlignment> out;
  auto add = [&](const char* name, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
      throw std::invalid_argument(std::string("param_alignment: shape mismatch for ") + name);
    const Vector na = normalize_tensor(a);
    const Vector nb = normalize_tensor(b);
    TensorAlignment t;
    t.name = name;
    t.cosine = cosine_similarity(na, nb);
    double d = 0.0;
    for (std::size_t i = 0; i < na.size(); ++i) d += (na[i] - nb[i]) * (na[i] - nb[i]);
    t.distance = std::sqrt(d);
    for (double v : a) t.trained_mean += v;
    t.trained_mean /= static_cast<double>(a.size());
    out.push_back(std::move(t));
  };
  add("Q", trained.q_in.data(), constructed.q_in.data());
  add("q", trained.q_out, constructed.q_out);
  add("lambda", trained.lambda.data(), constructed.lambda.data());
  add("emb_x", trained.emb_x.data(), constructed.emb_x.data());
  add("emb_y", trained.emb_y.data(), constructed.emb_y.data());
  add("beta", std::span(&trained.beta, 1), std::span(&constructed.beta, 1));
  return out;
}

namespace {

double gd_loss(const std::vector<RegressionTask>& tasks, GdConfig cfg, double eta) {
  cfg.eta = eta;
  return eval_loss(gd_predictor(cfg), tasks).mean;
}

}  // namespace

EtaSearch tune_gd_eta(const std::vector<RegressionTask>& tasks, const GdConfig& cfg, double lo,
                      double hi, std::size_t points) {
  if (tasks.empty()) throw std::invalid_argument("tune_gd_eta: no tasks");
  if (!(lo > 0.0 && hi > lo) || points < 2) throw std::invalid_argument("tune_gd_eta: bad grid");
  EtaSearch s;
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double eta = i + 1 == points ? hi : lo * std::exp(step * static_cast<double>(i));
    s.grid.emplace_back(eta, gd_loss(tasks, cfg, eta));
    if (s.grid[i].second < s.grid[best].second) best = i;
  }
  // Golden-section search on the bracket around the best grid point.
  double a = s.grid[best == 0 ? 0 : best - 1].first;
  double b = s.grid[best + 1 == points ? best : best + 1].first;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = gd_loss(tasks, cfg, c);
  double fd = gd_loss(tasks, cfg, d);
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = gd_loss(tasks, cfg, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = gd_loss(tasks, cfg, d);
    }
  }
  s.eta = s.grid[best].first;
  s.loss = s.grid[best].second;
  const double mid = 0.5 * (a + b);
  const double f_mid = gd_loss(tasks, cfg, mid);
  if (f_mid < s.loss) {
    s.eta = mid;
    s.loss = f_mid;
  }
  return s;
}

}  // namespace gdssm
