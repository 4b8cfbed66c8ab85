// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "gdssm/metrics.hpp"
#include "gdssm/training.hpp"
#include "test_util.hpp"

using namespace gdssm;

namespace {

ModelSpec small(Variant v) {
  ModelSpec s;
  s.variant = v;
  s.f = 3;
  s.n_context = 4;
  if (v == Variant::kMultilayer) s.layers = 3;
  return s;
}

std::vector<RegressionTask> batch_for(const ModelSpec& s, std::size_t n, std::uint64_t seed) {
  const TaskKind kind = s.variant == Variant::kNonlinear ? TaskKind::kSine : TaskKind::kLinear;
  return sample_task_set(task_spec_for(s, kind, 1.0), n, seed, kTrainDomain);
}

}  // namespace

TEST_CASE("zero-output model: loss is the mean squared target norm") {
  const ModelSpec s = small(Variant::kNd);
  RngStream rng(0, 0);
  Model m = init_model(s, rng);
  m.layers[0].beta = 0.0;
  const auto batch = batch_for(s, 16, 1);
  double want = 0.0;
  for (const auto& t : batch) want += dot(t.query_y(), t.query_y());
  want /= 16.0;
  const LossAndGrads lg = loss_and_grads(m, batch);
  CHECK(lg.loss == doctest::Approx(want).epsilon(1e-14));
  // β = 0 cuts every path except β itself.
  for (const auto& p : param_views(lg.grads)) {
    if (p.name == "layer0.beta") continue;
    for (double g : p.values) CHECK(g == 0.0);
  }
}

TEST_CASE("constructed model's batch loss equals the GD oracle's") {
  const ModelSpec s = small(Variant::kNd);
  const Model m = constructed_model(s, 0.8);
  const auto batch = batch_for(s, 32, 2);
  double oracle = 0.0;
  for (const auto& t : batch) {
    const Vector p = gd_predict(t, {0.8, 1});
    for (std::size_t k = 0; k < p.size(); ++k) oracle += std::pow(p[k] - t.query_y()[k], 2);
  }
  CHECK(batch_loss(m, batch) == doctest::Approx(oracle / 32.0).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences on every variant and ablation") {
  std::vector<std::pair<ModelSpec, double>> cases;
  cases.push_back({small(Variant::k1d), 1e-4});
  cases.push_back({small(Variant::kNd), 1e-4});
  cases.push_back({small(Variant::kMultilayer), 1e-4});
  cases.push_back({small(Variant::kNonlinear), 1e-4});
  ModelSpec s = small(Variant::kNonlinear);
  s.glu_placement = GluPlacement::kOutput;
  cases.push_back({s, 1e-4});
  s = small(Variant::k1d);
  s.ablation.input_construction = false;
  cases.push_back({s, 1e-4});
  s = small(Variant::k1d);
  s.ablation.output_gating = false;
  cases.push_back({s, 1e-4});
  s = small(Variant::kNd);
  s.ablation.sliding_window = false;
  cases.push_back({s, 1e-4});
  s = small(Variant::kNd);
  s.ablation.output_gating = false;
  cases.push_back({s, 1e-4});
  std::uint64_t seed = 0;
  for (const auto& [spec, tol] : cases) {
    RngStream rng(seed, 17);
    const Model m = init_model(spec, rng, 0.5);
    const GradCheckReport r = grad_check(m, batch_for(spec, 3, seed++));
    INFO(to_string(spec.variant), " ", spec.ablation.label(), " worst ", r.worst_param);
    CHECK(r.max_rel_error < tol);
    CHECK(r.coordinates == param_count(m));
  }
}

TEST_CASE("linear 1-D gradients are accurate to 1e-7 at a moderate step") {
  const ModelSpec s = small(Variant::k1d);
  RngStream rng(1, 17);
  const Model m = init_model(s, rng, 0.5);
  CHECK(grad_check(m, batch_for(s, 3, 5), 1e-4).max_rel_error < 1e-7);
}

TEST_CASE("finite-difference error is V-shaped in the step size") {
  const ModelSpec s = small(Variant::kNonlinear);
  RngStream rng(2, 17);
  const Model m = init_model(s, rng, 0.5);
  const auto batch = batch_for(s, 3, 6);
  const double coarse = grad_check(m, batch, 1e-1).max_rel_error;
  const double mid = grad_check(m, batch, 1e-4).max_rel_error;
  const double fine = grad_check(m, batch, 1e-11).max_rel_error;
  CHECK(mid < coarse);
  CHECK(mid < fine);
}

TEST_CASE("non-finite loss is reported") {
  const ModelSpec s = small(Variant::kNd);
  RngStream rng(3, 17);
  Model m = init_model(s, rng);
  m.layers[0].beta = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(loss_and_grads(m, batch_for(s, 2, 1)), NonFiniteLoss);
}

TEST_CASE("adamw closed forms") {
  SUBCASE("first step moves by lr") {
    Vector theta{0.0}, m{0.0}, v{0.0};
    adamw_update(theta, Vector{1.0}, m, v, 1, 1e-3, 0.0);
    CHECK(theta[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  }
  SUBCASE("zero gradient, no decay") {
    Vector theta{0.7, -2.0}, m{0.0, 0.0}, v{0.0, 0.0};
    adamw_update(theta, Vector{0.0, 0.0}, m, v, 1, 1e-3, 0.0);
    CHECK(theta == Vector{0.7, -2.0});
  }
  SUBCASE("decoupled decay") {
    Vector theta{1.0}, m{0.0}, v{0.0};
    adamw_update(theta, Vector{0.0}, m, v, 1, 1e-3, 0.05);
    CHECK(theta[0] == doctest::Approx(0.99995).epsilon(1e-15));
  }
}

TEST_CASE("learning-rate schedule") {
  CHECK(lr_at(50, 1e-4, 100, 1000) == doctest::Approx(5e-5));
  CHECK(lr_at(100, 1e-4, 100, 1000) == doctest::Approx(1e-4));
  CHECK(lr_at(1000, 1e-4, 100, 1000) == 0.0);
  CHECK(lr_at(550, 1e-4, 100, 1000) == doctest::Approx(5e-5));
  double prev = 1.0;
  for (std::size_t s = 100; s <= 1000; s += 10) {
    const double lr = lr_at(s, 1e-4, 100, 1000);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("zero learning rates leave the parameters unchanged") {
  TrainConfig tc;
  tc.model = small(Variant::kNd);
  tc.total_steps = 20;
  tc.eval_every = 10;
  tc.eval_tasks = 8;
  tc.batch_size = 4;
  tc.lr_ssm = tc.lr_global = 0.0;
  const TrainResult r = train(tc);
  RngStream rng(tc.seed, stream_key(kInitDomain, 0));
  const Model init = init_model(tc.model, rng, tc.init_std);
  const auto a = param_views(r.model), b = param_views(init);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].values.size(); ++k) CHECK(a[i].values[k] == b[i].values[k]);
}

TEST_CASE("training history: rows, determinism and descent") {
  TrainConfig tc;
  tc.model = small(Variant::kNd);
  tc.total_steps = 600;
  tc.eval_every = 200;
  tc.eval_tasks = 200;
  tc.batch_size = 16;
  tc.lr_ssm = 1e-2;
  tc.lr_global = 2e-2;
  const TrainResult a = train(tc);
  const TrainResult b = train(tc);
  REQUIRE(a.history.size() == 4);
  CHECK(a.history.front().step == 0);
  CHECK(a.history.back().step == 600);
  CHECK(a.history.back().eval_loss < a.history.front().eval_loss);
  std::ostringstream sa, sb;
  write_history_csv(sa, a.history);
  write_history_csv(sb, b.history);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("step,lr_ssm,lr_global,train_loss,eval_loss\n", 0) == 0);
  CHECK_FALSE(a.aborted);
}

TEST_CASE("divergence aborts the run") {
  TrainConfig tc;
  tc.model = small(Variant::kNd);
  tc.total_steps = 50;
  tc.eval_every = 10;
  tc.eval_tasks = 8;
  tc.batch_size = 4;
  tc.divergence_threshold = 1e-6;
  const TrainResult r = train(tc);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("step") != std::string::npos);
}

TEST_CASE("frozen beta stays at its initial value") {
  TrainConfig tc;
  tc.model = small(Variant::kNd);
  tc.total_steps = 30;
  tc.eval_every = 30;
  tc.eval_tasks = 8;
  tc.batch_size = 4;
  tc.lr_ssm = 1e-2;
  tc.train_beta = false;
  const TrainResult r = train(tc);
  CHECK(r.model.layers[0].beta == -0.1);
  CHECK(r.model.layers[0].q_out != Vector(3, 0.0));
}
