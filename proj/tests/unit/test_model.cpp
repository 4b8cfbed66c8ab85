// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "gdssm/model.hpp"
#include "test_util.hpp"

using namespace gdssm;

namespace {

ModelSpec spec_of(Variant v, std::size_t f = 4, std::size_t n = 5) {
  ModelSpec s;
  s.variant = v;
  s.f = f;
  s.n_context = n;
  if (v == Variant::kMultilayer) s.layers = 2;
  return s;
}

RegressionTask task_for(const ModelSpec& s, RngStream& rng, TaskKind kind = TaskKind::kLinear) {
  return testutil::random_task(rng, s.f, s.variant == Variant::k1d ? 1 : s.f, s.n_context, 1.0, kind);
}

}  // namespace

TEST_CASE("variant and placement names round trip") {
  for (Variant v : {Variant::k1d, Variant::kNd, Variant::kMultilayer, Variant::kNonlinear})
    CHECK(variant_from_string(to_string(v)) == v);
  for (GluPlacement p : {GluPlacement::kState, GluPlacement::kOutput})
    CHECK(glu_placement_from_string(to_string(p)) == p);
  CHECK_THROWS(variant_from_string("transformer"));
}

TEST_CASE("ablation labels") {
  Ablation a;
  CHECK(a.label() == "full");
  a.sliding_window = false;
  CHECK(a.label() == "no_sliding_window");
  a.output_gating = false;
  CHECK(a.label().find('+') != std::string::npos);
}

TEST_CASE("ablations only apply to their variants") {
  RngStream rng(0, 0);
  ModelSpec s = spec_of(Variant::kNd);
  s.ablation.input_construction = false;
  CHECK_THROWS(init_model(s, rng));
  s = spec_of(Variant::k1d);
  s.ablation.sliding_window = false;
  CHECK_THROWS(init_model(s, rng));
}

TEST_CASE("init draws: lambda one, beta -0.1, small gates") {
  RngStream rng(0, 1);
  const Model m = init_model(spec_of(Variant::kNd, 10, 10), rng);
  const auto& l = m.layers[0];
  CHECK(l.beta == -0.1);
  for (double v : l.lambda.data()) CHECK(v == 1.0);
  double sq = 0.0;
  for (double v : l.emb_x.data()) sq += v * v;
  const double std_est = std::sqrt(sq / static_cast<double>(l.emb_x.size()));
  CHECK(std_est > 0.01);
  CHECK(std_est < 0.03);
}

TEST_CASE("constructed models equal one-step GD for every linear variant") {
  RngStream rng(0, 2);
  for (Variant v : {Variant::k1d, Variant::kNd, Variant::kNonlinear}) {
    const ModelSpec s = spec_of(v);
    const Model m = constructed_model(s, 0.6);
    for (int trial = 0; trial < 20; ++trial) {
      const RegressionTask t = task_for(s, rng);
      CHECK(testutil::max_abs(predict(m, t), testutil::loop_gd(t, 0.6, 1)) < (v == Variant::kNonlinear ? 1e-6 : 1e-10));
    }
  }
  const Model two = constructed_model(spec_of(Variant::kMultilayer), 0.6);
  for (int trial = 0; trial < 20; ++trial) {
    const RegressionTask t = task_for(two.spec, rng);
    CHECK(testutil::max_abs(predict(two, t), testutil::loop_gd(t, 0.6, 2)) < 1e-9);
  }
}

TEST_CASE("constructed_model rejects ablations") {
  ModelSpec s = spec_of(Variant::kNd);
  s.ablation.output_gating = false;
  CHECK_THROWS(constructed_model(s, 1.0));
}

TEST_CASE("predictions have the task's output width") {
  RngStream rng(0, 3);
  ModelSpec s = spec_of(Variant::kNd, 5, 4);
  const Model m = init_model(s, rng);
  const RegressionTask t = testutil::random_task(rng, 5, 2, 4);
  CHECK(predict(m, t).size() == 2);
}

TEST_CASE("param views cover every tensor once") {
  RngStream rng(0, 4);
  for (Variant v : {Variant::k1d, Variant::kNd, Variant::kMultilayer, Variant::kNonlinear}) {
    Model m = init_model(spec_of(v), rng);
    std::size_t total = 0;
    std::set<std::string> names;
    for (const auto& p : param_views(m)) {
      CHECK(p.values.size() == p.rows * p.cols);
      CHECK(names.insert(p.name).second);
      total += p.values.size();
    }
    CHECK(total == param_count(m));
  }
}

TEST_CASE("analytic sensitivity matches central differences") {
  RngStream rng(0, 5);
  for (Variant v : {Variant::k1d, Variant::kNd}) {
    for (bool gating : {true, false}) {
      ModelSpec s = spec_of(v);
      s.ablation.output_gating = gating;
      const Model m = init_model(s, rng, 0.5);
      for (int trial = 0; trial < 5; ++trial) {
        const RegressionTask t = task_for(s, rng);
        const Matrix a = sensitivity(m, t);
        const Matrix n = sensitivity(m, t, SensitivityMethod::kCentralFd);
        double scale = 1e-12;
        for (double x : n.data()) scale = std::max(scale, std::abs(x));
        CHECK(max_abs_diff(a.data(), n.data()) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("constructed sensitivity is (eta/N) S_yx") {
  RngStream rng(0, 6);
  const ModelSpec s = spec_of(Variant::kNd, 3, 6);
  const Model m = constructed_model(s, 0.9);
  const RegressionTask t = task_for(s, rng);
  Matrix want(3, 3);
  for (std::size_t i = 0; i < 6; ++i) add_outer(want, 0.9 / 6, t.ys[i], t.xs[i]);
  CHECK(max_abs_diff(sensitivity(m, t).data(), want.data()) < 1e-12);
}

TEST_CASE("analytic sensitivity is refused for nonlinear heads") {
  RngStream rng(0, 7);
  const ModelSpec s = spec_of(Variant::kNonlinear);
  const Model m = init_model(s, rng);
  CHECK_THROWS_AS(sensitivity(m, task_for(s, rng, TaskKind::kSine)), std::logic_error);
  CHECK_NOTHROW(sensitivity(m, task_for(s, rng, TaskKind::kSine), SensitivityMethod::kCentralFd));
}
