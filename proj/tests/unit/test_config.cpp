// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include <doctest.h>

#include <set>

#include "gdssm/config.hpp"

using namespace gdssm;

namespace {

std::string error_of(const std::string& text) {
  RunConfig cfg;
  try {
    apply_config_text(cfg, text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults follow the training protocol") {
  const TrainConfig tc = train_config_from(RunConfig{});
  CHECK(tc.batch_size == 64);
  CHECK(tc.lr_ssm == 1e-4);
  CHECK(tc.lr_global == 2e-4);
  CHECK(tc.weight_decay == 0.05);
  CHECK(tc.total_steps == 20000);
  CHECK(tc.resolved_warmup() == 200);
  CHECK(tc.model.variant == Variant::kNd);
  CHECK(tc.model.f == 10);
  CHECK(tc.model.n_context == 10);
}

TEST_CASE("file syntax: comments, blanks, inline comments, dotted keys") {
  RunConfig cfg;
  apply_config_text(cfg,
                    "# a run\n"
                    "\n"
                    "model.variant = 1d   # scalar targets\n"
                    "  train.lr_ssm=3e-4\n"
                    "sweep.alphas = 0.25, 4\n"
                    "oracle.eta = 0.5\n"
                    "train.warmup_steps = 7\n",
                    "x.cfg");
  CHECK(cfg.raw("model.variant") == "1d");
  CHECK(cfg.real("train.lr_ssm") == 3e-4);
  CHECK(cfg.real_list("sweep.alphas") == std::vector<double>{0.25, 4});
  CHECK(*cfg.real_or_auto("oracle.eta") == 0.5);
  CHECK(*cfg.count_or_auto("train.warmup_steps") == 7);
  CHECK(cfg.is_explicit("train.lr_ssm"));
  CHECK_FALSE(cfg.is_explicit("train.lr_global"));
  CHECK(train_config_from(cfg).model.variant == Variant::k1d);
}

TEST_CASE("malformed lines name the source, line number and text") {
  const std::string e = error_of("model.f = 5\nthis line is wrong\n");
  CHECK(e.find("test.cfg:2") != std::string::npos);
  CHECK(e.find("this line is wrong") != std::string::npos);
}

TEST_CASE("config errors") {
  CHECK(error_of("model.colour = red\n").find("model.colour") != std::string::npos);
  CHECK_FALSE(error_of("model.f = ten\n").empty());
  CHECK_FALSE(error_of("model.f = -3\n").empty());
  CHECK_FALSE(error_of("model.variant = rnn\n").empty());
  CHECK_FALSE(error_of("train.train_beta = maybe\n").empty());
  CHECK_FALSE(error_of("model.f = 5\nmodel.f = 6\n").empty());
  CHECK_FALSE(error_of("= 5\n").empty());
  CHECK_FALSE(error_of("sweep.alphas = 1,,2\n").empty());
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("overrides replace file values") {
  RunConfig cfg;
  apply_config_text(cfg, "train.total_steps = 100\n", "a");
  cfg.set("train.total_steps", "5");
  CHECK(cfg.count("train.total_steps") == 5);
}

TEST_CASE("canonical text and hash") {
  RunConfig a, b;
  CHECK(a.hash() == b.hash());
  a.set("run.out_dir", "/elsewhere");
  a.set("run.id", "named");
  CHECK(a.hash() == b.hash());
  a.set("train.lr_ssm", "2e-4");
  CHECK(a.hash() != b.hash());
  CHECK(a.canonical().find("train.lr_ssm = 2e-4\n") != std::string::npos);
  CHECK(a.hash() == fnv1a64(a.canonical()));
}

TEST_CASE("leaf flags") {
  CHECK(leaf_flag("train.lr_ssm") == "lr-ssm");
  CHECK(leaf_flag("model.n_context") == "n-context");
  std::set<std::string> keys;
  for (const auto& k : config_keys()) CHECK(keys.insert(k.key).second);
  CHECK(find_key("model.f") != nullptr);
  CHECK(find_key("model.g") == nullptr);
}

TEST_CASE("task kind auto picks sine for the nonlinear variant") {
  RunConfig cfg;
  CHECK(task_kind_from(cfg) == TaskKind::kLinear);
  cfg.set("model.variant", "nonlinear");
  CHECK(task_kind_from(cfg) == TaskKind::kSine);
  cfg.set("task.kind", "linear");
  CHECK(task_kind_from(cfg) == TaskKind::kLinear);
}
