// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Drives the gdssm executable (path in GDSSM_EXE) through a shell.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string output;
};

struct WorkDir {
  fs::path path = fs::temp_directory_path() / ("gdssm_cli_" + std::to_string(::getpid()));
  WorkDir() { fs::create_directories(path); }
  ~WorkDir() { fs::remove_all(path); }
};

const fs::path& work_dir() {
  static const WorkDir dir;
  return dir.path;
}

Result run(const std::string& args) {
  const char* exe = std::getenv("GDSSM_EXE");
  REQUIRE(exe != nullptr);
  const std::string cmd = "cd '" + work_dir().string() + "' && '" + exe + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("verify passes and writes its report") {
  const Result r = run("verify --f 5 --n-context 7 --seed 3 --out-dir v --id v");
  CHECK(r.code == 0);
  const std::string csv = slurp(work_dir() / "v" / "v_verify.csv");
  CHECK(csv.rfind("property,value,threshold,passed\n", 0) == 0);
  CHECK(csv.find("construction_nd_vs_gd") != std::string::npos);
  CHECK(csv.find(",false") == std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(work_dir() / "v" / "v_manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["config"]["model.f"] == "5");
}

TEST_CASE("a failing verify names the property and exits 1") {
  const Result r = run("verify --f 2 --n-context 2 --seeds 2 --grad-step 1e-12 --out-dir vf");
  CHECK(r.code == 1);
  CHECK(r.output.find("failed property: grad_check") != std::string::npos);
}

TEST_CASE("malformed config exits 2 and shows the line") {
  write(work_dir() / "bad.cfg", "model.f = 4\nmodel.f: 5\n");
  const Result r = run("verify --config bad.cfg");
  CHECK(r.code == 2);
  CHECK(r.output.find("model.f: 5") != std::string::npos);
  CHECK(r.output.find(":2") != std::string::npos);
}

TEST_CASE("unknown keys and flags exit 2") {
  write(work_dir() / "unknown.cfg", "train.momentum = 0.9\n");
  CHECK(run("verify --config unknown.cfg").code == 2);
  CHECK(run("verify --momentum 0.9").code == 2);
  CHECK(run("train --total-steps abc").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("flags override the config file") {
  write(work_dir() / "t.cfg", "train.total_steps = 1000\nmodel.f = 3\nmodel.n_context = 4\n");
  const Result r = run("train --config t.cfg --total-steps 0 --out-dir t --id t");
  CHECK(r.code == 0);
  const auto manifest = nlohmann::json::parse(slurp(work_dir() / "t" / "t_manifest.json"));
  CHECK(manifest["config"]["train.total_steps"] == "0");
  CHECK(manifest["config"]["model.f"] == "3");
}

TEST_CASE("zero-step training checkpoints the init and logs its eval loss") {
  const Result r = run("train --variant nd --f 3 --n-context 4 --total-steps 0 --eval-tasks 50 --out-dir z --id z");
  REQUIRE(r.code == 0);
  const std::string hist = slurp(work_dir() / "z" / "z_history.csv");
  std::istringstream lines(hist);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "step,lr_ssm,lr_global,train_loss,eval_loss");
  CHECK(row.rfind("0,0,0,", 0) == 0);
  CHECK(fs::exists(work_dir() / "z" / "z_model.tensors.csv"));
  const auto meta = nlohmann::json::parse(slurp(work_dir() / "z" / "z_model.meta.json"));
  CHECK(meta["variant"] == "nd");
  CHECK(meta["f"] == 3);
}

TEST_CASE("eval, compare, sweep and ablate run end to end on a tiny budget") {
  REQUIRE(run("train --f 3 --n-context 4 --total-steps 40 --eval-every 20 --eval-tasks 20 --out-dir e --id m").code ==
          0);
  const std::string common = " --f 3 --n-context 4 --n-tasks 200 --sens-tasks 20 --tune-tasks 100 --out-dir e";
  const Result ev = run("eval --checkpoint e/m_model" + common + " --id ev");
  CHECK(ev.code == 0);
  const std::string csv = slurp(work_dir() / "e" / "ev_eval.csv");
  CHECK(csv.rfind("predictor,metric,f,n_context,alpha,seed,value,sem\n", 0) == 0);
  CHECK(csv.find("trained-gdssm") != std::string::npos);
  CHECK(csv.find("newton") != std::string::npos);
  CHECK(run("compare --checkpoint e/m_model" + common + " --id cmp").code == 0);
  CHECK(fs::exists(work_dir() / "e" / "cmp_compare.csv"));
  CHECK(run("sweep --sweep.kind dimension --dims 2,3" + common + " --id sw").code == 0);
  CHECK(fs::exists(work_dir() / "e" / "sw_sweep_dimension.csv"));
  CHECK(run("ablate --total-steps 20 --eval-every 10 --eval-tasks 20" + common + " --id ab").code == 0);
  CHECK(slurp(work_dir() / "e" / "ab_ablate.csv").find("no_sliding_window") != std::string::npos);
}

TEST_CASE("identical runs produce identical CSVs") {
  REQUIRE(run("train --f 3 --n-context 4 --total-steps 30 --eval-every 10 --eval-tasks 20 --out-dir d1 --id r").code == 0);
  REQUIRE(run("train --f 3 --n-context 4 --total-steps 30 --eval-every 10 --eval-tasks 20 --out-dir d2 --id r").code == 0);
  for (const char* name : {"r_history.csv", "r_model.tensors.csv", "r_model.meta.json"})
    CHECK(slurp(work_dir() / "d1" / name) == slurp(work_dir() / "d2" / name));
}
