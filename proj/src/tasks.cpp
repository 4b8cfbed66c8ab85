// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/tasks.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gdssm {

std::string to_string(TaskKind kind) { return kind == TaskKind::kLinear ? "linear" : "sine"; }

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "linear") return TaskKind::kLinear;
  if (s == "sine") return TaskKind::kSine;
  throw std::invalid_argument("unknown task kind '" + s + "' (expected linear|sine)");
}

Vector task_target(const RegressionTask& task, std::span<const double> x) {
  Vector y = mat_vec(task.w_true, x);
  if (task.kind == TaskKind::kSine)
    for (auto& v : y) v = std::sin(v);
  return y;
}

RegressionTask sample_task(const TaskSpec& spec, RngStream& rng) {
  if (spec.f_in == 0 || spec.f_out == 0 || spec.n_context == 0)
    throw std::invalid_argument("sample_task: f_in, f_out and n_context must be >= 1");
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("sample_task: alpha must be > 0");

  RegressionTask task;
  task.kind = spec.kind;
  task.f_in = spec.f_in;
  task.f_out = spec.f_out;
  task.n_context = spec.n_context;
  task.alpha = spec.alpha;
  task.w_true = Matrix(spec.f_out, spec.f_in,
                       rng_draw(rng, Distribution::kStandardNormal, spec.f_out * spec.f_in));
  task.xs.reserve(spec.n_context + 1);
  task.ys.reserve(spec.n_context + 1);
  for (std::size_t i = 0; i <= spec.n_context; ++i) {
    task.xs.push_back(rng_draw(rng, Distribution::kUniform, spec.f_in, spec.alpha));
    task.ys.push_back(task_target(task, task.xs.back()));
  }
  return task;
}

std::vector<RegressionTask> sample_task_set(const TaskSpec& spec, std::size_t n, std::uint64_t seed,
                                            std::uint64_t domain) {
  std::vector<RegressionTask> tasks;
  tasks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, stream_key(domain, i));
    tasks.push_back(sample_task(spec, rng));
  }
  return tasks;
}

std::vector<Vector> context_vectors_1d(const RegressionTask& task) {
  if (task.f_out != 1) {
    throw std::invalid_argument(
        "context_vectors_1d: task has f_out = " + std::to_string(task.f_out) +
        "; the constructed 1-D layout needs scalar targets, use interleave_and_window");
  }
  const std::size_t f = task.f_in;
  std::vector<Vector> out;
  out.reserve(task.n_context);
  for (std::size_t t = 0; t < task.n_context; ++t) {
    Vector c(2 * f);
    for (std::size_t k = 0; k < f; ++k) {
      c[k] = task.xs[t][k] * task.ys[t][0];
      c[f + k] = task.xs[t + 1][k];
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Vector> raw_tokens_1d(const RegressionTask& task) {
  if (task.f_out != 1)
    throw std::invalid_argument("raw_tokens_1d: needs f_out == 1");
  const std::size_t f = task.f_in;
  std::vector<Vector> out;
  out.reserve(task.n_context + 1);
  for (std::size_t t = 0; t <= task.n_context; ++t) {
    Vector c(2 * f, 0.0);
    std::copy(task.xs[t].begin(), task.xs[t].end(), c.begin());
    if (t < task.n_context) c[f] = task.ys[t][0];
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

Vector padded(const Vector& v, std::size_t width) {
  Vector out(width, 0.0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

std::vector<Vector> token_stream(const RegressionTask& task) {
  const std::size_t f = task.width();
  std::vector<Vector> out;
  out.reserve(2 * task.n_context + 1);
  for (std::size_t t = 0; t < task.n_context; ++t) {
    out.push_back(padded(task.xs[t], f));
    out.push_back(padded(task.ys[t], f));
  }
  out.push_back(padded(task.query_x(), f));
  return out;
}

std::vector<TokenKind> token_kinds(const RegressionTask& task) {
  std::vector<TokenKind> kinds;
  kinds.reserve(2 * task.n_context + 1);
  for (std::size_t t = 0; t < task.n_context; ++t) {
    kinds.push_back(TokenKind::kX);
    kinds.push_back(TokenKind::kY);
  }
  kinds.push_back(TokenKind::kX);
  return kinds;
}

std::vector<ContextWindow> interleave_and_window(const RegressionTask& task) {
  const auto tokens = token_stream(task);
  const std::size_t f = task.width();
  std::vector<ContextWindow> windows;
  windows.reserve(task.n_context);
  for (std::size_t start = 0; start + 2 < tokens.size(); start += 2) {
    ContextWindow w;
    w.columns = Matrix(f, 3);
    for (std::size_t j = 0; j < 3; ++j) w.columns.set_col(j, tokens[start + j]);
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<ContextWindow> single_token_windows(const RegressionTask& task) {
  const auto tokens = token_stream(task);
  const auto kinds = token_kinds(task);
  const std::size_t f = task.width();
  std::vector<ContextWindow> windows;
  windows.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ContextWindow w;
    w.columns = Matrix(f, 3);
    for (std::size_t j = 0; j < 3; ++j) w.columns.set_col(j, tokens[i]);
    w.kinds = {kinds[i], kinds[i], kinds[i]};
    windows.push_back(std::move(w));
  }
  return windows;
}

namespace {

void write_row(std::ostream& os, std::size_t id, const char* role, std::size_t index,
               std::span<const double> values) {
  os << id << ',' << role << ',' << index;
  for (double v : values) os << ',' << format_double(v);
  os << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void write_tasks_csv(std::ostream& os, const std::vector<RegressionTask>& tasks) {
  os << "task_id,role,index,values...\n";
  for (std::size_t id = 0; id < tasks.size(); ++id) {
    const auto& t = tasks[id];
    const double meta[] = {t.kind == TaskKind::kLinear ? 0.0 : 1.0, double(t.f_in),
                           double(t.f_out), double(t.n_context), t.alpha};
    write_row(os, id, "meta", 0, meta);
    for (std::size_t r = 0; r < t.w_true.rows(); ++r) write_row(os, id, "w", r + 1, t.w_true.row(r));
    for (std::size_t i = 0; i < t.xs.size(); ++i) write_row(os, id, "x", i + 1, t.xs[i]);
    for (std::size_t i = 0; i < t.ys.size(); ++i) write_row(os, id, "y", i + 1, t.ys[i]);
  }
}

std::vector<RegressionTask> read_tasks_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("task_id,role,index", 0) != 0)
    throw std::runtime_error("read_tasks_csv: missing header");
  std::map<std::size_t, RegressionTask> by_id;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 3)
      throw std::runtime_error("read_tasks_csv: line " + std::to_string(line_no) + " too short");
    const std::size_t id = std::stoul(fields[0]);
    const std::string& role = fields[1];
    const std::size_t index = std::stoul(fields[2]);
    Vector values;
    for (std::size_t k = 3; k < fields.size(); ++k) values.push_back(parse_double(fields[k]));
    auto& t = by_id[id];
    if (role == "meta") {
      if (values.size() != 5)
        throw std::runtime_error("read_tasks_csv: meta row needs 5 values (line " +
                                 std::to_string(line_no) + ")");
      t.kind = values[0] == 0.0 ? TaskKind::kLinear : TaskKind::kSine;
      t.f_in = static_cast<std::size_t>(values[1]);
      t.f_out = static_cast<std::size_t>(values[2]);
      t.n_context = static_cast<std::size_t>(values[3]);
      t.alpha = values[4];
      t.w_true = Matrix(t.f_out, t.f_in);
      t.xs.assign(t.n_context + 1, Vector{});
      t.ys.assign(t.n_context + 1, Vector{});
    } else if (role == "w" && index >= 1 && index <= t.w_true.rows() && values.size() == t.f_in) {
      std::copy(values.begin(), values.end(), t.w_true.row(index - 1).begin());
    } else if (role == "x" && index >= 1 && index <= t.xs.size() && values.size() == t.f_in) {
      t.xs[index - 1] = std::move(values);
    } else if (role == "y" && index >= 1 && index <= t.ys.size() && values.size() == t.f_out) {
      t.ys[index - 1] = std::move(values);
    } else {
      throw std::runtime_error("read_tasks_csv: bad row at line " + std::to_string(line_no));
    }
  }
  std::vector<RegressionTask> out;
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

}  // namespace gdssm
