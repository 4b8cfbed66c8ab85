// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Synthetic in-context regression tasks and the token layouts fed to the
// recurrent models.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gdssm/numerics.hpp"

namespace gdssm {

enum class TaskKind { kLinear, kSine };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

struct TaskSpec {
  TaskKind kind = TaskKind::kLinear;
  std::size_t f_in = 10;
  std::size_t f_out = 10;
  std::size_t n_context = 10;
  double alpha = 1.0;
};

// N context pairs followed by the query pair at index N (0-based).
// Targets: y = W x (linear) or y = sin(W x) elementwise (sine).
struct RegressionTask {
  TaskKind kind = TaskKind::kLinear;
  std::size_t f_in = 0;
  std::size_t f_out = 0;
  std::size_t n_context = 0;
  double alpha = 1.0;
  std::vector<Vector> xs;  // N + 1 inputs
  std::vector<Vector> ys;  // N + 1 targets
  Matrix w_true;           // f_out x f_in

  const Vector& query_x() const { return xs.back(); }
  const Vector& query_y() const { return ys.back(); }
  // Width of the shared token space, max(f_in, f_out).
  std::size_t width() const { return std::max(f_in, f_out); }
};

// Draw order: w_true row-major from N(0,1), then x_1..x_{N+1} each
// coordinate from U(-alpha, alpha). Because uniforms are alpha·(2u-1), tasks
// sampled from the same stream at different alpha share w_true and differ
// only by the input scale.
RegressionTask sample_task(const TaskSpec& spec, RngStream& rng);

// Stream domains. Training batches, the in-training eval set and the shared
// metrics eval set never overlap.
inline constexpr std::uint64_t kTrainDomain = 0x7261696e;
inline constexpr std::uint64_t kHistoryEvalDomain = 0x68697374;
inline constexpr std::uint64_t kEvalDomain = 0x6576616c;
inline constexpr std::uint64_t kTuneDomain = 0x74756e65;
inline constexpr std::uint64_t kInitDomain = 0x696e6974;

// Task i of a keyed set comes from stream stream_key(domain, i), so every
// consumer of (spec, seed, domain) sees the same tasks in any order.
std::vector<RegressionTask> sample_task_set(const TaskSpec& spec, std::size_t n, std::uint64_t seed,
                                            std::uint64_t domain);

// Applies the task's target map to an input.
Vector task_target(const RegressionTask& task, std::span<const double> x);

// Constructed 1-D context vectors c_t = [x_t·y_t, x_{t+1}], t = 1..N.
// Requires f_out == 1.
std::vector<Vector> context_vectors_1d(const RegressionTask& task);

// Raw 1-D tokens [x_t, y_t, 0...] for t = 1..N followed by [x_{N+1}, 0...];
// the layout used when the input construction is switched off.
std::vector<Vector> raw_tokens_1d(const RegressionTask& task);

enum class TokenKind { kX, kY };

// f x 3 window [x_t | y_t | x_{t+1}] with per-column token kinds (the
// kinds select which embedding a model applies to each column).
struct ContextWindow {
  Matrix columns;
  std::array<TokenKind, 3> kinds{TokenKind::kX, TokenKind::kY, TokenKind::kX};
};

// Interleaved stream x_1, y_1, ..., x_N, y_N, x_{N+1}; vectors are
// zero-padded to width().
std::vector<Vector> token_stream(const RegressionTask& task);
std::vector<TokenKind> token_kinds(const RegressionTask& task);

// Length-3, stride-2 windows over token_stream(): exactly N windows, window t
// = [x_t | y_t | x_{t+1}].
std::vector<ContextWindow> interleave_and_window(const RegressionTask& task);

// Sliding window switched off: one degenerate window [s | s | s] per token of
// the interleaved stream (2N + 1 windows, the last one holds the query).
std::vector<ContextWindow> single_token_windows(const RegressionTask& task);

// Task CSV: header `task_id,role,index,values...`, one row per (task, role,
// index). Roles: `meta` (kind as 0 linear / 1 sine, f_in, f_out, n_context,
// alpha), `w` (rows of w_true), `x` and `y` (index 1..N+1). Values are
// written in shortest round-trip form, so a dump reloads bit-exactly.
void write_tasks_csv(std::ostream& os, const std::vector<RegressionTask>& tasks);
std::vector<RegressionTask> read_tasks_csv(std::istream& is);

}  // namespace gdssm
