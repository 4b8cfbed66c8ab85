// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Checkpoints are two files sharing a prefix:
//   <prefix>.tensors.csv  header `name,rows,cols,values...`, one row per
//                         tensor, values row-major in shortest round-trip form
//   <prefix>.meta.json    variant, f, n_context, eta, config hash and the
//                         rest of the model spec
// Loading rebuilds the model bit for bit.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "gdssm/model.hpp"

namespace gdssm {

struct CheckpointMeta {
  ModelSpec spec;
  std::optional<double> eta;  // set for constructed models
  std::uint64_t config_hash = 0;
};

void write_tensors_csv(std::ostream& os, const Model& model);
// Fills a model of the given spec; every tensor must be present with its
// expected shape. Throws std::runtime_error otherwise.
Model read_tensors_csv(std::istream& is, const ModelSpec& spec);

std::string meta_to_json(const CheckpointMeta& meta);
CheckpointMeta meta_from_json(const std::string& text);

// Returns the two paths written.
std::pair<std::string, std::string> save_checkpoint(const std::string& prefix, const Model& model,
                                                    const CheckpointMeta& meta);
std::pair<Model, CheckpointMeta> load_checkpoint(const std::string& prefix);

// An all-zero model with the spec's structure.
Model model_skeleton(const ModelSpec& spec);

}  // namespace gdssm
