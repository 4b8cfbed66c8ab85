// Copyright 2026 The gdssm Authors. Apache 2.0 License.

#include "gdssm/checkpoint.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gdssm {

namespace {

constexpr int kFormatVersion = 1;

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Model model_skeleton(const ModelSpec& spec) {
  RngStream rng(0, 0);
  return zeros_like(init_model(spec, rng, 0.0));
}

void write_tensors_csv(std::ostream& os, const Model& model) {
  os << "name,rows,cols,values\n";
  for (const auto& v : param_views(model)) {
    os << v.name << ',' << v.rows << ',' << v.cols;
    for (double x : v.values) os << ',' << format_double(x);
    os << '\n';
  }
}

Model read_tensors_csv(std::istream& is, const ModelSpec& spec) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("name,rows,cols", 0) != 0)
    throw std::runtime_error("tensor csv: missing header");
  std::map<std::string, std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_commas(line);
    if (cells.size() < 3) throw std::runtime_error("tensor csv line " + std::to_string(lineno) + ": too few fields");
    const std::string name = cells.front();
    if (!rows.emplace(name, std::move(cells)).second)
      throw std::runtime_error("tensor csv: duplicate tensor '" + name + "'");
  }
  Model model = model_skeleton(spec);
  for (auto& view : param_views(model)) {
    auto it = rows.find(view.name);
    if (it == rows.end()) throw std::runtime_error("tensor csv: missing tensor '" + view.name + "'");
    const auto& cells = it->second;
    const auto r = static_cast<std::size_t>(parse_double(cells[1]));
    const auto c = static_cast<std::size_t>(parse_double(cells[2]));
    if (r != view.rows || c != view.cols || cells.size() != 3 + view.values.size())
      throw std::runtime_error("tensor csv: '" + view.name + "' has shape " + cells[1] + "x" + cells[2] +
                               ", expected " + std::to_string(view.rows) + "x" + std::to_string(view.cols));
    for (std::size_t i = 0; i < view.values.size(); ++i) view.values[i] = parse_double(cells[3 + i]);
    rows.erase(it);
  }
  if (!rows.empty()) throw std::runtime_error("tensor csv: unexpected tensor '" + rows.begin()->first + "'");
  return model;
}

std::string meta_to_json(const CheckpointMeta& meta) {
  const auto& s = meta.spec;
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["variant"] = to_string(s.variant);
  j["f"] = s.f;
  j["n_context"] = s.n_context;
  j["eta"] = meta.eta ? nlohmann::ordered_json(format_double(*meta.eta)) : nlohmann::ordered_json(nullptr);
  j["config_hash"] = hex64(meta.config_hash);
  j["layers"] = s.layers;
  j["glu_hidden"] = s.glu_hidden;
  j["glu_placement"] = to_string(s.glu_placement);
  j["ablation"] = {{"input_construction", s.ablation.input_construction},
                   {"sliding_window", s.ablation.sliding_window},
                   {"output_gating", s.ablation.output_gating}};
  return j.dump(2) + "\n";
}

CheckpointMeta meta_from_json(const std::string& text) {
  CheckpointMeta meta;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw std::runtime_error("checkpoint meta: unsupported format_version");
    auto& s = meta.spec;
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    s.f = j.at("f").get<std::size_t>();
    s.n_context = j.at("n_context").get<std::size_t>();
    s.layers = j.at("layers").get<std::size_t>();
    s.glu_hidden = j.at("glu_hidden").get<std::size_t>();
    s.glu_placement = glu_placement_from_string(j.at("glu_placement").get<std::string>());
    const auto& a = j.at("ablation");
    s.ablation.input_construction = a.at("input_construction").get<bool>();
    s.ablation.sliding_window = a.at("sliding_window").get<bool>();
    s.ablation.output_gating = a.at("output_gating").get<bool>();
    if (!j.at("eta").is_null()) meta.eta = parse_double(j.at("eta").get<std::string>());
    meta.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint meta: ") + e.what());
  }
  return meta;
}

std::pair<std::string, std::string> save_checkpoint(const std::string& prefix, const Model& model,
                                                    const CheckpointMeta& meta) {
  const std::string tensors = prefix + ".tensors.csv";
  const std::string meta_path = prefix + ".meta.json";
  std::ofstream t(tensors);
  if (!t) throw std::runtime_error("cannot write " + tensors);
  write_tensors_csv(t, model);
  std::ofstream m(meta_path);
  if (!m) throw std::runtime_error("cannot write " + meta_path);
  m << meta_to_json(meta);
  return {tensors, meta_path};
}

std::pair<Model, CheckpointMeta> load_checkpoint(const std::string& prefix) {
  std::ifstream m(prefix + ".meta.json");
  if (!m) throw std::runtime_error("cannot read " + prefix + ".meta.json");
  std::stringstream buf;
  buf << m.rdbuf();
  CheckpointMeta meta = meta_from_json(buf.str());
  std::ifstream t(prefix + ".tensors.csv");
  if (!t) throw std::runtime_error("cannot read " + prefix + ".tensors.csv");
  return {read_tensors_csv(t, meta.spec), meta};
}

}  // namespace gdssm
