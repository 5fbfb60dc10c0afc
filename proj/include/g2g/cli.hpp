#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "g2g/graph.hpp"
#include "g2g/trainer.hpp"

namespace g2g {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args);

nlohmann::json split_to_json(const DataSplit& split);
DataSplit split_from_json(const nlohmann::json& j);
void save_split_manifest(const DataSplit& split, const std::string& path,
                         const nlohmann::json& extra = nlohmann::json::object());
DataSplit load_split_manifest(const std::string& path, nlohmann::json* extra = nullptr);

nlohmann::json trace_to_json(const TrainingTrace& trace);
TrainingTrace trace_from_json(const nlohmann::json& j);
void save_trace(const TrainingTrace& trace, const std::string& path);
TrainingTrace load_trace(const std::string& path);

/// Embedding TSV: node id, then the mean and variance coordinates, every
/// value printed with 17 significant digits.
void write_embedding_tsv(const std::vector<GaussianEmbedding>& embeddings, const std::string& path);

} // namespace g2g
