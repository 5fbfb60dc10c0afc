#pragma once

#include <string>

#include <json.hpp>

#include "g2g/encoder.hpp"

namespace g2g {

/// Checkpoint layout: magic "G2GM", u32-LE format version, u32-LE length +
/// UTF-8 JSON metadata (input_dim, hidden_sizes, half_dim, activations, plus
/// caller extras), then every parameter tensor as consecutive 64-bit IEEE-754
/// little-endian values in tensor_list order. Round-trips are bit exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(const EncoderParameters& params, const std::string& path,
                const nlohmann::json& extra_metadata = nlohmann::json::object());

EncoderParameters load_model(const std::string& path, nlohmann::json* metadata = nullptr);

} // namespace g2g
