/**
 * @file checkpoint.hpp
 * @brief Model checkpoint container.
 *
 * Layout: "GSCANCKP", u32 version, feature schema manifest, metadata JSON,
 * then per tensor its name, rows, cols and little-endian float32 values,
 * and finally the sha256 of everything before it.
 */
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gscan/gcn.hpp"
#include "json.hpp"

namespace gscan::checkpoint {

struct Checkpoint
{
    gcn::ModelParams<float> params;
    /// FeatureSchema::manifest() of the schema the model was trained on.
    std::string schema_manifest;
    /// Free-form training provenance; serialized with sorted keys.
    nlohmann::json metadata = nlohmann::json::object();
};

std::string encode(const Checkpoint& checkpoint);
/// Throws BadCheckpoint on corruption and SchemaMismatch when the stored
/// manifest differs from `expected_manifest` (when non-empty).
Checkpoint decode(std::string_view bytes, std::string_view expected_manifest);

/// Hex sha256 over encode(checkpoint).
std::string digest(const Checkpoint& checkpoint);

void save(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Checks against the standard feature schema.
Checkpoint load(const std::filesystem::path& path);

} // namespace gscan::checkpoint
