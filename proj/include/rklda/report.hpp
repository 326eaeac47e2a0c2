#pragma once

#include <rklda/diagnostics.hpp>
#include <rklda/eval.hpp>
#include <rklda/scatter.hpp>

#include <json.hpp>

#include <string>

namespace rklda {

inline constexpr std::string_view kToolVersion = "1.0.0";

nlohmann::json to_json(const ConditionProfile& profile);
nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const ScatterTraces& traces);
nlohmann::json to_json(const ScatterSet& scatter);
nlohmann::json to_json(const DenseMatrix& m);

/// Per-replicate rows: method,replicate,k,accuracy,seconds
std::string experiment_csv(const ExperimentReport& report);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const nlohmann::json& j);

/// FNV-1a 64-bit digest, printed as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex_digest(std::uint64_t digest);

}  // namespace rklda
