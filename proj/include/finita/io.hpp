#pragma once

// JSON and text formats.
//   distribution: {"n": int, "q": int, "probs": [q^n floats]}
//   mapping:      {"n": int, "q": int, "perm": [q^n ints]}
//   samples:      newline-delimited unsigned words plus a {"N","n","q"} sidecar

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "finita/core.hpp"

namespace finita {

struct SampleSet;

nlohmann::json to_json(const JointDistribution& joint);
nlohmann::json to_json(const WordMapping& m, int n, int q);

JointDistribution distribution_from_json(const nlohmann::json& j, bool renormalize = false);
WordMapping mapping_from_json(const nlohmann::json& j);

JointDistribution read_distribution(std::istream& in, bool renormalize = false);
JointDistribution read_distribution(const std::filesystem::path& path, bool renormalize = false);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_samples(const std::filesystem::path& path, const SampleSet& samples);
SampleSet read_samples(const std::filesystem::path& path);

}  // namespace finita
