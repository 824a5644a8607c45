// SPDX-License-Identifier: Apache-2.0
//
// On-disk model bundle.
//
// Layout (all integers and floats little-endian):
//   8 bytes   magic "ARTRIPB1"
//   u64       manifest byte length, then the manifest: `key=value` lines
//             (config, seed, vocabulary hash, dimensions, flags, and one
//             `block=<name> <rows> <cols>` line per parameter block)
//   i64 x k   vocabulary: poi_id for each dense index
//   f64 ...   every parameter block in declaration order, row-major
//   f64 k*m_max   guidance matrix P_M, row-major (one row per POI)
//   f64 k         per-POI occurrence totals f_i
//   f64 m_max     confidence vector C
// The guidance section is always present; `guiding=0` marks it inactive.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "artrip/guidance.hpp"
#include "artrip/model.hpp"

namespace artrip {

struct ModelBundle {
  ModelConfig config;
  ModelParams params;
  std::vector<std::int64_t> vocab_ids;
  GuidanceMatrix guidance;
  ConfidenceVector confidence;
  bool guiding = true;
  bool drifting = true;
  std::uint64_t split_seed = 0;
};

/// FNV-1a over the little-endian vocabulary ids.
std::uint64_t vocab_hash(const std::vector<std::int64_t>& ids);

std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle parse_bundle(std::string_view bytes);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace artrip
