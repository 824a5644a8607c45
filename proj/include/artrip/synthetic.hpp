// SPDX-License-Identifier: Apache-2.0
//
// Deterministic stand-ins for the four-city Flickr check-in corpus, written
// in the canonical POI / visit CSV schemas. Used by tests, the acceptance
// suite and demos when the published files are not on disk.
//
// Generative model per city:
//  - POIs scattered around the city centre with Zipf-like popularity and a
//    theme label;
//  - each travel sequence starts at a popularity-weighted POI and walks to
//    nearby, popular, preferably same-theme POIs, occasionally returning to
//    a POI already visited in the sequence;
//  - every visit emits a burst of 1-5 photos (consecutive duplicates), with
//    dwell and travel times drawn per visit; most sequences are short and
//    are removed by the length filter, as in the real data.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace artrip {

struct CityProfile {
  std::string name;
  std::string code;  // file suffix, e.g. "Glas"
  int num_pois = 0;
  int num_users = 0;
  int num_sequences = 0;
  double center_lat = 0.0;
  double center_lon = 0.0;
  std::uint64_t seed = 0;
};

/// Edinburgh, Glasgow, Osaka and Toronto profiles sized after the published
/// POI / user / sequence counts.
std::vector<CityProfile> flickr_city_profiles();
const CityProfile& city_profile(const std::string& name);

struct CityFiles {
  std::filesystem::path poi_file;
  std::filesystem::path visits_file;
};

CityFiles synthetic_city_paths(const CityProfile& city, const std::filesystem::path& dir);

/// Writes poi-<code>.csv and userVisits-<code>.csv into `dir`. Byte-identical
/// for a fixed profile.
CityFiles write_synthetic_city(const CityProfile& city, const std::filesystem::path& dir);

}  // namespace artrip
