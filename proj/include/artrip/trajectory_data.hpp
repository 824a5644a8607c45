// SPDX-License-Identifier: Apache-2.0
//
// POI catalogs, raw check-ins, trajectories, queries and corpus splits.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace artrip {

using PoiIndex = int;        // dense vocabulary index in [0, |P|)
using Timestamp = std::int64_t;  // unix seconds

struct Poi {
  std::int64_t poi_id = 0;
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  std::string category;
};

/// POIs plus the bijection poi_id <-> dense index. Indices follow ascending
/// poi_id order.
class PoiCatalog {
 public:
  explicit PoiCatalog(std::vector<Poi> pois);

  int size() const { return static_cast<int>(pois_.size()); }
  const std::vector<Poi>& pois() const { return pois_; }
  const Poi& at(PoiIndex index) const { return pois_.at(index); }

  std::int64_t id_of(PoiIndex index) const { return pois_.at(index).poi_id; }
  /// Throws Error for unknown ids.
  PoiIndex index_of(std::int64_t poi_id) const;
  bool contains(std::int64_t poi_id) const { return index_.count(poi_id) != 0; }

 private:
  std::vector<Poi> pois_;
  std::unordered_map<std::int64_t, PoiIndex> index_;
};

struct Visit {
  std::string user_id;
  std::int64_t seq_id = 0;
  std::int64_t poi_id = 0;
  Timestamp timestamp = 0;
};

struct VisitLoad {
  std::vector<Visit> visits;
  int dropped_unknown_poi = 0;
};

struct Trajectory {
  std::vector<PoiIndex> pois;
  std::vector<Timestamp> times;

  int length() const { return static_cast<int>(pois.size()); }
};

struct Query {
  PoiIndex start = 0;
  Timestamp start_time = 0;
  PoiIndex end = 0;
  Timestamp end_time = 0;
  int length = 0;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> val;
  std::vector<Trajectory> test;
  std::uint64_t seed = 0;
};

/// Header must be `poiID,poiName,lat,long,theme`.
PoiCatalog load_poi_catalog(const std::filesystem::path& path);

/// Header must be `userID,seqID,poiID,dateTaken`. Rows naming POIs missing
/// from the catalog are dropped and counted. Output is sorted by
/// (user_id, seq_id, timestamp).
VisitLoad load_visits(const std::filesystem::path& path, const PoiCatalog& catalog);

/// One trajectory per (user_id, seq_id) group with consecutive duplicates
/// collapsed (first timestamp kept). Groups shorter than min_len are dropped.
std::vector<Trajectory> extract_trajectories(const std::vector<Visit>& visits,
                                             const PoiCatalog& catalog, int min_len = 3);

Query make_query(const Trajectory& t);

CorpusSplit split_corpus(const std::vector<Trajectory>& trajectories, const SplitRatios& ratios,
                         std::uint64_t seed);

/// Hour-of-day bucket in [0, 24), UTC.
int hour_bucket(Timestamp t);

/// Checks the Trajectory invariants; throws Error describing the first violation.
void validate(const Trajectory& t, int num_pois);

}  // namespace artrip
