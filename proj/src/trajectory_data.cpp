// SPDX-License-Identifier: Apache-2.0

#include "artrip/trajectory_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "artrip/csv.hpp"
#include "artrip/error.hpp"

namespace artrip {

PoiCatalog::PoiCatalog(std::vector<Poi> pois) : pois_(std::move(pois)) {
  if (pois_.empty()) throw Error("empty catalog");
  std::sort(pois_.begin(), pois_.end(),
            [](const Poi& a, const Poi& b) { return a.poi_id < b.poi_id; });
  for (std::size_t i = 0; i < pois_.size(); ++i) {
    const Poi& p = pois_[i];
    if (p.lat < -90.0 || p.lat > 90.0) {
      throw Error("latitude out of range for poi " + std::to_string(p.poi_id));
    }
    if (p.lon < -180.0 || p.lon > 180.0) {
      throw Error("longitude out of range for poi " + std::to_string(p.poi_id));
    }
    if (!index_.emplace(p.poi_id, static_cast<PoiIndex>(i)).second) {
      throw Error("duplicate poi_id " + std::to_string(p.poi_id));
    }
  }
}

PoiIndex PoiCatalog::index_of(std::int64_t poi_id) const {
  auto it = index_.find(poi_id);
  if (it == index_.end()) throw Error("unknown poi_id " + std::to_string(poi_id));
  return it->second;
}

namespace {

std::ifstream open_checked(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

void expect_header(std::istream& in, const std::filesystem::path& path,
                   const std::vector<std::string>& expected) {
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header row");
  auto fields = csv::split_line(line);
  // Tolerate a UTF-8 byte order mark on the first field.
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  if (fields != expected) {
    std::string want;
    for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
    throw Error(path.string() + ": header must be '" + want + "'");
  }
}

[[noreturn]] void row_error(const std::filesystem::path& path, int line_no, const std::string& what) {
  throw Error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

PoiCatalog load_poi_catalog(const std::filesystem::path& path) {
  auto in = open_checked(path);
  expect_header(in, path, {"poiID", "poiName", "lat", "long", "theme"});

  std::vector<Poi> pois;
  std::set<std::int64_t> seen;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    if (f.size() != 5) row_error(path, line_no, "expected 5 fields, got " + std::to_string(f.size()));
    const auto id = csv::parse_int(f[0]);
    const auto lat = csv::parse_double(f[2]);
    const auto lon = csv::parse_double(f[3]);
    if (!id) row_error(path, line_no, "malformed poiID '" + f[0] + "'");
    if (!lat) row_error(path, line_no, "malformed lat '" + f[2] + "'");
    if (!lon) row_error(path, line_no, "malformed long '" + f[3] + "'");
    if (*lat < -90.0 || *lat > 90.0) row_error(path, line_no, "latitude out of range");
    if (*lon < -180.0 || *lon > 180.0) row_error(path, line_no, "longitude out of range");
    if (!seen.insert(*id).second) row_error(path, line_no, "duplicate poi_id " + f[0]);
    pois.push_back(Poi{*id, f[1], *lat, *lon, f[4]});
  }
  if (pois.empty()) throw Error(path.string() + ": empty catalog");
  return PoiCatalog(std::move(pois));
}

VisitLoad load_visits(const std::filesystem::path& path, const PoiCatalog& catalog) {
  auto in = open_checked(path);
  expect_header(in, path, {"userID", "seqID", "poiID", "dateTaken"});

  VisitLoad out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    if (f.size() != 4) row_error(path, line_no, "expected 4 fields, got " + std::to_string(f.size()));
    const auto seq = csv::parse_int(f[1]);
    const auto poi = csv::parse_int(f[2]);
    const auto ts = csv::parse_int(f[3]);
    if (!seq) row_error(path, line_no, "malformed seqID '" + f[1] + "'");
    if (!poi) row_error(path, line_no, "malformed poiID '" + f[2] + "'");
    if (!ts) row_error(path, line_no, "unparseable timestamp '" + f[3] + "'");
    if (!catalog.contains(*poi)) {
      ++out.dropped_unknown_poi;
      continue;
    }
    out.visits.push_back(Visit{f[0], *seq, *poi, *ts});
  }
  std::stable_sort(out.visits.begin(), out.visits.end(), [](const Visit& a, const Visit& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    if (a.seq_id != b.seq_id) return a.seq_id < b.seq_id;
    return a.timestamp < b.timestamp;
  });
  return out;
}

std::vector<Trajectory> extract_trajectories(const std::vector<Visit>& visits,
                                             const PoiCatalog& catalog, int min_len) {
  std::vector<Trajectory> out;
  std::size_t i = 0;
  while (i < visits.size()) {
    std::size_t j = i;
    Trajectory t;
    while (j < visits.size() && visits[j].user_id == visits[i].user_id &&
           visits[j].seq_id == visits[i].seq_id) {
      const PoiIndex p = catalog.index_of(visits[j].poi_id);
      if (t.pois.empty() || t.pois.back() != p) {
        t.pois.push_back(p);
        t.times.push_back(visits[j].timestamp);
      }
      ++j;
    }
    if (t.length() >= min_len) out.push_back(std::move(t));
    i = j;
  }
  return out;
}

Query make_query(const Trajectory& t) {
  if (t.pois.empty()) throw Error("make_query: empty trajectory");
  return Query{t.pois.front(), t.times.front(), t.pois.back(), t.times.back(), t.length()};
}

CorpusSplit split_corpus(const std::vector<Trajectory>& trajectories, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error("ratios must sum to 1");
  }
  if (trajectories.size() < 3) throw Error("split_corpus: need at least 3 trajectories");

  std::vector<std::size_t> order(trajectories.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<double>(trajectories.size());
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
  const auto n_val = std::min(static_cast<std::size_t>(std::llround(ratios.val * n)),
                              trajectories.size() - n_train);

  CorpusSplit split;
  split.seed = seed;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Trajectory& t = trajectories[order[r]];
    if (r < n_train) {
      split.train.push_back(t);
    } else if (r < n_train + n_val) {
      split.val.push_back(t);
    } else {
      split.test.push_back(t);
    }
  }
  return split;
}

int hour_bucket(Timestamp t) {
  constexpr Timestamp kDay = 86400;
  const Timestamp in_day = ((t % kDay) + kDay) % kDay;
  return static_cast<int>(in_day / 3600);
}

void validate(const Trajectory& t, int num_pois) {
  if (t.pois.size() != t.times.size()) throw Error("trajectory: pois/times size mismatch");
  for (std::size_t i = 0; i < t.pois.size(); ++i) {
    if (t.pois[i] < 0 || t.pois[i] >= num_pois) {
      throw Error("trajectory: vocabulary index " + std::to_string(t.pois[i]) + " out of range");
    }
    if (i > 0 && t.times[i] < t.times[i - 1]) throw Error("trajectory: times decrease");
    if (i > 0 && t.pois[i] == t.pois[i - 1]) throw Error("trajectory: consecutive duplicate POI");
  }
}

}  // namespace artrip
