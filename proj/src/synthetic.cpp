// SPDX-License-Identifier: Apache-2.0

#include "artrip/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "artrip/csv.hpp"
#include "artrip/error.hpp"

namespace artrip {

std::vector<CityProfile> flickr_city_profiles() {
  return {
      {"Edinburgh", "Edin", 28, 1454, 5028, 55.9486, -3.1999, 101},
      {"Glasgow", "Glas", 29, 601, 2227, 55.8609, -4.2514, 102},
      {"Osaka", "Osak", 28, 450, 1115, 34.6937, 135.5023, 103},
      {"Toronto", "Toro", 30, 1395, 6057, 43.6532, -79.3832, 104},
  };
}

const CityProfile& city_profile(const std::string& name) {
  static const std::vector<CityProfile> profiles = flickr_city_profiles();
  for (const auto& p : profiles) {
    if (p.name == name || p.code == name) return p;
  }
  throw Error("unknown city '" + name + "'");
}

CityFiles synthetic_city_paths(const CityProfile& city, const std::filesystem::path& dir) {
  return {dir / ("poi-" + city.code + ".csv"), dir / ("userVisits-" + city.code + ".csv")};
}

namespace {

constexpr const char* kThemes[] = {"Park", "Museum", "Historical", "Cultural", "Entertainment",
                                   "Structure", "Shopping", "Religious"};

struct SynthPoi {
  std::int64_t id;
  double lat, lon, weight;
  int theme;
};

double km_between(const SynthPoi& a, const SynthPoi& b) {
  constexpr double kKmPerDeg = 111.2;
  const double dlat = (a.lat - b.lat) * kKmPerDeg;
  const double dlon = (a.lon - b.lon) * kKmPerDeg * std::cos(a.lat * M_PI / 180.0);
  return std::sqrt(dlat * dlat + dlon * dlon);
}

template <typename Rng>
int weighted_pick(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  std::uniform_real_distribution<double> u(0.0, total);
  double target = u(rng), cum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    cum += w[i];
    if (target < cum) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

}  // namespace

CityFiles write_synthetic_city(const CityProfile& city, const std::filesystem::path& dir) {
  std::mt19937_64 rng(city.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> spread(0.0, 0.012);

  std::vector<SynthPoi> pois;
  for (int i = 0; i < city.num_pois; ++i) {
    SynthPoi p;
    p.id = i + 1;
    p.lat = city.center_lat + spread(rng);
    p.lon = city.center_lon + spread(rng) * 1.6;
    p.theme = static_cast<int>(rng() % std::size(kThemes));
    p.weight = 0.0;
    pois.push_back(p);
  }
  // Zipf-like popularity over a random ranking.
  std::vector<int> rank(city.num_pois);
  for (int i = 0; i < city.num_pois; ++i) rank[i] = i;
  std::shuffle(rank.begin(), rank.end(), rng);
  for (int i = 0; i < city.num_pois; ++i) pois[rank[i]].weight = 1.0 / std::pow(i + 1.0, 0.9);

  std::string poi_csv = "poiID,poiName,lat,long,theme\n";
  for (const auto& p : pois) {
    poi_csv += std::to_string(p.id) + "," + city.name + " " + kThemes[p.theme] + " " + std::to_string(p.id) + "," +
               csv::format_double(std::round(p.lat * 1e6) / 1e6) + "," +
               csv::format_double(std::round(p.lon * 1e6) / 1e6) + "," + kThemes[p.theme] + "\n";
  }

  // Sequence lengths before photo bursts: many singletons and pairs.
  const std::vector<double> length_weights{0.0, 0.46, 0.20, 0.11, 0.075, 0.05, 0.035, 0.025, 0.017, 0.012, 0.008};
  // Tourists start between 08:00 and 14:00 on days spread over ten years (UTC).
  const std::int64_t epoch0 = 1262304000;  // 2010-01-01

  std::string visits_csv = "userID,seqID,poiID,dateTaken\n";
  for (int s = 0; s < city.num_sequences; ++s) {
    const int user = static_cast<int>(rng() % static_cast<unsigned>(city.num_users));
    const int length = weighted_pick(length_weights, rng);
    const std::int64_t day = static_cast<std::int64_t>(rng() % 3650);
    std::int64_t t = epoch0 + day * 86400 + 8 * 3600 + static_cast<std::int64_t>(unit(rng) * 6 * 3600);

    std::vector<double> w;
    for (const auto& p : pois) w.push_back(p.weight);
    std::vector<int> route{weighted_pick(w, rng)};
    while (static_cast<int>(route.size()) < length) {
      const int cur = route.back();
      if (route.size() >= 2 && unit(rng) < 0.06) {
        // Return to an earlier POI of the same sequence.
        std::vector<int> earlier;
        for (std::size_t i = 0; i + 1 < route.size(); ++i) {
          if (route[i] != cur) earlier.push_back(route[i]);
        }
        if (!earlier.empty()) {
          route.push_back(earlier[rng() % earlier.size()]);
          continue;
        }
      }
      std::vector<double> next(pois.size(), 0.0);
      for (std::size_t j = 0; j < pois.size(); ++j) {
        if (static_cast<int>(j) == cur) continue;
        const bool seen = std::find(route.begin(), route.end(), static_cast<int>(j)) != route.end();
        const double affinity = pois[j].theme == pois[cur].theme ? 1.8 : 1.0;
        next[j] = std::pow(pois[j].weight, 0.8) * std::exp(-km_between(pois[cur], pois[j]) / 0.9) * affinity *
                  (seen ? 0.15 : 1.0);
      }
      route.push_back(weighted_pick(next, rng));
    }

    for (int poi : route) {
      const int photos = 1 + static_cast<int>(rng() % 5);
      const std::int64_t dwell = 900 + static_cast<std::int64_t>(unit(rng) * 5400);
      for (int k = 0; k < photos; ++k) {
        const std::int64_t at = t + (photos == 1 ? 0 : dwell * k / (photos - 1));
        visits_csv += std::to_string(user) + "@N0" + std::to_string(user % 10) + "," + std::to_string(s + 1) + "," +
                      std::to_string(pois[poi].id) + "," + std::to_string(at) + "\n";
      }
      t += dwell + 600 + static_cast<std::int64_t>(unit(rng) * 1800);
    }
  }

  const CityFiles files = synthetic_city_paths(city, dir);
  csv::write_file(files.poi_file, poi_csv);
  csv::write_file(files.visits_file, visits_csv);
  return files;
}

}  // namespace artrip
