// SPDX-License-Identifier: Apache-2.0
//
// make_synthetic_data <dir> [city ...]
// Writes poi-<code>.csv / userVisits-<code>.csv stand-ins for the named
// cities (default: all four).

#include <iostream>

#include "artrip/error.hpp"
#include "artrip/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_synthetic_data <dir> [Edinburgh|Glasgow|Osaka|Toronto ...]\n";
    return 2;
  }
  try {
    std::vector<artrip::CityProfile> cities;
    for (int i = 2; i < argc; ++i) cities.push_back(artrip::city_profile(argv[i]));
    if (cities.empty()) cities = artrip::flickr_city_profiles();
    for (const auto& c : cities) {
      const auto files = artrip::write_synthetic_city(c, argv[1]);
      std::cout << files.poi_file.string() << "\n" << files.visits_file.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
