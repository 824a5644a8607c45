// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace artrip {

/// Raised for malformed input, violated preconditions and invalid configs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal conditions collected by operations that degrade gracefully
/// (e.g. guidance past m_max, zero-norm logit rows). Callers that do not care
/// pass nullptr.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace artrip
