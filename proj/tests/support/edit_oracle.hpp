// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "scenforge/metrics.hpp"

namespace scenforge::testing {

/// Minimum cost over every edit script, enumerated by recursion without
/// memoisation. Exponential; only for short sequences.
inline double brute_force_edit(const ActionSequence& a, std::size_t i, const ActionSequence& b, std::size_t j,
                               const metrics::CostModel& c) {
  if (i == a.size() && j == b.size()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  if (i < a.size()) best = std::min(best, c.remove(a[i]) + brute_force_edit(a, i + 1, b, j, c));
  if (j < b.size()) best = std::min(best, c.insert(b[j]) + brute_force_edit(a, i, b, j + 1, c));
  if (i < a.size() && j < b.size())
    best = std::min(best, c.replace(a[i], b[j]) + brute_force_edit(a, i + 1, b, j + 1, c));
  return best;
}

/// All sequences of length <= max_len over `alphabet`.
inline std::vector<ActionSequence> all_sequences(const std::vector<Action>& alphabet, std::size_t max_len) {
  std::vector<ActionSequence> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t k = begin; k < end; ++k)
      for (Action x : alphabet) {
        auto s = out[k];
        s.push_back(x);
        out.push_back(std::move(s));
      }
    begin = end;
  }
  return out;
}

inline const std::vector<Action>& oracle_alphabet() {
  static const std::vector<Action> a = {Action::follow_lane, Action::change_left, Action::change_right,
                                        Action::accelerate,  Action::decelerate,  Action::brake};
  return a;
}

}  // namespace scenforge::testing
