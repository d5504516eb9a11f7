#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Written for clarity, not speed, and sharing no code with the library.

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "types.hpp"

namespace hsi::oracle {

/// Empty string when `sp` is a full partition with ids 0..num_segments-1, all
/// used, and every segment 4-connected; otherwise a description of the fault.
inline std::string partition_fault(const SuperpixelMap& sp) {
  const std::size_t h = sp.height, w = sp.width, n = h * w;
  if (sp.segment_ids.size() != n) return "size mismatch";
  std::vector<std::size_t> size(sp.num_segments, 0);
  for (auto id : sp.segment_ids) {
    if (id >= sp.num_segments) return "id " + std::to_string(id) + " out of range";
    ++size[id];
  }
  for (std::size_t s = 0; s < size.size(); ++s) {
    if (size[s] == 0) return "id " + std::to_string(s) + " unused";
  }
  std::vector<bool> seen(n, false);
  std::set<std::uint32_t> started;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    const auto id = sp.segment_ids[start];
    if (!started.insert(id).second) return "segment " + std::to_string(id) + " is disconnected";
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const std::size_t y = p / w, x = p % w;
      const std::size_t nb[4] = {y > 0 ? p - w : n, y + 1 < h ? p + w : n, x > 0 ? p - 1 : n,
                                 x + 1 < w ? p + 1 : n};
      for (std::size_t q : nb) {
        if (q < n && !seen[q] && sp.segment_ids[q] == id) {
          seen[q] = true;
          queue.push_back(q);
        }
      }
    }
  }
  return {};
}

/// Per-segment histogram and a full scan for the largest count; the first
/// class reaching the maximum (smallest id) wins.
inline std::vector<std::uint16_t> majority_vote(const std::vector<std::uint16_t>& z,
                                                const std::vector<std::uint32_t>& segments) {
  std::map<std::uint32_t, std::map<std::uint16_t, std::size_t>> hist;
  for (std::size_t p = 0; p < z.size(); ++p) ++hist[segments[p]][z[p]];
  std::map<std::uint32_t, std::uint16_t> winner;
  for (const auto& [seg, counts] : hist) {
    std::size_t best = 0;
    std::uint16_t best_class = 0;
    for (const auto& [cls, count] : counts) {  // ascending class id
      if (count > best) {
        best = count;
        best_class = cls;
      }
    }
    winner[seg] = best_class;
  }
  std::vector<std::uint16_t> out(z.size());
  for (std::size_t p = 0; p < z.size(); ++p) out[p] = winner[segments[p]];
  return out;
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

/// Two-pass mean and sample std in long double.
inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  long double sum = 0.0L;
  for (double x : v) sum += x;
  const long double mean = sum / static_cast<long double>(v.size());
  long double sq = 0.0L;
  for (double x : v) sq += (x - mean) * (x - mean);
  s.mean = static_cast<double>(mean);
  s.std = v.size() > 1 ? static_cast<double>(std::sqrt(sq / static_cast<long double>(v.size() - 1))) : 0.0;
  s.min = v[0];
  s.max = v[0];
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  return s;
}

}  // namespace hsi::oracle
