#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "types.hpp"

namespace hsi {

struct SlicConfig {
  std::size_t n = 10000;
  double compactness = 10.0;
  std::size_t iterations = 10;
  std::uint64_t seed = 0;  // SLIC itself draws no random numbers
};

/// sRGB (D65) to CIE L*a*b*. Gamma expansion, the standard sRGB->XYZ matrix,
/// white point (0.95047, 1, 1.08883), cube-root companding with the linear
/// segment below 0.008856.
std::array<double, 3> srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// k-means in (L,a,b,x,y) with d^2 = d_lab^2 + (compactness/S)^2 d_xy^2 and
/// S = sqrt(N/n), restricted to a 2S window around each center, followed by
/// enforce_connectivity.
SuperpixelMap slic(const RgbImage& image, const SlicConfig& config);

/// Seeded watershed over the 4-connected pixel graph driven by edge
/// affinities. Seeds come from a ceil(sqrt(nW/H)) x ceil(sqrt(nH/W)) grid,
/// trimmed to the n positions of lowest boundary cost (1 - mean incident
/// affinity; equal costs ordered by a permutation drawn from `seed`). Regions
/// then grow by always taking the unassigned pixel reachable over the
/// highest-affinity edge (ties: smaller pixel index, then smaller region).
SuperpixelMap affinity_superpixels(const AffinityMap& aff, std::size_t n, std::uint64_t seed);

/// Splits every segment into 4-connected components, merges components
/// smaller than a quarter of the mean segment size into their largest
/// adjacent neighbour, and renumbers ids by first appearance.
SuperpixelMap enforce_connectivity(const SuperpixelMap& sp);

/// True when every segment is a single 4-connected component.
bool segments_connected(const SuperpixelMap& sp);

}  // namespace hsi
