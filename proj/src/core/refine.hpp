#pragma once

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace hsi {

/// Class histogram of one superpixel. counts[c] is the number of member
/// pixels predicted as class c; counts[0] stays 0 for total maps.
struct VoteTally {
  std::vector<std::uint32_t> counts;
  std::size_t size = 0;
};

/// Builds one tally per segment from the predictions in `z`.
std::vector<VoteTally> tally_votes(const ClassMap& z, const SuperpixelMap& sp);

/// Class with the largest share of the segment; the smallest id wins ties.
ClassId dominant_class(const VoteTally& tally);

/// Dominance analysis: every pixel takes the dominant class of its segment.
ClassMap refine(const ClassMap& z, const SuperpixelMap& sp);

/// Replaces predictions on training pixels by their known labels before
/// voting. Optional extension; the default pipeline votes on z alone.
ClassMap pin_training_labels(const ClassMap& z, const LabelMap& truth, const PixelMask& train_mask);

struct SegmentFlips {
  SegmentId segment = 0;
  std::size_t fixed = 0;   // wrong in z, right in y
  std::size_t broken = 0;  // right in z, wrong in y
};

struct RefinementDelta {
  std::size_t test_pixels = 0;
  std::size_t correct_before = 0;
  std::size_t correct_after = 0;
  double oa_before = 0.0;
  double oa_after = 0.0;
  std::size_t changed_pixels = 0;      // over the whole raster
  std::vector<SegmentFlips> flips;     // segments with at least one scored flip

  long long net_flips() const;
};

/// OA before/after refinement over the test mask, with per-segment flip
/// counts. correct_after - correct_before == sum(fixed) - sum(broken).
RefinementDelta refinement_delta(const ClassMap& z, const ClassMap& y, const LabelMap& truth,
                                 const PixelMask& test_mask, const SuperpixelMap& sp);

}  // namespace hsi
