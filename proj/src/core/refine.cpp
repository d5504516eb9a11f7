#include "refine.hpp"

#include <map>

#include "parallel.hpp"

namespace hsi {

std::vector<VoteTally> tally_votes(const ClassMap& z, const SuperpixelMap& sp) {
  validate(z);
  validate(sp);
  require_same_dims(z.dims(), sp.dims(), "class map vs superpixel map");

  std::vector<VoteTally> tallies(sp.num_segments);
  for (auto& t : tallies) t.counts.assign(z.num_classes + 1, 0);
  for (std::size_t p = 0; p < z.classes.size(); ++p) {
    VoteTally& t = tallies[sp.segment_ids[p]];
    ++t.counts[z.classes[p]];
    ++t.size;
  }
  return tallies;
}

ClassId dominant_class(const VoteTally& tally) {
  if (tally.size == 0) fail(ErrorCode::EmptySegment, "dominant class of an empty segment");
  // count/|S| has a common denominator, so the argmax is over raw counts.
  std::size_t best = 0;
  std::uint32_t best_count = 0;
  for (std::size_t c = 1; c < tally.counts.size(); ++c) {
    if (tally.counts[c] > best_count) {
      best = c;
      best_count = tally.counts[c];
    }
  }
  if (best == 0) fail(ErrorCode::EmptySegment, "segment has no votes for any class");
  return static_cast<ClassId>(best);
}

ClassMap refine(const ClassMap& z, const SuperpixelMap& sp) {
  const auto tallies = tally_votes(z, sp);
  std::vector<ClassId> winner(tallies.size());
  parallel_for(tallies.size(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) winner[s] = dominant_class(tallies[s]);
  });
  ClassMap y{z.height, z.width, std::vector<ClassId>(z.classes.size()), z.num_classes};
  for (std::size_t p = 0; p < y.classes.size(); ++p) y.classes[p] = winner[sp.segment_ids[p]];
  return y;
}

ClassMap pin_training_labels(const ClassMap& z, const LabelMap& truth, const PixelMask& train_mask) {
  validate(z);
  require_same_dims(z.dims(), truth.dims(), "class map vs label map");
  require_same_dims(z.dims(), train_mask.dims(), "class map vs train mask");
  ClassMap out = z;
  out.num_classes = std::max(z.num_classes, truth.num_classes);
  for (std::size_t p = 0; p < out.classes.size(); ++p) {
    if (train_mask[p] && truth.labels[p] != 0) out.classes[p] = truth.labels[p];
  }
  return out;
}

long long RefinementDelta::net_flips() const {
  long long net = 0;
  for (const auto& f : flips) net += static_cast<long long>(f.fixed) - static_cast<long long>(f.broken);
  return net;
}

RefinementDelta refinement_delta(const ClassMap& z, const ClassMap& y, const LabelMap& truth,
                                 const PixelMask& test_mask, const SuperpixelMap& sp) {
  require_same_dims(z.dims(), y.dims(), "raw vs refined class map");
  require_same_dims(z.dims(), truth.dims(), "class map vs label map");
  require_same_dims(z.dims(), test_mask.dims(), "class map vs test mask");
  require_same_dims(z.dims(), sp.dims(), "class map vs superpixel map");

  RefinementDelta d;
  std::map<SegmentId, SegmentFlips> flips;
  for (std::size_t p = 0; p < z.classes.size(); ++p) {
    if (z.classes[p] != y.classes[p]) ++d.changed_pixels;
    if (!test_mask[p]) continue;
    if (truth.labels[p] == 0) {
      fail(ErrorCode::InvalidArgument, "test mask selects unlabeled pixel " + std::to_string(p));
    }
    ++d.test_pixels;
    const bool before = z.classes[p] == truth.labels[p];
    const bool after = y.classes[p] == truth.labels[p];
    d.correct_before += before;
    d.correct_after += after;
    if (before != after) {
      auto& f = flips[sp.segment_ids[p]];
      f.segment = sp.segment_ids[p];
      (after ? f.fixed : f.broken) += 1;
    }
  }
  if (d.test_pixels == 0) fail(ErrorCode::EmptyMask, "test mask selects no pixels");
  const double total = static_cast<double>(d.test_pixels);
  d.oa_before = static_cast<double>(d.correct_before) / total;
  d.oa_after = static_cast<double>(d.correct_after) / total;
  d.flips.reserve(flips.size());
  for (auto& [id, f] : flips) d.flips.push_back(f);
  return d;
}

}  // namespace hsi
