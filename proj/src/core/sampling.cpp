#include "sampling.hpp"

#include <cmath>
#include <numeric>

#include "rng.hpp"

namespace hsi {

std::vector<std::size_t> apportion(const std::vector<std::size_t>& class_sizes, double fraction,
                                   std::size_t min_per_class) {
  const std::size_t labeled = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labeled)));
  const std::size_t k = class_sizes.size();
  std::vector<std::size_t> quota(k, 0);
  if (labeled == 0) return quota;

  // Integer largest-remainder: exact share is total*n_c/labeled.
  std::vector<std::size_t> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const uint128 num = static_cast<uint128>(total) * class_sizes[c];
    quota[c] = static_cast<std::size_t>(num / labeled);
    remainder[c] = static_cast<std::size_t>(num % labeled);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total && i < k; ++i, ++assigned) ++quota[order[i]];

  std::vector<std::size_t> floor(k);
  std::size_t floor_sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    floor[c] = std::min(min_per_class, class_sizes[c]);
    floor_sum += floor[c];
  }
  if (floor_sum > total) {
    fail(ErrorCode::FractionTooSmall,
         "fraction " + std::to_string(fraction) + " yields " + std::to_string(total) +
             " training pixels but min_per_class requires " + std::to_string(floor_sum));
  }
  for (std::size_t c = 0; c < k; ++c) {
    while (quota[c] < floor[c]) {
      std::size_t donor = k;
      for (std::size_t d = 0; d < k; ++d) {
        if (quota[d] <= floor[d]) continue;
        if (donor == k || quota[d] - floor[d] > quota[donor] - floor[donor]) donor = d;
      }
      if (donor == k) fail(ErrorCode::Internal, "apportion: no donor class");
      --quota[donor];
      ++quota[c];
    }
  }
  return quota;
}

Split split(const LabelMap& labels, const SplitSpec& spec) {
  validate(labels);
  if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "split fraction must lie in (0,1), got " + std::to_string(spec.fraction));
  }
  const std::size_t n = labels.labels.size();
  if (labels.labeled_count() == 0) fail(ErrorCode::EmptyClass, "label map has no labeled pixels");

  Split out{make_mask(labels.dims()), make_mask(labels.dims())};
  SplitMix64 rng(spec.seed);

  auto take = [&](std::vector<std::size_t>& pool, std::size_t quota) {
    shuffle(pool, rng);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (i < quota ? out.train : out.test).mask[pool[i]] = 1;
    }
  };

  if (!spec.stratified) {
    std::vector<std::size_t> pool;
    for (std::size_t p = 0; p < n; ++p) {
      if (labels.labels[p] != 0) pool.push_back(p);
    }
    const auto quota = apportion({pool.size()}, spec.fraction, spec.min_per_class);
    take(pool, quota[0]);
    return out;
  }

  std::vector<std::vector<std::size_t>> per_class(labels.num_classes);
  for (std::size_t p = 0; p < n; ++p) {
    if (labels.labels[p] != 0) per_class[labels.labels[p] - 1].push_back(p);
  }
  std::vector<std::size_t> sizes(per_class.size());
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].empty()) {
      fail(ErrorCode::EmptyClass, "class " + std::to_string(c + 1) + " has no labeled pixels");
    }
    sizes[c] = per_class[c].size();
  }
  const auto quota = apportion(sizes, spec.fraction, spec.min_per_class);
  for (std::size_t c = 0; c < per_class.size(); ++c) take(per_class[c], quota[c]);
  return out;
}

}  // namespace hsi
