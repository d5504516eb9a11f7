#include "superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "parallel.hpp"
#include "rng.hpp"

namespace hsi {

std::array<double, 3> srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto linear = [](std::uint8_t v) {
    const double c = v / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = linear(r), gl = linear(g), bl = linear(b);
  const double x = (0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl) / 0.95047;
  const double y = (0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl) / 1.0;
  const double z = (0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl) / 1.08883;
  auto f = [](double t) { return t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0; };
  const double fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

namespace {

struct Center {
  double l, a, b, y, x;
};

std::size_t clamp_round(double v, std::size_t hi) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(std::max(v, 1.0))), 1, hi);
}

}  // namespace

SuperpixelMap slic(const RgbImage& image, const SlicConfig& config) {
  validate(image);
  const std::size_t h = image.height, w = image.width, n = h * w;
  if (config.n == 0) fail(ErrorCode::InvalidArgument, "superpixel count must be >= 1");
  if (config.n > n) {
    fail(ErrorCode::TooManySuperpixels, "requested " + std::to_string(config.n) + " superpixels for " +
                                            std::to_string(n) + " pixels");
  }
  if (config.iterations == 0) fail(ErrorCode::InvalidArgument, "SLIC iterations must be >= 1");
  if (!(config.compactness >= 0.0)) fail(ErrorCode::InvalidArgument, "compactness must be >= 0");

  std::vector<std::array<double, 3>> lab(n);
  parallel_for(n, [&](std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      lab[p] = srgb_to_lab(image.rgb[3 * p], image.rgb[3 * p + 1], image.rgb[3 * p + 2]);
    }
  });

  const double step = std::sqrt(static_cast<double>(n) / static_cast<double>(config.n));
  const std::size_t ny = clamp_round(static_cast<double>(h) / step, h);
  const std::size_t nx = clamp_round(static_cast<double>(w) / step, w);
  const double cell_h = static_cast<double>(h) / static_cast<double>(ny);
  const double cell_w = static_cast<double>(w) / static_cast<double>(nx);

  auto lab_dist2 = [&](std::size_t p, std::size_t q) {
    const auto& u = lab[p];
    const auto& v = lab[q];
    return (u[0] - v[0]) * (u[0] - v[0]) + (u[1] - v[1]) * (u[1] - v[1]) + (u[2] - v[2]) * (u[2] - v[2]);
  };
  auto gradient = [&](std::size_t y, std::size_t x) {
    const std::size_t xl = x > 0 ? x - 1 : x, xr = x + 1 < w ? x + 1 : x;
    const std::size_t yu = y > 0 ? y - 1 : y, yd = y + 1 < h ? y + 1 : y;
    return lab_dist2(y * w + xr, y * w + xl) + lab_dist2(yd * w + x, yu * w + x);
  };

  // Grid init; centers move to the lowest-gradient pixel of their 3x3
  // neighbourhood when cells are wide enough that neighbourhoods cannot collide.
  const bool perturb = cell_h >= 3.0 && cell_w >= 3.0;
  std::vector<Center> centers;
  centers.reserve(ny * nx);
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      double cy = (static_cast<double>(i) + 0.5) * cell_h - 0.5;
      double cx = (static_cast<double>(j) + 0.5) * cell_w - 0.5;
      auto py = static_cast<std::size_t>(std::clamp(std::lround(cy), 0L, static_cast<long>(h - 1)));
      auto px = static_cast<std::size_t>(std::clamp(std::lround(cx), 0L, static_cast<long>(w - 1)));
      if (perturb) {
        double best = gradient(py, px);
        std::size_t by = py, bx = px;
        for (std::size_t yy = py - 1; yy <= py + 1; ++yy) {
          for (std::size_t xx = px - 1; xx <= px + 1; ++xx) {
            const double g = gradient(yy, xx);
            if (g < best) {
              best = g;
              by = yy;
              bx = xx;
            }
          }
        }
        if (by != py || bx != px) {
          py = by;
          px = bx;
          cy = static_cast<double>(py);
          cx = static_cast<double>(px);
        }
      }
      const auto& c = lab[py * w + px];
      centers.push_back({c[0], c[1], c[2], cy, cx});
    }
  }

  std::vector<SegmentId> labels(n);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto i = std::min(ny - 1, static_cast<std::size_t>(static_cast<double>(y) / cell_h));
      const auto j = std::min(nx - 1, static_cast<std::size_t>(static_cast<double>(x) / cell_w));
      labels[y * w + x] = static_cast<SegmentId>(i * nx + j);
    }
  }

  const double radius = std::max(cell_h, cell_w);
  const double spatial = (config.compactness / step) * (config.compactness / step);
  std::vector<double> dist(n);

  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    // Each worker owns a band of rows and visits centers in index order, so
    // ties always go to the lowest center index whatever the worker count.
    parallel_for(h, [&](std::size_t r0, std::size_t r1) {
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const Center& c = centers[k];
        const double ylo = std::max(static_cast<double>(r0), std::ceil(c.y - radius));
        const double yhi = std::min(static_cast<double>(r1) - 1.0, std::floor(c.y + radius));
        if (ylo > yhi) continue;
        const auto x0 = static_cast<std::size_t>(std::max(0.0, std::ceil(c.x - radius)));
        const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(w) - 1.0, std::floor(c.x + radius)));
        for (auto y = static_cast<std::size_t>(ylo); y <= static_cast<std::size_t>(yhi); ++y) {
          for (std::size_t x = x0; x <= x1; ++x) {
            const std::size_t p = y * w + x;
            const auto& v = lab[p];
            const double dl = v[0] - c.l, da = v[1] - c.a, db = v[2] - c.b;
            const double dy = static_cast<double>(y) - c.y, dx = static_cast<double>(x) - c.x;
            const double d = dl * dl + da * da + db * db + spatial * (dy * dy + dx * dx);
            if (d < dist[p]) {
              dist[p] = d;
              labels[p] = static_cast<SegmentId>(k);
            }
          }
        }
      }
    });

    std::vector<Center> sums(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      Center& s = sums[labels[p]];
      s.l += lab[p][0];
      s.a += lab[p][1];
      s.b += lab[p][2];
      s.y += static_cast<double>(p / w);
      s.x += static_cast<double>(p % w);
      ++counts[labels[p]];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[k]);
      centers[k] = {sums[k].l * inv, sums[k].a * inv, sums[k].b * inv, sums[k].y * inv, sums[k].x * inv};
    }
  }

  return enforce_connectivity(compact_segments(image.dims(), labels));
}

// ---- connectivity ------------------------------------------------------

namespace {

/// 4-connected components of equal-id regions, numbered in raster order.
std::vector<std::size_t> label_components(const SuperpixelMap& sp, std::size_t& count) {
  const std::size_t h = sp.height, w = sp.width, n = h * w;
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(n, kUnset);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != kUnset) continue;
    const SegmentId id = sp.segment_ids[start];
    comp[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / w, x = p % w;
      auto visit = [&](std::size_t q) {
        if (comp[q] == kUnset && sp.segment_ids[q] == id) {
          comp[q] = count;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    ++count;
  }
  return comp;
}

}  // namespace

bool segments_connected(const SuperpixelMap& sp) {
  std::size_t components = 0;
  label_components(sp, components);
  return components == compact_segments(sp.dims(), sp.segment_ids).num_segments;
}

SuperpixelMap enforce_connectivity(const SuperpixelMap& sp) {
  if (sp.segment_ids.size() != sp.dims().pixels() || sp.segment_ids.empty()) {
    fail(ErrorCode::DimensionMismatch, "superpixel map size does not match its dimensions");
  }
  const std::size_t h = sp.height, w = sp.width, n = h * w;
  const std::size_t segments = compact_segments(sp.dims(), sp.segment_ids).num_segments;

  std::size_t count = 0;
  const auto comp = label_components(sp, count);

  std::vector<std::size_t> size(count, 0);
  for (std::size_t c : comp) ++size[c];

  std::vector<std::vector<std::size_t>> adjacent(count);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t x = p % w;
    if (x + 1 < w && comp[p] != comp[p + 1]) {
      adjacent[comp[p]].push_back(comp[p + 1]);
      adjacent[comp[p + 1]].push_back(comp[p]);
    }
    if (p + w < n && comp[p] != comp[p + w]) {
      adjacent[comp[p]].push_back(comp[p + w]);
      adjacent[comp[p + w]].push_back(comp[p]);
    }
  }
  for (auto& a : adjacent) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<std::size_t> parent(count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t c) {
    while (parent[c] != c) c = parent[c] = parent[parent[c]];
    return c;
  };

  // size < mean/4  <=>  4 * size * segments < n
  auto small = [&](std::size_t s) { return 4 * s * segments < n; };

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return size[a] < size[b]; });

  for (std::size_t c : order) {
    if (find(c) != c || !small(size[c])) continue;
    std::size_t target = count;
    for (std::size_t nb : adjacent[c]) {
      const std::size_t r = find(nb);
      if (r == c) continue;
      if (target == count || size[r] > size[target] || (size[r] == size[target] && r < target)) target = r;
    }
    if (target == count) continue;  // the whole image is one component
    parent[c] = target;
    size[target] += size[c];
    auto& into = adjacent[target];
    into.insert(into.end(), adjacent[c].begin(), adjacent[c].end());
    adjacent[c].clear();
    adjacent[c].shrink_to_fit();
  }

  std::vector<SegmentId> ids(n);
  for (std::size_t p = 0; p < n; ++p) ids[p] = static_cast<SegmentId>(find(comp[p]));
  return compact_segments(sp.dims(), ids);
}

// ---- affinity watershed ------------------------------------------------

SuperpixelMap affinity_superpixels(const AffinityMap& aff, std::size_t n, std::uint64_t seed) {
  validate(aff);
  const std::size_t h = aff.height, w = aff.width, pixels = h * w;
  if (n == 0) fail(ErrorCode::InvalidArgument, "superpixel count must be >= 1");
  if (n > pixels) {
    fail(ErrorCode::TooManySuperpixels, "requested " + std::to_string(n) + " superpixels for " +
                                            std::to_string(pixels) + " pixels");
  }

  const double nd = static_cast<double>(n), hd = static_cast<double>(h), wd = static_cast<double>(w);
  std::size_t gx = std::min(w, static_cast<std::size_t>(std::ceil(std::sqrt(nd * wd / hd) - 1e-9)));
  std::size_t gy = std::min(h, static_cast<std::size_t>(std::ceil(std::sqrt(nd * hd / wd) - 1e-9)));
  gx = std::max<std::size_t>(gx, 1);
  gy = std::max<std::size_t>(gy, 1);
  while (gx * gy < n) {
    if (gx < w) ++gx; else ++gy;
  }

  auto cost = [&](std::size_t p) {
    const std::size_t y = p / w, x = p % w;
    double sum = 0.0;
    int edges = 0;
    if (x + 1 < w) { sum += aff.right[p]; ++edges; }
    if (x > 0) { sum += aff.right[p - 1]; ++edges; }
    if (y + 1 < h) { sum += aff.down[p]; ++edges; }
    if (y > 0) { sum += aff.down[p - w]; ++edges; }
    return edges ? 1.0 - sum / edges : 0.0;
  };

  std::vector<std::size_t> candidates;
  candidates.reserve(gx * gy);
  for (std::size_t i = 0; i < gy; ++i) {
    const auto y = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * hd / static_cast<double>(gy));
    for (std::size_t j = 0; j < gx; ++j) {
      const auto x = static_cast<std::size_t>((static_cast<double>(j) + 0.5) * wd / static_cast<double>(gx));
      candidates.push_back(std::min(y, h - 1) * w + std::min(x, w - 1));
    }
  }
  SplitMix64 rng(seed);
  shuffle(candidates, rng);
  std::vector<double> costs(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) costs[i] = cost(candidates[i]);
  std::vector<std::size_t> rank(candidates.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

  std::vector<std::size_t> seeds;
  seeds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seeds.push_back(candidates[rank[i]]);
  std::sort(seeds.begin(), seeds.end());

  constexpr auto kUnset = std::numeric_limits<SegmentId>::max();
  std::vector<SegmentId> region(pixels, kUnset);

  struct Edge {
    float affinity;
    std::size_t target;
    SegmentId label;
  };
  auto lower_priority = [](const Edge& a, const Edge& b) {
    if (a.affinity != b.affinity) return a.affinity < b.affinity;
    if (a.target != b.target) return a.target > b.target;
    return a.label > b.label;
  };
  std::priority_queue<Edge, std::vector<Edge>, decltype(lower_priority)> queue(lower_priority);

  auto push_neighbours = [&](std::size_t p) {
    const std::size_t y = p / w, x = p % w;
    const SegmentId label = region[p];
    if (x + 1 < w && region[p + 1] == kUnset) queue.push({aff.right[p], p + 1, label});
    if (x > 0 && region[p - 1] == kUnset) queue.push({aff.right[p - 1], p - 1, label});
    if (y + 1 < h && region[p + w] == kUnset) queue.push({aff.down[p], p + w, label});
    if (y > 0 && region[p - w] == kUnset) queue.push({aff.down[p - w], p - w, label});
  };

  for (std::size_t k = 0; k < seeds.size(); ++k) region[seeds[k]] = static_cast<SegmentId>(k);
  for (std::size_t s : seeds) push_neighbours(s);
  while (!queue.empty()) {
    const Edge e = queue.top();
    queue.pop();
    if (region[e.target] != kUnset) continue;
    region[e.target] = e.label;
    push_neighbours(e.target);
  }
  return compact_segments(aff.dims(), region);
}

}  // namespace hsi
