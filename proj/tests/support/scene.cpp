#include "scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rng.hpp"

namespace hsi::testing {

namespace {

double gaussian(SplitMix64& rng) {
  const double u1 = std::max(rng.uniform(), std::numeric_limits<double>::min());
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Scene make_scene(const SceneSpec& spec) {
  SplitMix64 rng(spec.seed);
  const std::size_t h = spec.height, w = spec.width, n = h * w, k = spec.classes;

  // A few sinusoids per class keep neighboring bands correlated.
  std::vector<double> spectra(k * spec.bands);
  for (std::size_t c = 0; c < k; ++c) {
    const double base = 0.2 + 0.6 * rng.uniform();
    const double a1 = 0.15 * rng.uniform(), f1 = 1.0 + 3.0 * rng.uniform(), p1 = 6.28 * rng.uniform();
    const double a2 = 0.08 * rng.uniform(), f2 = 4.0 + 6.0 * rng.uniform(), p2 = 6.28 * rng.uniform();
    for (std::size_t b = 0; b < spec.bands; ++b) {
      const double t = static_cast<double>(b) / static_cast<double>(spec.bands);
      spectra[c * spec.bands + b] = base + a1 * std::sin(6.28 * f1 * t + p1) + a2 * std::sin(6.28 * f2 * t + p2);
    }
  }

  const std::size_t sites = k * spec.sites_per_class;
  std::vector<double> sy(sites), sx(sites);
  std::vector<ClassId> site_class(sites);
  std::vector<bool> site_labeled(sites);
  for (std::size_t s = 0; s < sites; ++s) {
    sy[s] = rng.uniform() * static_cast<double>(h);
    sx[s] = rng.uniform() * static_cast<double>(w);
    site_class[s] = static_cast<ClassId>(s % k + 1);
    // the first k sites cover every class, so each class keeps labeled pixels
    site_labeled[s] = s < k || rng.uniform() >= spec.unlabeled_fraction;
  }

  Scene scene;
  scene.cube = {h, w, spec.bands, std::vector<float>(n * spec.bands), "synthetic"};
  std::vector<ClassId> labels(n), truth(n);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < sites; ++s) {
        const double dy = static_cast<double>(y) + 0.5 - sy[s], dx = static_cast<double>(x) + 0.5 - sx[s];
        const double d = dy * dy + dx * dx;
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      const std::size_t p = y * w + x;
      truth[p] = site_class[best];
      labels[p] = site_labeled[best] ? site_class[best] : 0;
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    const double* s = &spectra[(truth[p] - 1) * spec.bands];
    const double gain = 1.0 + 0.1 * gaussian(rng);
    for (std::size_t b = 0; b < spec.bands; ++b) {
      scene.cube.data[b * n + p] = static_cast<float>(gain * s[b] + spec.noise * gaussian(rng));
    }
  }
  scene.labels = make_label_map({h, w}, std::move(labels));
  scene.truth = {h, w, std::move(truth), k};
  return scene;
}

}  // namespace hsi::testing
