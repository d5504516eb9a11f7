#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "parallel.hpp"
#include "rng.hpp"

using namespace hsi;

TEST_CASE("SplitMix64 reference outputs") {
  // First outputs for seed 0, as published with the algorithm.
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("below stays in range and shuffle permutes") {
  SplitMix64 rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  shuffle(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  CHECK(derive_seed(5, 1) != derive_seed(5, 2));
}

TEST_CASE("parallel_for covers every index exactly once") {
  for (unsigned threads : {1u, 2u, 3u, 16u}) {
    set_thread_count(threads);
    for (std::size_t n : {0u, 1u, 5u, 1000u}) {
      std::vector<std::atomic<int>> hits(n);
      parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
      });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
  }
  set_thread_count(0);
}

TEST_CASE("nested loops run inline and exceptions propagate") {
  set_thread_count(4);
  std::atomic<int> total{0};
  parallel_for(8, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      parallel_for(10, [&](std::size_t b2, std::size_t e2) { total += static_cast<int>(e2 - b2); });
    }
  });
  CHECK(total == 80);
  CHECK_THROWS_AS(parallel_for(100,
                               [](std::size_t b, std::size_t) {
                                 if (b > 0) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  set_thread_count(0);
}

TEST_CASE("thread count setting") {
  set_thread_count(3);
  CHECK(thread_count() == 3);
  set_thread_count(0);
  CHECK(thread_count() >= 1);
}
