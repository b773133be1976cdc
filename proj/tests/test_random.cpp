#include "catch_amalgamated.hpp"

#include <set>

#include "sjc/parallel.hpp"
#include "sjc/random.hpp"

using namespace sjc;

TEST_CASE("uniforms are deterministic and inside the open interval") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = uniform_at(42, i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == uniform_at(42, i));
  }
  CHECK(uniform_at(42, 0) != uniform_at(43, 0));
}

TEST_CASE("derived seeds differ across streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(5, i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("counter generator replays") {
  CounterRng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CounterRng c(10);
  CHECK(a() != c());
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
}
