#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>
#include <sstream>

#include "maem/replay_buffer.hpp"
#include "maem/rng.hpp"

using namespace maem;

namespace {

// Oracle cosine, written independently of the buffer implementation.
double oracle_cos(const EmbeddingCode& a, const EmbeddingCode& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12) na = 1e-12;
  if (nb < 1e-12) nb = 1e-12;
  return dot / (na * nb);
}

EmbeddingCode random_code(std::size_t dim, Rng& rng) {
  EmbeddingCode v(dim);
  for (double& x : v) x = rng.uniform(-3, 3);
  return v;
}

}  // namespace

TEST_CASE("push follows FIFO semantics") {
  SUBCASE("capacity 2 evicts the oldest") {
    ReplayBuffer buf(2, 1);
    buf.push({1});
    buf.push({2});
    buf.push({3});
    REQUIRE(buf.size() == 2);
    CHECK(buf.entry(0)[0] == 2);
    CHECK(buf.entry(1)[0] == 3);
  }
  SUBCASE("push into empty") {
    ReplayBuffer buf(4, 2);
    buf.push({1, 2});
    CHECK(buf.size() == 1);
  }
  SUBCASE("exactly at capacity keeps the first entry") {
    ReplayBuffer buf(1024, 1);
    for (int i = 0; i < 1024; ++i) buf.push({static_cast<double>(i)});
    CHECK(buf.size() == 1024);
    CHECK(buf.entry(0)[0] == 0.0);
    CHECK(buf.entry(1023)[0] == 1023.0);
  }
  SUBCASE("width mismatch rejected") {
    ReplayBuffer buf(4, 2);
    CHECK_THROWS_AS(buf.push({1, 2, 3}), std::invalid_argument);
  }
}

TEST_CASE("nearest_by_cosine examples") {
  SUBCASE("hand-computed two-entry buffer") {
    ReplayBuffer buf(8, 2);
    buf.push({1, 0});
    buf.push({0, 1});
    auto [code, sim, index] = buf.nearest_by_cosine({0.9, 0.1});
    CHECK(code == EmbeddingCode{1, 0});
    CHECK(index == 0);
    // both cosines by hand: 0.9/sqrt(0.82) vs 0.1/sqrt(0.82)
    CHECK(sim == doctest::Approx(0.9939).epsilon(1e-4));
    CHECK(sim == doctest::Approx(0.9 / std::sqrt(0.82)).epsilon(1e-14));
  }
  SUBCASE("self query returns similarity 1") {
    ReplayBuffer buf(8, 3);
    buf.push({0.3, -0.4, 1.2});
    auto res = buf.nearest_by_cosine({0.3, -0.4, 1.2});
    CHECK(res.similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.code == EmbeddingCode{0.3, -0.4, 1.2});
  }
  SUBCASE("symmetric tie goes to the oldest entry") {
    ReplayBuffer buf(8, 2);
    buf.push({1, 0});
    buf.push({-1, 0});
    auto res = buf.nearest_by_cosine({0, 1});
    CHECK(res.code == EmbeddingCode{1, 0});
    CHECK(res.index == 0);
    CHECK(res.similarity == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("empty buffer raises") {
    ReplayBuffer buf(8, 2);
    CHECK_THROWS_AS(buf.nearest_by_cosine({1, 0}), std::runtime_error);
  }
}

TEST_CASE("property: push/evict leaves the last min(L, capacity) entries") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t capacity = 1 + rng.uniform_int(16);
    const std::size_t length = rng.uniform_int(48);
    ReplayBuffer buf(capacity, 1);
    std::deque<double> model;
    for (std::size_t i = 0; i < length; ++i) {
      const double v = rng.uniform(-1, 1);
      buf.push({v});
      model.push_back(v);
      if (model.size() > capacity) model.pop_front();
      REQUIRE(buf.size() <= capacity);
    }
    REQUIRE(buf.size() == model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
      REQUIRE(buf.entry(i)[0] == model[i]);
    }
  }
}

TEST_CASE("property: nearest_by_cosine agrees with the oracle scan") {
  Rng rng(23);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t dim = 1 + rng.uniform_int(6);
    const std::size_t count = 1 + rng.uniform_int(32);
    ReplayBuffer buf(64, dim);
    std::vector<EmbeddingCode> entries;
    for (std::size_t i = 0; i < count; ++i) {
      EmbeddingCode v = random_code(dim, rng);
      buf.push(v);
      entries.push_back(v);
    }
    EmbeddingCode query = random_code(dim, rng);

    double best = -2.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double s = oracle_cos(query, entries[i]);
      if (s > best) {
        best = s;
        best_idx = i;
      }
    }
    auto res = buf.nearest_by_cosine(query);
    REQUIRE(res.similarity == best);
    REQUIRE(res.index == best_idx);
    REQUIRE(res.similarity >= -1.0 - 1e-12);
    REQUIRE(res.similarity <= 1.0 + 1e-12);

    // query never mutates the buffer
    REQUIRE(buf.size() == entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      REQUIRE(buf.entry(i) == entries[i]);
    }
  }
}

TEST_CASE("debug dump lists entries oldest first") {
  ReplayBuffer buf(4, 2);
  buf.push({1, 2});
  buf.push({3, 4});
  std::ostringstream os;
  buf.dump(os);
  CHECK(os.str() == "1,2\n3,4\n");
}
