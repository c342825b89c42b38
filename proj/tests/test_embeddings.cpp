#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "cirn/embeddings.hpp"
#include "cirn/errors.hpp"

using namespace cirn;

namespace
{

EmbeddingTable parse(const std::string & text)
{
  std::istringstream in(text);
  return parse_embeddings(in, "test");
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("cosine of identical vectors is exactly one") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(17);
    for (double & x : a) {
      x = n(rng);
    }
    CHECK(cosine_similarity(a, a) == 1.0);
  }
}

TEST_CASE("cosine matches a direct evaluation") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
    }
    CHECK(std::abs(cosine_similarity(a, b) - oracle::cosine(a, b)) < 1e-12);
    CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));
  }
}

TEST_CASE("cosine of opposite vectors is minus one") {
  std::vector<double> a{1.0, -2.0, 3.5};
  std::vector<double> b{-1.0, 2.0, -3.5};
  CHECK(cosine_similarity(a, b) == -1.0);
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
}

TEST_CASE("cosine rejects bad input") {
  std::vector<double> a{1.0, 2.0};
  std::vector<double> z{0.0, 0.0};
  std::vector<double> c{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(cosine_similarity(a, z), DomainError);
  CHECK_THROWS_AS(cosine_similarity(a, c), DomainError);
}

TEST_CASE("parser reads tokens and skips comments") {
  auto t = parse("# header\nCup 1 0 0\nbowl 0.5 0.5 0\n\n");
  CHECK(t.dim() == 3);
  CHECK(t.size() == 2);
  CHECK(t.contains("cup"));
  CHECK(t.contains("CUP"));
  CHECK(t.similarity("cup", "cup") == 1.0);
  CHECK(t.similarity("cup", "bowl") == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("parser errors carry line numbers") {
  try {
    parse("a 1 2\nb 1 x\n");
    FAIL("expected ParseError");
  } catch (const ParseError & e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("a 1 2\nb 1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse("# nothing\n"), ValidationError);
  CHECK_THROWS_AS(parse("a 0 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("a nan 1\n"), ValidationError);
}

TEST_CASE("duplicate tokens keep the last vector") {
  auto t = parse("a 1 0\nb 0 1\na 0 1\n");
  CHECK(t.size() == 2);
  CHECK(t.similarity("a", "b") == 1.0);
}

TEST_CASE("multi-word names average their tokens") {
  auto t = parse("coffee 1 0\ntable 0 1\n");
  CHECK(t.contains("coffee table"));
  CHECK(t.contains("Coffee_Table"));
  CHECK_FALSE(t.contains("coffee mug"));
  auto v = t.vector_for("coffee_table");
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.5);
  CHECK_THROWS_AS(t.vector_for("mug"), EncodingError);
}

TEST_CASE("target similarities cover the inventory only") {
  auto t = parse("a 1 0\nb 1 1\nc 0 1\n");
  std::vector<std::string> inv{"a", "b"};
  TargetSimilarities s(t, "A", inv);
  CHECK(s.target() == "a");
  CHECK(s("a") == 1.0);
  CHECK(s("b") == t.similarity("a", "b"));
  CHECK_THROWS_AS(s("c"), EncodingError);
}

TEST_CASE("fixture table loads") {
  auto t = load_embeddings(CIRN_DATA_DIR "/embeddings_fixture.txt");
  CHECK(t.dim() == 50);
  CHECK(t.size() == 22);
  CHECK_THROWS(load_embeddings(CIRN_DATA_DIR "/missing.txt"));
}

}  // TEST_SUITE

TEST_SUITE("embeddings") {

TEST_CASE("ten-class similarity matrix matches the offline oracle") {
  auto t = load_embeddings(CIRN_DATA_DIR "/embeddings_10.txt");
  REQUIRE(t.size() == 10);
  std::ifstream in(CIRN_DATA_DIR "/similarity_oracle_10.txt");
  REQUIRE(in);
  std::string header;
  std::getline(in, header);
  std::istringstream names_in(header);
  std::vector<std::string> names;
  for (std::string n; names_in >> n;) {
    names.push_back(n);
  }
  REQUIRE(names.size() == 10);
  for (const auto & a : names) {
    for (const auto & b : names) {
      double want = 0.0;
      in >> want;
      CHECK(std::abs(t.similarity(a, b) - want) < 1e-12);
    }
  }
}

}  // TEST_SUITE
