#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "cirn/errors.hpp"
#include "cirn/state_encoder.hpp"

using namespace cirn;

namespace
{

struct World
{
  EmbeddingTable table;
  std::vector<std::string> classes;
};

World random_world(std::mt19937_64 & rng, int n_classes, int dim)
{
  std::normal_distribution<double> n(0.0, 1.0);
  std::map<std::string, std::vector<double>> m;
  World w;
  for (int i = 0; i < n_classes; ++i) {
    std::string name = "class" + std::to_string(i);
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double & x : v) {
      x = n(rng);
    }
    m[name] = v;
    w.classes.push_back(name);
  }
  w.table = EmbeddingTable(static_cast<std::size_t>(dim), m);
  return w;
}

std::vector<Detection> random_detections(
  std::mt19937_64 & rng, const std::vector<std::string> & classes, int count, bool ties)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
  std::vector<Detection> out;
  for (int i = 0; i < count; ++i) {
    Detection d;
    d.class_name = classes[pick(rng)];
    // Quantized values make exact ties common.
    d.x_c = ties ? std::floor(u(rng) * 3.0) / 2.0 : u(rng);
    d.y_c = ties ? std::floor(u(rng) * 3.0) / 2.0 : u(rng);
    d.area = ties ? 0.25 * (1 + std::floor(u(rng) * 2.0)) : std::max(1e-4, u(rng));
    d.distance = 1.0;
    d.object_index = i;
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_SUITE("state_encoder") {

TEST_CASE("empty view encodes to zeros") {
  std::mt19937_64 rng(1);
  auto w = random_world(rng, 3, 4);
  auto m = encode(std::vector<Detection>{}, "class0", w.table);
  CHECK(m == StateMatrix{});
  CHECK(m.nonzero_rows() == 0);
}

TEST_CASE("rows carry target flag, similarity and geometry") {
  std::map<std::string, std::vector<double>> e{{"cup", {1, 0}}, {"mug", {1, 1}}, {"rug", {0, 1}}};
  EmbeddingTable t(2, e);
  std::vector<Detection> d{{"rug", 0.1, 0.2, 0.3, 1.0, 0}, {"cup", 0.4, 0.5, 0.6, 1.0, 1},
    {"mug", 0.7, 0.8, 0.9, 1.0, 2}};
  auto m = encode(d, "cup", t);
  CHECK(m.rows[0] == std::array<double, 5>{1.0, 1.0, 0.4, 0.5, 0.6});
  CHECK(m.rows[1][kIsTarget] == 0.0);
  CHECK(m.rows[1][kSimilarity] == t.similarity("cup", "mug"));
  CHECK(m.rows[2][kSimilarity] == 0.0);
  CHECK(m.rows[2][kCenterX] == 0.1);
  CHECK(m.nonzero_rows() == 3);
  CHECK(m.rows[3] == std::array<double, 5>{});
}

TEST_CASE("unknown class is an encoding error") {
  std::map<std::string, std::vector<double>> e{{"cup", {1, 0}}};
  EmbeddingTable t(2, e);
  std::vector<Detection> d{{"ghost", 0.5, 0.5, 0.1, 1.0, 0}};
  CHECK_THROWS_AS(encode(d, "cup", t), EncodingError);
  CHECK_THROWS_AS(encode(std::vector<Detection>{}, "ghost", t), EncodingError);
}

TEST_CASE("sort, truncate and pad match the oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(0, 35);
  for (int t = 0; t < 300; ++t) {
    auto w = random_world(rng, 6, 5);
    auto dets = random_detections(rng, w.classes, count(rng), t % 2 == 0);
    const std::string target = w.classes[static_cast<std::size_t>(t) % w.classes.size()];
    auto want = oracle::encode(dets, target, [&](const std::string & c) {
        return cosine_similarity(w.table.vector_for(c), w.table.vector_for(target));
      });
    CHECK(encode(dets, target, w.table) == want);
    TargetSimilarities sims(w.table, target, w.classes);
    CHECK(encode(dets, sims) == want);
  }
}

TEST_CASE("similarity-preserving relabeling leaves the state unchanged") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> count(0, 25);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> power(-8, 8);
  for (int t = 0; t < 200; ++t) {
    auto w = random_world(rng, 7, 6);
    auto dets = random_detections(rng, w.classes, count(rng), t % 3 == 0);
    const std::string target = w.classes[static_cast<std::size_t>(t) % w.classes.size()];

    std::vector<std::string> renamed = w.classes;
    std::shuffle(renamed.begin(), renamed.end(), rng);
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < renamed.size(); ++i) {
      rename[w.classes[i]] = "z" + renamed[i] + "_" + std::to_string(t);
    }
    std::vector<double> sign(6);
    for (double & s : sign) {
      s = bit(rng) ? 1.0 : -1.0;
    }
    const double scale = std::ldexp(1.0, power(rng));
    std::map<std::string, std::vector<double>> moved;
    for (const auto & [name, vec] : w.table.entries()) {
      std::vector<double> v(vec);
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] *= sign[i] * scale;
      }
      moved[rename[name]] = v;
    }
    EmbeddingTable t2(6, moved);
    auto dets2 = dets;
    for (auto & d : dets2) {
      d.class_name = rename[d.class_name];
    }
    CHECK(encode(dets, target, w.table) == encode(dets2, rename[target], t2));
  }
}

TEST_CASE("print_state writes twenty rows") {
  StateMatrix m;
  m.rows[0] = {1, 0.5, 0.25, 0.75, 0.125};
  std::ostringstream out;
  print_state(out, m);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') >= 20);
  CHECK(text.find("0.125") != std::string::npos);
}

}  // TEST_SUITE
