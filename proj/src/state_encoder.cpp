#include "cirn/state_encoder.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cirn/errors.hpp"

namespace cirn
{

std::size_t StateMatrix::nonzero_rows() const
{
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto & r) {
    return std::any_of(r.begin(), r.end(), [](double v) {return v != 0.0;});
  }));
}

namespace
{

using Row = std::array<double, kStateCols>;

bool row_before(const Row & a, const Row & b)
{
  if (a[kSimilarity] != b[kSimilarity]) {
    return a[kSimilarity] > b[kSimilarity];
  }
  if (a[kArea] != b[kArea]) {
    return a[kArea] > b[kArea];
  }
  if (a[kCenterX] != b[kCenterX]) {
    return a[kCenterX] < b[kCenterX];
  }
  return a[kCenterY] < b[kCenterY];
}

template<typename SimilarityFn>
StateMatrix build(std::span<const Detection> detections, const std::string & target,
  SimilarityFn && similarity)
{
  std::vector<Row> rows;
  rows.reserve(detections.size());
  for (const auto & d : detections) {
    const std::string cls = normalize_token(d.class_name);
    rows.push_back({cls == target ? 1.0 : 0.0, similarity(cls), d.x_c, d.y_c, d.area});
  }
  std::stable_sort(rows.begin(), rows.end(), row_before);
  StateMatrix state;
  const std::size_t n = std::min(rows.size(), kStateRows);
  std::copy_n(rows.begin(), n, state.rows.begin());
  return state;
}

}  // namespace

StateMatrix encode(
  std::span<const Detection> detections, std::string_view target,
  const EmbeddingTable & table)
{
  if (!table.contains(target)) {
    throw EncodingError("encode: no embedding for target '" + std::string(target) + "'");
  }
  const auto g_t = table.vector_for(target);
  return build(detections, normalize_token(target), [&](const std::string & cls) {
      if (!table.contains(cls)) {
        throw EncodingError("encode: no embedding for class '" + cls + "'");
      }
      return cosine_similarity(table.vector_for(cls), g_t);
    });
}

StateMatrix encode(
  std::span<const Detection> detections, const TargetSimilarities & similarities)
{
  return build(detections, similarities.target(), [&](const std::string & cls) {
      return similarities(cls);
    });
}

void print_state(std::ostream & out, const StateMatrix & state)
{
  out << " row      h        s      x_c      y_c     area\n";
  char line[96];
  for (std::size_t i = 0; i < kStateRows; ++i) {
    const auto & r = state.rows[i];
    std::snprintf(line, sizeof(line), "%4zu %6.0f %8.4f %8.4f %8.4f %8.4f\n", i, r[0], r[1], r[2],
      r[3], r[4]);
    out << line;
  }
}

}  // namespace cirn
