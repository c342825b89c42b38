#ifndef CIRN_STATE_ENCODER_HPP_
#define CIRN_STATE_ENCODER_HPP_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>

#include "cirn/embeddings.hpp"
#include "cirn/sim_env.hpp"

namespace cirn
{

inline constexpr std::size_t kStateRows = 20;
inline constexpr std::size_t kStateCols = 5;

/// Column layout of a state row.
enum StateColumn : std::size_t { kIsTarget = 0, kSimilarity, kCenterX, kCenterY, kArea };

/// Class-free observation: one row [h, s, x_c, y_c, area] per detection,
/// sorted by similarity to the target, zero-padded to 20 rows.
struct StateMatrix
{
  std::array<std::array<double, kStateCols>, kStateRows> rows{};

  std::size_t nonzero_rows() const;
  std::span<const double, kStateRows * kStateCols> flat() const
  {
    return std::span<const double, kStateRows * kStateCols>(rows[0].data(), kStateRows * kStateCols);
  }

  bool operator==(const StateMatrix &) const = default;
};

/// Rows are ordered by s descending, then area descending, x_c ascending,
/// y_c ascending; truncation to 20 happens after sorting.
StateMatrix encode(
  std::span<const Detection> detections, std::string_view target,
  const EmbeddingTable & table);

/// Same as above with precomputed similarities.
StateMatrix encode(
  std::span<const Detection> detections, const TargetSimilarities & similarities);

void print_state(std::ostream & out, const StateMatrix & state);

}  // namespace cirn

#endif  // CIRN_STATE_ENCODER_HPP_
