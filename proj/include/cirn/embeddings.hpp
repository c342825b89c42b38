#ifndef CIRN_EMBEDDINGS_HPP_
#define CIRN_EMBEDDINGS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cirn
{

/// Cosine of the angle between two equal-length, nonzero vectors, clamped
/// to [-1, 1]. Throws DomainError on length mismatch or a zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Lower-cases ASCII letters; embedding tokens and class names are matched
/// case-insensitively.
std::string normalize_token(std::string_view token);

/// Immutable word-embedding table keyed by normalized token.
class EmbeddingTable
{
public:
  EmbeddingTable() = default;

  /// Validates that every vector has `dim` components and a nonzero norm.
  EmbeddingTable(std::size_t dim, std::map<std::string, std::vector<double>> entries);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<double>> & entries() const { return entries_; }

  /// True if `class_name` resolves, either as a token or as a multi-word
  /// name whose every word is a token.
  bool contains(std::string_view class_name) const;

  /// Vector for a class name. Names not present verbatim are split on
  /// spaces/underscores and the token vectors are averaged.
  std::vector<double> vector_for(std::string_view class_name) const;

  double similarity(std::string_view a, std::string_view b) const;

private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> entries_;
};

EmbeddingTable parse_embeddings(std::istream & in, std::string_view source = "<stream>");
EmbeddingTable load_embeddings(const std::filesystem::path & path);

/// Pose-independent similarities of every class in an inventory to one
/// navigation target, computed once per (inventory, target).
class TargetSimilarities
{
public:
  TargetSimilarities() = default;
  TargetSimilarities(
    const EmbeddingTable & table, std::string_view target,
    std::span<const std::string> inventory);

  const std::string & target() const { return target_; }

  /// Throws EncodingError for a class outside the inventory.
  double operator()(std::string_view class_name) const;

private:
  std::string target_;
  std::map<std::string, double, std::less<>> values_;
};

}  // namespace cirn

#endif  // CIRN_EMBEDDINGS_HPP_
