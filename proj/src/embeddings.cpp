#include "cirn/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cirn/errors.hpp"

namespace cirn
{

double cosine_similarity(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) {
    throw DomainError(
      "cosine_similarity: length mismatch (" + std::to_string(a.size()) + " vs " +
      std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw DomainError("cosine_similarity: zero-norm vector");
  }
  const double cs = dot / std::sqrt(norm_a * norm_b);
  return std::clamp(cs, -1.0, 1.0);
}

std::string normalize_token(std::string_view token)
{
  std::string out(token);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

namespace
{

std::vector<std::string> split_words(std::string_view name)
{
  std::vector<std::string> words;
  std::string current;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '\t') {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) {
    words.push_back(std::move(current));
  }
  return words;
}

double squared_norm(const std::vector<double> & v)
{
  double n = 0.0;
  for (double x : v) {
    n += x * x;
  }
  return n;
}

}  // namespace

EmbeddingTable::EmbeddingTable(
  std::size_t dim, std::map<std::string, std::vector<double>> entries)
: dim_(dim)
{
  if (dim == 0) {
    throw ValidationError("embedding table: dimension must be positive");
  }
  if (entries.empty()) {
    throw ValidationError("embedding table: no entries");
  }
  for (auto & [name, vec] : entries) {
    if (vec.size() != dim) {
      throw ValidationError(
        "embedding table: '" + name + "' has " + std::to_string(vec.size()) +
        " components, expected " + std::to_string(dim));
    }
    for (double x : vec) {
      if (!std::isfinite(x)) {
        throw ValidationError("embedding table: non-finite component in '" + name + "'");
      }
    }
    if (squared_norm(vec) == 0.0) {
      throw ValidationError("embedding table: zero-norm vector for '" + name + "'");
    }
    entries_.emplace(normalize_token(name), std::move(vec));
  }
}

bool EmbeddingTable::contains(std::string_view class_name) const
{
  const std::string key = normalize_token(class_name);
  if (entries_.count(key) != 0) {
    return true;
  }
  const auto words = split_words(key);
  if (words.size() < 2) {
    return false;
  }
  return std::all_of(words.begin(), words.end(), [this](const std::string & w) {
    return entries_.count(w) != 0;
  });
}

std::vector<double> EmbeddingTable::vector_for(std::string_view class_name) const
{
  const std::string key = normalize_token(class_name);
  if (auto it = entries_.find(key); it != entries_.end()) {
    return it->second;
  }
  const auto words = split_words(key);
  if (words.size() < 2) {
    throw EncodingError("no embedding for class '" + std::string(class_name) + "'");
  }
  std::vector<double> mean(dim_, 0.0);
  for (const auto & w : words) {
    auto it = entries_.find(w);
    if (it == entries_.end()) {
      throw EncodingError(
        "no embedding for word '" + w + "' of class '" + std::string(class_name) + "'");
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      mean[i] += it->second[i];
    }
  }
  for (double & x : mean) {
    x /= static_cast<double>(words.size());
  }
  if (squared_norm(mean) == 0.0) {
    throw DomainError("mean embedding of '" + std::string(class_name) + "' is zero");
  }
  return mean;
}

double EmbeddingTable::similarity(std::string_view a, std::string_view b) const
{
  return cosine_similarity(vector_for(a), vector_for(b));
}

EmbeddingTable parse_embeddings(std::istream & in, std::string_view source)
{
  std::map<std::string, std::vector<double>> entries;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  const std::string where(source);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token.front() == '#') {
      continue;
    }
    std::vector<double> vec;
    std::string field;
    while (fields >> field) {
      double value = 0.0;
      const char * first = field.data();
      const char * last = first + field.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) {
        throw ParseError(
          where + ":" + std::to_string(line_no) + ": non-numeric field '" + field + "'");
      }
      vec.push_back(value);
    }
    if (vec.empty()) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": token has no components");
    }
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw ParseError(
        where + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
        " components, found " + std::to_string(vec.size()));
    }
    const std::string key = normalize_token(token);
    if (entries.count(key) != 0) {
      std::clog << "warning: " << where << ":" << line_no << ": duplicate token '" << key
                << "', keeping the last definition\n";
    }
    entries[key] = std::move(vec);
  }
  if (entries.empty()) {
    throw ValidationError(where + ": no entries");
  }
  return EmbeddingTable(dim, std::move(entries));
}

EmbeddingTable load_embeddings(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open embedding file " + path.string());
  }
  return parse_embeddings(in, path.string());
}

TargetSimilarities::TargetSimilarities(
  const EmbeddingTable & table, std::string_view target,
  std::span<const std::string> inventory)
: target_(normalize_token(target))
{
  if (!table.contains(target)) {
    throw EncodingError("no embedding for target '" + std::string(target) + "'");
  }
  const auto g_t = table.vector_for(target);
  for (const auto & cls : inventory) {
    const std::string key = normalize_token(cls);
    if (values_.count(key) != 0) {
      continue;
    }
    if (!table.contains(key)) {
      throw EncodingError("no embedding for class '" + cls + "'");
    }
    values_.emplace(key, cosine_similarity(table.vector_for(key), g_t));
  }
}

double TargetSimilarities::operator()(std::string_view class_name) const
{
  auto it = values_.find(class_name);
  if (it == values_.end()) {
    it = values_.find(normalize_token(class_name));
  }
  if (it == values_.end()) {
    throw EncodingError("class '" + std::string(class_name) + "' not in similarity cache");
  }
  return it->second;
}

}  // namespace cirn
