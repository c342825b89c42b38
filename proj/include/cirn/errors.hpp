#ifndef CIRN_ERRORS_HPP_
#define CIRN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cirn
{

/// Malformed input text (embedding files, scene documents, checkpoints).
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a data invariant.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside an operation's domain.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// API misuse, e.g. stepping a finished episode.
class UsageError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Detection or target class with no embedding.
class EncodingError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// NaN or infinity reached the network.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cirn

#endif  // CIRN_ERRORS_HPP_
