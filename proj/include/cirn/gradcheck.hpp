#ifndef CIRN_GRADCHECK_HPP_
#define CIRN_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cirn/policy_net.hpp"

namespace cirn
{

struct GradCheckOptions
{
  int window = 5;
  int samples_per_group = 24;  // half largest-|grad| entries, half uniform
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  /// Lower bound on the relative-error denominator.
  double floor = 1e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double gamma = 0.99;
};

struct GradCheckGroup
{
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation flipped a relu
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport
{
  std::uint64_t seed = 0;
  Adjacency adjacency = Adjacency::dense;
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
  double loss = 0.0;
  bool passed = false;
};

/// Central finite differences of the actor-critic loss at freshly
/// initialized parameters over a random window (random full states,
/// actions, rewards and initial hidden state) against backward(). Entries
/// whose +-epsilon probe flips any relu are skipped and replaced.
GradCheckReport gradient_check(
  std::uint64_t seed, Adjacency adjacency, const GradCheckOptions & options = {});

}  // namespace cirn

#endif  // CIRN_GRADCHECK_HPP_
