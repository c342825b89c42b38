#ifndef CIRN_POLICY_NET_HPP_
#define CIRN_POLICY_NET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cirn/sim_env.hpp"
#include "cirn/state_encoder.hpp"

namespace cirn
{

inline constexpr std::size_t kGcnWidth = 32;
inline constexpr std::size_t kGcnFlat = kStateRows * kGcnWidth;        // 640
inline constexpr std::size_t kActionInput = kNumActions;               // one-hot previous action
inline constexpr std::size_t kBottleneckIn = kGcnFlat + kActionInput;  // 646
inline constexpr std::size_t kHidden = 128;
inline constexpr std::size_t kGates = 4 * kHidden;  // input, forget, cell, output

/// Graph edges between the 20 state rows. Both variants add self-loops and
/// apply symmetric normalization D^-1/2 A D^-1/2.
enum class Adjacency : std::uint32_t
{
  dense = 0,       // A = all ones; every entry of the normalized matrix is 1/20
  similarity = 1,  // A = max(0, s s^T) + I
};

std::string_view to_string(Adjacency a);
Adjacency adjacency_from_string(std::string_view name);

/// Row-major dense matrix of doubles.
struct Tensor
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::size_t size() const { return data.size(); }
  double & operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Tensor &) const = default;
};

/// Every learnable weight of the network. Weight matrices are stored
/// input-major (in x out) so that y = x W + b.
struct ModelParams
{
  Adjacency adjacency = Adjacency::dense;

  Tensor gcn_w1{kStateCols, kGcnWidth};
  Tensor gcn_b1{1, kGcnWidth};
  Tensor gcn_w2{kGcnWidth, kGcnWidth};
  Tensor gcn_b2{1, kGcnWidth};
  Tensor pre_w{kBottleneckIn, kHidden};
  Tensor pre_b{1, kHidden};
  Tensor lstm_wx{kHidden, kGates};
  Tensor lstm_wh{kHidden, kGates};
  Tensor lstm_b{1, kGates};
  Tensor actor_w{kHidden, kNumActions};
  Tensor actor_b{1, kNumActions};
  Tensor critic_w{kHidden, 1};
  Tensor critic_b{1, 1};

  static constexpr std::size_t kGroupCount = 13;
  static const std::array<std::string_view, kGroupCount> & group_names();

  std::array<Tensor *, kGroupCount> groups();
  std::array<const Tensor *, kGroupCount> groups() const;

  std::size_t parameter_count() const;
  void set_zero();
  bool all_finite() const;

  bool operator==(const ModelParams &) const = default;
};

/// Gradients share the parameter layout.
using ModelGrads = ModelParams;

/// Uniform fan-in-scaled weights, zero biases, LSTM forget-gate bias 1.
/// Every weight satisfies |w| <= sqrt(6 / fan_in).
ModelParams init_params(std::uint64_t seed, Adjacency adjacency = Adjacency::dense);

struct HiddenState
{
  std::array<double, kHidden> h{};
  std::array<double, kHidden> c{};

  bool operator==(const HiddenState &) const = default;
};

struct ForwardOutput
{
  std::array<double, kNumActions> logits{};
  std::array<double, kNumActions> policy{};
  double value = 0.0;
  HiddenState hidden_next;
};

/// Normalized 20x20 adjacency for a state.
std::array<double, kStateRows * kStateRows> normalized_adjacency(
  const StateMatrix & state, Adjacency adjacency);

/// Two GCN layers: H1 = relu(A X W1 + b1), H2 = relu(A H1 W2 + b2).
/// Returns H2 as 20 x 32, row-major.
std::array<double, kGcnFlat> gcn_forward(const ModelParams & params, const StateMatrix & state);

/// Activations kept by forward() for the backward pass.
struct StepCache
{
  StateMatrix state;
  std::array<double, kStateRows * kStateRows> adjacency{};
  std::array<double, kGcnFlat> gcn_pre1{};
  std::array<double, kGcnFlat> gcn_h1{};
  std::array<double, kGcnFlat> gcn_pre2{};
  std::array<double, kBottleneckIn> bottleneck_in{};  // [flatten(H2), prev action]
  std::array<double, kHidden> bottleneck_pre{};
  std::array<double, kHidden> bottleneck{};           // LSTM input
  HiddenState hidden_prev;
  std::array<double, kGates> gates{};                 // post-activation i, f, g, o
  std::array<double, kHidden> cell_tanh{};
  ForwardOutput output;
};

/// One step of the network. `prev_action` empty means the episode's first
/// step (zero one-hot). Throws NumericError on non-finite input.
ForwardOutput forward(
  const ModelParams & params, const StateMatrix & state, std::optional<Action> prev_action,
  const HiddenState & hidden, StepCache * cache = nullptr);

/// Loss gradient with respect to one step's outputs.
struct OutputGrad
{
  std::array<double, kNumActions> logits{};
  double value = 0.0;
};

/// Backpropagation through time over a window of consecutive steps whose
/// caches came from forward(). The hidden state entering the first step is
/// treated as a constant. Gradients are added to `grads`.
void backward(
  const ModelParams & params, std::span<const StepCache> window,
  std::span<const OutputGrad> output_grads, ModelGrads & grads);

/// Numerically stable softmax.
std::array<double, kNumActions> softmax(const std::array<double, kNumActions> & logits);

/// Checkpoint file: binary, little-endian, versioned. Stores every
/// parameter group with its shape, plus the seed and configuration hash.
struct Checkpoint
{
  ModelParams params;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::uint64_t step = 0;
};

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path);
/// Throws ParseError on a bad magic/version and ValidationError on a shape
/// or group-name mismatch.
Checkpoint load_checkpoint(const std::filesystem::path & path);

}  // namespace cirn

#endif  // CIRN_POLICY_NET_HPP_
