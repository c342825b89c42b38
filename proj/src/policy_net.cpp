#include "cirn/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cirn/errors.hpp"
#include "cirn/kernels.hpp"

namespace cirn
{

namespace kn = kernels::omp;

std::string_view to_string(Adjacency a)
{
  return a == Adjacency::dense ? "dense" : "similarity";
}

Adjacency adjacency_from_string(std::string_view name)
{
  if (name == "dense") {
    return Adjacency::dense;
  }
  if (name == "similarity" || name == "similarity-weighted") {
    return Adjacency::similarity;
  }
  throw ValidationError("unknown adjacency '" + std::string(name) + "'");
}

const std::array<std::string_view, ModelParams::kGroupCount> & ModelParams::group_names()
{
  static const std::array<std::string_view, kGroupCount> names{
    "gcn_w1", "gcn_b1", "gcn_w2", "gcn_b2", "pre_w", "pre_b", "lstm_wx", "lstm_wh", "lstm_b",
    "actor_w", "actor_b", "critic_w", "critic_b"};
  return names;
}

std::array<Tensor *, ModelParams::kGroupCount> ModelParams::groups()
{
  return {&gcn_w1, &gcn_b1, &gcn_w2, &gcn_b2, &pre_w, &pre_b, &lstm_wx, &lstm_wh, &lstm_b,
    &actor_w, &actor_b, &critic_w, &critic_b};
}

std::array<const Tensor *, ModelParams::kGroupCount> ModelParams::groups() const
{
  return {&gcn_w1, &gcn_b1, &gcn_w2, &gcn_b2, &pre_w, &pre_b, &lstm_wx, &lstm_wh, &lstm_b,
    &actor_w, &actor_b, &critic_w, &critic_b};
}

std::size_t ModelParams::parameter_count() const
{
  std::size_t n = 0;
  for (const Tensor * t : groups()) {
    n += t->size();
  }
  return n;
}

void ModelParams::set_zero()
{
  for (Tensor * t : groups()) {
    std::fill(t->data.begin(), t->data.end(), 0.0);
  }
}

bool ModelParams::all_finite() const
{
  for (const Tensor * t : groups()) {
    for (double v : t->data) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

ModelParams init_params(std::uint64_t seed, Adjacency adjacency)
{
  ModelParams p;
  p.adjacency = adjacency;
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Tensor & t, double scale) {
      // Weights are (in x out), so fan_in is the row count.
      const double limit = scale * std::sqrt(6.0 / static_cast<double>(t.rows));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double & w : t.data) {
        w = dist(rng);
      }
    };
  // Full He-uniform range on the ReLU layers, scaled down on the recurrent
  // and head weights.
  fill(p.gcn_w1, 1.0);
  fill(p.gcn_w2, 1.0);
  fill(p.pre_w, 1.0);
  fill(p.lstm_wx, 1.0 / std::sqrt(6.0));
  fill(p.lstm_wh, 1.0 / std::sqrt(6.0));
  fill(p.actor_w, 0.1 / std::sqrt(6.0));
  fill(p.critic_w, 1.0 / std::sqrt(6.0));
  for (std::size_t j = kHidden; j < 2 * kHidden; ++j) {
    p.lstm_b.data[j] = 1.0;
  }
  return p;
}

std::array<double, kNumActions> softmax(const std::array<double, kNumActions> & logits)
{
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumActions> out{};
  double total = 0.0;
  for (std::size_t k = 0; k < kNumActions; ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (double & v : out) {
    v /= total;
  }
  return out;
}

std::array<double, kStateRows * kStateRows> normalized_adjacency(
  const StateMatrix & state, Adjacency adjacency)
{
  std::array<double, kStateRows * kStateRows> a{};
  if (adjacency == Adjacency::dense) {
    a.fill(1.0 / static_cast<double>(kStateRows));
    return a;
  }
  std::array<double, kStateRows> degree{};
  for (std::size_t i = 0; i < kStateRows; ++i) {
    const double si = state.rows[i][kSimilarity];
    for (std::size_t j = 0; j < kStateRows; ++j) {
      const double sj = state.rows[j][kSimilarity];
      double v = std::max(0.0, si * sj);
      if (i == j) {
        v += 1.0;
      }
      a[i * kStateRows + j] = v;
      degree[i] += v;
    }
  }
  for (std::size_t i = 0; i < kStateRows; ++i) {
    for (std::size_t j = 0; j < kStateRows; ++j) {
      a[i * kStateRows + j] /= std::sqrt(degree[i] * degree[j]);
    }
  }
  return a;
}

namespace
{

double sigmoid(double x)
{
  return 1.0 / (1.0 + std::exp(-x));
}

// P = A (X W) + b, H = relu(P) for one GCN layer.
void gcn_layer(
  std::span<const double> adjacency, std::span<const double> x, std::size_t in,
  const Tensor & w, const Tensor & b, std::span<double> pre, std::span<double> out)
{
  std::array<double, kGcnFlat> xw{};
  kn::mat_mul(x, w.data, xw, kStateRows, in, kGcnWidth);
  kn::mat_mul(adjacency, xw, pre, kStateRows, kStateRows, kGcnWidth);
  for (std::size_t r = 0; r < kStateRows; ++r) {
    for (std::size_t c = 0; c < kGcnWidth; ++c) {
      double & v = pre[r * kGcnWidth + c];
      v += b.data[c];
      out[r * kGcnWidth + c] = v > 0.0 ? v : 0.0;
    }
  }
}

}  // namespace

std::array<double, kGcnFlat> gcn_forward(const ModelParams & params, const StateMatrix & state)
{
  const auto adjacency = normalized_adjacency(state, params.adjacency);
  std::array<double, kGcnFlat> pre1{}, h1{}, pre2{}, h2{};
  gcn_layer(adjacency, state.flat(), kStateCols, params.gcn_w1, params.gcn_b1, pre1, h1);
  gcn_layer(adjacency, h1, kGcnWidth, params.gcn_w2, params.gcn_b2, pre2, h2);
  return h2;
}

ForwardOutput forward(
  const ModelParams & params, const StateMatrix & state, std::optional<Action> prev_action,
  const HiddenState & hidden, StepCache * cache)
{
  for (double v : state.flat()) {
    if (!std::isfinite(v)) {
      throw NumericError("forward: non-finite state entry");
    }
  }
  for (std::size_t k = 0; k < kHidden; ++k) {
    if (!std::isfinite(hidden.h[k]) || !std::isfinite(hidden.c[k])) {
      throw NumericError("forward: non-finite hidden state");
    }
  }

  StepCache local;
  StepCache & s = cache != nullptr ? *cache : local;
  s.state = state;
  s.hidden_prev = hidden;
  s.adjacency = normalized_adjacency(state, params.adjacency);

  gcn_layer(s.adjacency, state.flat(), kStateCols, params.gcn_w1, params.gcn_b1, s.gcn_pre1,
    s.gcn_h1);
  std::array<double, kGcnFlat> h2{};
  gcn_layer(s.adjacency, s.gcn_h1, kGcnWidth, params.gcn_w2, params.gcn_b2, s.gcn_pre2, h2);

  std::copy(h2.begin(), h2.end(), s.bottleneck_in.begin());
  std::fill(s.bottleneck_in.begin() + kGcnFlat, s.bottleneck_in.end(), 0.0);
  if (prev_action) {
    s.bottleneck_in[kGcnFlat + static_cast<std::size_t>(*prev_action)] = 1.0;
  }
  kn::vec_mat(s.bottleneck_in, params.pre_w.data, params.pre_b.data, s.bottleneck_pre,
    kBottleneckIn, kHidden);
  for (std::size_t k = 0; k < kHidden; ++k) {
    s.bottleneck[k] = std::max(0.0, s.bottleneck_pre[k]);
  }

  std::array<double, kGates> pre{};
  std::array<double, kGates> recurrent{};
  kn::vec_mat(s.bottleneck, params.lstm_wx.data, params.lstm_b.data, pre, kHidden, kGates);
  kn::vec_mat(hidden.h, params.lstm_wh.data, {}, recurrent, kHidden, kGates);
  for (std::size_t k = 0; k < kGates; ++k) {
    const double a = pre[k] + recurrent[k];
    s.gates[k] = (k >= 2 * kHidden && k < 3 * kHidden) ? std::tanh(a) : sigmoid(a);
  }

  ForwardOutput & out = s.output;
  for (std::size_t k = 0; k < kHidden; ++k) {
    const double in_gate = s.gates[k];
    const double forget = s.gates[kHidden + k];
    const double candidate = s.gates[2 * kHidden + k];
    const double out_gate = s.gates[3 * kHidden + k];
    const double c = forget * hidden.c[k] + in_gate * candidate;
    s.cell_tanh[k] = std::tanh(c);
    out.hidden_next.c[k] = c;
    out.hidden_next.h[k] = out_gate * s.cell_tanh[k];
  }

  kn::vec_mat(out.hidden_next.h, params.actor_w.data, params.actor_b.data, out.logits, kHidden,
    kNumActions);
  std::array<double, 1> value{};
  kn::vec_mat(out.hidden_next.h, params.critic_w.data, params.critic_b.data, value, kHidden, 1);
  out.value = value[0];
  out.policy = softmax(out.logits);
  return out;
}

namespace
{

void gcn_layer_backward(
  std::span<const double> adjacency, std::span<const double> x, std::size_t in,
  std::span<const double> pre, std::span<const double> d_out, const Tensor & w,
  Tensor & dw, Tensor & db, std::span<double> d_x)
{
  std::array<double, kGcnFlat> d_pre{};
  for (std::size_t i = 0; i < kGcnFlat; ++i) {
    d_pre[i] = pre[i] > 0.0 ? d_out[i] : 0.0;
  }
  for (std::size_t r = 0; r < kStateRows; ++r) {
    for (std::size_t c = 0; c < kGcnWidth; ++c) {
      db.data[c] += d_pre[r * kGcnWidth + c];
    }
  }
  // d(XW) = A^T dP
  std::array<double, kGcnFlat> d_xw{};
  kn::mat_mul_at_accumulate(adjacency, d_pre, d_xw, kStateRows, kStateRows, kGcnWidth);
  kn::mat_mul_at_accumulate(x, d_xw, dw.data, in, kStateRows, kGcnWidth);
  if (!d_x.empty()) {
    kn::mat_mul_bt_accumulate(d_xw, w.data, d_x, kStateRows, kGcnWidth, in);
  }
}

}  // namespace

void backward(
  const ModelParams & params, std::span<const StepCache> window,
  std::span<const OutputGrad> output_grads, ModelGrads & grads)
{
  if (window.size() != output_grads.size()) {
    throw UsageError("backward: window and gradient lengths differ");
  }
  std::array<double, kHidden> dh_next{};
  std::array<double, kHidden> dc_next{};

  for (std::size_t t = window.size(); t-- > 0; ) {
    const StepCache & s = window[t];
    const OutputGrad & g = output_grads[t];
    const auto & h = s.output.hidden_next.h;

    // Heads.
    std::array<double, kHidden> dh = dh_next;
    kn::mat_vec_accumulate(params.actor_w.data, g.logits, dh, kHidden, kNumActions);
    const std::array<double, 1> dv{g.value};
    kn::mat_vec_accumulate(params.critic_w.data, dv, dh, kHidden, 1);
    kn::outer_accumulate(h, g.logits, grads.actor_w.data, kHidden, kNumActions);
    kn::outer_accumulate(h, dv, grads.critic_w.data, kHidden, 1);
    for (std::size_t k = 0; k < kNumActions; ++k) {
      grads.actor_b.data[k] += g.logits[k];
    }
    grads.critic_b.data[0] += g.value;

    // LSTM cell.
    std::array<double, kGates> d_gate_pre{};
    std::array<double, kHidden> dc_prev{};
    for (std::size_t k = 0; k < kHidden; ++k) {
      const double in_gate = s.gates[k];
      const double forget = s.gates[kHidden + k];
      const double candidate = s.gates[2 * kHidden + k];
      const double out_gate = s.gates[3 * kHidden + k];
      const double tc = s.cell_tanh[k];
      const double d_out_gate = dh[k] * tc;
      const double dc = dh[k] * out_gate * (1.0 - tc * tc) + dc_next[k];
      d_gate_pre[k] = dc * candidate * in_gate * (1.0 - in_gate);
      d_gate_pre[kHidden + k] = dc * s.hidden_prev.c[k] * forget * (1.0 - forget);
      d_gate_pre[2 * kHidden + k] = dc * in_gate * (1.0 - candidate * candidate);
      d_gate_pre[3 * kHidden + k] = d_out_gate * out_gate * (1.0 - out_gate);
      dc_prev[k] = dc * forget;
    }
    kn::outer_accumulate(s.bottleneck, d_gate_pre, grads.lstm_wx.data, kHidden, kGates);
    kn::outer_accumulate(s.hidden_prev.h, d_gate_pre, grads.lstm_wh.data, kHidden, kGates);
    for (std::size_t k = 0; k < kGates; ++k) {
      grads.lstm_b.data[k] += d_gate_pre[k];
    }
    std::array<double, kHidden> d_bottleneck{};
    std::array<double, kHidden> dh_prev{};
    kn::mat_vec_accumulate(params.lstm_wx.data, d_gate_pre, d_bottleneck, kHidden, kGates);
    kn::mat_vec_accumulate(params.lstm_wh.data, d_gate_pre, dh_prev, kHidden, kGates);

    // Bottleneck affine + relu.
    std::array<double, kHidden> d_bottleneck_pre{};
    for (std::size_t k = 0; k < kHidden; ++k) {
      d_bottleneck_pre[k] = s.bottleneck_pre[k] > 0.0 ? d_bottleneck[k] : 0.0;
    }
    kn::outer_accumulate(s.bottleneck_in, d_bottleneck_pre, grads.pre_w.data, kBottleneckIn,
      kHidden);
    for (std::size_t k = 0; k < kHidden; ++k) {
      grads.pre_b.data[k] += d_bottleneck_pre[k];
    }
    // Only the GCN part of the bottleneck input needs a gradient.
    std::array<double, kGcnFlat> d_h2{};
    kn::mat_vec_accumulate(std::span<const double>(params.pre_w.data).first(kGcnFlat * kHidden),
      d_bottleneck_pre, d_h2, kGcnFlat, kHidden);

    // GCN layers.
    std::array<double, kGcnFlat> d_h1{};
    gcn_layer_backward(s.adjacency, s.gcn_h1, kGcnWidth, s.gcn_pre2, d_h2, params.gcn_w2,
      grads.gcn_w2, grads.gcn_b2, d_h1);
    gcn_layer_backward(s.adjacency, s.state.flat(), kStateCols, s.gcn_pre1, d_h1, params.gcn_w1,
      grads.gcn_w1, grads.gcn_b1, {});

    dh_next = dh_prev;
    dc_next = dc_prev;
  }
}

}  // namespace cirn
