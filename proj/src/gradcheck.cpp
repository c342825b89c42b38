#include "cirn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "cirn/trainer.hpp"

namespace cirn
{

namespace
{

struct Window
{
  std::vector<Transition> steps;
  std::vector<std::optional<Action>> prev;
  HiddenState initial;
  double bootstrap = 0.0;
};

Window random_window(std::mt19937_64 & rng, int length)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> action(0, kNumActions - 1);
  Window w;
  for (std::size_t k = 0; k < kHidden; ++k) {
    w.initial.h[k] = u(rng) - 0.5;
    w.initial.c[k] = 2.0 * u(rng) - 1.0;
  }
  std::optional<Action> prev;
  if (u(rng) < 0.5) {
    prev = static_cast<Action>(action(rng));
  }
  for (int t = 0; t < length; ++t) {
    Transition tr;
    for (auto & row : tr.state.rows) {
      row = {u(rng) < 0.2 ? 1.0 : 0.0, 2.0 * u(rng) - 1.0, u(rng), u(rng),
        std::max(1e-4, 0.5 * u(rng))};
    }
    tr.action = action(rng);
    tr.reward = u(rng) < 0.1 ? kSuccessReward : 0.02 * u(rng) - 0.01;
    w.steps.push_back(tr);
    w.prev.push_back(prev);
    prev = static_cast<Action>(tr.action);
  }
  w.bootstrap = 2.0 * u(rng) - 1.0;
  return w;
}

std::vector<ForwardOutput> run(
  const ModelParams & params, const Window & w, std::vector<StepCache> * caches)
{
  std::vector<ForwardOutput> outs;
  HiddenState hidden = w.initial;
  for (std::size_t t = 0; t < w.steps.size(); ++t) {
    StepCache * cache = caches ? &(*caches)[t] : nullptr;
    outs.push_back(forward(params, w.steps[t].state, w.prev[t], hidden, cache));
    hidden = outs.back().hidden_next;
  }
  return outs;
}

using ReluMask = std::vector<bool>;

ReluMask relu_mask(const std::vector<StepCache> & caches)
{
  ReluMask m;
  for (const auto & c : caches) {
    for (const auto * block : {c.gcn_pre1.data(), c.gcn_pre2.data()}) {
      for (std::size_t i = 0; i < kGcnFlat; ++i) {
        m.push_back(block[i] > 0.0);
      }
    }
    for (double v : c.bottleneck_pre) {
      m.push_back(v > 0.0);
    }
  }
  return m;
}

}  // namespace

GradCheckReport gradient_check(
  std::uint64_t seed, Adjacency adjacency, const GradCheckOptions & options)
{
  std::mt19937_64 rng(seed ^ 0x6772616463686b00ull);
  ModelParams params = init_params(seed, adjacency);
  Window w = random_window(rng, options.window);

  std::vector<StepCache> caches(w.steps.size());
  const auto outs = run(params, w, &caches);
  for (std::size_t t = 0; t < w.steps.size(); ++t) {
    w.steps[t].value = outs[t].value;
  }
  const Returns returns = compute_returns(w.steps, w.bootstrap, options.gamma);
  const LossTerms base =
    a2c_loss(w.steps, outs, returns, options.value_coef, options.entropy_coef);
  ModelGrads grads;
  grads.set_zero();
  backward(params, caches, base.grads, grads);

  const ReluMask base_mask = relu_mask(caches);
  // Loss at p, or nullopt if p moves any relu input across zero.
  auto loss_at = [&](const ModelParams & p) -> std::optional<double> {
      std::vector<StepCache> probe(w.steps.size());
      const auto o = run(p, w, &probe);
      if (relu_mask(probe) != base_mask) {
        return std::nullopt;
      }
      return a2c_loss(w.steps, o, returns, options.value_coef, options.entropy_coef).total;
    };

  GradCheckReport report;
  report.seed = seed;
  report.adjacency = adjacency;
  report.loss = base.total;
  const auto names = ModelParams::group_names();
  auto param_groups = params.groups();
  const auto grad_groups = std::as_const(grads).groups();
  for (std::size_t g = 0; g < ModelParams::kGroupCount; ++g) {
    Tensor & theta = *param_groups[g];
    const Tensor & grad = *grad_groups[g];
    std::vector<std::size_t> order(theta.size());
    std::iota(order.begin(), order.end(), 0);
    const auto want = static_cast<std::size_t>(options.samples_per_group);
    const std::size_t head = std::min(want / 2, order.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(grad.data[a]) > std::abs(grad.data[b]);
      });
    std::shuffle(order.begin() + static_cast<std::ptrdiff_t>(head), order.end(), rng);
    GradCheckGroup result;
    result.name = std::string(names[g]);
    for (std::size_t pos = 0; pos < order.size() && result.checked < want; ++pos) {
      const std::size_t idx = order[pos];
      const double saved = theta.data[idx];
      theta.data[idx] = saved + options.epsilon;
      const auto up = loss_at(params);
      theta.data[idx] = saved - options.epsilon;
      const auto down = loss_at(params);
      theta.data[idx] = saved;
      if (!up || !down) {
        ++result.skipped;
        continue;
      }
      const double numeric = (*up - *down) / (2.0 * options.epsilon);
      const double analytic = grad.data[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
      result.max_abs_grad = std::max(result.max_abs_grad, std::abs(analytic));
      ++result.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, result.max_rel_error);
    report.groups.push_back(result);
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace cirn
