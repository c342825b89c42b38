#include "cirn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <ostream>
#include <random>
#include <utility>

#include "cirn/errors.hpp"
#include "cirn/evaluator.hpp"
#include "cirn/util.hpp"

namespace cirn
{

void TrainConfig::validate() const
{
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("train config: gamma must lie in (0, 1]");
  }
  if (n_steps <= 0 || workers <= 0 || max_episode_steps <= 0) {
    throw ValidationError("train config: n_steps, workers and max_episode_steps must be positive");
  }
  if (!(lr > 0.0) || !(grad_clip > 0.0) || entropy_coef < 0.0 || value_coef < 0.0) {
    throw ValidationError("train config: lr and grad_clip must be positive, coefficients >= 0");
  }
  if (lr_schedule != "constant" && lr_schedule != "linear") {
    throw ValidationError("train config: lr_schedule must be constant or linear");
  }
  if (total_steps < 0 || checkpoint_every < 0) {
    throw ValidationError("train config: step counts must be non-negative");
  }
}

nlohmann::ordered_json to_json(const TrainConfig & c)
{
  return {{"gamma", c.gamma}, {"n_steps", c.n_steps}, {"entropy_coef", c.entropy_coef},
    {"value_coef", c.value_coef}, {"lr", c.lr}, {"grad_clip", c.grad_clip},
    {"workers", c.workers}, {"total_steps", c.total_steps}, {"seed", c.seed},
    {"max_episode_steps", c.max_episode_steps},
    {"adjacency", std::string(to_string(c.adjacency))}, {"lr_schedule", c.lr_schedule},
    {"checkpoint_every", c.checkpoint_every}};
}

TrainConfig train_config_from_json(const nlohmann::json & j, TrainConfig c)
{
  try {
    c.gamma = j.value("gamma", c.gamma);
    c.n_steps = j.value("n_steps", c.n_steps);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.value_coef = j.value("value_coef", c.value_coef);
    c.lr = j.value("lr", c.lr);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.workers = j.value("workers", c.workers);
    c.total_steps = j.value("total_steps", c.total_steps);
    c.seed = j.value("seed", c.seed);
    c.max_episode_steps = j.value("max_episode_steps", c.max_episode_steps);
    if (j.contains("adjacency")) {
      c.adjacency = adjacency_from_string(j.at("adjacency").get<std::string>());
    }
    c.lr_schedule = j.value("lr_schedule", c.lr_schedule);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  return c;
}

Returns compute_returns(
  std::span<const Transition> window, double bootstrap_value, double gamma)
{
  Returns out;
  out.returns.resize(window.size());
  out.advantages.resize(window.size());
  double running = bootstrap_value;
  for (std::size_t t = window.size(); t-- > 0; ) {
    if (window[t].done) {
      running = 0.0;
    }
    running = window[t].reward + gamma * running;
    out.returns[t] = running;
    out.advantages[t] = running - window[t].value;
  }
  return out;
}

namespace
{

std::array<double, kNumActions> log_softmax(const std::array<double, kNumActions> & logits)
{
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) {
    total += std::exp(z - peak);
  }
  const double log_norm = peak + std::log(total);
  std::array<double, kNumActions> out{};
  for (std::size_t k = 0; k < kNumActions; ++k) {
    out[k] = logits[k] - log_norm;
  }
  return out;
}

}  // namespace

LossTerms a2c_loss(
  std::span<const Transition> window, std::span<const ForwardOutput> outputs,
  const Returns & returns, double value_coef, double entropy_coef)
{
  if (window.size() != outputs.size() || window.size() != returns.returns.size()) {
    throw UsageError("a2c_loss: window, outputs and returns differ in length");
  }
  LossTerms loss;
  loss.grads.resize(window.size());
  for (std::size_t t = 0; t < window.size(); ++t) {
    const auto log_pi = log_softmax(outputs[t].logits);
    std::array<double, kNumActions> pi{};
    double entropy = 0.0;
    for (std::size_t k = 0; k < kNumActions; ++k) {
      pi[k] = std::exp(log_pi[k]);
      entropy -= pi[k] * log_pi[k];
    }
    const auto a = static_cast<std::size_t>(window[t].action);
    const double advantage = returns.advantages[t];
    const double td = returns.returns[t] - outputs[t].value;
    loss.policy -= log_pi[a] * advantage;
    loss.value += td * td;
    loss.entropy += entropy;

    OutputGrad & g = loss.grads[t];
    for (std::size_t k = 0; k < kNumActions; ++k) {
      const double indicator = k == a ? 1.0 : 0.0;
      g.logits[k] = -advantage * (indicator - pi[k]) +
        entropy_coef * pi[k] * (log_pi[k] + entropy);
    }
    g.value = -2.0 * value_coef * td;
  }
  loss.total = loss.policy + value_coef * loss.value - entropy_coef * loss.entropy;
  return loss;
}

double clip_global_norm(ModelGrads & grads, double max_norm)
{
  double sq = 0.0;
  for (const Tensor * t : std::as_const(grads).groups()) {
    for (double v : t->data) {
      sq += v * v;
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (Tensor * t : grads.groups()) {
      for (double & v : t->data) {
        v *= scale;
      }
    }
  }
  return norm;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
: lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps)
{
  m_.set_zero();
  v_.set_zero();
}

void Adam::step(ModelParams & params, const ModelGrads & grads)
{
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.groups();
  auto g = grads.groups();
  auto m = m_.groups();
  auto v = v_.groups();
  for (std::size_t k = 0; k < ModelParams::kGroupCount; ++k) {
    auto & pd = p[k]->data;
    const auto & gd = g[k]->data;
    auto & md = m[k]->data;
    auto & vd = v[k]->data;
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = beta1_ * md[i] + (1.0 - beta1_) * gd[i];
      vd[i] = beta2_ * vd[i] + (1.0 - beta2_) * gd[i] * gd[i];
      pd[i] -= lr_ * (md[i] / c1) / (std::sqrt(vd[i] / c2) + eps_);
    }
  }
}

namespace
{

struct FinishedEpisode
{
  double reward = 0.0;
  bool success = false;
};

class Worker
{
public:
  Worker(const TrainConfig & config, const SceneSet & scenes,
    std::span<const EpisodeSpec> episodes, const EmbeddingTable & table, std::uint64_t seed)
  : config_(config), scenes_(scenes), episodes_(episodes), env_(table, config.max_episode_steps),
    rng_(seed)
  {
  }

  // Collects up to `budget` transitions and leaves the loss gradient in grads().
  void run(const ModelParams & params, int budget)
  {
    grads_.set_zero();
    finished_.clear();
    steps_ = 0;
    skipped_ = 0;
    loss_ = LossTerms{};
    if (budget <= 0) {
      return;
    }
    if (!active_) {
      start_episode();
    }
    caches_.resize(static_cast<std::size_t>(budget));
    transitions_.clear();
    outputs_.clear();
    bool done = false;
    for (int t = 0; t < budget && !done; ++t) {
      const StateMatrix state = encode(detections_, env_.similarities());
      const ForwardOutput out = forward(params, state, prev_action_, hidden_,
          &caches_[static_cast<std::size_t>(t)]);
      const Action a = sample_action(out.policy, uniform_(rng_));
      const StepResult res = env_.step(a);
      transitions_.push_back({state, static_cast<int>(a), res.reward, out.value,
          std::log(out.policy[static_cast<std::size_t>(a)]), res.done});
      outputs_.push_back(out);
      hidden_ = out.hidden_next;
      prev_action_ = a;
      detections_ = res.detections;
      episode_return_ += res.reward;
      ++steps_;
      if (res.done) {
        finished_.push_back({episode_return_, res.success});
        active_ = false;
        done = true;
      }
    }
    double bootstrap = 0.0;
    if (!done) {
      bootstrap = forward(params, encode(detections_, env_.similarities()), prev_action_,
          hidden_).value;
    }
    const Returns returns = compute_returns(transitions_, bootstrap, config_.gamma);
    loss_ = a2c_loss(transitions_, outputs_, returns, config_.value_coef, config_.entropy_coef);
    backward(params, std::span<const StepCache>(caches_.data(), transitions_.size()),
      loss_.grads, grads_);
  }

  const ModelGrads & grads() const { return grads_; }
  const LossTerms & loss() const { return loss_; }
  const std::vector<FinishedEpisode> & finished() const { return finished_; }
  int steps() const { return steps_; }
  int skipped() const { return skipped_; }

private:
  void start_episode()
  {
    std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
    for (;;) {
      const EpisodeSpec & spec = episodes_[pick(rng_)];
      if (spec.optimal_length <= 0) {
        ++skipped_;
        std::clog << "warning: skipping unreachable episode " << spec.scene_id << " / "
                  << spec.target << "\n";
        continue;
      }
      detections_ = env_.reset(scenes_.by_id(spec.scene_id), spec.start, spec.target);
      break;
    }
    hidden_ = HiddenState{};
    prev_action_.reset();
    episode_return_ = 0.0;
    active_ = true;
  }

  const TrainConfig & config_;
  const SceneSet & scenes_;
  std::span<const EpisodeSpec> episodes_;
  NavEnv env_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};

  bool active_ = false;
  std::vector<Detection> detections_;
  HiddenState hidden_;
  std::optional<Action> prev_action_;
  double episode_return_ = 0.0;

  std::vector<StepCache> caches_;
  std::vector<Transition> transitions_;
  std::vector<ForwardOutput> outputs_;
  ModelGrads grads_;
  LossTerms loss_;
  std::vector<FinishedEpisode> finished_;
  int steps_ = 0;
  int skipped_ = 0;
};

void add_into(ModelGrads & total, const ModelGrads & part)
{
  auto dst = total.groups();
  auto src = part.groups();
  for (std::size_t k = 0; k < ModelParams::kGroupCount; ++k) {
    auto & d = dst[k]->data;
    const auto & s = src[k]->data;
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] += s[i];
    }
  }
}

}  // namespace

TrainResult train(
  const TrainConfig & config, const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table,
  const std::function<void(const ModelParams &, std::int64_t step)> & on_checkpoint,
  const ModelParams * initial)
{
  config.validate();
  TrainResult result;
  result.params = initial != nullptr ? *initial : init_params(config.seed, config.adjacency);
  if (config.total_steps == 0) {
    return result;
  }
  if (episodes.empty()) {
    throw ValidationError("train: no training episodes");
  }

  std::vector<std::unique_ptr<Worker>> workers;
  for (int w = 0; w < config.workers; ++w) {
    workers.push_back(std::make_unique<Worker>(config, scenes, episodes, table,
        derive_seed(config.seed, {0x77, static_cast<std::uint64_t>(w)})));
  }

  Adam optimizer(config.lr);
  ModelGrads total;
  std::deque<bool> trailing;
  std::size_t trailing_successes = 0;
  std::int64_t next_checkpoint = config.checkpoint_every;
  std::int64_t episode_count = 0;

  while (result.steps < config.total_steps) {
    const std::int64_t remaining = config.total_steps - result.steps;
    const int n_workers = config.workers;
    #pragma omp parallel for schedule(static)
    for (int w = 0; w < n_workers; ++w) {
      const std::int64_t budget = std::clamp<std::int64_t>(
        remaining - static_cast<std::int64_t>(w) * config.n_steps, 0, config.n_steps);
      workers[static_cast<std::size_t>(w)]->run(result.params, static_cast<int>(budget));
    }

    total.set_zero();
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    std::int64_t iteration_steps = 0;
    for (const auto & worker : workers) {
      add_into(total, worker->grads());
      policy_loss += worker->loss().policy;
      value_loss += worker->loss().value;
      entropy += worker->loss().entropy;
      iteration_steps += worker->steps();
      result.skipped_episodes += worker->skipped();
    }
    if (config.lr_schedule == "linear") {
      optimizer.set_lr(config.lr * static_cast<double>(remaining) /
        static_cast<double>(config.total_steps));
    }
    result.steps += iteration_steps;
    clip_global_norm(total, config.grad_clip);
    optimizer.step(result.params, total);
    if (!result.params.all_finite()) {
      throw NumericError("train: parameters became non-finite");
    }

    const double denom = static_cast<double>(std::max<std::int64_t>(iteration_steps, 1));
    for (const auto & worker : workers) {
      for (const auto & ep : worker->finished()) {
        trailing.push_back(ep.success);
        trailing_successes += ep.success ? 1 : 0;
        if (trailing.size() > 100) {
          trailing_successes -= trailing.front() ? 1 : 0;
          trailing.pop_front();
        }
        TrainLogRow row;
        row.step = result.steps;
        row.episode = ++episode_count;
        row.reward = ep.reward;
        row.success = ep.success;
        row.trailing_sr = static_cast<double>(trailing_successes) /
          static_cast<double>(trailing.size());
        row.policy_loss = policy_loss / denom;
        row.value_loss = value_loss / denom;
        row.entropy = entropy / denom;
        result.log.push_back(row);
      }
    }
    if (config.checkpoint_every > 0 && result.steps >= next_checkpoint && on_checkpoint) {
      on_checkpoint(result.params, result.steps);
      while (next_checkpoint <= result.steps) {
        next_checkpoint += config.checkpoint_every;
      }
    }
  }
  return result;
}

void write_training_log(
  std::ostream & out, std::span<const TrainLogRow> rows, const std::string & config_hash,
  std::uint64_t seed)
{
  out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
  out << "step,episode,reward,trailing_SR,policy_loss,value_loss,entropy\n";
  char buf[256];
  for (const auto & r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
      static_cast<long long>(r.step), static_cast<long long>(r.episode), r.reward, r.trailing_sr,
      r.policy_loss, r.value_loss, r.entropy);
    out << buf;
  }
}

}  // namespace cirn
