#ifndef CIRN_TRAINER_HPP_
#define CIRN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cirn/embeddings.hpp"
#include "cirn/policy_net.hpp"
#include "cirn/scenarios.hpp"
#include "cirn/state_encoder.hpp"

#include "json.hpp"

namespace cirn
{

struct TrainConfig
{
  double gamma = 0.99;
  int n_steps = 20;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double lr = 1e-4;
  double grad_clip = 40.0;
  int workers = 4;
  std::int64_t total_steps = 1'000'000;
  std::uint64_t seed = 0;
  int max_episode_steps = kDefaultMaxSteps;
  Adjacency adjacency = Adjacency::dense;
  /// "constant", or "linear": lr scaled by the fraction of total_steps left.
  std::string lr_schedule = "constant";
  /// Emit a checkpoint every this many env steps; 0 disables.
  std::int64_t checkpoint_every = 0;

  /// Throws ValidationError unless every field is positive and gamma <= 1.
  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig & config);
TrainConfig train_config_from_json(const nlohmann::json & j, TrainConfig defaults = {});

struct Transition
{
  StateMatrix state;
  int action = 0;
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
  bool done = false;
};

struct Returns
{
  std::vector<double> returns;
  std::vector<double> advantages;
};

/// R_t = r_t + gamma * R_{t+1}; the recursion restarts from 0 after a done
/// transition and from `bootstrap_value` past the end of the window.
/// A_t = R_t - value_t.
Returns compute_returns(
  std::span<const Transition> window, double bootstrap_value, double gamma);

struct LossTerms
{
  double total = 0.0;
  double policy = 0.0;   // -sum log pi(a_t) * A_t
  double value = 0.0;    // sum (R_t - V_t)^2, before value_coef
  double entropy = 0.0;  // sum H(pi_t), before entropy_coef
  std::vector<OutputGrad> grads;
};

/// L = -sum log pi(a_t|s_t) A_t + value_coef sum (R_t - V_t)^2
///     - entropy_coef sum H(pi(.|s_t)),
/// with A_t held constant. Returns dL/dlogits and dL/dV per step.
LossTerms a2c_loss(
  std::span<const Transition> window, std::span<const ForwardOutput> outputs,
  const Returns & returns, double value_coef, double entropy_coef);

/// Scales `grads` so the global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_global_norm(ModelGrads & grads, double max_norm);

class Adam
{
public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(ModelParams & params, const ModelGrads & grads);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  ModelGrads m_;
  ModelGrads v_;
};

struct TrainLogRow
{
  std::int64_t step = 0;
  std::int64_t episode = 0;
  double reward = 0.0;
  double trailing_sr = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  bool success = false;
};

struct TrainResult
{
  ModelParams params;
  std::vector<TrainLogRow> log;
  std::int64_t steps = 0;
  std::int64_t skipped_episodes = 0;
};

/// Synchronous advantage actor-critic. Each worker owns an environment and
/// samples episodes uniformly from `episodes`; per iteration every worker
/// collects up to n_steps transitions (fewer if its episode ends), the
/// gradients are summed in worker order, clipped and applied once by Adam.
/// Results are bitwise reproducible for a fixed seed.
TrainResult train(
  const TrainConfig & config, const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table,
  const std::function<void(const ModelParams &, std::int64_t step)> & on_checkpoint = {},
  const ModelParams * initial = nullptr);

/// Training log CSV. The first line is a comment with the config hash and
/// seed.
void write_training_log(
  std::ostream & out, std::span<const TrainLogRow> rows, const std::string & config_hash,
  std::uint64_t seed);

}  // namespace cirn

#endif  // CIRN_TRAINER_HPP_
