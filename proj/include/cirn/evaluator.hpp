#ifndef CIRN_EVALUATOR_HPP_
#define CIRN_EVALUATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cirn/embeddings.hpp"
#include "cirn/policy_net.hpp"
#include "cirn/scenarios.hpp"
#include "cirn/sim_env.hpp"
#include "cirn/state_encoder.hpp"

#include "json.hpp"

namespace cirn
{

struct EpisodeResult
{
  bool success = false;
  int path_length = 0;     // P_i, actions taken including Done
  int optimal_length = 0;  // L_i
  std::string target;
  std::string scene_id;

  bool operator==(const EpisodeResult &) const = default;
};

/// Success weighted by path length for one episode: S * L / max(P, L).
/// Throws DomainError for P < 1 or L < 1.
double spl_term(bool success, int path_length, int optimal_length);

struct Metrics
{
  double sr = 0.0;
  double spl = 0.0;
  std::size_t n = 0;
  int min_optimal_length = 1;  // 1 for the L>=1 split, 5 for L>=5
};

/// Aggregates the episodes with optimal_length >= min_optimal_length;
/// nullopt when that subset is empty.
std::optional<Metrics> aggregate(std::span<const EpisodeResult> episodes, int min_optimal_length);

struct SplitMetrics
{
  std::optional<Metrics> all;        // L >= 1
  std::optional<Metrics> long_only;  // L >= 5
};

SplitMetrics split_metrics(std::span<const EpisodeResult> episodes);

enum class ActionMode { greedy, sample };

ActionMode action_mode_from_string(std::string_view name);

/// Per-episode decision maker. Implementations keep their own episode state
/// and must be cloneable so evaluation can fan out across threads.
class Agent
{
public:
  virtual ~Agent() = default;
  virtual std::unique_ptr<Agent> clone() const = 0;
  virtual void begin_episode(std::uint64_t seed) = 0;
  virtual Action act(const StateMatrix & state) = 0;
};

/// Runs the policy network; greedy mode picks the lowest-index argmax.
class NetworkAgent : public Agent
{
public:
  NetworkAgent(std::shared_ptr<const ModelParams> params, ActionMode mode);

  std::unique_ptr<Agent> clone() const override;
  void begin_episode(std::uint64_t seed) override;
  Action act(const StateMatrix & state) override;

private:
  std::shared_ptr<const ModelParams> params_;
  ActionMode mode_;
  std::mt19937_64 rng_;
  HiddenState hidden_;
  std::optional<Action> prev_action_;
};

/// Uniform over all six actions, Done included.
class RandomAgent : public Agent
{
public:
  std::unique_ptr<Agent> clone() const override;
  void begin_episode(std::uint64_t seed) override;
  Action act(const StateMatrix & state) override;

private:
  std::mt19937_64 rng_;
};

/// Lowest index among the largest probabilities.
Action greedy_action(const std::array<double, kNumActions> & policy);

/// Inverse-CDF draw from `policy` with one uniform variate in [0, 1).
Action sample_action(const std::array<double, kNumActions> & policy, double u);

EpisodeResult run_episode(
  NavEnv & env, const Scene & scene, const EpisodeSpec & spec, Agent & agent,
  std::uint64_t seed);

struct Evaluation
{
  std::vector<EpisodeResult> episodes;
  SplitMetrics metrics;
};

/// Rolls `agent` out on every episode. Episode i uses seed
/// derive_seed(seed, {i}), so results do not depend on thread count.
/// The agent prototype is only cloned, never mutated.
Evaluation evaluate(
  const Agent & agent, const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table, std::uint64_t seed, int max_steps = kDefaultMaxSteps);

Evaluation random_baseline(
  const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table, std::uint64_t seed, int max_steps = kDefaultMaxSteps);

/// One row of the results table: a model on one protocol, measured on the
/// held-out ("test class") and training ("train class") target sets.
struct ResultRow
{
  std::string model;
  std::string split;
  SplitMetrics test_class;
  SplitMetrics train_class;
};

struct ResultsFile
{
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
};

nlohmann::ordered_json to_json(const ResultsFile & results);
ResultsFile results_from_json(const nlohmann::json & j);
void save_results(const ResultsFile & results, const std::filesystem::path & path);
ResultsFile load_results(const std::filesystem::path & path);

/// CSV with columns model,class_set,scene_id,target,success,path_length,optimal_length.
void write_episode_csv(
  std::ostream & out, const std::string & model, const std::string & class_set,
  std::span<const EpisodeResult> episodes, bool header);

/// Fixed-width text table with SR/SPL for L>=1 and L>=5, test classes then
/// train classes, in percent with one decimal; "-" marks an empty subset.
std::string format_report(std::span<const ResultsFile> results);

}  // namespace cirn

#endif  // CIRN_EVALUATOR_HPP_
