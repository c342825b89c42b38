#include "cirn/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cirn/errors.hpp"
#include "cirn/util.hpp"

namespace cirn
{

double spl_term(bool success, int path_length, int optimal_length)
{
  if (path_length < 1 || optimal_length < 1) {
    throw DomainError("spl_term: path lengths must be at least 1");
  }
  if (!success) {
    return 0.0;
  }
  return static_cast<double>(optimal_length) /
         static_cast<double>(std::max(path_length, optimal_length));
}

std::optional<Metrics> aggregate(std::span<const EpisodeResult> episodes, int min_optimal_length)
{
  double successes = 0.0;
  double spl_sum = 0.0;
  std::size_t n = 0;
  for (const auto & e : episodes) {
    if (e.optimal_length < min_optimal_length) {
      continue;
    }
    ++n;
    successes += e.success ? 1.0 : 0.0;
    spl_sum += spl_term(e.success, e.path_length, e.optimal_length);
  }
  if (n == 0) {
    return std::nullopt;
  }
  const auto count = static_cast<double>(n);
  return Metrics{successes / count, spl_sum / count, n, min_optimal_length};
}

SplitMetrics split_metrics(std::span<const EpisodeResult> episodes)
{
  return {aggregate(episodes, 1), aggregate(episodes, 5)};
}

ActionMode action_mode_from_string(std::string_view name)
{
  if (name == "greedy") {
    return ActionMode::greedy;
  }
  if (name == "sample") {
    return ActionMode::sample;
  }
  throw ValidationError("unknown action mode '" + std::string(name) + "'");
}

Action greedy_action(const std::array<double, kNumActions> & policy)
{
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumActions; ++k) {
    if (policy[k] > policy[best]) {
      best = k;
    }
  }
  return static_cast<Action>(best);
}

Action sample_action(const std::array<double, kNumActions> & policy, double u)
{
  double cumulative = 0.0;
  for (std::size_t k = 0; k < kNumActions; ++k) {
    cumulative += policy[k];
    if (u < cumulative) {
      return static_cast<Action>(k);
    }
  }
  // Rounding left u above the final cumulative sum; take the last action
  // with nonzero mass.
  for (std::size_t k = kNumActions; k-- > 0; ) {
    if (policy[k] > 0.0) {
      return static_cast<Action>(k);
    }
  }
  return Action::Done;
}

NetworkAgent::NetworkAgent(std::shared_ptr<const ModelParams> params, ActionMode mode)
: params_(std::move(params)), mode_(mode)
{
}

std::unique_ptr<Agent> NetworkAgent::clone() const
{
  return std::make_unique<NetworkAgent>(params_, mode_);
}

void NetworkAgent::begin_episode(std::uint64_t seed)
{
  rng_.seed(seed);
  hidden_ = HiddenState{};
  prev_action_.reset();
}

Action NetworkAgent::act(const StateMatrix & state)
{
  const ForwardOutput out = forward(*params_, state, prev_action_, hidden_);
  hidden_ = out.hidden_next;
  Action a = Action::Done;
  if (mode_ == ActionMode::greedy) {
    a = greedy_action(out.policy);
  } else {
    a = sample_action(out.policy, std::uniform_real_distribution<double>(0.0, 1.0)(rng_));
  }
  prev_action_ = a;
  return a;
}

std::unique_ptr<Agent> RandomAgent::clone() const
{
  return std::make_unique<RandomAgent>();
}

void RandomAgent::begin_episode(std::uint64_t seed)
{
  rng_.seed(seed);
}

Action RandomAgent::act(const StateMatrix &)
{
  return static_cast<Action>(std::uniform_int_distribution<int>(0, kNumActions - 1)(rng_));
}

EpisodeResult run_episode(
  NavEnv & env, const Scene & scene, const EpisodeSpec & spec, Agent & agent,
  std::uint64_t seed)
{
  agent.begin_episode(seed);
  std::vector<Detection> detections = env.reset(scene, spec.start, spec.target);
  StepResult step;
  do {
    const StateMatrix state = encode(detections, env.similarities());
    step = env.step(agent.act(state));
    detections = std::move(step.detections);
  } while (!step.done);
  return {step.success, step.steps_taken, spec.optimal_length, spec.target, spec.scene_id};
}

Evaluation evaluate(
  const Agent & agent, const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table, std::uint64_t seed, int max_steps)
{
  Evaluation eval;
  eval.episodes.resize(episodes.size());
  const auto n = static_cast<long>(episodes.size());
  #pragma omp parallel
  {
    auto local = agent.clone();
    NavEnv env(table, max_steps);
    #pragma omp for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) {
      const auto & spec = episodes[static_cast<std::size_t>(i)];
      eval.episodes[static_cast<std::size_t>(i)] = run_episode(env, scenes.by_id(spec.scene_id),
          spec, *local, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    }
  }
  eval.metrics = split_metrics(eval.episodes);
  return eval;
}

Evaluation random_baseline(
  const SceneSet & scenes, std::span<const EpisodeSpec> episodes,
  const EmbeddingTable & table, std::uint64_t seed, int max_steps)
{
  return evaluate(RandomAgent{}, scenes, episodes, table, seed, max_steps);
}

namespace
{

nlohmann::ordered_json metrics_json(const std::optional<Metrics> & m)
{
  if (!m) {
    return nullptr;
  }
  return {{"sr", m->sr}, {"spl", m->spl}, {"n", m->n}};
}

std::optional<Metrics> metrics_from(const nlohmann::json & j, int min_len)
{
  if (j.is_null()) {
    return std::nullopt;
  }
  return Metrics{j.at("sr").get<double>(), j.at("spl").get<double>(),
    j.at("n").get<std::size_t>(), min_len};
}

nlohmann::ordered_json split_json(const SplitMetrics & s)
{
  return {{"L>=1", metrics_json(s.all)}, {"L>=5", metrics_json(s.long_only)}};
}

SplitMetrics split_from(const nlohmann::json & j)
{
  return {metrics_from(j.at("L>=1"), 1), metrics_from(j.at("L>=5"), 5)};
}

}  // namespace

nlohmann::ordered_json to_json(const ResultsFile & results)
{
  nlohmann::ordered_json j;
  j["config_hash"] = results.config_hash;
  j["seed"] = results.seed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto & r : results.rows) {
    rows.push_back({{"model", r.model}, {"split", r.split},
        {"test_class", split_json(r.test_class)}, {"train_class", split_json(r.train_class)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

ResultsFile results_from_json(const nlohmann::json & j)
{
  try {
    ResultsFile r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto & row : j.at("rows")) {
      r.rows.push_back({row.at("model").get<std::string>(), row.at("split").get<std::string>(),
          split_from(row.at("test_class")), split_from(row.at("train_class"))});
    }
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("results file: ") + e.what());
  }
}

void save_results(const ResultsFile & results, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write results file " + path.string());
  }
  out << to_json(results).dump(2) << "\n";
}

ResultsFile load_results(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open results file " + path.string());
  }
  try {
    return results_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError("results file " + path.string() + ": " + e.what());
  }
}

void write_episode_csv(
  std::ostream & out, const std::string & model, const std::string & class_set,
  std::span<const EpisodeResult> episodes, bool header)
{
  if (header) {
    out << "model,class_set,scene_id,target,success,path_length,optimal_length\n";
  }
  for (const auto & e : episodes) {
    out << model << ',' << class_set << ',' << e.scene_id << ',' << e.target << ','
        << (e.success ? 1 : 0) << ',' << e.path_length << ',' << e.optimal_length << '\n';
  }
}

std::string format_report(std::span<const ResultsFile> results)
{
  auto cell = [](const std::optional<Metrics> & m, bool sr) -> std::string {
      if (!m) {
        return "-";
      }
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * (sr ? m->sr : m->spl));
      return buf;
    };
  std::ostringstream out;
  out << std::left << std::setw(12) << "model" << std::setw(24) << "split";
  for (const char * group : {"test class", "train class"}) {
    for (const char * len : {"L>=1", "L>=5"}) {
      const std::string head = std::string(group) + " " + len;
      out << std::setw(22) << (head + " SR") << std::setw(22) << (head + " SPL");
    }
  }
  out << "\n";
  for (const auto & file : results) {
    for (const auto & row : file.rows) {
      out << std::setw(12) << row.model << std::setw(24) << row.split;
      for (const auto * group : {&row.test_class, &row.train_class}) {
        for (const auto * m : {&group->all, &group->long_only}) {
          out << std::setw(22) << cell(*m, true) << std::setw(22) << cell(*m, false);
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace cirn
