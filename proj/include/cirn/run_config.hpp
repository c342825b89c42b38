#ifndef CIRN_RUN_CONFIG_HPP_
#define CIRN_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cirn/scenarios.hpp"
#include "cirn/sim_env.hpp"
#include "cirn/trainer.hpp"
#include "json.hpp"

namespace cirn
{

/// Everything a run depends on. The JSON form is
///   {"seed", "split" | "scenario": {...}, "train": {...},
///    "eval": {"max_steps", "mode"}}
/// where "split" names a built-in protocol and "scenario" spells one out.
struct RunConfig
{
  ScenarioConfig scenario;
  TrainConfig train;
  int eval_max_steps = kDefaultMaxSteps;
  std::string mode = "greedy";
  std::uint64_t seed = 0;

  /// Propagates `seed` into the scenario and training blocks.
  void set_seed(std::uint64_t s);
  nlohmann::ordered_json to_json() const;
  /// Hash of the canonical JSON; recorded in every artifact.
  std::string hash() const;
};

/// `split_override` and `seed_override` win over the document.
RunConfig run_config_from_json(
  const nlohmann::json & doc, const std::string & split_override = {},
  std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(
  const std::filesystem::path & path, const std::string & split_override = {},
  std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace cirn

#endif  // CIRN_RUN_CONFIG_HPP_
