#include "cirn/run_config.hpp"

#include <fstream>

#include "cirn/errors.hpp"
#include "cirn/evaluator.hpp"
#include "cirn/util.hpp"

namespace cirn
{

void RunConfig::set_seed(std::uint64_t s)
{
  seed = s;
  scenario.seed = s;
  train.seed = s;
}

nlohmann::ordered_json RunConfig::to_json() const
{
  return {{"seed", seed}, {"scenario", cirn::to_json(scenario)}, {"train", cirn::to_json(train)},
    {"eval", {{"max_steps", eval_max_steps}, {"mode", mode}}}};
}

std::string RunConfig::hash() const
{
  return hash_hex(to_json().dump());
}

RunConfig run_config_from_json(
  const nlohmann::json & doc, const std::string & split_override,
  std::optional<std::uint64_t> seed_override)
{
  RunConfig rc;
  try {
    const std::uint64_t seed = seed_override.value_or(doc.value("seed", std::uint64_t{0}));
    std::string split = split_override;
    if (split.empty() && doc.contains("split")) {
      split = doc.at("split").get<std::string>();
    }
    if (doc.contains("scenario") && !split.empty()) {
      throw ValidationError("run config: give either a scenario block or a split, not both");
    }
    rc.scenario = doc.contains("scenario") ? scenario_from_json(doc.at("scenario")) :
      scenario_for_split(split.empty() ? "18-4-analog" : split, seed);
    if (doc.contains("train")) {
      rc.train = train_config_from_json(doc.at("train"));
    }
    if (doc.contains("eval")) {
      rc.eval_max_steps = doc.at("eval").value("max_steps", rc.eval_max_steps);
      rc.mode = doc.at("eval").value("mode", rc.mode);
    }
    rc.set_seed(seed);
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  if (rc.eval_max_steps < 1) {
    throw ValidationError("run config: eval max_steps must be positive");
  }
  action_mode_from_string(rc.mode);
  rc.train.validate();
  return rc;
}

RunConfig load_run_config(
  const std::filesystem::path & path, const std::string & split_override,
  std::optional<std::uint64_t> seed_override)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, split_override, seed_override);
}

}  // namespace cirn
