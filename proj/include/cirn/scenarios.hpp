#ifndef CIRN_SCENARIOS_HPP_
#define CIRN_SCENARIOS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cirn/embeddings.hpp"
#include "cirn/scene.hpp"

#include "json.hpp"

namespace cirn
{

/// Geometry of an object class and where it may appear.
struct ClassInfo
{
  std::string name;
  double height = 1.0;
  double size = 0.5;
};

/// Per scene type: classes that may be navigation targets and classes that
/// only appear as distractors.
struct SceneInventory
{
  std::vector<std::string> targets;
  std::vector<std::string> distractors;
};

/// The built-in class catalog (22 classes over four scene types).
const std::vector<ClassInfo> & class_catalog();
const ClassInfo & class_info(std::string_view name);
const SceneInventory & inventory_for(SceneType type);

struct ClassSplit
{
  std::vector<std::string> train;
  std::vector<std::string> test;
};

struct ScenarioConfig
{
  std::string name = "18-4-analog";
  std::vector<SceneType> scene_types_train{
    SceneType::kitchen, SceneType::living_room, SceneType::bedroom, SceneType::bathroom};
  std::vector<SceneType> scene_types_test{
    SceneType::kitchen, SceneType::living_room, SceneType::bedroom, SceneType::bathroom};
  int scenes_per_type_train = 8;
  int scenes_per_type_test = 4;
  ClassSplit class_split;
  std::uint64_t seed = 0;
  int grid_size = 10;
  int objects_min = 8;
  int objects_max = 12;
  int start_poses_per_scene = 8;
  /// Evaluation sets larger than this are subsampled deterministically.
  int max_eval_episodes = 1000;

  /// Throws ValidationError on overlapping class lists, unknown classes or
  /// scene types without a placeable class from a list.
  void validate(const EmbeddingTable * table = nullptr) const;
};

nlohmann::ordered_json to_json(const ScenarioConfig & config);
ScenarioConfig scenario_from_json(const nlohmann::json & j);

/// Named protocols: "18-4-analog" (8/2 split over all four scene types),
/// "14-8-analog" (7/3), and "cross:<train_type>:<test_type>", which trains
/// on one scene type and holds out the classes that only the test type
/// offers as targets.
ScenarioConfig scenario_for_split(std::string_view split, std::uint64_t seed = 0);

struct SceneSet
{
  std::vector<Scene> train;
  std::vector<Scene> test;

  const Scene & by_id(std::string_view id) const;
};

/// Seeded procedural generation. Train scenes cover scene_types_train;
/// test scenes cover the union of both type lists. Throws ValidationError
/// when placement fails after bounded retries.
SceneSet generate_scenes(const ScenarioConfig & config);

struct EpisodeSpec
{
  std::string scene_id;
  AgentPose start;
  std::string target;
  int optimal_length = 0;

  bool operator==(const EpisodeSpec &) const = default;
};

struct EpisodeSplits
{
  std::vector<EpisodeSpec> train;
  std::vector<EpisodeSpec> test_seen;    // test scenes of the train types x train classes
  std::vector<EpisodeSpec> test_unseen;  // test scenes of the test types x held-out classes
};

/// Every (scene, start pose, eligible target) triple with a reachable
/// target. Throws ValidationError if a held-out class is absent from all
/// test scenes.
EpisodeSplits make_splits(const ScenarioConfig & config, const SceneSet & scenes);

/// Writes one JSON file per scene under `dir/scenes/` and `dir/manifest.json`.
void write_scene_set(
  const ScenarioConfig & config, const SceneSet & scenes, const std::filesystem::path & dir);

struct Manifest
{
  ScenarioConfig config;
  SceneSet scenes;
  std::string config_hash;
};

Manifest read_manifest(const std::filesystem::path & dir);

/// Hash of the canonical JSON form of a scenario config.
std::string config_hash(const ScenarioConfig & config);

}  // namespace cirn

#endif  // CIRN_SCENARIOS_HPP_
