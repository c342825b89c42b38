#include "cirn/scenarios.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cirn/errors.hpp"
#include "cirn/sim_env.hpp"
#include "cirn/util.hpp"

namespace cirn
{

const std::vector<ClassInfo> & class_catalog()
{
  static const std::vector<ClassInfo> catalog{
    // Navigation targets.
    {"bowl", 0.90, 0.25},
    {"garbagecan", 0.40, 0.40},
    {"houseplant", 0.80, 0.50},
    {"laptop", 0.80, 0.35},
    {"television", 1.20, 0.90},
    {"lamp", 1.40, 0.40},
    {"book", 0.70, 0.25},
    {"alarmclock", 0.60, 0.20},
    {"sink", 0.90, 0.60},
    {"towel", 1.10, 0.40},
    // Distractors only.
    {"toaster", 0.95, 0.30},
    {"microwave", 1.20, 0.50},
    {"fridge", 1.00, 0.90},
    {"coffeemachine", 1.00, 0.30},
    {"pillow", 0.60, 0.50},
    {"sofa", 0.50, 1.00},
    {"bed", 0.50, 1.00},
    {"dresser", 0.80, 0.80},
    {"toilet", 0.50, 0.60},
    {"bathtub", 0.50, 1.00},
    {"mirror", 1.40, 0.60},
    {"soapbottle", 0.90, 0.15},
  };
  return catalog;
}

const ClassInfo & class_info(std::string_view name)
{
  const std::string key = normalize_token(name);
  for (const auto & info : class_catalog()) {
    if (info.name == key) {
      return info;
    }
  }
  throw ValidationError("class '" + key + "' is not in the catalog");
}

const SceneInventory & inventory_for(SceneType type)
{
  static const std::map<SceneType, SceneInventory> inventories{
    {SceneType::kitchen,
      {{"bowl", "garbagecan", "houseplant", "sink", "book"},
        {"toaster", "microwave", "fridge", "coffeemachine"}}},
    {SceneType::living_room,
      {{"laptop", "television", "lamp", "houseplant", "garbagecan", "book", "bowl"},
        {"sofa", "pillow"}}},
    {SceneType::bedroom,
      {{"lamp", "book", "alarmclock", "laptop", "houseplant"},
        {"bed", "dresser", "pillow", "mirror"}}},
    {SceneType::bathroom,
      {{"sink", "towel", "garbagecan", "houseplant"},
        {"toilet", "bathtub", "mirror", "soapbottle"}}},
  };
  return inventories.at(type);
}

namespace
{

bool contains(const std::vector<std::string> & v, const std::string & s)
{
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<SceneType> test_scene_types(const ScenarioConfig & config)
{
  std::vector<SceneType> types = config.scene_types_train;
  for (SceneType t : config.scene_types_test) {
    if (std::find(types.begin(), types.end(), t) == types.end()) {
      types.push_back(t);
    }
  }
  return types;
}

}  // namespace

void ScenarioConfig::validate(const EmbeddingTable * table) const
{
  if (scenes_per_type_train < 0 || scenes_per_type_test < 0) {
    throw ValidationError("scenario: scene counts must be non-negative");
  }
  if (grid_size < 6) {
    throw ValidationError("scenario: grid_size must be at least 6");
  }
  if (objects_min < 1 || objects_max < objects_min) {
    throw ValidationError("scenario: need 1 <= objects_min <= objects_max");
  }
  if (start_poses_per_scene < 1) {
    throw ValidationError("scenario: start_poses_per_scene must be positive");
  }
  for (const auto & c : class_split.train) {
    if (contains(class_split.test, c)) {
      throw ValidationError("scenario: class '" + c + "' is in both train and test lists");
    }
  }
  for (const auto * list : {&class_split.train, &class_split.test}) {
    for (const auto & c : *list) {
      class_info(c);
      if (table != nullptr && !table->contains(c)) {
        throw ValidationError("scenario: class '" + c + "' has no embedding");
      }
    }
  }
  if (table != nullptr) {
    for (const auto & info : class_catalog()) {
      if (!table->contains(info.name)) {
        throw ValidationError("scenario: catalog class '" + info.name + "' has no embedding");
      }
    }
  }
  auto placeable = [](SceneType t, const std::vector<std::string> & classes) {
      const auto & targets = inventory_for(t).targets;
      return std::any_of(classes.begin(), classes.end(), [&](const std::string & c) {
        return contains(targets, c);
      });
    };
  for (SceneType t : scene_types_train) {
    if (!placeable(t, class_split.train)) {
      throw ValidationError(
        "scenario: no train class is a target in scene type " + std::string(to_string(t)));
    }
  }
  for (SceneType t : scene_types_test) {
    if (!placeable(t, class_split.test)) {
      throw ValidationError(
        "scenario: no test class is a target in scene type " + std::string(to_string(t)));
    }
  }
}

nlohmann::ordered_json to_json(const ScenarioConfig & c)
{
  nlohmann::ordered_json j;
  j["name"] = c.name;
  auto types = [](const std::vector<SceneType> & v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (SceneType t : v) {
        a.push_back(std::string(to_string(t)));
      }
      return a;
    };
  j["scene_types_train"] = types(c.scene_types_train);
  j["scene_types_test"] = types(c.scene_types_test);
  j["scenes_per_type_train"] = c.scenes_per_type_train;
  j["scenes_per_type_test"] = c.scenes_per_type_test;
  j["class_split"] = {{"train", c.class_split.train}, {"test", c.class_split.test}};
  j["seed"] = c.seed;
  j["grid_size"] = c.grid_size;
  j["objects_per_scene"] = {c.objects_min, c.objects_max};
  j["start_poses_per_scene"] = c.start_poses_per_scene;
  j["max_eval_episodes"] = c.max_eval_episodes;
  return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json & j)
{
  ScenarioConfig c;
  if (j.contains("split")) {
    c = scenario_for_split(j.at("split").get<std::string>(), j.value("seed", 0ULL));
  }
  try {
    c.name = j.value("name", c.name);
    auto types = [](const nlohmann::json & a) {
        std::vector<SceneType> v;
        for (const auto & t : a) {
          v.push_back(scene_type_from_string(t.get<std::string>()));
        }
        return v;
      };
    if (j.contains("scene_types_train")) {
      c.scene_types_train = types(j.at("scene_types_train"));
    }
    if (j.contains("scene_types_test")) {
      c.scene_types_test = types(j.at("scene_types_test"));
    }
    c.scenes_per_type_train = j.value("scenes_per_type_train", c.scenes_per_type_train);
    c.scenes_per_type_test = j.value("scenes_per_type_test", c.scenes_per_type_test);
    if (j.contains("class_split")) {
      c.class_split.train = j.at("class_split").at("train").get<std::vector<std::string>>();
      c.class_split.test = j.at("class_split").at("test").get<std::vector<std::string>>();
    }
    c.seed = j.value("seed", c.seed);
    c.grid_size = j.value("grid_size", c.grid_size);
    if (j.contains("objects_per_scene")) {
      c.objects_min = j.at("objects_per_scene").at(0).get<int>();
      c.objects_max = j.at("objects_per_scene").at(1).get<int>();
    }
    c.start_poses_per_scene = j.value("start_poses_per_scene", c.start_poses_per_scene);
    c.max_eval_episodes = j.value("max_eval_episodes", c.max_eval_episodes);
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("scenario config: ") + e.what());
  }
  return c;
}

ScenarioConfig scenario_for_split(std::string_view split, std::uint64_t seed)
{
  ScenarioConfig c;
  c.seed = seed;
  c.name = std::string(split);
  std::vector<std::string> all_targets;
  for (std::size_t i = 0; i < 10; ++i) {
    all_targets.push_back(class_catalog()[i].name);
  }
  auto split_off = [&](std::vector<std::string> held_out) {
      ClassSplit s;
      for (const auto & t : all_targets) {
        if (!contains(held_out, t)) {
          s.train.push_back(t);
        }
      }
      s.test = std::move(held_out);
      return s;
    };
  if (split == "18-4-analog") {
    c.class_split = split_off({"garbagecan", "alarmclock"});
    return c;
  }
  if (split == "14-8-analog") {
    c.class_split = split_off({"garbagecan", "alarmclock", "towel"});
    return c;
  }
  if (split.rfind("cross:", 0) == 0) {
    const std::string rest(split.substr(6));
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("split '" + std::string(split) + "': expected cross:<train>:<test>");
    }
    const SceneType train_type = scene_type_from_string(rest.substr(0, colon));
    const SceneType test_type = scene_type_from_string(rest.substr(colon + 1));
    if (train_type == test_type) {
      throw ValidationError("cross split needs two different scene types");
    }
    c.scene_types_train = {train_type};
    c.scene_types_test = {test_type};
    // Single-type training gets the scene budget of all four types.
    c.scenes_per_type_train = 16;
    c.class_split.train = inventory_for(train_type).targets;
    for (const auto & t : inventory_for(test_type).targets) {
      if (!contains(c.class_split.train, t)) {
        c.class_split.test.push_back(t);
      }
    }
    return c;
  }
  throw ValidationError("unknown split '" + std::string(split) + "'");
}

const Scene & SceneSet::by_id(std::string_view id) const
{
  for (const auto * list : {&train, &test}) {
    for (const auto & s : *list) {
      if (s.id() == id) {
        return s;
      }
    }
  }
  throw ValidationError("no scene with id '" + std::string(id) + "'");
}

namespace
{

using Rng = std::mt19937_64;

int uniform_int(Rng & rng, int lo, int hi)
{
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Number of free cells reachable from the first free cell, and the total.
bool free_space_connected(int w, int d, const std::vector<std::uint8_t> & blocked)
{
  const auto total = static_cast<std::size_t>(std::count(blocked.begin(), blocked.end(), 0));
  if (total == 0) {
    return false;
  }
  std::vector<std::uint8_t> seen(blocked.size(), 0);
  const auto first = static_cast<std::size_t>(
    std::find(blocked.begin(), blocked.end(), 0) - blocked.begin());
  std::deque<std::size_t> queue{first};
  seen[first] = 1;
  std::size_t count = 0;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    ++count;
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int z = static_cast<int>(i / static_cast<std::size_t>(w));
    const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto & o : nbr) {
      const int nx = x + o[0];
      const int nz = z + o[1];
      if (nx < 0 || nz < 0 || nx >= w || nz >= d) {
        continue;
      }
      const auto j = static_cast<std::size_t>(nz * w + nx);
      if (!blocked[j] && !seen[j]) {
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }
  return count == total;
}

std::vector<Cell> make_walls(Rng & rng, int w, int d)
{
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(w * d), 0);
  auto mark = [&](int x, int z) {grid[static_cast<std::size_t>(z * w + x)] = 1;};
  // One or two partitions with a two-cell doorway, plus a few pillars.
  const int partitions = uniform_int(rng, 1, 2);
  for (int p = 0; p < partitions; ++p) {
    const bool vertical = uniform_int(rng, 0, 1) == 0;
    const int span = vertical ? d : w;
    const int across = vertical ? w : d;
    const int at = uniform_int(rng, 2, across - 3);
    const int length = uniform_int(rng, span / 2, span - 1);
    const bool from_start = uniform_int(rng, 0, 1) == 0;
    const int door = uniform_int(rng, 1, std::max(1, length - 3));
    for (int k = 0; k < length; ++k) {
      if (k == door || k == door + 1) {
        continue;
      }
      const int along = from_start ? k : span - 1 - k;
      if (vertical) {
        mark(at, along);
      } else {
        mark(along, at);
      }
    }
  }
  const int pillars = uniform_int(rng, 0, 2);
  for (int p = 0; p < pillars; ++p) {
    mark(uniform_int(rng, 1, w - 2), uniform_int(rng, 1, d - 2));
  }
  std::vector<Cell> walls;
  for (int z = 0; z < d; ++z) {
    for (int x = 0; x < w; ++x) {
      if (grid[static_cast<std::size_t>(z * w + x)]) {
        walls.push_back({x, z});
      }
    }
  }
  return walls;
}

std::optional<Scene> try_generate(
  const ScenarioConfig & config, SceneType type, const std::string & id, Rng & rng)
{
  const int w = config.grid_size;
  const int d = config.grid_size;
  const auto walls = make_walls(rng, w, d);
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(w * d), 0);
  for (const Cell & c : walls) {
    blocked[static_cast<std::size_t>(c.z * w + c.x)] = 1;
  }
  if (!free_space_connected(w, d, blocked)) {
    return std::nullopt;
  }

  const auto & inventory = inventory_for(type);
  std::vector<std::string> to_place = inventory.targets;
  const int n_objects = std::max<int>(
    uniform_int(rng, config.objects_min, config.objects_max),
    static_cast<int>(to_place.size()));
  std::vector<std::string> pool = inventory.targets;
  pool.insert(pool.end(), inventory.distractors.begin(), inventory.distractors.end());
  while (static_cast<int>(to_place.size()) < n_objects) {
    to_place.push_back(pool[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))]);
  }

  std::vector<SceneObject> objects;
  for (const auto & cls : to_place) {
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      const Cell c{uniform_int(rng, 0, w - 1), uniform_int(rng, 0, d - 1)};
      auto & slot = blocked[static_cast<std::size_t>(c.z * w + c.x)];
      if (slot) {
        continue;
      }
      slot = 1;
      if (!free_space_connected(w, d, blocked)) {
        slot = 0;
        continue;
      }
      const auto & info = class_info(cls);
      objects.push_back({cls, c, info.height, info.size});
      placed = true;
    }
    if (!placed) {
      return std::nullopt;
    }
  }

  Scene scene(id, type, w, d, walls, objects);
  const auto poses = all_poses(scene);
  for (const auto & cls : inventory.targets) {
    const bool has_goal = std::any_of(poses.begin(), poses.end(), [&](const AgentPose & p) {
      return is_goal_pose(scene, p, cls);
    });
    if (!has_goal) {
      return std::nullopt;
    }
  }

  std::vector<Cell> free_cells;
  for (int z = 0; z < d; ++z) {
    for (int x = 0; x < w; ++x) {
      if (scene.is_free({x, z})) {
        free_cells.push_back({x, z});
      }
    }
  }
  std::vector<AgentPose> starts;
  std::set<Cell> used;
  const auto n_starts = std::min<std::size_t>(
    static_cast<std::size_t>(config.start_poses_per_scene), free_cells.size());
  while (starts.size() < n_starts) {
    const Cell c = free_cells[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(free_cells.size()) - 1))];
    if (!used.insert(c).second) {
      continue;
    }
    starts.push_back({c, 90 * uniform_int(rng, 0, 3), 0});
  }
  return Scene(id, type, w, d, walls, objects, starts);
}

Scene generate_one(const ScenarioConfig & config, SceneType type, bool train, int index)
{
  const std::string id = std::string(to_string(type)) + (train ? "_train_" : "_test_") +
    (index < 10 ? "0" : "") + std::to_string(index);
  Rng rng(derive_seed(config.seed,
    {static_cast<std::uint64_t>(type), train ? 1u : 2u, static_cast<std::uint64_t>(index)}));
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (auto scene = try_generate(config, type, id, rng)) {
      return *scene;
    }
  }
  throw ValidationError("scene generation failed for " + id + " after 200 attempts");
}

}  // namespace

SceneSet generate_scenes(const ScenarioConfig & config)
{
  config.validate();
  SceneSet set;
  for (SceneType type : config.scene_types_train) {
    for (int i = 0; i < config.scenes_per_type_train; ++i) {
      set.train.push_back(generate_one(config, type, true, i));
    }
  }
  for (SceneType type : test_scene_types(config)) {
    for (int i = 0; i < config.scenes_per_type_test; ++i) {
      set.test.push_back(generate_one(config, type, false, i));
    }
  }
  return set;
}

namespace
{

std::vector<EpisodeSpec> episodes_for(
  const std::vector<const Scene *> & scenes, const std::vector<std::string> & classes)
{
  std::vector<EpisodeSpec> out;
  for (const Scene * scene : scenes) {
    for (const auto & cls : classes) {
      if (!scene->contains_class(cls) || !contains(inventory_for(scene->type()).targets, cls)) {
        continue;
      }
      for (const auto & start : scene->start_poses()) {
        if (auto len = shortest_path_length(*scene, start, cls)) {
          out.push_back({scene->id(), start, cls, *len});
        }
      }
    }
  }
  return out;
}

std::vector<EpisodeSpec> subsample(std::vector<EpisodeSpec> v, int limit, std::uint64_t seed)
{
  if (limit <= 0 || static_cast<int>(v.size()) <= limit) {
    return v;
  }
  Rng rng(seed);
  std::shuffle(v.begin(), v.end(), rng);
  v.resize(static_cast<std::size_t>(limit));
  return v;
}

}  // namespace

EpisodeSplits make_splits(const ScenarioConfig & config, const SceneSet & scenes)
{
  config.validate();
  auto of_types = [](const std::vector<Scene> & list, const std::vector<SceneType> & types) {
      std::vector<const Scene *> out;
      for (const auto & s : list) {
        if (std::find(types.begin(), types.end(), s.type()) != types.end()) {
          out.push_back(&s);
        }
      }
      return out;
    };
  const auto train_scenes = of_types(scenes.train, config.scene_types_train);
  const auto seen_scenes = of_types(scenes.test, config.scene_types_train);
  const auto unseen_scenes = of_types(scenes.test, config.scene_types_test);

  for (const auto & cls : config.class_split.test) {
    if (unseen_scenes.empty()) {
      break;
    }
    const bool present = std::any_of(unseen_scenes.begin(), unseen_scenes.end(),
        [&](const Scene * s) {return s->contains_class(cls);});
    if (!present) {
      throw ValidationError("test class '" + cls + "' is absent from all test scenes");
    }
  }

  EpisodeSplits splits;
  splits.train = episodes_for(train_scenes, config.class_split.train);
  splits.test_seen = subsample(episodes_for(seen_scenes, config.class_split.train),
      config.max_eval_episodes, derive_seed(config.seed, {11}));
  splits.test_unseen = subsample(episodes_for(unseen_scenes, config.class_split.test),
      config.max_eval_episodes, derive_seed(config.seed, {12}));
  return splits;
}

std::string config_hash(const ScenarioConfig & config)
{
  return hash_hex(to_json(config).dump());
}

void write_scene_set(
  const ScenarioConfig & config, const SceneSet & scenes, const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir / "scenes");
  nlohmann::ordered_json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = config.seed;
  manifest["config"] = to_json(config);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto * group : {&scenes.train, &scenes.test}) {
    const bool train = group == &scenes.train;
    for (const auto & s : *group) {
      const std::string file = "scenes/" + s.id() + ".json";
      save_scene(s, dir / file);
      list.push_back({{"file", file}, {"id", s.id()},
          {"scene_type", std::string(to_string(s.type()))}, {"role", train ? "train" : "test"}});
    }
  }
  manifest["scenes"] = std::move(list);
  manifest["class_split"] = {{"train", config.class_split.train},
    {"test", config.class_split.test}};
  manifest["episode_seeds"] = {{"test_seen", derive_seed(config.seed, {11})},
    {"test_unseen", derive_seed(config.seed, {12})}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << "\n";
}

Manifest read_manifest(const std::filesystem::path & dir)
{
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw ParseError("cannot open " + (dir / "manifest.json").string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  Manifest m;
  m.config = scenario_from_json(doc.at("config"));
  m.config_hash = doc.value("config_hash", std::string());
  for (const auto & entry : doc.at("scenes")) {
    Scene s = load_scene(dir / entry.at("file").get<std::string>());
    if (entry.at("role").get<std::string>() == "train") {
      m.scenes.train.push_back(std::move(s));
    } else {
      m.scenes.test.push_back(std::move(s));
    }
  }
  return m;
}

}  // namespace cirn
