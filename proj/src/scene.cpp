#include "cirn/scene.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cirn/embeddings.hpp"
#include "cirn/errors.hpp"

namespace cirn
{

std::string_view to_string(SceneType type)
{
  switch (type) {
    case SceneType::kitchen:
      return "kitchen";
    case SceneType::living_room:
      return "living_room";
    case SceneType::bedroom:
      return "bedroom";
    case SceneType::bathroom:
      return "bathroom";
  }
  return "kitchen";
}

SceneType scene_type_from_string(std::string_view name)
{
  for (auto t : {SceneType::kitchen, SceneType::living_room, SceneType::bedroom,
      SceneType::bathroom})
  {
    if (to_string(t) == name) {
      return t;
    }
  }
  throw ValidationError("unknown scene type '" + std::string(name) + "'");
}

namespace
{

std::string cell_str(Cell c)
{
  return "(" + std::to_string(c.x) + ", " + std::to_string(c.z) + ")";
}

bool legal_heading(int h) {return h == 0 || h == 90 || h == 180 || h == 270;}
bool legal_pitch(int p) {return p == -30 || p == 0 || p == 30;}

}  // namespace

Scene::Scene(
  std::string id, SceneType type, int width, int depth, std::vector<Cell> walls,
  std::vector<SceneObject> objects, std::vector<AgentPose> start_poses)
: id_(std::move(id)), type_(type), width_(width), depth_(depth), walls_(std::move(walls)),
  objects_(std::move(objects)), start_poses_(std::move(start_poses))
{
  if (width_ <= 0 || depth_ <= 0) {
    throw ValidationError("scene " + id_ + ": width and depth must be positive");
  }
  occupancy_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(depth_), 0);
  for (const Cell & w : walls_) {
    if (!in_bounds(w)) {
      throw ValidationError("scene " + id_ + ": wall " + cell_str(w) + " out of bounds");
    }
    if (occupancy_[index(w)] != 0) {
      throw ValidationError("scene " + id_ + ": duplicate wall " + cell_str(w));
    }
    occupancy_[index(w)] = 1;
  }
  for (const auto & obj : objects_) {
    if (obj.class_name.empty()) {
      throw ValidationError("scene " + id_ + ": object with empty class name");
    }
    if (!in_bounds(obj.cell)) {
      throw ValidationError(
        "scene " + id_ + ": object '" + obj.class_name + "' out of bounds at " +
        cell_str(obj.cell));
    }
    if (occupancy_[index(obj.cell)] != 0) {
      throw ValidationError(
        "scene " + id_ + ": object '" + obj.class_name + "' overlaps a wall or object at " +
        cell_str(obj.cell));
    }
    if (!(obj.size > 0.0) || !(obj.height >= 0.0)) {
      throw ValidationError(
        "scene " + id_ + ": object '" + obj.class_name + "' needs size > 0 and height >= 0");
    }
    occupancy_[index(obj.cell)] = 2;
  }
  if (std::find(occupancy_.begin(), occupancy_.end(), 0) == occupancy_.end()) {
    throw ValidationError("scene " + id_ + ": no free cell");
  }
  for (const auto & pose : start_poses_) {
    if (!is_valid_pose(pose)) {
      throw ValidationError("scene " + id_ + ": invalid start pose at " + cell_str(pose.cell));
    }
  }
}

bool Scene::is_wall(Cell c) const
{
  return !in_bounds(c) || occupancy_[index(c)] == 1;
}

bool Scene::has_object(Cell c) const
{
  return in_bounds(c) && occupancy_[index(c)] == 2;
}

bool Scene::is_valid_pose(const AgentPose & pose) const
{
  return is_free(pose.cell) && legal_heading(pose.heading) && legal_pitch(pose.pitch);
}

std::vector<std::string> Scene::class_inventory() const
{
  std::set<std::string> names;
  for (const auto & obj : objects_) {
    names.insert(normalize_token(obj.class_name));
  }
  return {names.begin(), names.end()};
}

bool Scene::contains_class(std::string_view class_name) const
{
  const std::string key = normalize_token(class_name);
  return std::any_of(objects_.begin(), objects_.end(), [&](const SceneObject & o) {
    return normalize_token(o.class_name) == key;
  });
}

bool Scene::operator==(const Scene & other) const
{
  return id_ == other.id_ && type_ == other.type_ && width_ == other.width_ &&
         depth_ == other.depth_ && walls_ == other.walls_ && objects_ == other.objects_ &&
         start_poses_ == other.start_poses_;
}

std::string scene_to_json(const Scene & scene)
{
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["id"] = scene.id();
  doc["scene_type"] = std::string(to_string(scene.type()));
  doc["width"] = scene.width();
  doc["depth"] = scene.depth();
  ordered_json walls = ordered_json::array();
  for (const Cell & w : scene.walls()) {
    walls.push_back({w.x, w.z});
  }
  doc["walls"] = std::move(walls);
  ordered_json objects = ordered_json::array();
  for (const auto & o : scene.objects()) {
    ordered_json obj;
    obj["class"] = o.class_name;
    obj["cell"] = {o.cell.x, o.cell.z};
    obj["height"] = o.height;
    obj["size"] = o.size;
    objects.push_back(std::move(obj));
  }
  doc["objects"] = std::move(objects);
  ordered_json starts = ordered_json::array();
  for (const auto & p : scene.start_poses()) {
    ordered_json pose;
    pose["cell"] = {p.cell.x, p.cell.z};
    pose["heading"] = p.heading;
    pose["pitch"] = p.pitch;
    starts.push_back(std::move(pose));
  }
  doc["start_poses"] = std::move(starts);
  return doc.dump(1) + "\n";
}

namespace
{

Cell cell_from(const nlohmann::json & j)
{
  if (!j.is_array() || j.size() != 2) {
    throw ParseError("cell must be a two-element array [x, z]");
  }
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace

Scene scene_from_json(std::string_view text)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError(std::string("scene document: ") + e.what());
  }
  try {
    std::vector<Cell> walls;
    for (const auto & w : doc.at("walls")) {
      walls.push_back(cell_from(w));
    }
    std::vector<SceneObject> objects;
    for (const auto & o : doc.at("objects")) {
      objects.push_back(
        {o.at("class").get<std::string>(), cell_from(o.at("cell")), o.at("height").get<double>(),
          o.at("size").get<double>()});
    }
    std::vector<AgentPose> starts;
    if (doc.contains("start_poses")) {
      for (const auto & p : doc.at("start_poses")) {
        starts.push_back({cell_from(p.at("cell")), p.at("heading").get<int>(),
            p.at("pitch").get<int>()});
      }
    }
    return Scene(
      doc.at("id").get<std::string>(),
      scene_type_from_string(doc.at("scene_type").get<std::string>()),
      doc.at("width").get<int>(), doc.at("depth").get<int>(), std::move(walls),
      std::move(objects), std::move(starts));
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("scene document: ") + e.what());
  }
}

void save_scene(const Scene & scene, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write scene file " + path.string());
  }
  out << scene_to_json(scene);
}

Scene load_scene(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open scene file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return scene_from_json(buf.str());
}

}  // namespace cirn
