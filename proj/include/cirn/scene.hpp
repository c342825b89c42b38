#ifndef CIRN_SCENE_HPP_
#define CIRN_SCENE_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cirn
{

enum class SceneType { kitchen, living_room, bedroom, bathroom };

std::string_view to_string(SceneType type);
SceneType scene_type_from_string(std::string_view name);

/// Grid coordinates; one cell is kCellSize meters on a side.
struct Cell
{
  int x = 0;
  int z = 0;

  auto operator<=>(const Cell &) const = default;
};

struct SceneObject
{
  std::string class_name;
  Cell cell;
  double height = 0.0;  // meters above the floor
  double size = 0.0;    // characteristic diameter, meters

  bool operator==(const SceneObject &) const = default;
};

/// heading in {0, 90, 180, 270}; 0 faces +z and 90 faces +x.
/// pitch in {-30, 0, 30}; positive looks up.
struct AgentPose
{
  Cell cell;
  int heading = 0;
  int pitch = 0;

  auto operator<=>(const AgentPose &) const = default;
};

/// Immutable grid layout. Walls and objects both block movement; only
/// walls block line of sight.
class Scene
{
public:
  Scene() = default;

  /// Throws ValidationError if any wall, object or start pose is out of
  /// bounds or overlapping, or if no free cell remains.
  Scene(
    std::string id, SceneType type, int width, int depth, std::vector<Cell> walls,
    std::vector<SceneObject> objects, std::vector<AgentPose> start_poses = {});

  const std::string & id() const { return id_; }
  SceneType type() const { return type_; }
  int width() const { return width_; }
  int depth() const { return depth_; }
  const std::vector<Cell> & walls() const { return walls_; }
  const std::vector<SceneObject> & objects() const { return objects_; }
  const std::vector<AgentPose> & start_poses() const { return start_poses_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.z >= 0 && c.x < width_ && c.z < depth_; }
  /// Out-of-bounds cells count as walls.
  bool is_wall(Cell c) const;
  bool has_object(Cell c) const;
  /// Free for the agent to stand on.
  bool is_free(Cell c) const { return in_bounds(c) && !is_wall(c) && !has_object(c); }

  /// True for in-bounds free cells with a legal heading and pitch.
  bool is_valid_pose(const AgentPose & pose) const;

  /// Distinct normalized class names of the objects, sorted.
  std::vector<std::string> class_inventory() const;

  /// True if at least one object has the (normalized) class name.
  bool contains_class(std::string_view class_name) const;

  bool operator==(const Scene & other) const;

private:
  std::size_t index(Cell c) const
  {
    return static_cast<std::size_t>(c.z) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  std::string id_;
  SceneType type_ = SceneType::kitchen;
  int width_ = 0;
  int depth_ = 0;
  std::vector<Cell> walls_;
  std::vector<SceneObject> objects_;
  std::vector<AgentPose> start_poses_;
  std::vector<std::uint8_t> occupancy_;  // 0 free, 1 wall, 2 object
};

/// Scene document (JSON):
///   {"id", "scene_type", "width", "depth", "walls": [[x, z], ...],
///    "objects": [{"class", "cell": [x, z], "height", "size"}, ...],
///    "start_poses": [{"cell": [x, z], "heading", "pitch"}, ...]}
std::string scene_to_json(const Scene & scene);
Scene scene_from_json(std::string_view text);

void save_scene(const Scene & scene, const std::filesystem::path & path);
Scene load_scene(const std::filesystem::path & path);

}  // namespace cirn

#endif  // CIRN_SCENE_HPP_
