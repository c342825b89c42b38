#ifndef CIRN_SIM_ENV_HPP_
#define CIRN_SIM_ENV_HPP_

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cirn/embeddings.hpp"
#include "cirn/scene.hpp"

namespace cirn
{

enum class Action : int { MoveAhead = 0, RotateLeft, RotateRight, LookUp, LookDown, Done };

inline constexpr int kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kAllActions{
  Action::MoveAhead, Action::RotateLeft, Action::RotateRight,
  Action::LookUp, Action::LookDown, Action::Done};

std::string_view to_string(Action a);

// Detection model and kinematics.
inline constexpr double kCellSize = 0.5;
inline constexpr double kCameraHeight = 1.0;
inline constexpr double kHalfFovH = std::numbers::pi / 4.0;  // 90 degree horizontal FOV
inline constexpr double kHalfFovV = std::numbers::pi / 6.0;  // 60 degree vertical FOV
inline constexpr double kTanHalfFovH = 1.0;
inline constexpr double kMaxViewDistance = 5.0;
inline constexpr double kSuccessDistance = 1.5;
inline constexpr int kPitchStep = 30;
inline constexpr int kDefaultMaxSteps = 100;

inline constexpr double kSuccessReward = 5.0;
inline constexpr double kEmptyViewReward = -0.01;
inline constexpr double kSimilarityRewardScale = 0.01;

struct Detection
{
  std::string class_name;  // normalized
  double x_c = 0.0;        // [0, 1], left to right
  double y_c = 0.0;        // [0, 1], top to bottom
  double area = 0.0;       // (0, 1]
  double distance = 0.0;   // meters, horizontal
  int object_index = -1;   // index into Scene::objects()

  bool operator==(const Detection &) const = default;
};

struct StepResult
{
  std::vector<Detection> detections;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  int steps_taken = 0;

  bool operator==(const StepResult &) const = default;
};

/// Ground-truth detections from `pose`, in scene object order. An object is
/// visible when it lies within the horizontal and vertical FOV, within
/// kMaxViewDistance, and no wall cell touches the segment between the two
/// cell centers.
std::vector<Detection> visible_objects(const Scene & scene, const AgentPose & pose);

/// Cells touched by the segment between two cell centers, both endpoints
/// included. Corner crossings add both side cells.
std::vector<Cell> supercover_line(Cell from, Cell to);

bool line_of_sight(const Scene & scene, Cell from, Cell to);

/// Pose after a non-Done action. MoveAhead into a blocked cell is a no-op;
/// pitch saturates at +/-30.
AgentPose apply_action(const Scene & scene, const AgentPose & pose, Action action);

/// Done issued here would succeed: a target instance within kSuccessDistance
/// is among the visible detections.
bool is_goal_pose(const Scene & scene, const AgentPose & pose, std::string_view target);

/// Fewest actions from `start` to a successful Done, counting the Done.
/// Breadth-first search over (cell, heading, pitch). nullopt if no goal
/// pose is reachable.
std::optional<int> shortest_path_length(
  const Scene & scene, const AgentPose & start, std::string_view target);

/// Every valid pose of the scene.
std::vector<AgentPose> all_poses(const Scene & scene);

/// Single-threaded episode runner. The scene must outlive the episode.
class NavEnv
{
public:
  explicit NavEnv(const EmbeddingTable & table, int max_steps = kDefaultMaxSteps);

  /// Throws DomainError for an invalid start pose and EncodingError for a
  /// target without an embedding. The target need not occur in the scene.
  std::vector<Detection> reset(
    const Scene & scene, const AgentPose & start, std::string_view target);

  /// Throws UsageError once the episode is over.
  StepResult step(Action action);

  const AgentPose & pose() const { return pose_; }
  const std::vector<Detection> & detections() const { return detections_; }
  const TargetSimilarities & similarities() const { return similarities_; }
  const std::string & target() const { return similarities_.target(); }
  int steps_taken() const { return steps_; }
  int max_steps() const { return max_steps_; }
  bool done() const { return done_; }

private:
  const EmbeddingTable * table_;
  const Scene * scene_ = nullptr;
  TargetSimilarities similarities_;
  AgentPose pose_;
  std::vector<Detection> detections_;
  int max_steps_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace cirn

#endif  // CIRN_SIM_ENV_HPP_
