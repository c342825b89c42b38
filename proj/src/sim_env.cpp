#include "cirn/sim_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>

#include "cirn/errors.hpp"

namespace cirn
{

std::string_view to_string(Action a)
{
  switch (a) {
    case Action::MoveAhead:
      return "MoveAhead";
    case Action::RotateLeft:
      return "RotateLeft";
    case Action::RotateRight:
      return "RotateRight";
    case Action::LookUp:
      return "LookUp";
    case Action::LookDown:
      return "LookDown";
    case Action::Done:
      return "Done";
  }
  return "?";
}

namespace
{

// Unit forward vector for a legal heading; 0 faces +z, 90 faces +x.
Cell forward_of(int heading)
{
  switch (heading) {
    case 0:
      return {0, 1};
    case 90:
      return {1, 0};
    case 180:
      return {0, -1};
    default:
      return {-1, 0};
  }
}

double deg_to_rad(int deg)
{
  return static_cast<double>(deg) * std::numbers::pi / 180.0;
}

}  // namespace

std::vector<Cell> supercover_line(Cell from, Cell to)
{
  const int dx = to.x - from.x;
  const int dz = to.z - from.z;
  const int nx = std::abs(dx);
  const int nz = std::abs(dz);
  const int sx = dx > 0 ? 1 : -1;
  const int sz = dz > 0 ? 1 : -1;

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(nx + nz + 1));
  Cell c = from;
  cells.push_back(c);
  for (int ix = 0, iz = 0; ix < nx || iz < nz; ) {
    // Compare the parametric positions of the next vertical and horizontal
    // grid-line crossings: (0.5 + ix) / nx vs (0.5 + iz) / nz.
    const long decision =
      static_cast<long>(1 + 2 * ix) * nz - static_cast<long>(1 + 2 * iz) * nx;
    if (decision == 0) {
      cells.push_back({c.x + sx, c.z});
      cells.push_back({c.x, c.z + sz});
      c.x += sx;
      c.z += sz;
      ++ix;
      ++iz;
    } else if (decision < 0) {
      c.x += sx;
      ++ix;
    } else {
      c.z += sz;
      ++iz;
    }
    cells.push_back(c);
  }
  return cells;
}

bool line_of_sight(const Scene & scene, Cell from, Cell to)
{
  for (const Cell & c : supercover_line(from, to)) {
    if (scene.is_wall(c)) {
      return false;
    }
  }
  return true;
}

std::vector<Detection> visible_objects(const Scene & scene, const AgentPose & pose)
{
  std::vector<Detection> out;
  const Cell fwd = forward_of(pose.heading);
  const Cell right{fwd.z, -fwd.x};
  const double pitch = deg_to_rad(pose.pitch);

  const auto & objects = scene.objects();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject & obj = objects[i];
    const int dx = obj.cell.x - pose.cell.x;
    const int dz = obj.cell.z - pose.cell.z;
    const int sq_cells = dx * dx + dz * dz;
    if (sq_cells == 0) {
      continue;
    }
    const double distance = kCellSize * std::sqrt(static_cast<double>(sq_cells));
    if (distance > kMaxViewDistance) {
      continue;
    }
    const int along = dx * fwd.x + dz * fwd.z;
    const int across = dx * right.x + dz * right.z;
    const double bearing = std::atan2(static_cast<double>(across), static_cast<double>(along));
    if (std::fabs(bearing) > kHalfFovH) {
      continue;
    }
    const double elevation = std::atan2(obj.height - kCameraHeight, distance);
    const double relative = elevation - pitch;
    if (std::fabs(relative) > kHalfFovV) {
      continue;
    }
    if (!line_of_sight(scene, pose.cell, obj.cell)) {
      continue;
    }
    const double extent = obj.size / (distance * kTanHalfFovH * 2.0);
    Detection det;
    det.class_name = normalize_token(obj.class_name);
    det.x_c = 0.5 + bearing / (2.0 * kHalfFovH);
    det.y_c = 0.5 - relative / (2.0 * kHalfFovV);
    det.area = std::clamp(extent * extent, 1e-4, 1.0);
    det.distance = distance;
    det.object_index = static_cast<int>(i);
    out.push_back(std::move(det));
  }
  return out;
}

AgentPose apply_action(const Scene & scene, const AgentPose & pose, Action action)
{
  AgentPose next = pose;
  switch (action) {
    case Action::MoveAhead: {
        const Cell fwd = forward_of(pose.heading);
        const Cell target{pose.cell.x + fwd.x, pose.cell.z + fwd.z};
        if (scene.is_free(target)) {
          next.cell = target;
        }
        break;
      }
    case Action::RotateLeft:
      next.heading = (pose.heading + 270) % 360;
      break;
    case Action::RotateRight:
      next.heading = (pose.heading + 90) % 360;
      break;
    case Action::LookUp:
      next.pitch = std::min(pose.pitch + kPitchStep, kPitchStep);
      break;
    case Action::LookDown:
      next.pitch = std::max(pose.pitch - kPitchStep, -kPitchStep);
      break;
    case Action::Done:
      break;
  }
  return next;
}

namespace
{

bool goal_in(const std::vector<Detection> & detections, const std::string & target)
{
  return std::any_of(detections.begin(), detections.end(), [&](const Detection & d) {
    return d.class_name == target && d.distance <= kSuccessDistance;
  });
}

}  // namespace

bool is_goal_pose(const Scene & scene, const AgentPose & pose, std::string_view target)
{
  return goal_in(visible_objects(scene, pose), normalize_token(target));
}

std::vector<AgentPose> all_poses(const Scene & scene)
{
  std::vector<AgentPose> poses;
  for (int z = 0; z < scene.depth(); ++z) {
    for (int x = 0; x < scene.width(); ++x) {
      if (!scene.is_free({x, z})) {
        continue;
      }
      for (int heading : {0, 90, 180, 270}) {
        for (int pitch : {-30, 0, 30}) {
          poses.push_back({{x, z}, heading, pitch});
        }
      }
    }
  }
  return poses;
}

std::optional<int> shortest_path_length(
  const Scene & scene, const AgentPose & start, std::string_view target)
{
  if (!scene.is_valid_pose(start)) {
    throw DomainError("shortest_path_length: invalid start pose");
  }
  const std::string key = normalize_token(target);
  if (!scene.contains_class(key)) {
    return std::nullopt;
  }
  auto encode = [&](const AgentPose & p) {
      const std::size_t cell = static_cast<std::size_t>(p.cell.z * scene.width() + p.cell.x);
      return (cell * 4 + static_cast<std::size_t>(p.heading / 90)) * 3 +
             static_cast<std::size_t>(p.pitch / kPitchStep + 1);
    };
  const std::size_t n_states =
    static_cast<std::size_t>(scene.width()) * static_cast<std::size_t>(scene.depth()) * 12;
  std::vector<int> depth(n_states, -1);
  std::deque<AgentPose> frontier;
  depth[encode(start)] = 0;
  frontier.push_back(start);
  while (!frontier.empty()) {
    const AgentPose pose = frontier.front();
    frontier.pop_front();
    const int d = depth[encode(pose)];
    if (is_goal_pose(scene, pose, key)) {
      return d + 1;
    }
    for (Action a : kAllActions) {
      if (a == Action::Done) {
        continue;
      }
      const AgentPose next = apply_action(scene, pose, a);
      const std::size_t id = encode(next);
      if (depth[id] < 0) {
        depth[id] = d + 1;
        frontier.push_back(next);
      }
    }
  }
  return std::nullopt;
}

NavEnv::NavEnv(const EmbeddingTable & table, int max_steps)
: table_(&table), max_steps_(max_steps)
{
  if (max_steps <= 0) {
    throw DomainError("NavEnv: max_steps must be positive");
  }
}

std::vector<Detection> NavEnv::reset(
  const Scene & scene, const AgentPose & start, std::string_view target)
{
  if (!scene.is_valid_pose(start)) {
    throw DomainError("reset: invalid start pose for scene " + scene.id());
  }
  const auto inventory = scene.class_inventory();
  similarities_ = TargetSimilarities(*table_, target, inventory);
  scene_ = &scene;
  pose_ = start;
  steps_ = 0;
  done_ = false;
  detections_ = visible_objects(scene, pose_);
  return detections_;
}

StepResult NavEnv::step(Action action)
{
  if (done_ || scene_ == nullptr) {
    throw UsageError("step called on a finished episode; call reset first");
  }
  StepResult result;
  ++steps_;
  if (action == Action::Done) {
    result.success = goal_in(detections_, similarities_.target());
    result.reward = result.success ? kSuccessReward : kEmptyViewReward;
    result.done = true;
  } else {
    pose_ = apply_action(*scene_, pose_, action);
    detections_ = visible_objects(*scene_, pose_);
    if (detections_.empty()) {
      result.reward = kEmptyViewReward;
    } else {
      double best = -1.0;
      for (const auto & d : detections_) {
        best = std::max(best, similarities_(d.class_name));
      }
      result.reward = kSimilarityRewardScale * best;
    }
    result.done = steps_ >= max_steps_;
  }
  if (steps_ >= max_steps_) {
    result.done = true;
  }
  done_ = result.done;
  result.detections = detections_;
  result.steps_taken = steps_;
  return result;
}

}  // namespace cirn
