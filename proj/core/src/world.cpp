#include "nstamp/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nstamp::world {

namespace {

constexpr uint64_t kEpisodeStream = 0x45;
constexpr uint64_t kVisionSub = 1;
constexpr uint64_t kForceSub = 2;
constexpr uint64_t kCoarseSub = 3;
constexpr uint64_t kPoseSub = 4;
constexpr uint64_t kLightingSub = 5;

// Depth the tool jams at when an insert misses the socket.
constexpr double kJamClearance = 0.004;

// Fraction of the hover height below which the probe is in contact with
// the screw head rather than hovering above it.
constexpr double kContactBand = 0.25;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double lighting_for_episode(const LightingSchedule& s, int episode_index,
                            rng::Stream& stream) {
  const double phase =
      2.0 * std::numbers::pi * static_cast<double>(episode_index) /
      std::max(s.period_episodes, 1e-9);
  double level = s.offset - s.amplitude * std::cos(phase);
  level += s.jitter * (stream.next_double() - 0.5);
  return clamp01(level);
}

}  // namespace

double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t < 0) t += two_pi;
  return t - std::numbers::pi;
}

Pose normalized(Pose p) {
  p.theta = wrap_angle(p.theta);
  return p;
}

double planar_error(const Pose& a, const Pose& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool WorldState::operator==(const WorldState& other) const {
  return true_pose == other.true_pose && tool_pose == other.tool_pose &&
         socketed == other.socketed && disassembled == other.disassembled &&
         lighting == other.lighting && tool_wear == other.tool_wear &&
         episode_index == other.episode_index &&
         vision_rng.key() == other.vision_rng.key() &&
         vision_rng.counter() == other.vision_rng.counter() &&
         force_rng.key() == other.force_rng.key() &&
         force_rng.counter() == other.force_rng.counter();
}

WorldState new_episode(const DisturbanceConfig& config,
                       const Workspace& workspace, int episode_index,
                       uint64_t seed) {
  if (episode_index < 0) {
    throw std::invalid_argument("episode_index must be non-negative");
  }
  WorldState w;
  w.config = config;
  w.workspace = workspace;
  w.episode_index = episode_index;

  rng::Stream episode(seed, {kEpisodeStream, static_cast<uint64_t>(episode_index)});
  rng::Stream pose_stream = episode.fork(kPoseSub);
  w.true_pose.x = pose_stream.next_uniform(-workspace.extent_x / 2, workspace.extent_x / 2);
  w.true_pose.y = pose_stream.next_uniform(-workspace.extent_y / 2, workspace.extent_y / 2);
  w.true_pose.z = pose_stream.next_uniform(0.0, workspace.extent_z);
  w.true_pose.theta =
      pose_stream.next_uniform(-std::numbers::pi, std::numbers::pi);

  rng::Stream lighting_stream = episode.fork(kLightingSub);
  w.lighting = lighting_for_episode(config.lighting_schedule, episode_index,
                                    lighting_stream);

  w.tool_wear = static_cast<double>(episode_index) * config.wear_rate;
  w.tool_pose = workspace.home;
  w.vision_rng = episode.fork(kVisionSub);
  w.force_rng = episode.fork(kForceSub);
  w.coarse_rng = episode.fork(kCoarseSub);
  return w;
}

std::set<std::string> true_facts(const WorldState& w) {
  std::set<std::string> facts;
  const double planar = planar_error(w.tool_pose, w.true_pose);
  const double dz = w.tool_pose.z - w.true_pose.z;
  const double hover = w.workspace.hover_height;
  if (planar <= w.workspace.coarse_radius) {
    facts.insert("near_screw");
    // "above" is the hover band: descending to contact leaves it, which
    // is what lets Insert delete the fact.
    if (dz > kContactBand * hover && dz <= 2.0 * hover) {
      facts.insert("above_screw");
    }
    if (planar <= w.config.insert_tolerance && dz >= 0.0 &&
        dz <= 2.0 * hover) {
      facts.insert("target_aim");
    }
  }
  if (w.socketed) facts.insert("socketed");
  if (w.disassembled) facts.insert("disassembled");
  return facts;
}

std::pair<WorldState, PrimitiveOutcome> execute_primitive(
    const WorldState& world, std::string_view primitive,
    const std::optional<Pose>& commanded) {
  WorldState next = world;
  PrimitiveOutcome outcome;
  outcome.primitive = std::string(primitive);

  const bool needs_pose = primitive == kMove || primitive == kMateVision ||
                          primitive == kMateForce || primitive == kInsert;
  if (needs_pose && !commanded.has_value()) {
    throw MissingPose("primitive '" + std::string(primitive) +
                      "' requires a commanded pose");
  }

  if (primitive == kMove) {
    next.tool_pose = normalized(*commanded);
    outcome.physical_success = true;
  } else if (primitive == kMateVision || primitive == kMateForce) {
    next.tool_pose = normalized(*commanded);
    next.tool_pose.x += next.tool_wear;  // drift along a fixed axis
    outcome.physical_success = true;
  } else if (primitive == kInsert) {
    const double err = planar_error(next.tool_pose, next.true_pose);
    outcome.physical_success = err <= next.config.insert_tolerance;
    if (outcome.physical_success) {
      next.socketed = true;
      next.tool_pose.z = next.true_pose.z;
    } else {
      next.tool_pose.z = next.true_pose.z + kJamClearance;
    }
  } else if (primitive == kDisassemble) {
    outcome.physical_success = next.socketed;
    if (outcome.physical_success) next.disassembled = true;
  } else {
    throw InvalidPrimitive("unknown primitive '" + std::string(primitive) +
                           "'");
  }

  outcome.facts = true_facts(next);
  return {std::move(next), std::move(outcome)};
}

std::vector<double> sense_vision(WorldState& world) {
  const auto& cfg = world.config;
  const double bias = cfg.vision_bias_gain * world.lighting;
  std::vector<double> obs(kObservationDim);
  obs[0] = world.true_pose.x + bias + cfg.vision_noise_std * world.vision_rng.next_gaussian();
  obs[1] = world.true_pose.y + bias + cfg.vision_noise_std * world.vision_rng.next_gaussian();
  obs[2] = world.true_pose.z + cfg.vision_noise_std * world.vision_rng.next_gaussian();
  obs[3] = wrap_angle(world.true_pose.theta +
                      cfg.vision_noise_std * world.vision_rng.next_gaussian());
  obs[4] = world.lighting;
  return obs;
}

std::vector<double> sense_force(WorldState& world) {
  const auto& cfg = world.config;
  std::vector<double> obs(kObservationDim);
  obs[0] = world.true_pose.x + cfg.force_noise_std * world.force_rng.next_gaussian();
  obs[1] = world.true_pose.y + cfg.force_noise_std * world.force_rng.next_gaussian();
  obs[2] = world.true_pose.z + cfg.force_noise_std * world.force_rng.next_gaussian();
  obs[3] = wrap_angle(world.true_pose.theta +
                      cfg.force_noise_std * world.force_rng.next_gaussian());
  obs[4] = engagement_level(world);
  return obs;
}

double engagement_level(const WorldState& w) {
  const bool contact_zone =
      planar_error(w.tool_pose, w.true_pose) <= w.workspace.coarse_radius &&
      w.tool_pose.z - w.true_pose.z <= kContactBand * w.workspace.hover_height;
  if (w.disassembled) {
    // free spin inside the empty hole; away from it the probe feels air
    return contact_zone ? -0.5 : 0.0;
  }
  if (w.socketed) return 1.0;
  return contact_zone ? 0.3 : 0.0;
}

Pose sample_coarse_pose(WorldState& world) {
  const double radius = 0.8 * world.workspace.coarse_radius;
  // rejection-free disk sample: radius via sqrt of uniform
  const double r = radius * std::sqrt(world.coarse_rng.next_double());
  const double phi = world.coarse_rng.next_uniform(0.0, 2.0 * std::numbers::pi);
  Pose p = world.true_pose;
  p.x += r * std::cos(phi);
  p.y += r * std::sin(phi);
  p.z = world.true_pose.z + world.workspace.hover_height;
  p.theta = 0.0;
  return p;
}

}  // namespace nstamp::world
