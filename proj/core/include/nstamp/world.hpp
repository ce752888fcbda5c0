#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nstamp/rng.hpp"

namespace nstamp::world {

// Tool/screw pose [x, y, z, theta]; x/y/z in meters, theta in radians
// normalized to [-pi, pi).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;

  bool operator==(const Pose&) const = default;
};

// Wraps an angle to [-pi, pi).
double wrap_angle(double theta);
Pose normalized(Pose p);

// Planar (x, y) distance between two poses.
double planar_error(const Pose& a, const Pose& b);

// Episode-indexed lighting process: offset + amplitude sinusoid with
// uniform per-episode jitter, clamped to [0, 1].
struct LightingSchedule {
  double offset = 0.5;
  double amplitude = 0.45;
  double period_episodes = 50.0;
  double jitter = 0.1;

  static LightingSchedule constant(double level) {
    return {level, 0.0, 1.0, 0.0};
  }
};

struct DisturbanceConfig {
  LightingSchedule lighting_schedule;
  double vision_bias_gain = 0.004;   // meters of x/y bias per unit lighting
  double vision_noise_std = 0.001;   // meters (applied to theta as radians)
  double force_noise_std = 0.0015;   // meters
  double wear_rate = 1e-6;           // meters of drift accumulated per episode
  double insert_tolerance = 0.002;   // meters of planar error for Insert
};

// Workspace geometry shared by the world and the episode logic. The
// screw is sampled inside a box centered on the origin.
struct Workspace {
  double extent_x = 0.4;
  double extent_y = 0.4;
  double extent_z = 0.05;
  double coarse_radius = 0.03;   // Move places the tool within this radius
  double hover_height = 0.02;    // Mate leaves the tool this far above
  Pose home{0.0, -0.3, 0.15, 0.0};
};

struct WorldState {
  Pose true_pose;            // the screw
  Pose tool_pose;            // physical tool tip, includes wear drift
  bool socketed = false;
  bool disassembled = false;
  double lighting = 0.0;     // [0, 1]
  double tool_wear = 0.0;    // meters, accumulated across episodes
  int episode_index = 0;

  DisturbanceConfig config;
  Workspace workspace;

  rng::Stream vision_rng;
  rng::Stream force_rng;
  rng::Stream coarse_rng;

  bool operator==(const WorldState&) const;
};

struct PrimitiveOutcome {
  std::string primitive;
  bool physical_success = false;
  std::set<std::string> facts;  // ground-truth predicate evaluation
};

struct InvalidPrimitive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingPose : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kMove = "Move";
inline constexpr std::string_view kMateVision = "Mate_vision";
inline constexpr std::string_view kMateForce = "Mate_force";
inline constexpr std::string_view kInsert = "Insert";
inline constexpr std::string_view kDisassemble = "Disassemble";

// Fresh episode world: screw pose sampled uniformly from the workspace
// box, lighting from the schedule, wear = episode_index * wear_rate.
// Fully determined by (config, workspace, episode_index, seed).
WorldState new_episode(const DisturbanceConfig& config,
                       const Workspace& workspace, int episode_index,
                       uint64_t seed);

// Ground-truth predicate evaluation for the current physical state.
std::set<std::string> true_facts(const WorldState& world);

// Executes one primitive against the physical world. Move and the Mate
// primitives reposition the tool (Mates add the wear drift along x);
// Insert succeeds iff the planar tool error is within insert_tolerance;
// Disassemble requires a socketed screw. The input world is unchanged.
std::pair<WorldState, PrimitiveOutcome> execute_primitive(
    const WorldState& world, std::string_view primitive,
    const std::optional<Pose>& commanded);

// Observation layouts (both length 5):
//   vision: [x, y, z, theta, lighting], x/y biased by
//           vision_bias_gain * lighting, all pose slots carry
//           vision_noise_std Gaussian noise
//   force:  [x, y, z, theta, engagement], pose slots carry
//           force_noise_std noise; engagement is the contact signature
//           the spiral search feels (1 mated, 0.3 head contact,
//           0 nothing, -0.5 free spin in an empty hole)
inline constexpr int kObservationDim = 5;

std::vector<double> sense_vision(WorldState& world);
std::vector<double> sense_force(WorldState& world);

double engagement_level(const WorldState& world);

// Coarse screw detection used by Move: the true pose offset by a planar
// draw within 0.8 * coarse_radius, hovering above the head.
Pose sample_coarse_pose(WorldState& world);

}  // namespace nstamp::world
