#pragma once

#include "pcis/rng.hpp"
#include "pcis/types.hpp"

#include <cstdint>
#include <vector>

namespace pcis {

// Synthetic desk-scale scenes: a floor plane plus a handful of colored
// primitives (sphere, box, cylinder) floating in a room. Class ids:
// 0 floor, 1 sphere, 2 box, 3 cylinder. The floor carries its own instance
// label, so every scene has at least one instance.
struct SynthConfig {
  std::uint64_t seed = 1;
  int num_train = 200;
  int num_test = 50;
  int points_per_scene = 1024;
  int objects_min = 3;
  int objects_max = 7;
  double min_center_separation = 0.5;  // meters, between object centers
  double coord_noise = 0.01;           // sigma, meters
  double color_jitter = 0.05;          // sigma per channel
  double room_x = 10.0, room_y = 10.0, room_z = 3.0;
};

inline constexpr int kSynthNumClasses = 4;

// Deterministic in (cfg.seed, index): the same pair always produces the same
// scene, bit for bit. Throws DataError("scene too crowded") when object
// placement cannot satisfy min_center_separation after 1000 attempts.
Scene generate_scene(const SynthConfig& cfg, int index);

struct SplitResult {
  std::vector<Scene> train;
  std::vector<Scene> test;
};

// Train scenes use indices [0, num_train), test [num_train, num_train +
// num_test): disjoint by construction.
SplitResult generate_split(const SynthConfig& cfg);

// Unstructured random scene for gradient checks and unit tests: uniform
// coordinates and colors, every point labeled, instances assigned round-robin
// so each of the requested instances is non-empty.
Scene random_scene(Rng& rng, int num_points, int num_instances, int num_classes);

}  // namespace pcis
