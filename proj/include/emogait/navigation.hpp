#pragma once

#include <Eigen/Core>

#include <vector>

#include "emogait/skeleton.hpp"

namespace emogait {

struct NavAgent {
  int id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();   // ground plane (x, z), m
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();   // m/s
  Eigen::Vector2d preferred_velocity = Eigen::Vector2d::Zero();
  double radius = 0.3;        // m
  double max_speed = 1.8;     // m/s
  double time_horizon = 2.0;  // s, collision-free guarantee window
};

struct NavWorld {
  std::vector<NavAgent> agents;  // unique ids
  double dt = 1.0 / 60.0;
};

// Natural walking speed of a gait: horizontal root displacement between the
// last and first pose divided by the frame count, converted to m/s.
double preferred_speed(const Gait& gait);

// Pairs farther apart than this cannot interact within the horizon.
double interaction_range(const NavAgent& a, const NavAgent& b);

// Velocity of magnitude <= max_speed closest to the preferred velocity that
// satisfies every pairwise reciprocal half-plane constraint over the time
// horizon; when the constraints are infeasible the maximum violation is
// minimized instead. Already-overlapping pairs resolve over one time step.
Eigen::Vector2d compute_new_velocity(const NavAgent& agent,
                                     const std::vector<const NavAgent*>& neighbors, double dt);

struct StepStats {
  double min_separation = std::numeric_limits<double>::infinity();  // center distance - radii
  int overlapping_pairs = 0;  // pairs with center distance < radius sum
};

// Two phases: every new velocity is computed from the same snapshot, then all
// positions integrate by v * dt. Pure function of (world, dt); agent storage
// order does not affect per-agent results.
NavWorld step(const NavWorld& world, double dt, StepStats* stats = nullptr);

// Smallest center distance minus radius sum over all pairs.
double min_separation(const NavWorld& world);

}  // namespace emogait
