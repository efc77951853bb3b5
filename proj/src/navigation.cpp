#include "emogait/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "emogait/error.hpp"

namespace emogait {
namespace {

constexpr double kEpsilon = 1e-10;

double det(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Directed half-plane constraint: permitted velocities v satisfy
// det(direction, point - v) <= 0 (the left side of the directed line).
struct HalfPlane {
  Eigen::Vector2d point;
  Eigen::Vector2d direction;
};

// Clamps the optimum onto constraint line `index`, subject to the previous
// constraints and the speed circle. Returns false when infeasible.
bool solve_on_line(const std::vector<HalfPlane>& lines, std::size_t index, double radius,
                   const Eigen::Vector2d& opt, bool optimize_direction, Eigen::Vector2d& result) {
  const HalfPlane& line = lines[index];
  const double along = line.point.dot(line.direction);
  const double discriminant = along * along + radius * radius - line.point.squaredNorm();
  if (discriminant < 0.0) return false;  // speed circle misses the line entirely

  const double root = std::sqrt(discriminant);
  double t_left = -along - root;
  double t_right = -along + root;

  for (std::size_t i = 0; i < index; ++i) {
    const double denominator = det(line.direction, lines[i].direction);
    const double numerator = det(lines[i].direction, line.point - lines[i].point);
    if (std::abs(denominator) <= kEpsilon) {
      if (numerator < 0.0) return false;  // parallel and fully excluded
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  double t;
  if (optimize_direction) {
    t = opt.dot(line.direction) > 0.0 ? t_right : t_left;
  } else {
    t = std::clamp(line.direction.dot(opt - line.point), t_left, t_right);
  }
  result = line.point + t * line.direction;
  return true;
}

// Incremental 2D linear program over half-planes inside a speed circle.
// Returns the number of constraints satisfied (== lines.size() on success).
std::size_t solve_2d(const std::vector<HalfPlane>& lines, double radius,
                     const Eigen::Vector2d& opt, bool optimize_direction,
                     Eigen::Vector2d& result) {
  if (optimize_direction) {
    result = opt * radius;
  } else if (opt.squaredNorm() > radius * radius) {
    result = opt.normalized() * radius;
  } else {
    result = opt;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) > 0.0) {
      const Eigen::Vector2d saved = result;
      if (!solve_on_line(lines, i, radius, opt, optimize_direction, result)) {
        result = saved;
        return i;
      }
    }
  }
  return lines.size();
}

// Infeasible case: progressively relax by minimizing the maximum violation.
void solve_fallback(const std::vector<HalfPlane>& lines, std::size_t begin, double radius,
                    Eigen::Vector2d& result) {
  double distance = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) <= distance) continue;

    std::vector<HalfPlane> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      HalfPlane line;
      const double denominator = det(lines[i].direction, lines[j].direction);
      if (std::abs(denominator) <= kEpsilon) {
        if (lines[i].direction.dot(lines[j].direction) > 0.0) continue;
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (det(lines[j].direction, lines[i].point - lines[j].point) / denominator) *
                         lines[i].direction;
      }
      line.direction = (lines[j].direction - lines[i].direction).normalized();
      projected.push_back(line);
    }

    const Eigen::Vector2d saved = result;
    const Eigen::Vector2d perpendicular(-lines[i].direction.y(), lines[i].direction.x());
    if (solve_2d(projected, radius, perpendicular, true, result) < projected.size()) {
      result = saved;  // tiny numeric failure; keep the previous optimum
    }
    distance = det(lines[i].direction, lines[i].point - result);
  }
}

HalfPlane avoidance_constraint(const NavAgent& agent, const NavAgent& other, double dt) {
  const Eigen::Vector2d relative_position = other.position - agent.position;
  const Eigen::Vector2d relative_velocity = agent.velocity - other.velocity;
  const double dist_sq = relative_position.squaredNorm();
  const double combined_radius = agent.radius + other.radius;
  const double combined_radius_sq = combined_radius * combined_radius;

  HalfPlane line;
  Eigen::Vector2d u;

  if (dist_sq > combined_radius_sq) {
    const double inv_horizon = 1.0 / agent.time_horizon;
    // Vector from the cutoff-circle center to the relative velocity.
    const Eigen::Vector2d w = relative_velocity - inv_horizon * relative_position;
    const double w_len_sq = w.squaredNorm();
    const double dot = w.dot(relative_position);

    if (dot < 0.0 && dot * dot > combined_radius_sq * w_len_sq) {
      // Project on the cutoff circle.
      const double w_len = std::sqrt(w_len_sq);
      const Eigen::Vector2d unit_w = w / w_len;
      line.direction = Eigen::Vector2d(unit_w.y(), -unit_w.x());
      u = (combined_radius * inv_horizon - w_len) * unit_w;
    } else {
      // Project on the nearer leg of the velocity obstacle cone.
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (det(relative_position, w) > 0.0) {
        line.direction = Eigen::Vector2d(relative_position.x() * leg -
                                             relative_position.y() * combined_radius,
                                         relative_position.x() * combined_radius +
                                             relative_position.y() * leg) /
                         dist_sq;
      } else {
        line.direction = -Eigen::Vector2d(relative_position.x() * leg +
                                              relative_position.y() * combined_radius,
                                          -relative_position.x() * combined_radius +
                                              relative_position.y() * leg) /
                         dist_sq;
      }
      u = relative_velocity.dot(line.direction) * line.direction - relative_velocity;
    }
  } else {
    // Already overlapping: resolve the penetration over a single time step.
    const double inv_dt = 1.0 / dt;
    const Eigen::Vector2d w = relative_velocity - inv_dt * relative_position;
    const double w_len = w.norm();
    const Eigen::Vector2d unit_w = w_len > 0.0 ? Eigen::Vector2d(w / w_len)
                                               : Eigen::Vector2d(1.0, 0.0);
    line.direction = Eigen::Vector2d(unit_w.y(), -unit_w.x());
    u = (combined_radius * inv_dt - w_len) * unit_w;
  }

  // Reciprocity: each agent of the pair takes half of the correction.
  line.point = agent.velocity + 0.5 * u;
  return line;
}

}  // namespace

double preferred_speed(const Gait& gait) {
  if (gait.frame_count() < 2) {
    throw Error(ErrorKind::Data, "preferred_speed: gait needs at least 2 frames");
  }
  Eigen::Vector3d displacement =
      gait.frames.back().position(JointId::Root) - gait.frames.front().position(JointId::Root);
  displacement.y() = 0.0;
  return displacement.norm() / gait.frame_count() * gait.fps;
}

double interaction_range(const NavAgent& a, const NavAgent& b) {
  return (a.max_speed + b.max_speed) * a.time_horizon + a.radius + b.radius;
}

Eigen::Vector2d compute_new_velocity(const NavAgent& agent,
                                     const std::vector<const NavAgent*>& neighbors, double dt) {
  std::vector<HalfPlane> lines;
  lines.reserve(neighbors.size());
  for (const NavAgent* other : neighbors) {
    const double range = interaction_range(agent, *other);
    if ((other->position - agent.position).squaredNorm() > range * range) continue;
    lines.push_back(avoidance_constraint(agent, *other, dt));
  }

  Eigen::Vector2d velocity;
  const std::size_t failed =
      solve_2d(lines, agent.max_speed, agent.preferred_velocity, false, velocity);
  if (failed < lines.size()) {
    solve_fallback(lines, failed, agent.max_speed, velocity);
  }
  return velocity;
}

NavWorld step(const NavWorld& world, double dt, StepStats* stats) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Data, "step: dt must be positive");
  const std::vector<NavAgent>& agents = world.agents;
  const int n = static_cast<int>(agents.size());

  // Uniform grid over agent positions; cell size bounds the largest
  // interaction range so 3x3 neighborhoods cover every candidate pair.
  double cell = 1.0;
  for (const NavAgent& a : agents) {
    cell = std::max(cell, 2.0 * a.max_speed * a.time_horizon + 2.0 * a.radius);
  }
  const double inv_cell = 1.0 / cell;
  auto key_of = [&](const Eigen::Vector2d& p) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() * inv_cell));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() * inv_cell));
    return (static_cast<std::uint64_t>(ix) << 32) ^ static_cast<std::uint32_t>(iy);
  };
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  for (int t = 0; t < n; ++t) grid[key_of(agents[t].position)].push_back(t);

  NavWorld next = world;
  for (int t = 0; t < n; ++t) {
    const NavAgent& agent = agents[t];
    std::vector<const NavAgent*> neighbors;
    const auto ix = static_cast<std::int64_t>(std::floor(agent.position.x() * inv_cell));
    const auto iy = static_cast<std::int64_t>(std::floor(agent.position.y() * inv_cell));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(ix + dx) << 32) ^ static_cast<std::uint32_t>(iy + dy);
        const auto it = grid.find(key);
        if (it == grid.end()) continue;
        for (int other : it->second) {
          if (other != t) neighbors.push_back(&agents[other]);
        }
      }
    }
    // Constraint order must not depend on storage order.
    std::sort(neighbors.begin(), neighbors.end(),
              [](const NavAgent* a, const NavAgent* b) { return a->id < b->id; });
    next.agents[t].velocity = compute_new_velocity(agent, neighbors, dt);
  }

  for (int t = 0; t < n; ++t) {
    next.agents[t].position += next.agents[t].velocity * dt;
  }

  if (stats) {
    *stats = StepStats{};
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double gap = (next.agents[a].position - next.agents[b].position).norm() -
                           (next.agents[a].radius + next.agents[b].radius);
        stats->min_separation = std::min(stats->min_separation, gap);
        if (gap < 0.0) stats->overlapping_pairs++;
      }
    }
  }
  return next;
}

double min_separation(const NavWorld& world) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(world.agents.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      best = std::min(best, (world.agents[a].position - world.agents[b].position).norm() -
                                (world.agents[a].radius + world.agents[b].radius));
    }
  }
  return best;
}

}  // namespace emogait
