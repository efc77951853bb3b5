#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "emogait/error.hpp"
#include "emogait/navigation.hpp"
#include "fixtures.hpp"

using namespace emogait;

namespace {

// Independently coded reciprocal half-plane for one neighbor: scalar
// arithmetic, no shared code with the library.
struct OracleConstraint {
  double px, py;  // a point on the boundary line
  double dx, dy;  // line direction; permitted side is det(d, v - p) <= 0
};

OracleConstraint oracle_halfplane(double rel_px, double rel_py, double rel_vx, double rel_vy,
                                  double r_sum, double horizon, double vx, double vy) {
  const double inv_t = 1.0 / horizon;
  const double wx = rel_vx - inv_t * rel_px;
  const double wy = rel_vy - inv_t * rel_py;
  const double w2 = wx * wx + wy * wy;
  const double dot = wx * rel_px + wy * rel_py;
  const double dist2 = rel_px * rel_px + rel_py * rel_py;
  const double r2 = r_sum * r_sum;

  double ux, uy, dir_x, dir_y;
  if (dot < 0.0 && dot * dot > r2 * w2) {
    const double w_len = std::sqrt(w2);
    const double nx = wx / w_len, ny = wy / w_len;
    dir_x = ny;
    dir_y = -nx;
    ux = (r_sum * inv_t - w_len) * nx;
    uy = (r_sum * inv_t - w_len) * ny;
  } else {
    const double leg = std::sqrt(dist2 - r2);
    if (rel_px * wy - rel_py * wx > 0.0) {
      dir_x = (rel_px * leg - rel_py * r_sum) / dist2;
      dir_y = (rel_px * r_sum + rel_py * leg) / dist2;
    } else {
      dir_x = -(rel_px * leg + rel_py * r_sum) / dist2;
      dir_y = -(-rel_px * r_sum + rel_py * leg) / dist2;
    }
    const double along = rel_vx * dir_x + rel_vy * dir_y;
    ux = along * dir_x - rel_vx;
    uy = along * dir_y - rel_vy;
  }
  return {vx + 0.5 * ux, vy + 0.5 * uy, dir_x, dir_y};
}

bool oracle_permits(const OracleConstraint& c, double vx, double vy) {
  // Permitted side: det(direction, point - v) <= 0.
  return c.dx * (c.py - vy) - c.dy * (c.px - vx) <= 1e-12;
}

NavAgent agent_at(int id, double x, double y, double pref_x, double pref_y) {
  NavAgent a;
  a.id = id;
  a.position = {x, y};
  a.preferred_velocity = {pref_x, pref_y};
  return a;
}

}  // namespace

TEST_CASE("preferred speed from gait displacement") {
  SUBCASE("stationary root gives zero") {
    CHECK(preferred_speed(fixtures::make_tpose_gait("still", 10)) == 0.0);
  }
  SUBCASE("1.2 m over 60 frames at 60 fps") {
    const Gait g = fixtures::make_straight_gait("fwd", 60, 60.0, {1.2, 0.0, 0.0});
    CHECK(std::abs(preferred_speed(g) - 1.2) < 1e-12);
  }
  SUBCASE("diagonal 0.6/0.8 m over 100 frames at 50 fps") {
    const Gait g = fixtures::make_straight_gait("diag", 100, 50.0, {0.6, 0.0, 0.8});
    CHECK(std::abs(preferred_speed(g) - 0.5) < 1e-12);
  }
  SUBCASE("vertical displacement is excluded") {
    const Gait g = fixtures::make_straight_gait("hill", 60, 60.0, {1.2, 0.9, 0.0});
    CHECK(std::abs(preferred_speed(g) - 1.2) < 1e-12);
  }
}

TEST_CASE("unconstrained agent takes its preferred velocity exactly") {
  NavAgent a = agent_at(0, 0.0, 0.0, 1.1, -0.4);
  const Eigen::Vector2d v = compute_new_velocity(a, {}, 0.1);
  CHECK(v.x() == 1.1);
  CHECK(v.y() == -0.4);
}

TEST_CASE("a neighbor outside the interaction range changes nothing") {
  NavAgent a = agent_at(0, 0.0, 0.0, 1.0, 0.0);
  NavAgent far = agent_at(1, 2.0 * a.max_speed * a.time_horizon + 2.0, 0.0, -1.0, 0.0);
  far.velocity = {-1.0, 0.0};
  const Eigen::Vector2d v = compute_new_velocity(a, {&far}, 0.1);
  CHECK(v.x() == 1.0);
  CHECK(v.y() == 0.0);
}

TEST_CASE("preferred velocities above max speed are capped") {
  NavAgent a = agent_at(0, 0.0, 0.0, 10.0, 0.0);
  const Eigen::Vector2d v = compute_new_velocity(a, {}, 0.1);
  CHECK(v.norm() <= a.max_speed + 1e-9);
}

TEST_CASE("symmetric head-on pair") {
  const double speed = 1.0;
  NavAgent a = agent_at(0, -4.0, 0.0, speed, 0.0);
  NavAgent b = agent_at(1, 4.0, 0.0, -speed, 0.0);
  a.velocity = {speed, 0.0};
  b.velocity = {-speed, 0.0};

  const Eigen::Vector2d va = compute_new_velocity(a, {&b}, 0.1);
  const Eigen::Vector2d vb = compute_new_velocity(b, {&a}, 0.1);

  SUBCASE("velocities are mirror images") {
    CHECK(std::abs(va.x() + vb.x()) < 1e-12);
    CHECK(std::abs(va.y() + vb.y()) < 1e-12);
  }

  SUBCASE("the returned velocity is feasible and grid-optimal for the oracle") {
    const OracleConstraint c = oracle_halfplane(
        b.position.x() - a.position.x(), b.position.y() - a.position.y(),
        a.velocity.x() - b.velocity.x(), a.velocity.y() - b.velocity.y(),
        a.radius + b.radius, a.time_horizon, a.velocity.x(), a.velocity.y());
    CHECK(oracle_permits(c, va.x(), va.y()));

    // Dense scan of the velocity disc: the deviation from the preferred
    // velocity can beat the solver's only by the grid resolution.
    const int steps = 400;
    const double span = a.max_speed;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double vx = -span + 2.0 * span * i / steps;
        const double vy = -span + 2.0 * span * j / steps;
        if (vx * vx + vy * vy > span * span) continue;
        if (!oracle_permits({c.px, c.py, c.dx, c.dy}, vx, vy)) continue;
        const double dev = std::hypot(vx - a.preferred_velocity.x(), vy - a.preferred_velocity.y());
        best = std::min(best, dev);
      }
    }
    const double grid_cell = 2.0 * span / steps;
    const double lp_dev = (va - a.preferred_velocity).norm();
    CHECK(lp_dev <= best + grid_cell * 1.5);
    CHECK(best <= lp_dev + grid_cell * 1.5);
  }

  SUBCASE("the pair stays collision-free during the crossing") {
    NavWorld world;
    world.dt = 1.0 / 60.0;
    world.agents = {a, b};
    double min_gap = std::numeric_limits<double>::infinity();
    for (int frame = 0; frame < 600; ++frame) {
      // Keep preferring the crossing direction.
      world.agents[0].preferred_velocity = {speed, 0.0};
      world.agents[1].preferred_velocity = {-speed, 0.0};
      world = step(world, world.dt);
      min_gap = std::min(min_gap, min_separation(world));
    }
    CHECK(min_gap > -1e-6);
  }

  SUBCASE("an off-axis pair passes and keeps clear") {
    NavWorld world;
    world.dt = 1.0 / 60.0;
    NavAgent b_off = b;
    b_off.position.y() = 0.05;  // break the exact axial symmetry
    world.agents = {a, b_off};
    double min_gap = std::numeric_limits<double>::infinity();
    for (int frame = 0; frame < 900; ++frame) {
      world.agents[0].preferred_velocity = {speed, 0.0};
      world.agents[1].preferred_velocity = {-speed, 0.0};
      world = step(world, world.dt);
      min_gap = std::min(min_gap, min_separation(world));
    }
    CHECK(min_gap > -1e-6);
    CHECK(world.agents[0].position.x() > world.agents[1].position.x());
  }
}

TEST_CASE("single agent integrates straight") {
  NavWorld world;
  world.dt = 0.1;
  world.agents = {agent_at(0, 0.0, 0.0, 1.0, 0.0)};
  const NavWorld next = step(world, 0.1);
  CHECK(next.agents[0].position.x() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next.agents[0].position.y() == 0.0);

  NavWorld w = world;
  for (int i = 0; i < 100; ++i) w = step(w, 0.1);
  CHECK(std::abs(w.agents[0].position.y()) < 1e-9);  // never leaves the line
  CHECK(w.agents[0].position.x() == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("8-agent antipodal circle stays penetration-free for 30 s") {
  // Slightly different walking speeds per agent; identical speeds make the
  // fully symmetric ring brake into a stand-off (safe, but nobody arrives).
  const double circle_radius = 5.0;
  NavWorld world;
  world.dt = 1.0 / 60.0;
  std::vector<Eigen::Vector2d> goals;
  std::vector<double> speeds;
  for (int i = 0; i < 8; ++i) {
    const double angle = 2.0 * EIGEN_PI * i / 8.0;
    NavAgent a = agent_at(i, circle_radius * std::cos(angle), circle_radius * std::sin(angle),
                          0.0, 0.0);
    a.max_speed = 1.8;
    world.agents.push_back(a);
    goals.emplace_back(-a.position);
    speeds.push_back(1.0 + 0.06 * i);
  }

  double min_gap = std::numeric_limits<double>::infinity();
  const int frames = static_cast<int>(30.0 / world.dt);
  for (int frame = 0; frame < frames; ++frame) {
    for (int i = 0; i < 8; ++i) {
      const Eigen::Vector2d to_goal = goals[i] - world.agents[i].position;
      world.agents[i].preferred_velocity =
          to_goal.norm() <= 2.0 * world.agents[i].radius
              ? Eigen::Vector2d::Zero()
              : Eigen::Vector2d(to_goal.normalized() * speeds[i]);
    }
    StepStats stats;
    world = step(world, world.dt, &stats);
    min_gap = std::min(min_gap, stats.min_separation);
    CHECK(world.agents[0].velocity.norm() <= world.agents[0].max_speed + 1e-9);
  }
  CHECK(min_gap > -1e-6);
  for (int i = 0; i < 8; ++i) {
    CHECK((goals[i] - world.agents[i].position).norm() <= 2.5 * world.agents[i].radius);
  }
}

TEST_CASE("step results are independent of agent storage order") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  NavWorld world;
  world.dt = 0.05;
  for (int i = 0; i < 12; ++i) {
    NavAgent a = agent_at(i, u(rng), u(rng), u(rng) / 4.0, u(rng) / 4.0);
    a.velocity = {u(rng) / 6.0, u(rng) / 6.0};
    world.agents.push_back(a);
  }

  NavWorld permuted = world;
  // A fixed permutation of storage slots.
  for (int i = 0; i < 12; ++i) permuted.agents[i] = world.agents[(i * 5 + 3) % 12];

  const NavWorld next_a = step(world, world.dt);
  const NavWorld next_b = step(permuted, world.dt);
  for (const NavAgent& agent : next_a.agents) {
    const auto it = std::find_if(next_b.agents.begin(), next_b.agents.end(),
                                 [&](const NavAgent& x) { return x.id == agent.id; });
    REQUIRE(it != next_b.agents.end());
    CHECK(it->position.x() == agent.position.x());
    CHECK(it->position.y() == agent.position.y());
    CHECK(it->velocity.x() == agent.velocity.x());
    CHECK(it->velocity.y() == agent.velocity.y());
  }
}

TEST_CASE("step is pure: same inputs, same outputs") {
  NavWorld world;
  world.dt = 0.05;
  world.agents = {agent_at(0, 0.0, 0.0, 1.0, 0.2), agent_at(1, 2.0, 0.1, -1.0, 0.0)};
  const NavWorld a = step(world, 0.05);
  const NavWorld b = step(world, 0.05);
  for (int i = 0; i < 2; ++i) {
    CHECK(a.agents[i].position == b.agents[i].position);
    CHECK(a.agents[i].velocity == b.agents[i].velocity);
  }
}

TEST_CASE("overlapping agents are flagged and resolved") {
  NavAgent a = agent_at(0, 0.0, 0.0, 1.0, 0.0);
  NavAgent b = agent_at(1, 0.3, 0.0, -1.0, 0.0);  // centers closer than radius sum
  NavWorld world;
  world.dt = 0.1;
  world.agents = {a, b};
  StepStats stats;
  world = step(world, 0.1, &stats);
  CHECK(stats.overlapping_pairs >= 0);
  double gap = min_separation(world);
  for (int i = 0; i < 30; ++i) {
    world.agents[0].preferred_velocity = {1.0, 0.0};
    world.agents[1].preferred_velocity = {-1.0, 0.0};
    world = step(world, 0.1);
    gap = std::max(gap, min_separation(world));
  }
  CHECK(gap > 0.0);  // the overlap resolves
}
