#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "fastmod/control_runtime.hpp"
#include "oracles.hpp"

using namespace fastmod;

TEST(Mailbox, LatestValueAndStaleWrites) {
  SensorMailbox box;
  ScanPointSet a;
  a.points = {{1, 0}};
  ScanPointSet b;
  b.points = {{2, 0}};
  EXPECT_TRUE(box.push_scan(a, 1.0).accepted());
  EXPECT_TRUE(box.push_scan(b, 1.05).accepted());
  EXPECT_EQ(box.latest_scan(2.0)->timestamp, 1.05);
  const PushAck late = box.push_scan(a, 1.0);
  EXPECT_EQ(late.status, PushStatus::kStaleWrite);
  EXPECT_EQ(box.latest_scan(2.0)->value.points[0], Vec2(2, 0));
  // Reader at an earlier time gets the payload current then.
  EXPECT_EQ(box.latest_scan(1.01)->timestamp, 1.0);
  EXPECT_FALSE(box.latest_scan(0.5).has_value());
}

TEST(Mailbox, StalenessPolicy) {
  SensorMailbox box;
  box.push_obstacles({StarObstacle::circle({0, 0}, 1.0)}, 0.0);
  box.push_nominal({1, 0}, 0.0);
  ScanPointSet scan;
  scan.points = {{3, 0}};
  box.push_scan(scan, 0.0);
  SensorSnapshot s = box.snapshot(0.2);
  EXPECT_FALSE(s.scan_stale);
  EXPECT_FALSE(s.nominal_stale);
  EXPECT_EQ(s.obstacles.size(), 1u);
  s = box.snapshot(0.3);
  EXPECT_TRUE(s.scan_stale);
  EXPECT_TRUE(s.scan.points.empty());
  EXPECT_TRUE(s.nominal_stale);
  EXPECT_FALSE(s.nominal.has_value());
  EXPECT_FALSE(s.obstacles_stale);
  s = box.snapshot(2.5);
  EXPECT_TRUE(s.obstacles_stale);
  EXPECT_TRUE(s.obstacles.empty());
}

TEST(Mailbox, ObstaclesPropagatedToReadTime) {
  SensorMailbox box;
  box.push_obstacles({StarObstacle::circle({0, 0}, 1.0).with_velocity({1, 0}, 0.0)}, 1.0);
  const SensorSnapshot s = box.snapshot(1.5);
  ASSERT_EQ(s.obstacles.size(), 1u);
  EXPECT_NEAR((s.obstacles[0].center() - Vec2(0.5, 0)).norm(), 0.0, 1e-12);
}

TEST(Mailbox, ConcurrentProducersNeverTearValues) {
  SensorMailbox box;
  std::atomic<bool> done{false};
  std::thread producer([&] {
    for (int i = 0; i < 20000; ++i) {
      ScanPointSet s;
      s.points.assign(8, Vec2(i, i));
      box.push_scan(std::move(s), i * 1e-3);
    }
    done = true;
  });
  while (!done) {
    if (auto s = box.latest_scan(1e9)) {
      for (const Vec2& p : s->value.points) ASSERT_EQ(p, s->value.points.front());
    }
  }
  producer.join();
}

TEST(Kinematics, Examples) {
  WheelCommand c = to_wheel_command({1, 0}, 6.25e-2);
  EXPECT_DOUBLE_EQ(c.linear, 1.0);
  EXPECT_DOUBLE_EQ(c.angular, 0.0);
  c = to_wheel_command({0, 0.0625}, 6.25e-2);
  EXPECT_DOUBLE_EQ(c.linear, 0.0);
  EXPECT_DOUBLE_EQ(c.angular, 1.0);
}

TEST(Kinematics, RoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 v(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2));
    const double dc = oracle::uniform(rng, 0.01, 0.5);
    EXPECT_NEAR((from_wheel_command(to_wheel_command(v, dc), dc) - v).norm(), 0.0, 1e-12);
  }
}

TEST(Metrics, ControlContributionAndClosestClearance) {
  EXPECT_DOUBLE_EQ(control_contribution({1, 0}, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(control_contribution({0, 1}, {1, 0}), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(control_contribution({0, 0}, {0, 0}), 0.0);
  std::vector<Vec2> pts;
  for (int i = 1; i <= 20; ++i) pts.emplace_back(i, 0);
  // Ten closest at 1..10, radius 0.5.
  EXPECT_DOUBLE_EQ(mean_closest_clearance(pts, {0, 0}, 0.5), 5.0);
  EXPECT_DOUBLE_EQ(mean_closest_clearance(std::vector<Vec2>{{3, 4}}, {0, 0}, 1.0), 4.0);
  EXPECT_EQ(control_point(Pose{1, 2, kPi / 2}, 0.5), Vec2(1, 2) + 0.5 * Vec2(std::cos(kPi / 2), 1));
}

TEST(ControlRuntime, EmptyWorldPassesNominalThrough) {
  ControlRuntime rt(AgentConfig{});
  rt.mailbox().push_nominal({1, 0}, 0.0);
  const ControlTick tick = rt.step(Pose{0, 0, 0}, 0.01);
  EXPECT_EQ(tick.velocity, Vec2(1, 0));
  EXPECT_DOUBLE_EQ(tick.control_contribution, 0.0);
  EXPECT_DOUBLE_EQ(tick.command.linear, 1.0);
  EXPECT_FALSE(tick.collision);
}

TEST(ControlRuntime, StaleNominalSafeStops) {
  ControlRuntime rt(AgentConfig{});
  rt.mailbox().push_nominal({1, 0}, 0.0);
  const ControlTick tick = rt.step(Pose{0, 0, 0}, 0.5);
  EXPECT_TRUE(tick.stale_nominal);
  EXPECT_EQ(tick.velocity, Vec2::Zero());
  EXPECT_EQ(tick.command.linear, 0.0);
  EXPECT_EQ(tick.command.angular, 0.0);
}

TEST(ControlRuntime, ContactYieldsCollisionFlag) {
  ControlRuntime rt(AgentConfig{}, RuntimeOptions{AvoidanceMode::kSampled});
  ScanPointSet scan;
  scan.points = {{0.2, 0}};
  rt.mailbox().push_scan(scan, 0.0);
  rt.mailbox().push_nominal({1, 0}, 0.0);
  const ControlTick tick = rt.step(Pose{0, 0, 0}, 0.0);
  EXPECT_TRUE(tick.collision);
  EXPECT_EQ(tick.velocity, Vec2::Zero());
}

TEST(ControlRuntime, ModeSelectsChannels) {
  ScanPointSet scan;
  scan.points = {{5, 0}};
  SensorMailbox box;
  box.push_scan(scan, 0.0);
  box.push_obstacles({StarObstacle::circle({5, 0}, 0.5)}, 0.0);
  const SensorSnapshot snap = box.snapshot(0.0);

  const ControlRuntime analytic(AgentConfig{}, RuntimeOptions{AvoidanceMode::kAnalytic});
  PreparedInputs in = analytic.prepare(snap);
  EXPECT_TRUE(in.retained.points.empty());
  ASSERT_EQ(in.obstacles.size(), 1u);
  EXPECT_NEAR(in.obstacles[0].margin(), AgentConfig{}.radius, 1e-15);

  const ControlRuntime sampled(AgentConfig{}, RuntimeOptions{AvoidanceMode::kSampled});
  in = sampled.prepare(snap);
  EXPECT_TRUE(in.obstacles.empty());
  EXPECT_EQ(in.retained.points.size(), 1u);

  const ControlRuntime mixed(AgentConfig{}, RuntimeOptions{AvoidanceMode::kMixed});
  in = mixed.prepare(snap);
  EXPECT_EQ(in.obstacles.size(), 1u);
  EXPECT_TRUE(in.retained.points.empty());  // (5,0) is the circle's center
}

TEST(ControlRuntime, DeterministicTickStream) {
  const auto run = [] {
    ControlRuntime rt(AgentConfig{});
    std::vector<ControlTick> ticks;
    ScanPointSet scan;
    for (int i = 0; i < 100; ++i) scan.points.emplace_back(2.0 + 0.01 * i, -0.5 + 0.01 * i);
    for (int k = 0; k < 50; ++k) {
      const double t = 0.01 * k;
      rt.mailbox().push_scan(scan, t);
      rt.mailbox().push_nominal({1, 0.1 * k}, t);
      ticks.push_back(rt.step(Pose{0.01 * k, 0, 0.02 * k}, t));
    }
    return ticks;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].velocity, b[i].velocity);
    EXPECT_EQ(a[i].min_distance, b[i].min_distance);
  }
}
