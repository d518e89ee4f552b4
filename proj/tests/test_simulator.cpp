#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "tompc/self_check.hpp"
#include "tompc/simulator.hpp"

using namespace tompc;
using tompc::testing::panda;
using tompc::testing::ready_pose;
using tompc::testing::Rng;
using tompc::testing::source_path;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tompc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Scenario short_scenario(const std::string& file, double duration) {
  Scenario sc = load_scenario(source_path("scenarios/" + file));
  sc.duration = duration;
  return sc;
}

SimSample synthetic_sample(double t, int n) {
  SimSample s;
  s.t = t;
  s.q = s.qd = s.tau_des = s.tau_mpc = s.tau_pd = VectorXd::Zero(n);
  s.distances = VectorXd::Constant(2, 0.3);
  return s;
}

Scenario metric_scenario() {
  Scenario sc;
  sc.weights.resize(7);
  sc.weights.q_m << 500, 500, 500, 50, 50, 50;
  sc.weights.q_f << 0, 0, 5, 0, 0, 0;
  return sc;
}

}  // namespace

// ---------------------------------------------------------------------------
// pd_wrap

TEST(PdWrap, ZeroTrackingErrorGivesFeedforward) {
  Rng rng(1);
  PlannerOutput out{rng.vector(7, -1, 1), rng.vector(7, -1, 1), rng.vector(7, -5, 5), {}};
  const StateVector x{out.q_des, out.qd_des};
  EXPECT_EQ(pd_wrap(out, x, 30.0, 3.0), out.tau_mpc);
}

TEST(PdWrap, ZeroGainsGiveFeedforward) {
  Rng rng(2);
  PlannerOutput out{rng.vector(7, -1, 1), rng.vector(7, -1, 1), rng.vector(7, -5, 5), {}};
  const StateVector x{rng.vector(7, -1, 1), rng.vector(7, -1, 1)};
  EXPECT_EQ(pd_wrap(out, x, 0.0, 0.0), out.tau_mpc);
}

TEST(PdWrap, MatchesHandComputedPdTerm) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    PlannerOutput out{rng.vector(7, -1, 1), rng.vector(7, -1, 1), rng.vector(7, -5, 5), {}};
    const StateVector x{rng.vector(7, -1, 1), rng.vector(7, -1, 1)};
    const VectorXd kp = rng.vector(7, 1, 50), kd = rng.vector(7, 0.1, 5);
    VectorXd expected(7);
    for (int i = 0; i < 7; ++i) {
      expected[i] = out.tau_mpc[i] + kp[i] * (out.q_des[i] - x.q[i]) + kd[i] * (out.qd_des[i] - x.qd[i]);
    }
    EXPECT_LE((pd_wrap(out, x, kp, kd) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Metrics on synthetic logs

TEST(Metrics, PerfectTrackingHasZeroErrors) {
  const Scenario sc = metric_scenario();
  SimLog log;
  for (int i = 0; i < 100; ++i) {
    auto s = synthetic_sample(i * 1e-3, 7);
    s.wrench[2] = s.wrench_ref[2] = 4.0 + i * 0.01;
    log.samples.push_back(s);
  }
  const Metrics m = compute_metrics(log, sc);
  EXPECT_EQ(m.pos_err_mean, 0.0);
  EXPECT_EQ(m.pos_err_rms, 0.0);
  EXPECT_EQ(m.force_err_mean, 0.0);
  EXPECT_EQ(m.force_err_rms, 0.0);
  EXPECT_EQ(m.min_distance, 0.3);
}

TEST(Metrics, ConstantOffsetGivesThatMeanError) {
  const Scenario sc = metric_scenario();
  SimLog log;
  for (int i = 0; i < 100; ++i) {
    auto s = synthetic_sample(i * 1e-3, 7);
    s.pos_err.y() = 0.01;
    log.samples.push_back(s);
  }
  const Metrics m = compute_metrics(log, sc);
  EXPECT_NEAR(m.pos_err_mean, 0.01, 1e-15);
  EXPECT_NEAR(m.pos_err_rms, 0.01, 1e-15);
}

TEST(Metrics, ErrorOnUnweightedAxisIsIgnored) {
  Scenario sc = metric_scenario();
  sc.weights.q_m[2] = 0.0;
  SimLog log;
  auto s = synthetic_sample(0.0, 7);
  s.pos_err = Eigen::Vector3d(0.0, 0.0, 0.05);
  s.wrench[0] = 3.0;  // x force is not tracked
  log.samples.push_back(s);
  const Metrics m = compute_metrics(log, sc);
  EXPECT_EQ(m.pos_err_mean, 0.0);
  EXPECT_EQ(m.force_err_mean, 0.0);
}

TEST(Metrics, TorqueShareIsOneWithoutPdTorque) {
  const Scenario sc = metric_scenario();
  SimLog log;
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto s = synthetic_sample(i * 1e-3, 7);
    s.tau_mpc = rng.vector(7, -3, 3);
    log.samples.push_back(s);
  }
  EXPECT_DOUBLE_EQ(compute_metrics(log, sc).torque_share, 1.0);
}

TEST(Metrics, TorqueShareMatchesFormula) {
  const Scenario sc = metric_scenario();
  SimLog log;
  Rng rng(5);
  double expected = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto s = synthetic_sample(i * 1e-3, 7);
    s.tau_mpc = rng.vector(7, -3, 3);
    s.tau_pd = rng.vector(7, -1, 1);
    expected += s.tau_mpc.norm() / (s.tau_mpc.norm() + s.tau_pd.norm());
    log.samples.push_back(s);
  }
  EXPECT_NEAR(compute_metrics(log, sc).torque_share, expected / 50.0, 1e-14);
}

TEST(Metrics, WindowRestrictsErrorsButNotMinDistance) {
  Scenario sc = metric_scenario();
  sc.metrics_t0 = 0.5;
  sc.metrics_t1 = 1.0;
  SimLog log;
  for (int i = 0; i <= 1000; ++i) {
    auto s = synthetic_sample(i * 1e-3, 7);
    if (s.t < 0.5) {
      s.pos_err.x() = 1.0;
      s.distances[1] = 0.01;
    }
    log.samples.push_back(s);
  }
  const Metrics m = compute_metrics(log, sc);
  EXPECT_EQ(m.pos_err_mean, 0.0);
  EXPECT_EQ(m.min_distance, 0.01);
}

TEST(Metrics, CycleStatistics) {
  const Scenario sc = metric_scenario();
  SimLog log;
  log.samples.push_back(synthetic_sample(0.0, 7));
  for (int i = 0; i < 4; ++i) {
    CycleRecord c;
    c.cycle = i;
    c.wall_us = 1000.0 * (i + 1);
    c.converged = i != 2;
    c.plan_min_distance = 0.05 - 0.01 * i;
    log.cycles.push_back(c);
  }
  const Metrics m = compute_metrics(log, sc);
  EXPECT_NEAR(m.mean_cycle_time, 2.5e-3, 1e-15);
  EXPECT_NEAR(m.max_cycle_time, 4e-3, 1e-15);
  EXPECT_EQ(m.unconverged_cycles, 1);
  EXPECT_NEAR(m.plan_min_distance, 0.02, 1e-15);
}

// ---------------------------------------------------------------------------
// High-pass filter and contact oscillation

namespace {

std::vector<double> sine(double amp, double hz, double fs, int count, double bias = 0.0) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = bias + amp * std::sin(2 * M_PI * hz * i / fs);
  return v;
}

double interior_amplitude(const std::vector<double>& v) {
  const std::size_t skip = v.size() / 4;
  return 0.5 * peak_to_peak(std::vector<double>(v.begin() + static_cast<long>(skip), v.end() - static_cast<long>(skip)));
}

// Zero-phase second-order Butterworth: |H|^2 with the bilinear warp.
double butterworth_gain(double hz, double fc, double fs) {
  const double w = std::tan(M_PI * hz / fs) / std::tan(M_PI * fc / fs);
  return (w * w * w * w) / (1.0 + w * w * w * w);
}

}  // namespace

TEST(HighPass, PassbandAndStopbandMatchButterworthGain) {
  const double fs = 1000.0, fc = 5.0;
  for (double hz : {0.5, 2.0, 5.0, 20.0, 50.0}) {
    const auto y = highpass(sine(1.0, hz, fs, 8000), fs, fc);
    EXPECT_NEAR(interior_amplitude(y), butterworth_gain(hz, fc, fs), 2e-3) << hz << " Hz";
  }
}

TEST(HighPass, RemovesConstant) {
  const auto y = highpass(std::vector<double>(3000, 7.0), 1000.0, 5.0);
  for (double v : y) EXPECT_LE(std::abs(v), 1e-9);
}

TEST(ContactOscillation, MeasuresRingingAfterFirstContact) {
  SimLog log;
  const double ring = 0.4;
  for (int i = 0; i < 3000; ++i) {
    SimSample s;
    s.t = i * 1e-3;
    if (s.t >= 0.5) s.wrench[2] = 10.0 + ring * std::sin(2 * M_PI * 40.0 * (s.t - 0.5));
    log.samples.push_back(s);
  }
  // The step itself leaks into the band, so only bound from below and check
  // that a quiet contact scores far lower.
  const double noisy = first_contact_oscillation(log);
  EXPECT_GE(noisy, 2 * ring * 0.95);
  for (auto& s : log.samples) {
    if (s.t >= 0.5) s.wrench[2] = 10.0 * (1.0 - std::exp(-(s.t - 0.5) / 0.2));
  }
  EXPECT_LE(first_contact_oscillation(log), 0.1 * noisy);
}

TEST(ContactOscillation, ZeroWithoutContact) {
  SimLog log;
  for (int i = 0; i < 100; ++i) log.samples.push_back(synthetic_sample(i * 1e-3, 7));
  EXPECT_EQ(first_contact_oscillation(log), 0.0);
}

// ---------------------------------------------------------------------------
// Scenario files

TEST(ScenarioFiles, AllShippedScenariosLoad) {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(source_path("scenarios"))) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario(e.path().string())) << e.path();
    ++count;
  }
  EXPECT_GE(count, 8);
}

TEST(ScenarioFiles, ForceScenarioFields) {
  const Scenario sc = load_scenario(source_path("scenarios/scenario3_force_w04.json"));
  EXPECT_TRUE(sc.interaction.active);
  EXPECT_EQ(sc.interaction.contact_frame, sc.robot.frame_id("tool"));
  EXPECT_TRUE(sc.force.active);
  EXPECT_DOUBLE_EQ(sc.force.magnitude(0.0), 10.0 * std::sin(-1.57) + 10.0);
  EXPECT_DOUBLE_EQ(sc.force.omega, 0.4);
  // Second period of the reference.
  EXPECT_NEAR(sc.metrics_t0, 2 * M_PI / 0.4, 1e-2);
  EXPECT_NEAR(sc.metrics_t1, 4 * M_PI / 0.4, 1e-2);
  // The anchor sits at the tool frame with its z axis pointing down.
  const Pose tool = forward_kinematics(sc.robot, sc.q0, sc.interaction.contact_frame);
  EXPECT_LE((sc.interaction.anchor_ref.translation - tool.translation).norm(), 1e-12);
  EXPECT_NEAR(sc.interaction.anchor_ref.rotation(2, 2), -1.0, 1e-12);
  EXPECT_EQ(sc.mode, ControlMode::ToMPC);
  EXPECT_EQ(sc.planner.mode, PlannerMode::ToMPC);
}

TEST(ScenarioFiles, RelativePosesResolveAgainstStart) {
  const Scenario sc = load_scenario(source_path("scenarios/freespace_setpoint.json"));
  const Pose start = sc.initial_task_pose();
  EXPECT_LE((sc.motion.at(3.0).translation - start.translation - Eigen::Vector3d(0.15, 0.1, -0.1)).norm(), 1e-12);
  EXPECT_LE((sc.motion.at(3.0).rotation - start.rotation).norm(), 1e-12);
}

TEST(ScenarioFiles, ObstacleTrackInterpolates) {
  const Scenario sc = load_scenario(source_path("scenarios/scenario2_lemniscate.json"));
  ASSERT_EQ(sc.obstacles.size(), 1u);
  EXPECT_NEAR(sc.obstacles[0].pose_at(4.0).translation.y(), 0.26, 1e-9);
  EXPECT_NEAR(sc.obstacles[0].pose_at(10.0).translation.y(), 0.12, 1e-9);
}

TEST(ScenarioFiles, ModeOverride) {
  Scenario sc = load_scenario(source_path("scenarios/scenario1_sphere.json"));
  SimOverrides o;
  o.mode = ControlMode::OaMPC;
  o.seed = 99;
  sc = apply_overrides(sc, o);
  EXPECT_EQ(sc.mode, ControlMode::OaMPC);
  EXPECT_EQ(sc.planner.mode, PlannerMode::OaMPC);
  EXPECT_EQ(sc.seed, 99u);
}

TEST(ScenarioFiles, BadInputsThrow) {
  const Json good = Json::parse(std::ifstream(source_path("scenarios/equilibrium.json")));
  const auto base = std::filesystem::path(source_path("scenarios"));
  EXPECT_NO_THROW(scenario_from_json(good, base));
  Json j = good;
  j["q0"] = {0.0, 0.0};
  EXPECT_THROW(scenario_from_json(j, base), std::invalid_argument);
  j = good;
  j["motion"] = {{"type", "spiral"}};
  EXPECT_THROW(scenario_from_json(j, base), std::invalid_argument);
  j = good;
  j["duration"] = -1.0;
  EXPECT_THROW(scenario_from_json(j, base), std::invalid_argument);
}

TEST(ScenarioFiles, CircleAndLemniscateStartAtTheirPose) {
  for (const char* f : {"scenario2_lemniscate.json", "scenario4_wipe.json"}) {
    const Scenario sc = load_scenario(source_path(std::string("scenarios/") + f));
    const Pose p0 = sc.motion.at(0.0);
    EXPECT_LE((p0.translation - sc.initial_task_pose().translation).norm(), 1e-12) << f;
    EXPECT_LE((sc.motion.at(sc.motion.start + sc.motion.period).translation - p0.translation).norm(), 1e-12) << f;
  }
}

// ---------------------------------------------------------------------------
// Plant

TEST(Plant, DistinctFromPlannerIntegrator) {
  const RobotModel& m = panda();
  Rng rng(6);
  const StateVector x0{ready_pose(), rng.vector(7, -0.5, 0.5)};
  const VectorXd tau = rng.vector(7, -5, 5);
  const Plant plant(m, InteractionParams{}, 1.0, false);

  StateVector fine = x0, finer = x0;
  plant.advance(fine, tau, 0.05, 1e-4);
  plant.advance(finer, tau, 0.05, 5e-5);
  const StateVector euler = step(m, x0, ControlVector{tau}, InteractionParams{}, 0.05);

  // RK4 at 0.1 ms is converged; one 50 ms Euler step is visibly different.
  EXPECT_LE((fine.stacked() - finer.stacked()).norm(), 1e-10);
  EXPECT_GE((fine.stacked() - euler.stacked()).norm(), 1e-3);
}

TEST(Plant, StiffnessFactorScalesSpring) {
  const RobotModel& m = panda();
  InteractionParams ip;
  ip.active = true;
  ip.contact_frame = m.frame_id("tool");
  ip.anchor_ref = forward_kinematics(m, ready_pose(), ip.contact_frame);
  ip.anchor_ref.translation.z() += 0.01;
  ip.k_env << 0, 0, 1000, 0, 0, 0;
  ip.d_env.setZero();
  const StateVector x{ready_pose(), VectorXd::Zero(7)};
  const Wrench a = Plant(m, ip, 1.0, false).wrench(x);
  const Wrench b = Plant(m, ip, 1.5, false).wrench(x);
  EXPECT_NEAR(b.force.z(), 1.5 * a.force.z(), 1e-9);
  EXPECT_GT(std::abs(a.force.z()), 1.0);
}

TEST(Plant, UnilateralSurfaceOnlyPushes) {
  const RobotModel& m = panda();
  InteractionParams ip;
  ip.active = true;
  ip.contact_frame = m.frame_id("tool");
  ip.anchor_ref = forward_kinematics(m, ready_pose(), ip.contact_frame);
  ip.k_env << 0, 0, 1000, 0, 0, 0;
  ip.d_env.setZero();
  const StateVector x{ready_pose(), VectorXd::Zero(7)};

  // Surface raised 1 cm: the tool is inside it and is pushed up (-z of the anchor).
  InteractionParams inside = ip;
  inside.anchor_ref.translation.z() += 0.01;
  const Wrench bi_in = Plant(m, inside, 1.0, false).wrench(x);
  const Wrench uni_in = Plant(m, inside, 1.0, true).wrench(x);
  EXPECT_LT(bi_in.force.z(), 0.0);
  EXPECT_LE((uni_in.vector() - bi_in.vector()).norm(), 1e-12);

  // Surface lowered 1 cm: the bilateral spring pulls, the unilateral one is slack.
  InteractionParams outside = ip;
  outside.anchor_ref.translation.z() -= 0.01;
  EXPECT_GT(Plant(m, outside, 1.0, false).wrench(x).force.z(), 0.0);
  EXPECT_EQ(Plant(m, outside, 1.0, true).wrench(x).vector(), Vector6::Zero());
}

// ---------------------------------------------------------------------------
// Closed loop

TEST(Simulate, LogIsUniformAndComplete) {
  const Scenario sc = short_scenario("scenario1_sphere.json", 0.3);
  const SimLog log = simulate(sc);
  ASSERT_FALSE(log.aborted);
  ASSERT_EQ(log.samples.size(), 300u);
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    EXPECT_NEAR(s.t, i * 1e-3, 1e-12);
    EXPECT_EQ(s.q.size(), 7);
    EXPECT_EQ(s.qd.size(), 7);
    EXPECT_EQ(s.tau_des.size(), 7);
    EXPECT_EQ(s.distances.size(), static_cast<Eigen::Index>(log.pair_names.size()));
  }
  // Planner every 50 ms.
  EXPECT_EQ(log.cycles.size(), 6u);
}

TEST(Simulate, EquilibriumStaysPut) {
  const Scenario sc = load_scenario(source_path("scenarios/equilibrium.json"));
  const SimLog log = simulate(sc);
  ASSERT_FALSE(log.aborted);
  double worst = 0.0;
  for (const auto& s : log.samples) worst = std::max(worst, s.qd.norm());
  EXPECT_LE(worst, 1e-3);
}

TEST(Simulate, FreeSpaceSetPointConverges) {
  const Scenario sc = load_scenario(source_path("scenarios/freespace_setpoint.json"));
  const SimLog log = simulate(sc);
  ASSERT_FALSE(log.aborted);
  const auto& last = log.samples.back();
  EXPECT_GE(last.t, 9.99);
  EXPECT_LE((last.ee - last.ee_ref).norm(), 1e-2);
}

TEST(Simulate, DeterministicForSameSeed) {
  const Scenario sc = short_scenario("scenario3_force_w04.json", 0.4);
  ASSERT_GT(sc.noise_q, 0.0);
  const SimLog a = simulate(sc), b = simulate(sc);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_EQ(a.samples[i].q, b.samples[i].q);
    ASSERT_EQ(a.samples[i].tau_des, b.samples[i].tau_des);
    ASSERT_EQ(a.samples[i].wrench, b.samples[i].wrench);
  }
  EXPECT_EQ(metrics_json(compute_metrics(a, sc), a).dump(), metrics_json(compute_metrics(b, sc), b).dump());

  Scenario other = sc;
  other.seed = sc.seed + 1;
  const SimLog c = simulate(other);
  EXPECT_NE(a.samples.back().tau_des, c.samples.back().tau_des);
}

TEST(Simulate, NonFiniteStateAborts) {
  // A surface far too stiff for the plant step makes RK4 diverge.
  Scenario sc = short_scenario("scenario3_force_w04.json", 0.5);
  sc.plant_stiffness_factor = 1e9;
  const SimLog log = simulate(sc);
  EXPECT_TRUE(log.aborted);
  EXPECT_LT(log.samples.size(), 500u);
}

TEST(Simulate, FeedforwardDominatesOnLemniscate) {
  const Scenario sc = short_scenario("scenario2_lemniscate.json", 6.0);
  const SimLog log = simulate(sc);
  ASSERT_FALSE(log.aborted);
  EXPECT_GT(compute_metrics(log, sc).torque_share, 0.5);
}

TEST(Simulate, InverseDynamicsModeRuns) {
  Scenario sc = short_scenario("scenario3_force_w04.json", 1.0);
  sc.mode = ControlMode::InverseDynamics;
  const SimLog log = simulate(sc);
  ASSERT_FALSE(log.aborted);
  EXPECT_TRUE(log.cycles.empty());
  EXPECT_GT(log.samples.back().wrench.head<3>().norm(), 0.5);
}

// ---------------------------------------------------------------------------
// Output files

TEST(RunSuite, EmptyListWritesNothing) {
  const auto dir = fresh_dir("empty");
  EXPECT_EQ(run_suite({}, dir), 0);
  EXPECT_TRUE(std::filesystem::is_empty(dir));
}

TEST(RunSuite, SingleScenarioWritesThreeDataFilesAndMetrics) {
  const auto dir = fresh_dir("single");
  Json j = Json::parse(std::ifstream(source_path("scenarios/equilibrium.json")));
  j["duration"] = 0.2;
  j["robot"] = source_path("config/panda7.json");
  const auto file = dir / "short.json";
  std::ofstream(file) << j.dump();
  const auto out = dir / "out";
  EXPECT_EQ(run_suite({file.string()}, out), 0);

  std::set<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(out / "equilibrium")) names.insert(e.path().filename());
  EXPECT_EQ(names, (std::set<std::string>{"trajectory.csv", "distance.csv", "force.csv", "metrics.json"}));

  std::ifstream traj(out / "equilibrium" / "trajectory.csv");
  std::string header, row;
  std::getline(traj, header);
  int rows = 0;
  while (std::getline(traj, row)) ++rows;
  EXPECT_EQ(header.rfind("t,q1,", 0), 0u);
  EXPECT_EQ(rows, 200);

  const Json m = Json::parse(std::ifstream(out / "equilibrium" / "metrics.json"));
  EXPECT_EQ(m.at("scenario"), "equilibrium");
  EXPECT_FALSE(m.at("aborted").get<bool>());
  EXPECT_FALSE(m.contains("mean_cycle_time"));
}

TEST(RunSuite, DiagnosticsFileOnRequest) {
  const auto dir = fresh_dir("diag");
  Json j = Json::parse(std::ifstream(source_path("scenarios/equilibrium.json")));
  j["duration"] = 0.2;
  j["robot"] = source_path("config/panda7.json");
  const auto file = dir / "short.json";
  std::ofstream(file) << j.dump();
  EXPECT_EQ(run_suite({file.string()}, dir / "out", {}, true), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "equilibrium" / "diagnostics.csv"));
}

TEST(RunSuite, Table1Configurations) {
  const Scenario base = load_scenario(source_path("scenarios/scenario1_sphere.json"));
  const auto runs = table1_scenarios(base);
  ASSERT_EQ(runs.size(), 6u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(runs[static_cast<std::size_t>(i)].mode, ControlMode::ToMPC);
    EXPECT_EQ(runs[static_cast<std::size_t>(i)].planner.rho, 2.0);
  }
  EXPECT_EQ(runs[0].planner.T, 10);
  EXPECT_EQ(runs[1].planner.T, 30);
  EXPECT_EQ(runs[2].planner.T, 50);
  for (int i = 3; i < 6; ++i) {
    EXPECT_EQ(runs[static_cast<std::size_t>(i)].mode, ControlMode::FddpBarrier);
    EXPECT_EQ(runs[static_cast<std::size_t>(i)].planner.T, 10);
  }
  EXPECT_EQ(runs[3].weights.sigma, 2.0);
  EXPECT_EQ(runs[4].weights.sigma, 3.0);
  EXPECT_EQ(runs[5].weights.sigma, 10.0);
}

// ---------------------------------------------------------------------------
// Built-in oracle suite

TEST(SelfCheck, AllChecksPass) {
  const CheckReport r = run_self_check(panda());
  EXPECT_EQ(r.checks.size(), 10u);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}
