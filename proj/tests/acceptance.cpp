// Acceptance suite: one pass/fail line per criterion, nonzero exit if
// any fails. Run through ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "nstamp/executive.hpp"
#include "nstamp/harness.hpp"
#include "nstamp/learner.hpp"
#include "nstamp/metrics.hpp"
#include "nstamp/pddl.hpp"
#include "nstamp/perception.hpp"
#include "nstamp/rng.hpp"
#include "nstamp/world.hpp"
#include "support/oracles.hpp"

namespace {

using namespace nstamp;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// --------------------------------------------------------------------------

void criterion_1_illustrative_plans() {
  const auto start = Clock::now();
  const auto& domain = pddl::disassembly_domain();
  const std::vector<pddl::Literal> goal{pddl::pos("disassembled")};

  const auto initial =
      pddl::plan(pddl::GroundState{"have_coarse_pose"}, goal, domain.actions);
  const bool first =
      initial.has_value() &&
      initial->steps == std::vector<std::string>{"Move", "Mate_vision",
                                                 "Insert", "Disassemble"};

  const auto recovery = pddl::plan(
      pddl::GroundState{"pattern", "near_screw", "have_coarse_pose"}, goal,
      domain.actions);
  const bool second =
      recovery.has_value() &&
      recovery->steps ==
          std::vector<std::string>{"Mate_force", "Insert", "Disassemble"};

  const double elapsed = seconds_since(start);
  report(1, first && second && elapsed < 1.0,
         fmt("illustrative-case plans exact (initial %s, recovery %s, %.3fs)",
             first ? "ok" : "WRONG", second ? "ok" : "WRONG", elapsed));
}

void criterion_2_planner_oracle() {
  const auto start = Clock::now();
  rng::Stream stream(8181, {11});
  int checked = 0, matched = 0, solvable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = test_support::random_planning_case(stream);
    const auto got = pddl::plan(c.init, c.goal, c.actions);
    const auto want =
        test_support::oracle_plan_length(c.init, c.goal, c.actions);
    ++checked;
    const bool same_existence = got.has_value() == want.has_value();
    const bool same_length = !got.has_value() || got->steps.size() == *want;
    const bool valid =
        !got.has_value() || pddl::validate_plan(c.init, c.goal, *got, c.actions);
    if (same_existence && same_length && valid) ++matched;
    if (got.has_value()) ++solvable;
  }
  const double elapsed = seconds_since(start);
  report(2, matched == checked && elapsed < 30.0,
         fmt("planner vs exhaustive BFS oracle: %d/%d matched "
             "(%d solvable, %.2fs)",
             matched, checked, solvable, elapsed));
}

void criterion_3_gradient_checks() {
  rng::Stream stream(19, {7});
  const double step = 1e-5;
  double worst = 0.0;

  auto central = [&](auto&& loss, double& param) {
    const double saved = param;
    param = saved + step;
    const double up = loss();
    param = saved - step;
    const double down = loss();
    param = saved;
    return (up - down) / (2.0 * step);
  };

  // pose loss gradients
  for (int trial = 0; trial < 100; ++trial) {
    perception::PoseEstimator m = perception::PoseEstimator::identity(
        perception::Modality::vision, 5, 0.01);
    for (auto& w : m.weights) w = stream.next_uniform(-0.5, 0.5);
    for (auto& b : m.bias) b = stream.next_uniform(-0.5, 0.5);
    std::vector<double> obs(5);
    for (auto& v : obs) v = stream.next_uniform(-1, 1);
    const world::Pose truth{
        stream.next_uniform(-1, 1), stream.next_uniform(-1, 1),
        stream.next_uniform(-1, 1), stream.next_uniform(-1, 1)};
    const auto sample = perception::CorrectionSample::for_pose(
        perception::Modality::vision, obs, truth);
    const auto next = update_pose_model(m, sample);
    auto loss = [&] {
      return perception::pose_loss(perception::estimate_pose(m, obs), truth);
    };
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      const double analytic = (m.weights[i] - next.weights[i]) / m.learning_rate;
      const double numeric = central(loss, m.weights[i]);
      const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    for (std::size_t i = 0; i < m.bias.size(); ++i) {
      const double analytic = (m.bias[i] - next.bias[i]) / m.learning_rate;
      const double numeric = central(loss, m.bias[i]);
      const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }

  // cross-entropy gradients
  for (int trial = 0; trial < 100; ++trial) {
    perception::PredicateClassifier c =
        perception::PredicateClassifier::zero("p", 6, 0.01);
    for (auto& w : c.weights) w = stream.next_uniform(-2, 2);
    c.bias = stream.next_uniform(-2, 2);
    std::vector<double> x(6);
    for (auto& v : x) v = stream.next_uniform(-1, 1);
    const bool label = stream.next_double() < 0.5;
    const auto sample = perception::CorrectionSample::for_predicate("p", x, label);
    const auto next = update_classifier(c, sample);
    auto loss = [&] {
      double z = c.bias;
      for (std::size_t i = 0; i < x.size(); ++i) z += c.weights[i] * x[i];
      const double p1 = 1.0 / (1.0 + std::exp(-z));
      return label ? -std::log(p1) : -std::log(1.0 - p1);
    };
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
      const double analytic = (c.weights[i] - next.weights[i]) / c.learning_rate;
      const double numeric = central(loss, c.weights[i]);
      const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    const double analytic = (c.bias - next.bias) / c.learning_rate;
    const double numeric = central(loss, c.bias);
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  }

  report(3, worst < 1e-4,
         fmt("analytic vs central-difference gradients, worst relative "
             "error %.2e (bound 1e-4)",
             worst));
}

void criterion_4_confidence_flip_argmin() {
  bool ok = true;
  std::string why = "all checks hold";

  // confidence = max of the complementary pair, in [0.5, 1)
  rng::Stream stream(4242, {1});
  for (int trial = 0; trial < 200 && ok; ++trial) {
    perception::PredicateClassifier c =
        perception::PredicateClassifier::zero("p", 3, 0.01);
    for (auto& w : c.weights) w = stream.next_uniform(-10, 10);
    c.bias = stream.next_uniform(-10, 10);
    std::vector<double> x{stream.next_uniform(-1, 1),
                          stream.next_uniform(-1, 1),
                          stream.next_uniform(-1, 1)};
    const auto r = perception::classify(c, x);
    const double p1 = r.value ? r.confidence : 1.0 - r.confidence;
    const double p0 = 1.0 - p1;
    if (r.confidence != std::max(p0, p1) || r.confidence < 0.5 ||
        r.confidence >= 1.0) {
      ok = false;
      why = "confidence is not max(p0, p1) in [0.5, 1)";
    }
    if (r.value != (p1 > p0)) {
      ok = false;
      why = "argmax value disagrees with the distribution";
    }
  }

  // exact tie resolves to false
  {
    perception::PredicateClassifier c =
        perception::PredicateClassifier::zero("p", 2, 0.01);
    const auto r = perception::classify(c, std::vector<double>{1.0, -1.0});
    if (r.value || r.confidence != 0.5) {
      ok = false;
      why = "zero-logit tie did not resolve to false at confidence 0.5";
    }
  }

  // flip is the exact boolean negation; argmin over enumerated reading
  // sets with declaration-order tie-breaking (above_screw precedes
  // target_aim in the predicate declarations)
  const auto mk_trace = [](std::vector<perception::PredicateReading> readings) {
    exec::ExecutionTrace t;
    t.outcome = exec::Outcome::success;
    t.replan_count = 1;
    exec::StepRecord mate;
    mate.primitive = "Mate_force";
    mate.executed = true;
    mate.pose_estimate = exec::PoseEstimateRecord{
        perception::Modality::force, std::vector<double>(5, 0.0), world::Pose{}};
    exec::StepRecord failed;
    failed.primitive = "Insert";
    failed.executed = true;
    failed.triggered_replan = true;
    failed.verification =
        exec::VerificationRecord{{pddl::pos("socketed")}, {}, false};
    failed.pre_readings = std::move(readings);
    t.steps = {mate, failed};
    return t;
  };
  auto reading = [](const char* pred, bool value, double conf) {
    return perception::PredicateReading{pred, value, conf,
                                        std::vector<double>(8, 0.0)};
  };

  const double confs[] = {0.6, 0.75, 0.9};
  for (double ca : confs) {
    for (double cb : confs) {
      for (int va = 0; va < 2; ++va) {
        for (int vb = 0; vb < 2; ++vb) {
          auto t = mk_trace({reading("target_aim", va != 0, ca),
                             reading("above_screw", vb != 0, cb)});
          const auto samples = learn::analyze_trace(t);
          const perception::CorrectionSample* flip = nullptr;
          for (const auto& s : samples) {
            if (s.kind == perception::CorrectionSample::Kind::predicate) {
              if (flip != nullptr) {
                ok = false;
                why = "more than one predicate sample emitted";
              }
              flip = &s;
            }
          }
          if (flip == nullptr) {
            ok = false;
            why = "no predicate sample emitted for a failed action";
            continue;
          }
          const bool aim_wins = ca < cb;  // ties go to above_screw
          const std::string expect = aim_wins ? "target_aim" : "above_screw";
          const bool expect_value = aim_wins ? va != 0 : vb != 0;
          if (flip->target_model != expect) {
            ok = false;
            why = "argmin selection (with declaration-order ties) is wrong";
          }
          if (std::get<bool>(flip->corrected_label) != !expect_value) {
            ok = false;
            why = "flip is not the exact boolean negation";
          }
        }
      }
    }
  }

  report(4, ok, "confidence/flip/argmin mechanics: " + why);
}

void criterion_5_metric_fidelity() {
  std::vector<int> ns;
  for (int i = 0; i < 107; ++i) ns.push_back(i % 10);
  for (int i = 0; i < 24; ++i) ns.push_back(10);
  const double sus = metrics::compute_sus(ns, 10);
  const bool rate_ok = std::abs(sus - 0.8168) <= 1e-4;

  const bool boundary_ok =
      metrics::indicator(9, 10) == 1 && metrics::indicator(10, 10) == 0 &&
      metrics::indicator(11, 10) == 0 && metrics::indicator(0, 10) == 1;
  report(5, rate_ok && boundary_ok,
         fmt("SUS(107 of 131) = %.6f (target 0.8168 +/- 0.0001), indicator "
             "boundary at n = n_th exact",
             sus));
}

void criterion_6_replan_threshold() {
  auto cfg = harness::default_config();
  cfg.disturbance.lighting_schedule = world::LightingSchedule::constant(1.0);
  cfg.disturbance.vision_bias_gain = 0.5;
  cfg.disturbance.vision_noise_std = 0.01;
  cfg.disturbance.force_noise_std = 0.5;
  cfg.disturbance.wear_rate = 0.0;
  const auto models = harness::bootstrap_models(cfg);

  exec::TaskSpec task;
  task.init = pddl::GroundState{"have_coarse_pose"};
  task.goal = {pddl::pos("disassembled")};
  task.n_th = 10;

  int exact = 0;
  const int episodes = 40;
  for (int e = 0; e < episodes; ++e) {
    auto world = world::new_episode(cfg.disturbance, cfg.workspace, e, cfg.seed);
    const auto trace =
        exec::run_task(task, pddl::disassembly_domain(), world, models);
    if (trace.outcome == exec::Outcome::failure && trace.replan_count == 10) {
      ++exact;
    }
  }
  report(6, exact == episodes,
         fmt("both modalities corrupted: %d/%d tasks failed with n = 10 "
             "exactly",
             exact, episodes));
}

void criterion_7_learning_trend() {
  const auto start = Clock::now();
  const auto cfg = harness::default_config();
  std::stringstream csv;
  const auto result = harness::run_experiment_streams(cfg, csv, nullptr);
  const double elapsed = seconds_since(start);

  const auto& its = result.iterations;
  const bool shape = its.size() == 4;
  const double sus0 = shape ? its.front().sus : 0.0;
  const double sus_last = shape ? its.back().sus : 0.0;
  const double n0 = shape ? its.front().avg_replans : 0.0;
  const double n_last = shape ? its.back().avg_replans : 1e9;
  const double drop = n0 > 0 ? (n0 - n_last) / n0 : 0.0;

  const bool ok = shape && sus0 >= 0.6 && sus0 <= 0.95 && sus_last == 1.0 &&
                  drop >= 0.40 && elapsed < 120.0;
  report(7, ok,
         fmt("default run: SUS %.4f -> %.4f (start in [0.6,0.95], final "
             "1.0), avg replans %.3f -> %.3f (drop %.0f%%, need >= 40%%), "
             "%.1fs",
             sus0, sus_last, n0, n_last, drop * 100.0, elapsed));
}

void criterion_8_backward_gating() {
  const auto cfg = harness::default_config();
  const auto models = harness::bootstrap_models(cfg);

  exec::TaskSpec task;
  task.init = pddl::GroundState{"have_coarse_pose"};
  task.goal = {pddl::pos("disassembled")};
  task.n_th = cfg.n_th;

  int violations = 0, qualifying = 0, with_flip = 0;
  for (int e = 0; e < 500; ++e) {
    auto world = world::new_episode(cfg.disturbance, cfg.workspace, e, 777);
    const auto trace =
        exec::run_task(task, pddl::disassembly_domain(), world, models);
    const auto samples = learn::analyze_trace(trace);
    int predicate_samples = 0;
    for (const auto& s : samples) {
      if (s.kind == perception::CorrectionSample::Kind::predicate) {
        ++predicate_samples;
      }
    }
    const bool qualifies =
        trace.outcome == exec::Outcome::success && trace.replan_count > 0;
    if (!qualifies) {
      if (!samples.empty()) ++violations;
      continue;
    }
    ++qualifying;
    bool has_mismatch = false;
    for (const auto& s : trace.steps) {
      if (s.verification.has_value() && !s.verification->expected_met) {
        has_mismatch = true;
        break;
      }
    }
    // single-correction stop: exactly one flip when a failed action
    // exists, none in the degenerate no-mismatch case
    if (predicate_samples != (has_mismatch ? 1 : 0)) ++violations;
    if (predicate_samples == 1) ++with_flip;
  }
  report(8, violations == 0 && qualifying > 50 && with_flip > 50,
         fmt("gating over 500 traces: %d violations, %d qualifying, %d "
             "with exactly one flip",
             violations, qualifying, with_flip));
}

void criterion_9_correction_efficacy() {
  const auto cfg = harness::default_config();
  const double tol = cfg.disturbance.insert_tolerance;

  // untrained estimator: the raw identity pipeline
  auto untrained = perception::PoseEstimator::identity(
      perception::Modality::vision, world::kObservationDim, cfg.learning_rate);

  // 75 correction samples as the backward flow produces them: biased
  // vision observations labelled by the force pose that socketed.
  // Vision failures concentrate at strong lighting, so the samples come
  // from that regime.
  learn::LearningBuffer buffer;
  buffer.trigger_threshold = 75;
  std::vector<perception::CorrectionSample> batch;
  rng::Stream label_stream(99, {5});
  for (int e = 0; e < 75; ++e) {
    auto world = world::new_episode(cfg.disturbance, cfg.workspace, e, 31337);
    world.lighting = 0.8 + 0.2 * label_stream.next_double();
    const auto obs = world::sense_vision(world);
    world::Pose label = world.true_pose;
    for (;;) {  // force estimate conditioned on a successful insert
      const double nx =
          cfg.disturbance.force_noise_std * label_stream.next_gaussian();
      const double ny =
          cfg.disturbance.force_noise_std * label_stream.next_gaussian();
      if (std::hypot(nx, ny) <= tol) {
        label.x += nx;
        label.y += ny;
        break;
      }
    }
    batch.push_back(perception::CorrectionSample::for_pose(
        perception::Modality::vision, obs, label));
  }
  buffer = learn::ingest(std::move(buffer), batch);

  exec::PerceptionModels models;
  models.vision = untrained;
  models.force = perception::PoseEstimator::identity(
      perception::Modality::force, world::kObservationDim, cfg.learning_rate);
  auto [updated, reportv] = learn::maybe_update(buffer, std::move(models),
                                                learn::ValidationSuite{}, 0);

  const double before = harness::held_out_pose_rmse(untrained, cfg, 1.0,
                                                    rng::Stream(5150, {2}), 500);
  const double after = harness::held_out_pose_rmse(updated.vision, cfg, 1.0,
                                                   rng::Stream(5150, {2}), 500);
  const double drop = (before - after) / before;

  report(9, reportv.has_value() && drop >= 0.50,
         fmt("one 75-sample vision update: held-out RMSE under full "
             "lighting bias %.3fmm -> %.3fmm (drop %.0f%%, need >= 50%%)",
             before * 1e3, after * 1e3, drop * 100.0));
}

void criterion_10_determinism() {
  const auto cfg = harness::default_config();  // seed 42
  std::stringstream csv_a, csv_b, ev_a, ev_b;
  (void)harness::run_experiment_streams(cfg, csv_a, &ev_a);
  (void)harness::run_experiment_streams(cfg, csv_b, &ev_b);
  const bool csv_same = csv_a.str() == csv_b.str();
  const bool events_same = ev_a.str() == ev_b.str();
  report(10, csv_same && events_same && !csv_a.str().empty(),
         fmt("two seed-42 default runs: results.csv byte-identical (%s), "
             "events.jsonl byte-identical (%s)",
             csv_same ? "yes" : "NO", events_same ? "yes" : "NO"));
}

}  // namespace

int main() {
  criterion_1_illustrative_plans();
  criterion_2_planner_oracle();
  criterion_3_gradient_checks();
  criterion_4_confidence_flip_argmin();
  criterion_5_metric_fidelity();
  criterion_6_replan_threshold();
  criterion_7_learning_trend();
  criterion_8_backward_gating();
  criterion_9_correction_efficacy();
  criterion_10_determinism();

  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", failures);
  return 1;
}
