#include <sstream>

#include "doctest.h"
#include "nstamp/harness.hpp"
#include "nstamp/trace_io.hpp"
#include "support/fixtures.hpp"

using namespace nstamp;
using test_support::biased_vision_cfg;
using test_support::run_episode;

TEST_CASE("an events stream round-trips a full trace") {
  const auto cfg = biased_vision_cfg();
  const auto models = harness::bootstrap_models(cfg);
  const auto run = run_episode(cfg, models, 1);

  std::stringstream ss;
  trace_io::write_run_header(ss, cfg.seed, harness::config_to_json(cfg));
  for (const auto& step : run.trace.steps) {
    trace_io::write_step(ss, run.trace.episode_index, 0, step);
  }
  trace_io::write_trace_summary(ss, 0, run.trace);

  metrics::IterationResult ir;
  ir.iteration = 0;
  ir.task_count = 1;
  ir.sus = 1.0;
  ir.avg_replans = run.trace.replan_count;
  ir.replan_counts = {run.trace.replan_count};
  trace_io::write_iteration_result(ss, ir);

  const auto log = trace_io::read_log(ss);
  CHECK(log.schema_version == trace_io::kSchemaVersion);
  CHECK(log.seed == cfg.seed);
  CHECK(log.n_th == 10);
  REQUIRE(log.traces.size() == 1);
  REQUIRE(log.iteration_results.size() == 1);
  CHECK(log.iteration_results[0].replan_counts ==
        std::vector<int>{run.trace.replan_count});

  const auto& back = log.traces[0].trace;
  CHECK(back.replan_count == run.trace.replan_count);
  CHECK(back.outcome == run.trace.outcome);
  CHECK(back.episode_index == run.trace.episode_index);
  CHECK(back.task.init == run.trace.task.init);
  REQUIRE(back.steps.size() == run.trace.steps.size());
  for (std::size_t i = 0; i < back.steps.size(); ++i) {
    const auto& a = back.steps[i];
    const auto& b = run.trace.steps[i];
    CHECK(a.primitive == b.primitive);
    CHECK(a.executed == b.executed);
    CHECK(a.triggered_replan == b.triggered_replan);
    CHECK(a.state_before == b.state_before);
    CHECK(a.state_after == b.state_after);
    REQUIRE(a.pre_readings.size() == b.pre_readings.size());
    for (std::size_t j = 0; j < a.pre_readings.size(); ++j) {
      CHECK(a.pre_readings[j].predicate == b.pre_readings[j].predicate);
      CHECK(a.pre_readings[j].value == b.pre_readings[j].value);
      // doubles survive the JSON round trip bit-exactly
      CHECK(a.pre_readings[j].confidence == b.pre_readings[j].confidence);
      CHECK(a.pre_readings[j].input_snapshot == b.pre_readings[j].input_snapshot);
    }
    CHECK(a.pose_estimate.has_value() == b.pose_estimate.has_value());
    if (a.pose_estimate.has_value()) {
      CHECK(a.pose_estimate->modality == b.pose_estimate->modality);
      CHECK(a.pose_estimate->observation == b.pose_estimate->observation);
      CHECK(a.pose_estimate->estimate == b.pose_estimate->estimate);
    }
    CHECK(a.verification.has_value() == b.verification.has_value());
    if (a.verification.has_value()) {
      CHECK(a.verification->expected_met == b.verification->expected_met);
      CHECK(a.verification->expected == b.verification->expected);
    }
  }

  // and the round-tripped trace still validates
  const auto problems = trace_io::validate_logged_trace(
      log.traces[0], pddl::disassembly_domain());
  CHECK(problems.empty());
}

TEST_CASE("unparseable lines are reported with their line number") {
  std::stringstream ss("{\"type\":\"run_header\",\"schema_version\":1,\"seed\":1,\"config\":{}}\nnot json\n");
  CHECK_THROWS_AS((void)trace_io::read_log(ss), trace_io::SchemaError);
}

TEST_CASE("unknown record types are skipped") {
  std::stringstream ss(
      "{\"type\":\"future_record\",\"x\":1}\n"
      "{\"type\":\"iteration_result\",\"iteration\":0,\"task_count\":2,"
      "\"sus\":1.0,\"avg_replans\":0.5,\"replan_counts\":[0,1]}\n");
  const auto log = trace_io::read_log(ss);
  CHECK(log.traces.empty());
  REQUIRE(log.iteration_results.size() == 1);
  CHECK(log.iteration_results[0].task_count == 2);
}

TEST_CASE("the validator flags inconsistent replan counts") {
  const auto cfg = biased_vision_cfg();
  const auto models = harness::bootstrap_models(cfg);
  auto run = run_episode(cfg, models, 1);

  trace_io::LoggedTrace logged{run.trace, 0};
  logged.trace.replan_count += 1;  // corrupt the summary
  const auto problems =
      trace_io::validate_logged_trace(logged, pddl::disassembly_domain());
  CHECK_FALSE(problems.empty());
}

TEST_CASE("the validator flags tampered states") {
  const auto cfg = biased_vision_cfg();
  const auto models = harness::bootstrap_models(cfg);
  auto run = run_episode(cfg, models, 2);
  REQUIRE(!run.trace.steps.empty());

  trace_io::LoggedTrace logged{run.trace, 0};
  logged.trace.steps[0].state_after =
      logged.trace.steps[0].state_after.with(pddl::Proposition("socketed"));
  const auto problems =
      trace_io::validate_logged_trace(logged, pddl::disassembly_domain());
  CHECK_FALSE(problems.empty());
}
