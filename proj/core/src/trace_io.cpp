#include "nstamp/trace_io.hpp"

#include <fstream>
#include <map>

#include "json.hpp"

namespace nstamp::trace_io {

namespace {

using nlohmann::json;

json pose_to_json(const world::Pose& p) {
  return json::array({p.x, p.y, p.z, p.theta});
}

world::Pose pose_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
          j.at(3).get<double>()};
}

json state_to_json(const pddl::GroundState& s) {
  json arr = json::array();
  for (const auto& p : s) arr.push_back(p.name);
  return arr;
}

pddl::GroundState state_from_json(const json& j) {
  std::set<pddl::Proposition> props;
  for (const auto& name : j) props.insert(pddl::Proposition(name.get<std::string>()));
  return pddl::GroundState(std::move(props));
}

json literals_to_json(std::span<const pddl::Literal> lits) {
  json arr = json::array();
  for (const auto& l : lits) arr.push_back(json::array({l.prop.name, l.positive}));
  return arr;
}

std::vector<pddl::Literal> literals_from_json(const json& j) {
  std::vector<pddl::Literal> lits;
  for (const auto& e : j) {
    lits.push_back({pddl::Proposition(e.at(0).get<std::string>()),
                    e.at(1).get<bool>()});
  }
  return lits;
}

json readings_to_json(std::span<const perception::PredicateReading> readings) {
  json arr = json::array();
  for (const auto& r : readings) {
    arr.push_back({{"predicate", r.predicate},
                   {"value", r.value},
                   {"confidence", r.confidence},
                   {"input", r.input_snapshot}});
  }
  return arr;
}

std::vector<perception::PredicateReading> readings_from_json(const json& j) {
  std::vector<perception::PredicateReading> readings;
  for (const auto& e : j) {
    perception::PredicateReading r;
    r.predicate = e.at("predicate").get<std::string>();
    r.value = e.at("value").get<bool>();
    r.confidence = e.at("confidence").get<double>();
    r.input_snapshot = e.at("input").get<std::vector<double>>();
    readings.push_back(std::move(r));
  }
  return readings;
}

json step_to_json(const exec::StepRecord& step) {
  json j{{"primitive", step.primitive},
         {"executed", step.executed},
         {"replan", step.triggered_replan},
         {"pre_readings", readings_to_json(step.pre_readings)},
         {"state_before", state_to_json(step.state_before)},
         {"state_after", state_to_json(step.state_after)}};
  if (step.pose_estimate.has_value()) {
    j["pose_estimate"] = {
        {"modality", perception::to_string(step.pose_estimate->modality)},
        {"observation", step.pose_estimate->observation},
        {"estimate", pose_to_json(step.pose_estimate->estimate)}};
  } else {
    j["pose_estimate"] = nullptr;
  }
  if (step.verification.has_value()) {
    j["verification"] = {
        {"expected", literals_to_json(step.verification->expected)},
        {"readings", readings_to_json(step.verification->readings)},
        {"met", step.verification->expected_met}};
  } else {
    j["verification"] = nullptr;
  }
  return j;
}

exec::StepRecord step_from_json(const json& j) {
  exec::StepRecord step;
  step.primitive = j.at("primitive").get<std::string>();
  step.executed = j.at("executed").get<bool>();
  step.triggered_replan = j.at("replan").get<bool>();
  step.pre_readings = readings_from_json(j.at("pre_readings"));
  step.state_before = state_from_json(j.at("state_before"));
  step.state_after = state_from_json(j.at("state_after"));
  if (!j.at("pose_estimate").is_null()) {
    const auto& pe = j.at("pose_estimate");
    exec::PoseEstimateRecord rec;
    rec.modality =
        perception::modality_from_string(pe.at("modality").get<std::string>());
    rec.observation = pe.at("observation").get<std::vector<double>>();
    rec.estimate = pose_from_json(pe.at("estimate"));
    step.pose_estimate = std::move(rec);
  }
  if (!j.at("verification").is_null()) {
    const auto& v = j.at("verification");
    exec::VerificationRecord rec;
    rec.expected = literals_from_json(v.at("expected"));
    rec.readings = readings_from_json(v.at("readings"));
    rec.expected_met = v.at("met").get<bool>();
    step.verification = std::move(rec);
  }
  return step;
}

}  // namespace

void write_run_header(std::ostream& os, uint64_t seed,
                      const std::string& config_json) {
  json j{{"type", "run_header"},
         {"schema_version", kSchemaVersion},
         {"seed", seed}};
  j["config"] = json::parse(config_json);
  os << j.dump() << '\n';
}

void write_step(std::ostream& os, int episode, int iteration,
                const exec::StepRecord& step) {
  json j = step_to_json(step);
  j["type"] = "step";
  j["episode"] = episode;
  j["iteration"] = iteration;
  os << j.dump() << '\n';
}

void write_trace_summary(std::ostream& os, int iteration,
                         const exec::ExecutionTrace& trace) {
  json j{{"type", "trace_summary"},
         {"episode", trace.episode_index},
         {"iteration", iteration},
         {"replans", trace.replan_count},
         {"outcome",
          trace.outcome == exec::Outcome::success ? "success" : "failure"},
         {"n_th", trace.task.n_th},
         {"steps", trace.steps.size()},
         {"init", state_to_json(trace.task.init)},
         {"goal", literals_to_json(trace.task.goal)}};
  if (trace.final_pose_truth_source.has_value()) {
    j["final_pose_truth_source"] =
        std::string(perception::to_string(*trace.final_pose_truth_source));
  } else {
    j["final_pose_truth_source"] = nullptr;
  }
  os << j.dump() << '\n';
}

void write_update_report(std::ostream& os, int episode,
                         const learn::UpdateReport& report) {
  json j{{"type", "update_report"},
         {"episode", episode},
         {"iteration", report.iteration},
         {"models", report.models_updated},
         {"samples_consumed", report.samples_consumed},
         {"pre_loss", report.pre_loss},
         {"post_loss", report.post_loss}};
  os << j.dump() << '\n';
}

void write_iteration_result(std::ostream& os,
                            const metrics::IterationResult& result) {
  json j{{"type", "iteration_result"},
         {"iteration", result.iteration},
         {"task_count", result.task_count},
         {"sus", result.sus},
         {"avg_replans", result.avg_replans},
         {"replan_counts", result.replan_counts}};
  os << j.dump() << '\n';
}

LogContents read_log(std::istream& is) {
  LogContents log;
  std::map<int, LoggedTrace> traces;  // by episode
  std::map<int, std::vector<exec::StepRecord>> steps;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "run_header") {
      log.schema_version = j.at("schema_version").get<int>();
      log.seed = j.at("seed").get<uint64_t>();
      if (j.contains("config") && j["config"].contains("replan_threshold")) {
        log.n_th = j["config"]["replan_threshold"].get<int>();
      }
    } else if (type == "step") {
      steps[j.at("episode").get<int>()].push_back(step_from_json(j));
    } else if (type == "trace_summary") {
      LoggedTrace lt;
      lt.iteration = j.at("iteration").get<int>();
      lt.trace.episode_index = j.at("episode").get<int>();
      lt.trace.replan_count = j.at("replans").get<int>();
      lt.trace.outcome = j.at("outcome").get<std::string>() == "success"
                             ? exec::Outcome::success
                             : exec::Outcome::failure;
      lt.trace.task.n_th = j.at("n_th").get<int>();
      lt.trace.task.init = state_from_json(j.at("init"));
      lt.trace.task.goal = literals_from_json(j.at("goal"));
      if (!j.at("final_pose_truth_source").is_null()) {
        lt.trace.final_pose_truth_source = perception::modality_from_string(
            j.at("final_pose_truth_source").get<std::string>());
      }
      traces[lt.trace.episode_index] = std::move(lt);
    } else if (type == "iteration_result") {
      metrics::IterationResult r;
      r.iteration = j.at("iteration").get<int>();
      r.task_count = j.at("task_count").get<int>();
      r.sus = j.at("sus").get<double>();
      r.avg_replans = j.at("avg_replans").get<double>();
      r.replan_counts = j.at("replan_counts").get<std::vector<int>>();
      log.iteration_results.push_back(std::move(r));
    }
    // update_report records are informational; replay does not need them
  }

  for (auto& [episode, lt] : traces) {
    auto it = steps.find(episode);
    if (it != steps.end()) lt.trace.steps = std::move(it->second);
    log.traces.push_back(std::move(lt));
  }
  return log;
}

LogContents read_log_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot open '" + path + "'");
  return read_log(is);
}

std::vector<std::string> validate_logged_trace(const LoggedTrace& logged,
                                               const pddl::Domain& domain) {
  std::vector<std::string> problems;
  const auto& trace = logged.trace;
  auto complain = [&](const std::string& msg) {
    problems.push_back("episode " + std::to_string(trace.episode_index) + ": " +
                       msg);
  };

  int replans = 0;
  for (const auto& step : trace.steps) {
    if (step.triggered_replan) ++replans;
  }
  if (replans != trace.replan_count) {
    complain("summary reports " + std::to_string(trace.replan_count) +
             " replans but the steps record " + std::to_string(replans));
  }

  const bool should_fail = trace.replan_count >= trace.task.n_th;
  if (should_fail != (trace.outcome == exec::Outcome::failure)) {
    complain("outcome disagrees with the replan threshold rule");
  }

  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    const std::string where = "step " + std::to_string(i) + " (" +
                              step.primitive + ")";
    pddl::GroundState projected = step.state_before;

    if (step.executed) {
      projected = exec::update_from_readings(projected, step.pre_readings);
      const pddl::ActionSchema* action = domain.find_action(step.primitive);
      if (action == nullptr) {
        complain(where + ": unknown primitive");
        continue;
      }
      if (!pddl::satisfies(projected, action->preconditions)) {
        complain(where + ": executed with unsatisfied preconditions");
      }
      // replay the belief transition: effects minus the pattern flag
      for (const auto& eff : action->effects) {
        if (eff.prop.name == "pattern") continue;
        projected = eff.positive ? projected.with(eff.prop)
                                 : projected.without(eff.prop);
      }
      if (step.triggered_replan) {
        // a verification mismatch folds its readings, then the abnormal
        // handler clears alignment facts and flips the modality flag
        if (step.verification.has_value()) {
          projected = exec::update_from_readings(projected,
                                                 step.verification->readings);
        }
        projected = exec::abnormal_state_update(projected);
      }
    } else if (step.triggered_replan) {
      if (step.verification.has_value()) {
        // terminal goal check
        projected = exec::update_from_readings(projected,
                                               step.verification->readings);
        projected = exec::abnormal_state_update(projected);
      } else {
        projected = exec::check_failure_update(projected, step.pre_readings);
        // when the folded belief admits no plan the executive resets it;
        // the final step of a failed trace never replans
        const bool is_last = i + 1 == trace.steps.size();
        if (!is_last &&
            !pddl::plan(projected, trace.task.goal, domain.actions)
                 .has_value()) {
          projected = exec::abnormal_state_update(projected);
        }
      }
    }
    if (!(projected == step.state_after)) {
      complain(where + ": state_after does not replay from state_before");
    }
  }

  if (trace.outcome == exec::Outcome::success) {
    // The episode ends on the world's own report, so the final
    // verification may even have misread false; the Disassemble must
    // still be the last executed primitive and carry its check.
    const exec::StepRecord* last_exec = nullptr;
    for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
      if (it->executed) {
        last_exec = &*it;
        break;
      }
    }
    if (last_exec == nullptr || last_exec->primitive != world::kDisassemble ||
        !last_exec->verification.has_value()) {
      complain("success trace does not end with a checked Disassemble");
    }
  }

  return problems;
}

}  // namespace nstamp::trace_io
