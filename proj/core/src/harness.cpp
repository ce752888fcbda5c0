#include "nstamp/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "nstamp/checkpoint.hpp"
#include "nstamp/trace_io.hpp"

namespace nstamp::harness {

namespace {

using nlohmann::json;
using perception::Modality;

constexpr uint64_t kBootstrapStream = 0xb0;
constexpr uint64_t kValidationStream = 0xa1;

// Same hover fraction the world uses for head contact.
constexpr double kContactFraction = 0.25;

// ---------------------------------------------------------------------------
// Config

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

world::LightingSchedule lighting_from_json(const json& j) {
  check_keys(j, {"offset", "amplitude", "period", "jitter"}, "lighting");
  world::LightingSchedule s;
  s.offset = j.value("offset", s.offset);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.period_episodes = j.value("period", s.period_episodes);
  s.jitter = j.value("jitter", s.jitter);
  return s;
}

world::DisturbanceConfig disturbance_from_json(const json& j) {
  check_keys(j,
             {"lighting", "vision_bias_gain", "vision_noise_std",
              "force_noise_std", "wear_rate", "insert_tolerance"},
             "disturbance");
  world::DisturbanceConfig d;
  if (j.contains("lighting")) d.lighting_schedule = lighting_from_json(j["lighting"]);
  d.vision_bias_gain = j.value("vision_bias_gain", d.vision_bias_gain);
  d.vision_noise_std = j.value("vision_noise_std", d.vision_noise_std);
  d.force_noise_std = j.value("force_noise_std", d.force_noise_std);
  d.wear_rate = j.value("wear_rate", d.wear_rate);
  d.insert_tolerance = j.value("insert_tolerance", d.insert_tolerance);
  if (d.vision_noise_std < 0 || d.force_noise_std < 0 || d.wear_rate < 0) {
    throw ConfigError("noise and wear values must be non-negative");
  }
  if (d.insert_tolerance <= 0) {
    throw ConfigError("insert_tolerance must be positive");
  }
  return d;
}

world::Workspace workspace_from_json(const json& j) {
  check_keys(j, {"extent", "coarse_radius", "hover_height", "home"},
             "workspace");
  world::Workspace w;
  if (j.contains("extent")) {
    const auto& e = j["extent"];
    w.extent_x = e.at(0).get<double>();
    w.extent_y = e.at(1).get<double>();
    w.extent_z = e.at(2).get<double>();
  }
  w.coarse_radius = j.value("coarse_radius", w.coarse_radius);
  w.hover_height = j.value("hover_height", w.hover_height);
  if (j.contains("home")) {
    const auto& h = j["home"];
    w.home = {h.at(0).get<double>(), h.at(1).get<double>(),
              h.at(2).get<double>(), h.at(3).get<double>()};
  }
  return w;
}

BootstrapConfig bootstrap_from_json(const json& j) {
  check_keys(j,
             {"samples_per_predicate", "epochs", "learning_rate", "l2",
              "rig_noise_std"},
             "bootstrap");
  BootstrapConfig b;
  b.samples_per_predicate = j.value("samples_per_predicate", b.samples_per_predicate);
  b.epochs = j.value("epochs", b.epochs);
  b.learning_rate = j.value("learning_rate", b.learning_rate);
  b.l2 = j.value("l2", b.l2);
  b.rig_noise_std = j.value("rig_noise_std", b.rig_noise_std);
  return b;
}

// ---------------------------------------------------------------------------
// Bootstrap calibration

// A synthetic calibration scene: rig-known tool/screw geometry, sensed
// with nominal noise (no lighting bias), labelled from ground truth.
struct Scene {
  Modality modality = Modality::vision;
  std::vector<double> features;
  std::set<std::string> labels;
};

std::set<std::string> geometry_labels(const world::Pose& tool,
                                      const world::Pose& screw, bool socketed,
                                      bool disassembled,
                                      const ExperimentConfig& cfg) {
  std::set<std::string> labels;
  const double planar = world::planar_error(tool, screw);
  const double dz = tool.z - screw.z;
  const double hover = cfg.workspace.hover_height;
  if (planar <= cfg.workspace.coarse_radius) {
    labels.insert("near_screw");
    if (dz > kContactFraction * hover && dz <= 2.0 * hover) {
      labels.insert("above_screw");
    }
    if (planar <= cfg.disturbance.insert_tolerance && dz >= 0.0 &&
        dz <= 2.0 * hover) {
      labels.insert("target_aim");
    }
  }
  if (socketed) labels.insert("socketed");
  if (disassembled) labels.insert("disassembled");
  return labels;
}

Scene draw_scene(const ExperimentConfig& cfg, rng::Stream& stream) {
  const auto& ws = cfg.workspace;
  const double tol = cfg.disturbance.insert_tolerance;
  const double hover = ws.hover_height;

  world::Pose screw;
  screw.x = stream.next_uniform(-ws.extent_x / 2, ws.extent_x / 2);
  screw.y = stream.next_uniform(-ws.extent_y / 2, ws.extent_y / 2);
  screw.z = stream.next_uniform(0.0, ws.extent_z);
  screw.theta = stream.next_uniform(-std::numbers::pi, std::numbers::pi);

  bool socketed = false;
  bool disassembled = false;
  world::Pose tool = screw;

  const Modality modality =
      stream.next_double() < 0.5 ? Modality::vision : Modality::force;
  const double noise =
      std::max(modality == Modality::vision ? cfg.disturbance.vision_noise_std
                                            : cfg.disturbance.force_noise_std,
               cfg.bootstrap.rig_noise_std);

  const double pick = stream.next_double();
  if (pick < 0.10) {
    // far away, tool roaming the workspace
    const double r = stream.next_uniform(2.0, 10.0) * ws.coarse_radius;
    const double phi = stream.next_uniform(0.0, 2.0 * std::numbers::pi);
    tool.x += r * std::cos(phi);
    tool.y += r * std::sin(phi);
    tool.z = screw.z + stream.next_uniform(0.5, 6.0) * hover;
  } else if (pick < 0.30) {
    // coarse placement, straddling the near_screw boundary
    const double r = stream.next_uniform(0.0, 1.4) * ws.coarse_radius;
    const double phi = stream.next_uniform(0.0, 2.0 * std::numbers::pi);
    tool.x += r * std::cos(phi);
    tool.y += r * std::sin(phi);
    tool.z = screw.z + stream.next_uniform(0.5, 1.5) * hover;
  } else if (pick < 0.50) {
    // post-mate hover: the tool sits on the estimate, so its true offset
    // follows the sensing noise
    tool.x += noise * stream.next_gaussian();
    tool.y += noise * stream.next_gaussian();
    tool.z = screw.z + hover;
  } else if (pick < 0.60) {
    // deliberate offset sweep at hover, the rig's misalignment coverage
    const double r = stream.next_uniform(1.0, 3.0) * tol;
    const double phi = stream.next_uniform(0.0, 2.0 * std::numbers::pi);
    tool.x += r * std::cos(phi);
    tool.y += r * std::sin(phi);
    tool.z = screw.z + hover;
  } else if (pick < 0.68) {
    // retracted above the screw after an aborted attempt
    const double r = stream.next_uniform(0.0, 3.0) * tol;
    const double phi = stream.next_uniform(0.0, 2.0 * std::numbers::pi);
    tool.x += r * std::cos(phi);
    tool.y += r * std::sin(phi);
    tool.z = screw.z + stream.next_uniform(2.2, 4.0) * hover;
  } else if (pick < 0.78) {
    // jammed on the head after a missed insert: misses are at least the
    // tolerance off, otherwise the insert would have socketed
    const double r = stream.next_uniform(1.0, 3.5) * tol;
    const double phi = stream.next_uniform(0.0, 2.0 * std::numbers::pi);
    tool.x += r * std::cos(phi);
    tool.y += r * std::sin(phi);
    tool.z = screw.z + 0.004;
  } else if (pick < 0.91) {
    // mated socket; offsets follow the success-conditioned spread
    tool.x += 0.45 * tol * stream.next_gaussian();
    tool.y += 0.45 * tol * stream.next_gaussian();
    tool.z = screw.z;
    socketed = true;
  } else {
    // screw removed
    tool.x += 0.45 * tol * stream.next_gaussian();
    tool.y += 0.45 * tol * stream.next_gaussian();
    tool.z = screw.z;
    disassembled = true;
  }

  const double lighting = stream.next_double();

  // Nominal rig: sensor noise, no lighting bias. The estimate is what
  // the identity estimator returns, i.e. the observation's pose slots.
  world::Pose estimate;
  estimate.x = screw.x + noise * stream.next_gaussian();
  estimate.y = screw.y + noise * stream.next_gaussian();
  estimate.z = screw.z + noise * stream.next_gaussian();
  estimate.theta =
      world::wrap_angle(screw.theta + noise * stream.next_gaussian());

  double engagement = 0.0;
  if (modality == Modality::force) {
    const bool contact_zone =
        world::planar_error(tool, screw) <= ws.coarse_radius &&
        tool.z - screw.z <= kContactFraction * hover;
    if (disassembled) {
      engagement = contact_zone ? -0.5 : 0.0;
    } else if (socketed) {
      engagement = 1.0;
    } else if (contact_zone) {
      engagement = 0.3;
    }
  }

  perception::FeatureContext ctx;
  ctx.tool = tool;
  ctx.estimate = estimate;
  ctx.modality = modality;
  ctx.lighting = lighting;
  ctx.engagement = engagement;
  ctx.insert_tolerance = tol;
  ctx.hover_height = hover;

  Scene scene;
  scene.modality = modality;
  scene.features = perception::predicate_features(ctx);
  scene.labels = geometry_labels(tool, screw, socketed, disassembled, cfg);
  return scene;
}

std::vector<Scene> draw_scenes(const ExperimentConfig& cfg, rng::Stream stream,
                               int count) {
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) scenes.push_back(draw_scene(cfg, stream));
  return scenes;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool force_perceived(const std::string& predicate) {
  return predicate == "socketed" || predicate == "disassembled";
}

perception::PredicateClassifier fit_classifier(
    const std::string& predicate, const std::vector<Scene>& all_scenes,
    const ExperimentConfig& cfg) {
  perception::PredicateClassifier model = perception::PredicateClassifier::zero(
      predicate, perception::kFeatureDim, cfg.classifier_learning_rate);

  // Each classifier trains on the sensing context it runs against:
  // contact facts are only ever judged from force features.
  std::vector<const Scene*> scenes;
  for (const auto& s : all_scenes) {
    if (!force_perceived(predicate) || s.modality == Modality::force) {
      scenes.push_back(&s);
    }
  }

  const auto& boot = cfg.bootstrap;
  const double n = static_cast<double>(scenes.size());
  std::vector<double> grad(static_cast<std::size_t>(perception::kFeatureDim));

  for (int epoch = 0; epoch < boot.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (const Scene* scene : scenes) {
      double z = model.bias;
      for (std::size_t i = 0; i < grad.size(); ++i) {
        z += model.weights[i] * scene->features[i];
      }
      const double err =
          sigmoid(z) - (scene->labels.count(predicate) ? 1.0 : 0.0);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += err * scene->features[i];
      }
      grad_bias += err;
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      model.weights[i] -=
          boot.learning_rate * (grad[i] / n + boot.l2 * model.weights[i]);
    }
    model.bias -= boot.learning_rate * grad_bias / n;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Held-out pose pairs

struct PosePair {
  std::vector<double> observation;
  world::Pose truth;
};

PosePair draw_pose_pair(const ExperimentConfig& cfg, Modality modality,
                        double lighting, rng::Stream& stream) {
  const auto& ws = cfg.workspace;
  const auto& d = cfg.disturbance;
  PosePair pair;
  pair.truth.x = stream.next_uniform(-ws.extent_x / 2, ws.extent_x / 2);
  pair.truth.y = stream.next_uniform(-ws.extent_y / 2, ws.extent_y / 2);
  pair.truth.z = stream.next_uniform(0.0, ws.extent_z);
  pair.truth.theta = stream.next_uniform(-std::numbers::pi, std::numbers::pi);

  pair.observation.resize(world::kObservationDim);
  if (modality == Modality::vision) {
    const double bias = d.vision_bias_gain * lighting;
    pair.observation[0] = pair.truth.x + bias + d.vision_noise_std * stream.next_gaussian();
    pair.observation[1] = pair.truth.y + bias + d.vision_noise_std * stream.next_gaussian();
    pair.observation[2] = pair.truth.z + d.vision_noise_std * stream.next_gaussian();
    pair.observation[3] = world::wrap_angle(
        pair.truth.theta + d.vision_noise_std * stream.next_gaussian());
    pair.observation[4] = lighting;
  } else {
    pair.observation[0] = pair.truth.x + d.force_noise_std * stream.next_gaussian();
    pair.observation[1] = pair.truth.y + d.force_noise_std * stream.next_gaussian();
    pair.observation[2] = pair.truth.z + d.force_noise_std * stream.next_gaussian();
    pair.observation[3] = world::wrap_angle(
        pair.truth.theta + d.force_noise_std * stream.next_gaussian());
    pair.observation[4] = 0.3;  // head contact, the usual mate context
  }
  return pair;
}

double squared_pose_error(const world::Pose& a, const world::Pose& b) {
  return 2.0 * perception::pose_loss(a, b);
}

// ---------------------------------------------------------------------------
// Experiment loop

struct Sinks {
  std::ostream* events = nullptr;
  const std::filesystem::path* checkpoint_root = nullptr;
};

void save_checkpoints(const std::filesystem::path& root, std::size_t iteration,
                      const exec::PerceptionModels& models) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = root / ("iter_" + std::to_string(iteration));
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  }
  checkpoint::save_pose_model((dir / "vision.model").string(), models.vision);
  checkpoint::save_pose_model((dir / "force.model").string(), models.force);
  for (const auto& [name, clf] : models.classifiers) {
    checkpoint::save_classifier((dir / (name + ".classifier")).string(), clf);
  }
}

ExperimentResult run_loop(const ExperimentConfig& cfg,
                          std::ostream& results_csv, const Sinks& sinks) {
  ExperimentResult result;

  exec::PerceptionModels models = bootstrap_models(cfg);
  learn::LearningBuffer buffer;
  buffer.trigger_threshold = cfg.trigger_threshold;

  const pddl::Domain& domain = pddl::disassembly_domain();
  exec::TaskSpec task;
  task.init = pddl::GroundState{"have_coarse_pose"};
  task.goal = {pddl::pos("disassembled")};
  task.n_th = cfg.n_th;

  if (sinks.events != nullptr) {
    // The logged config describes the experiment, not the run's output
    // disposition; dropping the path keeps logs comparable across runs.
    ExperimentConfig logged = cfg;
    logged.output_dir.clear();
    trace_io::write_run_header(*sinks.events, cfg.seed, config_to_json(logged));
  }

  int episode = 0;
  int update_round = 0;
  for (std::size_t iter = 0; iter < cfg.episodes_per_iteration.size(); ++iter) {
    metrics::IterationResult ir;
    ir.iteration = static_cast<int>(iter);
    ir.task_count = cfg.episodes_per_iteration[iter];

    for (int k = 0; k < ir.task_count; ++k, ++episode) {
      world::WorldState world =
          world::new_episode(cfg.disturbance, cfg.workspace, episode, cfg.seed);
      exec::ExecutionTrace trace = exec::run_task(task, domain, world, models);
      ir.replan_counts.push_back(trace.replan_count);

      buffer = learn::ingest(std::move(buffer),
                             learn::analyze_trace(trace, domain.predicates));

      if (sinks.events != nullptr) {
        if (cfg.log_steps) {
          for (const auto& step : trace.steps) {
            trace_io::write_step(*sinks.events, episode,
                                 static_cast<int>(iter), step);
          }
        }
        trace_io::write_trace_summary(*sinks.events, static_cast<int>(iter),
                                      trace);
      }

      // Model updates run strictly between episodes.
      auto [updated, report] =
          learn::maybe_update(buffer, std::move(models),
                              make_validation_suite(cfg, update_round),
                              static_cast<int>(iter));
      models = std::move(updated);
      if (report.has_value()) {
        ++update_round;
        if (sinks.events != nullptr) {
          trace_io::write_update_report(*sinks.events, episode, *report);
        }
        result.updates.push_back(std::move(*report));
      }
    }

    ir.sus = metrics::compute_sus(ir.replan_counts, cfg.n_th);
    ir.avg_replans = metrics::compute_avg_replans(ir.replan_counts);
    if (sinks.events != nullptr) {
      trace_io::write_iteration_result(*sinks.events, ir);
    }
    if (sinks.checkpoint_root != nullptr) {
      save_checkpoints(*sinks.checkpoint_root, iter, models);
    }
    result.iterations.push_back(std::move(ir));
  }

  results_csv << results_csv_text(result.iterations);
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"seed", "episodes_per_iteration", "replan_threshold",
              "trigger_threshold", "learning_rate", "classifier_learning_rate",
              "output_dir", "log_steps", "neural_predicates", "disturbance",
              "workspace", "bootstrap"},
             "config");
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("episodes_per_iteration")) {
    cfg.episodes_per_iteration =
        j["episodes_per_iteration"].get<std::vector<int>>();
  }
  cfg.n_th = j.value("replan_threshold", cfg.n_th);
  cfg.trigger_threshold = j.value("trigger_threshold", cfg.trigger_threshold);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.classifier_learning_rate =
      j.value("classifier_learning_rate", cfg.classifier_learning_rate);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.log_steps = j.value("log_steps", cfg.log_steps);
  if (j.contains("neural_predicates")) {
    cfg.neural_predicates.clear();
    for (const auto& p : j["neural_predicates"]) {
      cfg.neural_predicates.insert(p.get<std::string>());
    }
  }
  if (j.contains("disturbance")) {
    cfg.disturbance = disturbance_from_json(j["disturbance"]);
  }
  if (j.contains("workspace")) cfg.workspace = workspace_from_json(j["workspace"]);
  if (j.contains("bootstrap")) cfg.bootstrap = bootstrap_from_json(j["bootstrap"]);

  if (cfg.episodes_per_iteration.empty()) {
    throw ConfigError("episodes_per_iteration must not be empty");
  }
  for (int n : cfg.episodes_per_iteration) {
    if (n < 1) throw ConfigError("episode counts must be >= 1");
  }
  if (cfg.n_th < 1) throw ConfigError("replan_threshold must be >= 1");
  if (cfg.trigger_threshold < 1) throw ConfigError("trigger_threshold must be >= 1");
  if (cfg.learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
  if (cfg.classifier_learning_rate <= 0) {
    throw ConfigError("classifier_learning_rate must be > 0");
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["episodes_per_iteration"] = cfg.episodes_per_iteration;
  j["replan_threshold"] = cfg.n_th;
  j["trigger_threshold"] = cfg.trigger_threshold;
  j["learning_rate"] = cfg.learning_rate;
  j["classifier_learning_rate"] = cfg.classifier_learning_rate;
  j["output_dir"] = cfg.output_dir;
  j["log_steps"] = cfg.log_steps;
  j["neural_predicates"] = cfg.neural_predicates;
  j["disturbance"] = {
      {"lighting",
       {{"offset", cfg.disturbance.lighting_schedule.offset},
        {"amplitude", cfg.disturbance.lighting_schedule.amplitude},
        {"period", cfg.disturbance.lighting_schedule.period_episodes},
        {"jitter", cfg.disturbance.lighting_schedule.jitter}}},
      {"vision_bias_gain", cfg.disturbance.vision_bias_gain},
      {"vision_noise_std", cfg.disturbance.vision_noise_std},
      {"force_noise_std", cfg.disturbance.force_noise_std},
      {"wear_rate", cfg.disturbance.wear_rate},
      {"insert_tolerance", cfg.disturbance.insert_tolerance}};
  j["workspace"] = {
      {"extent", {cfg.workspace.extent_x, cfg.workspace.extent_y, cfg.workspace.extent_z}},
      {"coarse_radius", cfg.workspace.coarse_radius},
      {"hover_height", cfg.workspace.hover_height},
      {"home",
       {cfg.workspace.home.x, cfg.workspace.home.y, cfg.workspace.home.z,
        cfg.workspace.home.theta}}};
  j["bootstrap"] = {{"samples_per_predicate", cfg.bootstrap.samples_per_predicate},
                    {"epochs", cfg.bootstrap.epochs},
                    {"learning_rate", cfg.bootstrap.learning_rate},
                    {"l2", cfg.bootstrap.l2},
                    {"rig_noise_std", cfg.bootstrap.rig_noise_std}};
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path_or_default) {
  if (path_or_default == "default") return default_config();
  std::ifstream is(path_or_default);
  if (!is) throw IoError("cannot open config '" + path_or_default + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

exec::PerceptionModels bootstrap_models(const ExperimentConfig& cfg) {
  exec::PerceptionModels models;
  models.vision = perception::PoseEstimator::identity(
      Modality::vision, world::kObservationDim, cfg.learning_rate);
  models.force = perception::PoseEstimator::identity(
      Modality::force, world::kObservationDim, cfg.learning_rate);
  models.neural_predicates = cfg.neural_predicates;

  const auto scenes =
      draw_scenes(cfg, rng::Stream(cfg.seed, {kBootstrapStream}),
                  cfg.bootstrap.samples_per_predicate);
  for (const auto& predicate : cfg.neural_predicates) {
    models.classifiers.emplace(predicate,
                               fit_classifier(predicate, scenes, cfg));
  }
  return models;
}

double held_out_pose_loss(const perception::PoseEstimator& model,
                          const ExperimentConfig& cfg, double lighting,
                          rng::Stream stream, int pairs) {
  double total = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const double level = lighting >= 0 ? lighting : stream.next_double();
    PosePair pair = draw_pose_pair(cfg, model.modality, level, stream);
    total += perception::pose_loss(
        perception::estimate_pose(model, pair.observation), pair.truth);
  }
  return total / pairs;
}

double held_out_pose_rmse(const perception::PoseEstimator& model,
                          const ExperimentConfig& cfg, double lighting,
                          rng::Stream stream, int pairs) {
  double total = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const double level = lighting >= 0 ? lighting : stream.next_double();
    PosePair pair = draw_pose_pair(cfg, model.modality, level, stream);
    total += squared_pose_error(
        perception::estimate_pose(model, pair.observation), pair.truth);
  }
  return std::sqrt(total / pairs);
}

learn::ValidationSuite make_validation_suite(const ExperimentConfig& cfg,
                                             int update_round) {
  learn::ValidationSuite suite;
  const uint64_t round = static_cast<uint64_t>(update_round);
  suite.pose_loss_of = [cfg, round](const perception::PoseEstimator& m) {
    rng::Stream stream(cfg.seed, {kValidationStream, round,
                                  m.modality == Modality::vision ? 0u : 1u});
    return held_out_pose_loss(m, cfg, -1.0, stream, 200);
  };
  suite.classifier_loss_of =
      [cfg, round](const perception::PredicateClassifier& clf) {
        rng::Stream stream(cfg.seed, {kValidationStream, round, 2});
        const auto scenes = draw_scenes(cfg, stream, 200);
        double total = 0.0;
        for (const auto& scene : scenes) {
          const auto reading = perception::classify(clf, scene.features);
          const bool label = scene.labels.count(clf.predicate) > 0;
          const double p1 =
              reading.value ? reading.confidence : 1.0 - reading.confidence;
          const double p = label ? p1 : 1.0 - p1;
          total += -std::log(std::max(p, 1e-12));
        }
        return total / static_cast<double>(scenes.size());
      };
  return suite;
}

std::string results_csv_text(const std::vector<metrics::IterationResult>& its) {
  std::string out = "iteration,task_count,sus,avg_replans\n";
  char buf[128];
  for (const auto& r : its) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f\n", r.iteration,
                  r.task_count, r.sus, r.avg_replans);
    out += buf;
  }
  return out;
}

ExperimentResult run_experiment_streams(const ExperimentConfig& cfg,
                                        std::ostream& results_csv,
                                        std::ostream* events_jsonl) {
  Sinks sinks;
  sinks.events = events_jsonl;
  return run_loop(cfg, results_csv, sinks);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output dir '" + cfg.output_dir +
                  "': " + ec.message());
  }

  const fs::path out(cfg.output_dir);
  std::ofstream csv(out / "results.csv");
  std::ofstream events(out / "events.jsonl");
  if (!csv || !events) {
    throw IoError("cannot open output files under '" + cfg.output_dir + "'");
  }

  const fs::path ckpt_root = out / "checkpoints";
  Sinks sinks;
  sinks.events = &events;
  sinks.checkpoint_root = &ckpt_root;
  return run_loop(cfg, csv, sinks);
}

}  // namespace nstamp::harness
