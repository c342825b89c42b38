// cirn: command-line front end for scene generation, training, evaluation,
// baselines, gradient checks and result tables.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cirn/errors.hpp"
#include "cirn/evaluator.hpp"
#include "cirn/gradcheck.hpp"
#include "cirn/policy_net.hpp"
#include "cirn/run_config.hpp"
#include "cirn/scenarios.hpp"
#include "cirn/state_encoder.hpp"
#include "cirn/trainer.hpp"
#include "cirn/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace cirn;

namespace
{

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Options
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::optional<std::int64_t> steps;
  std::string split;
  std::string mode;
  std::string embeddings = CIRN_DEFAULT_EMBEDDINGS;
  std::string manifest;
  std::string checkpoint;
  std::string model;
  std::optional<int> max_steps;
  std::vector<std::string> inputs;
  int seeds = 10;
  std::string scene;
  std::vector<int> pose;
  std::string target;
};

RunConfig resolve(const Options & opt)
{
  RunConfig rc = opt.config.empty() ?
    run_config_from_json(nlohmann::json::object(), opt.split, opt.seed) :
    load_run_config(opt.config, opt.split, opt.seed);
  if (opt.workers) {
    rc.train.workers = *opt.workers;
  }
  if (opt.steps) {
    rc.train.total_steps = *opt.steps;
  }
  if (opt.max_steps) {
    rc.eval_max_steps = *opt.max_steps;
  }
  if (!opt.mode.empty()) {
    rc.mode = opt.mode;
  }
  action_mode_from_string(rc.mode);
  rc.train.validate();
  return rc;
}

struct World
{
  EmbeddingTable table;
  SceneSet scenes;
  EpisodeSplits splits;
};

World load_world(const Options & opt, RunConfig & rc)
{
  World w;
  w.table = load_embeddings(opt.embeddings);
  if (!opt.manifest.empty()) {
    Manifest m = read_manifest(opt.manifest);
    rc.scenario = m.config;
    rc.set_seed(m.config.seed);
    w.scenes = std::move(m.scenes);
  } else {
    rc.scenario.validate(&w.table);
    w.scenes = generate_scenes(rc.scenario);
  }
  rc.scenario.validate(&w.table);
  w.splits = make_splits(rc.scenario, w.scenes);
  return w;
}

fs::path out_dir(const Options & opt, const std::string & fallback)
{
  fs::path dir = opt.out.empty() ? fs::path(fallback) : fs::path(opt.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write " + path.string());
  }
  out << text;
}

int cmd_gen_scenes(const Options & opt)
{
  RunConfig rc = resolve(opt);
  const auto table = load_embeddings(opt.embeddings);
  rc.scenario.validate(&table);
  const SceneSet scenes = generate_scenes(rc.scenario);
  const fs::path dir = out_dir(opt, "scenes_out");
  write_scene_set(rc.scenario, scenes, dir);
  const auto splits = make_splits(rc.scenario, scenes);
  std::cout << "wrote " << scenes.train.size() << " train and " << scenes.test.size()
            << " test scenes to " << dir.string() << " (config " << config_hash(rc.scenario)
            << ")\n"
            << "episodes: train " << splits.train.size() << ", test-seen "
            << splits.test_seen.size() << ", test-unseen " << splits.test_unseen.size() << "\n";
  return 0;
}

int cmd_train(const Options & opt)
{
  RunConfig rc = resolve(opt);
  World w = load_world(opt, rc);
  const fs::path dir = out_dir(opt, "run_out");
  const std::string hash = rc.hash();
  write_text(dir / "run_config.json",
    ordered_json{{"config_hash", hash}, {"config", rc.to_json()}}.dump(2) + "\n");
  auto on_checkpoint = [&](const ModelParams & p, std::int64_t step) {
      save_checkpoint({p, rc.seed, hash, static_cast<std::uint64_t>(step)},
        dir / ("checkpoint_" + std::to_string(step) + ".bin"));
    };
  std::cerr << "training on " << w.splits.train.size() << " episodes for "
            << rc.train.total_steps << " steps, workers " << rc.train.workers << "\n";
  const TrainResult result = train(rc.train, w.scenes, w.splits.train, w.table, on_checkpoint);
  save_checkpoint({result.params, rc.seed, hash, static_cast<std::uint64_t>(result.steps)},
    dir / "checkpoint.bin");
  std::ofstream log(dir / "train_log.csv");
  write_training_log(log, result.log, hash, rc.seed);
  const double sr = result.log.empty() ? 0.0 : result.log.back().trailing_sr;
  std::cout << "steps " << result.steps << ", episodes " << result.log.size()
            << ", trailing SR " << sr << ", config " << hash << "\n";
  return 0;
}

ResultRow evaluate_row(
  const Agent & agent, const std::string & model, const RunConfig & rc, const World & w,
  const fs::path & dir, bool header)
{
  ResultRow row;
  row.model = model;
  row.split = rc.scenario.name;
  const auto unseen = evaluate(agent, w.scenes, w.splits.test_unseen, w.table,
      derive_seed(rc.seed, {1}), rc.eval_max_steps);
  const auto seen = evaluate(agent, w.scenes, w.splits.test_seen, w.table,
      derive_seed(rc.seed, {2}), rc.eval_max_steps);
  row.test_class = unseen.metrics;
  row.train_class = seen.metrics;
  std::ofstream csv(dir / "episodes.csv", header ? std::ios::trunc : std::ios::app);
  write_episode_csv(csv, model, "test_class", unseen.episodes, header);
  write_episode_csv(csv, model, "train_class", seen.episodes, false);
  return row;
}

void print_rows(const ResultsFile & results)
{
  std::vector<ResultsFile> one{results};
  std::cout << format_report(one);
}

int cmd_eval(const Options & opt)
{
  if (opt.checkpoint.empty()) {
    throw UsageError("eval needs --checkpoint");
  }
  RunConfig rc = resolve(opt);
  Checkpoint ck = load_checkpoint(opt.checkpoint);
  World w = load_world(opt, rc);
  const fs::path dir = out_dir(opt, "eval_out");
  const std::string hash = rc.hash();
  auto params = std::make_shared<const ModelParams>(ck.params);
  NetworkAgent agent(params, action_mode_from_string(rc.mode));
  ResultsFile results{hash, rc.seed, {}};
  results.rows.push_back(evaluate_row(agent, opt.model.empty() ? "CIRN" : opt.model, rc, w, dir,
      true));
  save_results(results, dir / "results.json");
  print_rows(results);
  return 0;
}

int cmd_baseline(const Options & opt)
{
  RunConfig rc = resolve(opt);
  World w = load_world(opt, rc);
  const fs::path dir = out_dir(opt, "baseline_out");
  RandomAgent agent;
  ResultsFile results{rc.hash(), rc.seed, {}};
  results.rows.push_back(evaluate_row(agent, "random", rc, w, dir, true));
  save_results(results, dir / "results.json");
  print_rows(results);
  return 0;
}

int cmd_gradcheck(const Options & opt)
{
  const std::uint64_t first = opt.seed.value_or(0);
  bool ok = true;
  for (Adjacency adj : {Adjacency::dense, Adjacency::similarity}) {
    for (int i = 0; i < opt.seeds; ++i) {
      const auto r = gradient_check(first + static_cast<std::uint64_t>(i), adj);
      std::printf("seed %llu adjacency %s: max relative error %.3e %s\n",
        static_cast<unsigned long long>(r.seed), std::string(to_string(adj)).c_str(),
        r.max_rel_error, r.passed ? "PASS" : "FAIL");
      for (const auto & g : r.groups) {
        std::printf("  %-9s checked %3zu  skipped %2zu  max rel %.3e  max |grad| %.3e\n",
          g.name.c_str(), g.checked, g.skipped, g.max_rel_error, g.max_abs_grad);
      }
      ok = ok && r.passed;
    }
  }
  std::cout << (ok ? "gradcheck PASS\n" : "gradcheck FAIL\n");
  return ok ? 0 : kExitFailure;
}

int cmd_report(const Options & opt)
{
  if (opt.inputs.empty()) {
    throw UsageError("report needs at least one results file");
  }
  std::vector<ResultsFile> files;
  for (const auto & path : opt.inputs) {
    files.push_back(load_results(path));
  }
  const std::string text = format_report(files);
  std::cout << text;
  if (!opt.out.empty()) {
    write_text(opt.out, text);
  }
  return 0;
}

int cmd_encode(const Options & opt)
{
  if (opt.scene.empty() || opt.target.empty() || opt.pose.size() != 4) {
    throw UsageError("encode needs --scene, --target and --pose x z heading pitch");
  }
  const auto table = load_embeddings(opt.embeddings);
  const Scene scene = load_scene(opt.scene);
  const AgentPose pose{{opt.pose[0], opt.pose[1]}, opt.pose[2], opt.pose[3]};
  if (!scene.is_valid_pose(pose)) {
    throw ValidationError("pose is not valid in this scene");
  }
  const auto detections = visible_objects(scene, pose);
  for (const auto & d : detections) {
    std::printf("%-12s x_c %.4f y_c %.4f area %.4f dist %.3f\n", d.class_name.c_str(), d.x_c,
      d.y_c, d.area, d.distance);
  }
  print_state(std::cout, encode(detections, normalize_token(opt.target), table));
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"cirn: class-independent object-goal navigation lab"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App * sub) {
      sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
      sub->add_option("--seed", opt.seed, "base seed");
      sub->add_option("--out", opt.out, "output directory or file");
      sub->add_option("--split", opt.split,
        "18-4-analog, 14-8-analog or cross:<train_type>:<test_type>");
      sub->add_option("--embeddings", opt.embeddings, "word-embedding table")
        ->check(CLI::ExistingFile);
    };
  auto add_world = [&](CLI::App * sub) {
      sub->add_option("--manifest", opt.manifest, "directory written by gen-scenes")
        ->check(CLI::ExistingDirectory);
      sub->add_option("--max-steps", opt.max_steps, "evaluation episode limit");
    };

  auto * gen = app.add_subcommand("gen-scenes", "generate scenes and a manifest");
  add_common(gen);

  auto * tr = app.add_subcommand("train", "train a policy");
  add_common(tr);
  add_world(tr);
  tr->add_option("--workers", opt.workers, "parallel environments");
  tr->add_option("--steps", opt.steps, "total environment steps");

  auto * ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(ev);
  add_world(ev);
  ev->add_option("--checkpoint", opt.checkpoint, "checkpoint file")->check(CLI::ExistingFile);
  ev->add_option("--mode", opt.mode, "greedy or sample")
    ->check(CLI::IsMember({"greedy", "sample"}));
  ev->add_option("--model", opt.model, "model name for the results row");

  auto * bl = app.add_subcommand("baseline", "evaluate the uniform random policy");
  add_common(bl);
  add_world(bl);

  auto * gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gc->add_option("--seed", opt.seed, "first seed");
  gc->add_option("--seeds", opt.seeds, "number of seeds")->check(CLI::PositiveNumber);

  auto * rp = app.add_subcommand("report", "print a results table");
  rp->add_option("inputs", opt.inputs, "results files")->check(CLI::ExistingFile);
  rp->add_option("--out", opt.out, "also write the table here");

  auto * en = app.add_subcommand("encode", "print the state matrix at a pose");
  en->add_option("--scene", opt.scene, "scene file")->check(CLI::ExistingFile);
  en->add_option("--pose", opt.pose, "x z heading pitch")->expected(4);
  en->add_option("--target", opt.target, "target class");
  en->add_option("--embeddings", opt.embeddings, "word-embedding table")
    ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {return cmd_gen_scenes(opt);}
    if (*tr) {return cmd_train(opt);}
    if (*ev) {return cmd_eval(opt);}
    if (*bl) {return cmd_baseline(opt);}
    if (*gc) {return cmd_gradcheck(opt);}
    if (*rp) {return cmd_report(opt);}
    if (*en) {return cmd_encode(opt);}
  } catch (const UsageError & e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
