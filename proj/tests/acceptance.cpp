// Acceptance suite. Usage: acceptance [criterion ...]; no arguments runs
// every criterion. Prints one PASS/FAIL line per criterion and exits
// nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "cirn/embeddings.hpp"
#include "cirn/evaluator.hpp"
#include "cirn/gradcheck.hpp"
#include "cirn/policy_net.hpp"
#include "cirn/run_config.hpp"
#include "cirn/scenarios.hpp"
#include "cirn/sim_env.hpp"
#include "cirn/state_encoder.hpp"
#include "cirn/trainer.hpp"
#include "cirn/util.hpp"

using namespace cirn;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string & what)
  {
    if (!ok && pass) {
      detail << "first failure: " << what << "; ";
    }
    pass = pass && ok;
  }
};

struct Criterion
{
  int id;
  std::string name;
  double limit_seconds;
  std::function<void(Outcome &)> run;
};

fs::path artifact_dir(const std::string & name)
{
  const char * root = std::getenv("CIRN_ARTIFACTS");
  fs::path dir = fs::path(root != nullptr ? root : "acceptance_artifacts") / name;
  fs::create_directories(dir);
  return dir;
}

const EmbeddingTable & fixture_table()
{
  static const EmbeddingTable table = load_embeddings(CIRN_DATA_DIR "/embeddings_fixture.txt");
  return table;
}

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// 1 ------------------------------------------------------------------------
void cosine_oracle(Outcome & o)
{
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(1, 300);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> k(1e-3, 1e3);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(dim(rng));
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g(rng);
      b[i] = t % 10 == 0 ? a[i] * 2.0 + 1e-3 * g(rng) : g(rng);
    }
    const double c = cosine_similarity(a, b);
    worst = std::max(worst, std::abs(c - oracle::cosine(a, b)));
    o.require(c >= -1.0 && c <= 1.0, "range");
    o.require(cosine_similarity(b, a) == c, "symmetry");
    o.require(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-9, "identity");
    std::vector<double> ka(a);
    const double scale = k(rng);
    for (double & x : ka) {
      x *= scale;
    }
    o.require(std::abs(cosine_similarity(ka, b) - c) <= 1e-9, "scale invariance");
  }
  o.require(worst <= 1e-9, "oracle agreement");
  o.detail << "max |cs - oracle| = " << worst;
}

// 2 ------------------------------------------------------------------------
void encoder_class_independence(Outcome & o)
{
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 30);
  std::uniform_int_distribution<int> power(-10, 10);
  int identical = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t dim = 3 + static_cast<std::size_t>(t % 40);
    const int n_classes = 2 + t % 12;
    std::map<std::string, std::vector<double>> base;
    std::vector<std::string> names;
    for (int c = 0; c < n_classes; ++c) {
      std::vector<double> v(dim);
      for (double & x : v) {
        x = g(rng);
      }
      names.push_back("cls" + std::to_string(c));
      base[names.back()] = v;
    }
    std::vector<Detection> dets;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      Detection d;
      d.class_name = names[static_cast<std::size_t>(rng() % names.size())];
      d.x_c = std::round(u(rng) * 4.0) / 4.0;
      d.y_c = u(rng);
      d.area = std::max(1e-4, std::round(u(rng) * 8.0) / 8.0);
      d.object_index = i;
      dets.push_back(d);
    }
    const std::string target = names[static_cast<std::size_t>(rng() % names.size())];

    // Bijective renaming; per-coordinate sign flips and a power-of-two
    // scale leave every cosine bit-identical.
    std::vector<std::string> shuffled = names;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < names.size(); ++i) {
      rename[names[i]] = "other_" + shuffled[i] + "_" + std::to_string(t);
    }
    std::vector<double> flip(dim);
    for (double & f : flip) {
      f = (rng() & 1u) ? -1.0 : 1.0;
    }
    const double scale = std::ldexp(1.0, power(rng));
    std::map<std::string, std::vector<double>> moved;
    for (const auto & [name, v] : base) {
      std::vector<double> w(v);
      for (std::size_t i = 0; i < dim; ++i) {
        w[i] *= flip[i] * scale;
      }
      moved[rename[name]] = w;
    }
    auto dets2 = dets;
    for (auto & d : dets2) {
      d.class_name = rename[d.class_name];
    }
    const EmbeddingTable t1(dim, base), t2(dim, moved);
    identical += encode(dets, target, t1) == encode(dets2, rename[target], t2) ? 1 : 0;
  }
  o.require(identical == 1000, "bitwise identical states");
  o.detail << identical << "/1000 identical";
}

// 3 ------------------------------------------------------------------------
void encoder_sort_oracle(Outcome & o)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int matches = 0;
  int over_20 = 0;
  int empty = 0;
  for (int t = 0; t < 1000; ++t) {
    std::map<std::string, std::vector<double>> m;
    std::vector<std::string> names;
    const int n_classes = 1 + t % 9;
    for (int c = 0; c < n_classes; ++c) {
      names.push_back("c" + std::to_string(c));
      m[names.back()] = {g(rng), g(rng), g(rng), g(rng)};
    }
    const EmbeddingTable table(4, m);
    const int n = t % 50 == 0 ? 0 : static_cast<int>(u(rng) * 40.0);
    const bool ties = t % 2 == 0;
    std::vector<Detection> dets;
    for (int i = 0; i < n; ++i) {
      Detection d;
      d.class_name = names[static_cast<std::size_t>(rng() % names.size())];
      d.x_c = ties ? std::floor(u(rng) * 3.0) / 2.0 : u(rng);
      d.y_c = ties ? std::floor(u(rng) * 2.0) : u(rng);
      d.area = ties ? 0.5 : std::max(1e-4, u(rng));
      d.object_index = i;
      dets.push_back(d);
    }
    over_20 += n > 20 ? 1 : 0;
    empty += n == 0 ? 1 : 0;
    const std::string target = names[static_cast<std::size_t>(rng() % names.size())];
    const auto want = oracle::encode(dets, target, [&](const std::string & c) {
        return cosine_similarity(table.vector_for(c), table.vector_for(target));
      });
    matches += encode(dets, target, table) == want ? 1 : 0;
  }
  o.require(matches == 1000, "exact match");
  o.require(over_20 > 0 && empty > 0, "coverage of >20 and empty sets");
  o.detail << matches << "/1000 exact (" << over_20 << " sets >20, " << empty << " empty)";
}

// 4 ------------------------------------------------------------------------
void visibility_oracle(Outcome & o)
{
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  for (const char * name : {"bedroom_03", "six_by_six", "living_07"}) {
    const Scene scene = load_scene(std::string(CIRN_DATA_DIR "/scenes/") + name + ".json");
    for (const auto & pose : all_poses(scene)) {
      const auto got = visible_objects(scene, pose);
      const auto want = oracle::visible(scene, pose);
      pairs += scene.objects().size();
      std::vector<int> a, b;
      for (const auto & d : got) {
        a.push_back(d.object_index);
      }
      for (const auto & d : want) {
        b.push_back(d.object_index);
      }
      if (a != b) {
        ++mismatches;
        continue;
      }
      for (std::size_t i = 0; i < got.size(); ++i) {
        const bool same = std::abs(got[i].x_c - want[i].x_c) < 1e-12 &&
          std::abs(got[i].y_c - want[i].y_c) < 1e-12 &&
          std::abs(got[i].area - want[i].area) < 1e-12 &&
          std::abs(got[i].distance - want[i].distance) < 1e-12;
        mismatches += same ? 0 : 1;
      }
    }
  }
  o.require(mismatches == 0, "visible sets and detection values");
  o.detail << pairs << " pose x object pairs, " << mismatches << " mismatches";
}

// 5 ------------------------------------------------------------------------
void shortest_path_oracle(Outcome & o)
{
  std::mt19937_64 rng(5);
  const std::vector<std::string> classes{"bowl", "lamp", "book", "sink"};
  int compared = 0;
  int unreachable = 0;
  int mismatches = 0;
  for (int s = 0; s < 20; ++s) {
    const Scene scene = oracle::random_scene(rng, 8, 8, 8 + s % 6, 6 + s % 5, classes);
    for (int k = 0; k < 20; ++k) {
      const AgentPose start = oracle::random_free_pose(scene, rng);
      const std::string target = classes[static_cast<std::size_t>(k) % classes.size()];
      const auto bfs = shortest_path_length(scene, start, target);
      const auto ucs = oracle::ucs_path_length(scene, start, target);
      mismatches += bfs == ucs ? 0 : 1;
      unreachable += bfs ? 0 : 1;
      ++compared;
    }
  }
  o.require(mismatches == 0, "exact agreement");
  o.detail << compared << " queries, " << unreachable << " unreachable, " << mismatches
           << " mismatches";
}

// 6 ------------------------------------------------------------------------
void reward_cases(Outcome & o)
{
  std::map<std::string, std::vector<double>> m{{"target", {1.0, 0.0}}};
  for (int k = 0; k <= 12; ++k) {
    const double a = k * M_PI / 12.0;
    m["c" + std::to_string(k)] = {std::cos(a), std::sin(a)};
  }
  const EmbeddingTable table(2, m);
  NavEnv env(table, 50);

  // Success: target at 1.41 m on the FOV edge and at 1.0 m dead ahead.
  for (Cell where : {Cell{5, 5}, Cell{3, 5}}) {
    const Scene s("r", SceneType::kitchen, 7, 7, {}, {{"target", where, 1.0, 0.3}});
    env.reset(s, {{3, 3}, 0, 0}, "target");
    const auto r = env.step(Action::Done);
    o.require(r.success && r.done && r.reward == 5.0, "+5 on qualifying Done");
  }
  // Behind, too far, occluded: Done fails with -0.01.
  {
    const Scene s("r", SceneType::kitchen, 7, 7, {{3, 4}},
      {{"target", {3, 5}, 1.0, 0.3}, {"target", {3, 0}, 1.0, 0.3}});
    env.reset(s, {{3, 3}, 0, 0}, "target");
    const auto r = env.step(Action::Done);
    o.require(!r.success && r.done && r.reward == -0.01, "no success when occluded/behind");
  }
  // Empty view: -0.01 for every non-Done action.
  {
    const Scene s("r", SceneType::kitchen, 7, 7, {}, {{"target", {3, 6}, 1.0, 0.3}});
    for (Action a : {Action::MoveAhead, Action::RotateLeft, Action::RotateRight,
        Action::LookUp, Action::LookDown})
    {
      env.reset(s, {{3, 1}, 180, 0}, "target");
      const auto r = env.step(a);
      o.require(r.detections.empty(), "empty view setup");
      o.require(r.reward == -0.01 && !r.done, "-0.01 on empty view");
    }
  }
  // Shaping: strictly increasing in the best visible similarity.
  double previous = -1.0;
  for (int k = 12; k >= 0; --k) {
    const Scene s("r", SceneType::kitchen, 7, 7, {},
      {{"c" + std::to_string(k), {3, 5}, 1.0, 0.3}, {"c12", {4, 5}, 1.0, 0.3}});
    env.reset(s, {{3, 1}, 0, 0}, "target");
    const auto r = env.step(Action::MoveAhead);
    o.require(r.detections.size() == 2, "shaping setup");
    const double best = table.similarity("target", "c" + std::to_string(k));
    o.require(r.reward == 0.01 * best, "shaping equals 0.01 * max similarity");
    o.require(r.reward > previous, "shaping monotone");
    previous = r.reward;
  }
  o.detail << "success, failure, empty-view and shaping cases exact";
}

// 7 ------------------------------------------------------------------------
void gradient_verification(Outcome & o)
{
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  for (Adjacency adj : {Adjacency::dense, Adjacency::similarity}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = gradient_check(seed, adj);
      for (const auto & g : r.groups) {
        o.require(g.max_rel_error < 1e-4,
          "group " + g.name + " seed " + std::to_string(seed) + " " +
          std::string(to_string(adj)));
        o.require(g.checked > 0, "group " + g.name + " has checked entries");
        checked += g.checked;
        skipped += g.skipped;
      }
      worst = std::max(worst, r.max_rel_error);
    }
  }
  o.detail << "13 groups x 10 seeds x 2 adjacencies, " << checked << " entries ("
           << skipped << " relu-kink probes replaced), max relative error " << worst;
}

// 8 ------------------------------------------------------------------------
void metric_oracle(Outcome & o)
{
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(1, 15);
  std::uniform_int_distribution<int> slack(0, 40);
  std::vector<EpisodeResult> eps;
  for (int i = 0; i < 200; ++i) {
    EpisodeResult e;
    e.optimal_length = len(rng);
    e.path_length = e.optimal_length + slack(rng);
    e.success = rng() % 3 != 0;
    eps.push_back(e);
  }
  double worst = 0.0;
  // Every prefix is a sampled set.
  for (std::size_t n = 1; n <= eps.size(); ++n) {
    const std::span<const EpisodeResult> subset(eps.data(), n);
    for (int min_len : {1, 5}) {
      double s = 0.0, spl = 0.0, count = 0.0;
      for (const auto & e : subset) {
        if (e.optimal_length >= min_len) {
          count += 1.0;
          s += e.success;
          spl += e.success * e.optimal_length /
            static_cast<double>(std::max(e.path_length, e.optimal_length));
        }
      }
      const auto m = aggregate(subset, min_len);
      if (count == 0.0) {
        o.require(!m.has_value(), "empty subset");
        continue;
      }
      o.require(m.has_value() && m->n == static_cast<std::size_t>(count), "non-empty subset");
      worst = std::max({worst, std::abs(m->sr - s / count), std::abs(m->spl - spl / count)});
      o.require(m->spl <= m->sr, "SPL <= SR");
    }
  }
  o.require(worst <= 1e-12, "agreement within 1e-12");
  o.detail << "200 episodes, all prefixes, max deviation " << worst;
}

// 9 ------------------------------------------------------------------------
std::string read_bytes(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Outcome & o)
{
  RunConfig rc = load_run_config(CIRN_CONFIG_DIR "/determinism.json");
  const SceneSet scenes = generate_scenes(rc.scenario);
  const EpisodeSplits splits = make_splits(rc.scenario, scenes);
  const fs::path dir = artifact_dir("ac09");
  std::vector<std::string> logs, ckpts;
  for (int run = 0; run < 2; ++run) {
    const auto r = train(rc.train, scenes, splits.train, fixture_table());
    const fs::path log = dir / ("train_log_" + std::to_string(run) + ".csv");
    const fs::path ck = dir / ("checkpoint_" + std::to_string(run) + ".bin");
    {
      std::ofstream out(log, std::ios::binary);
      write_training_log(out, r.log, rc.hash(), rc.seed);
    }
    save_checkpoint({r.params, rc.seed, rc.hash(), static_cast<std::uint64_t>(r.steps)}, ck);
    logs.push_back(read_bytes(log));
    ckpts.push_back(read_bytes(ck));
    o.require(r.steps == rc.train.total_steps, "step budget");
  }
  o.require(rc.train.workers == 1 && rc.train.total_steps == 500, "single worker, 500 steps");
  o.require(logs[0] == logs[1], "identical logs");
  o.require(ckpts[0] == ckpts[1], "identical checkpoints");
  o.detail << "logs " << logs[0].size() << " bytes, checkpoints " << ckpts[0].size()
           << " bytes, identical";
}

// 10 -----------------------------------------------------------------------
void smoke_learning(Outcome & o)
{
  RunConfig rc = load_run_config(CIRN_CONFIG_DIR "/smoke.json");
  const SceneSet scenes = generate_scenes(rc.scenario);
  const EpisodeSplits splits = make_splits(rc.scenario, scenes);
  o.require(scenes.train.size() == 1, "one scene");
  std::set<std::string> classes;
  for (const auto & e : splits.train) {
    classes.insert(e.target);
  }
  o.require(classes.size() == 2, "two classes");
  o.require(rc.train.total_steps <= 50000, "step budget <= 50k");
  const auto r = train(rc.train, scenes, splits.train, fixture_table());
  const double sr = r.log.empty() ? 0.0 : r.log.back().trailing_sr;
  const fs::path dir = artifact_dir("ac10");
  std::ofstream log(dir / "train_log.csv");
  write_training_log(log, r.log, rc.hash(), rc.seed);
  o.require(sr >= 0.9, "trailing-100 SR >= 0.9");
  o.detail << r.steps << " steps, " << r.log.size() << " episodes, trailing-100 SR " << fmt(sr);
}

// 11, 12 ------------------------------------------------------------------
struct ProtocolResult
{
  ResultsFile results;
  double unseen_sr = 0.0;
  double seen_sr = 0.0;
  double random_unseen_sr = 0.0;
  double random_seen_sr = 0.0;
  std::int64_t steps = 0;
};

ProtocolResult run_protocol(const std::string & config_name, const std::string & tag)
{
  RunConfig rc = load_run_config(std::string(CIRN_CONFIG_DIR "/") + config_name);
  const SceneSet scenes = generate_scenes(rc.scenario);
  const EpisodeSplits splits = make_splits(rc.scenario, scenes);
  const fs::path dir = artifact_dir(tag);
  const std::string hash = rc.hash();
  const auto trained = train(rc.train, scenes, splits.train, fixture_table());
  save_checkpoint({trained.params, rc.seed, hash, static_cast<std::uint64_t>(trained.steps)},
    dir / "checkpoint.bin");
  {
    std::ofstream log(dir / "train_log.csv");
    write_training_log(log, trained.log, hash, rc.seed);
  }

  auto params = std::make_shared<const ModelParams>(trained.params);
  NetworkAgent agent(params, action_mode_from_string(rc.mode));
  RandomAgent random;
  ProtocolResult out;
  out.steps = trained.steps;
  out.results = {hash, rc.seed, {}};
  std::ofstream csv(dir / "episodes.csv");
  bool header = true;
  for (const Agent * a : {static_cast<const Agent *>(&agent),
      static_cast<const Agent *>(&random)})
  {
    const std::string model = a == &agent ? "CIRN" : "random";
    const auto unseen = evaluate(*a, scenes, splits.test_unseen, fixture_table(),
        derive_seed(rc.seed, {1}), rc.eval_max_steps);
    const auto seen = evaluate(*a, scenes, splits.test_seen, fixture_table(),
        derive_seed(rc.seed, {2}), rc.eval_max_steps);
    write_episode_csv(csv, model, "test_class", unseen.episodes, header);
    write_episode_csv(csv, model, "train_class", seen.episodes, false);
    header = false;
    out.results.rows.push_back({model, rc.scenario.name, unseen.metrics, seen.metrics});
    const double u = unseen.metrics.all ? unseen.metrics.all->sr : 0.0;
    const double s = seen.metrics.all ? seen.metrics.all->sr : 0.0;
    (a == &agent ? out.unseen_sr : out.random_unseen_sr) = u;
    (a == &agent ? out.seen_sr : out.random_seen_sr) = s;
  }
  save_results(out.results, dir / "results.json");
  return out;
}

void zero_shot_analog(Outcome & o)
{
  const auto main_split = run_protocol("split_18_4.json", "ac11_18_4");
  const auto second = run_protocol("split_14_8.json", "ac11_14_8");
  std::vector<ResultsFile> files{main_split.results, second.results};
  const std::string table = format_report(files);
  std::ofstream(artifact_dir("ac11") / "report.txt") << table;
  std::printf("%s", table.c_str());
  o.require(main_split.steps <= 1000000 && second.steps <= 1000000, "step budget <= 1M");
  o.require(main_split.seen_sr >= 0.70, "seen-class SR >= 0.70");
  o.require(main_split.unseen_sr >= 0.50, "unseen-class SR >= 0.50");
  o.require(main_split.unseen_sr >= 3.0 * main_split.random_unseen_sr, "unseen >= 3x random");
  o.detail << "8/2: seen " << fmt(main_split.seen_sr) << ", unseen " << fmt(main_split.unseen_sr)
           << ", random unseen " << fmt(main_split.random_unseen_sr) << "; 7/3: seen "
           << fmt(second.seen_sr) << ", unseen " << fmt(second.unseen_sr) << ", random unseen "
           << fmt(second.random_unseen_sr);
}

void cross_scene_analog(Outcome & o)
{
  const auto r = run_protocol("cross_kitchen_bedroom.json", "ac12");
  std::vector<ResultsFile> files{r.results};
  std::printf("%s", format_report(files).c_str());
  o.require(r.unseen_sr >= 2.0 * r.random_unseen_sr, "unseen >= 2x random");
  o.require(r.unseen_sr > 0.0, "nonzero unseen SR");
  o.detail << "kitchen -> bedroom: unseen " << fmt(r.unseen_sr) << ", random "
           << fmt(r.random_unseen_sr) << ", seen " << fmt(r.seen_sr);
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<Criterion> criteria{
    {1, "cosine similarity oracle", 1.0, cosine_oracle},
    {2, "encoder class independence", 5.0, encoder_class_independence},
    {3, "encoder sort/truncate/pad oracle", 5.0, encoder_sort_oracle},
    {4, "visibility oracle on fixture scenes", 10.0, visibility_oracle},
    {5, "shortest path vs uniform-cost search", 30.0, shortest_path_oracle},
    {6, "reward cases", 1.0, reward_cases},
    {7, "gradient verification", 60.0, gradient_verification},
    {8, "metric oracle", 1.0, metric_oracle},
    {9, "training determinism", 60.0, determinism},
    {10, "desk-scale learning smoke", 600.0, smoke_learning},
    {11, "zero-shot analog (8/2, with 7/3 report)", 7200.0, zero_shot_analog},
    {12, "cross-scene analog kitchen -> bedroom", 7200.0, cross_scene_analog},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    wanted.insert(std::atoi(argv[i]));
  }
  int failures = 0;
  for (const auto & c : criteria) {
    if (!wanted.empty() && wanted.count(c.id) == 0) {
      continue;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const std::clock_t c0 = std::clock();
    try {
      c.run(o);
    } catch (const std::exception & e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double cpu = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
    o.require(std::max(secs, cpu) < c.limit_seconds, "runtime limit");
    failures += o.pass ? 0 : 1;
    std::printf("AC%02d %s  %s  [%.2fs wall, %.2fs cpu] %s\n", c.id, o.pass ? "PASS" : "FAIL",
      c.name.c_str(), secs, cpu, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
