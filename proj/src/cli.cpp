#include "trav/cli.hpp"

#include <cmath>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "trav/cli_io.hpp"
#include "trav/metrics.hpp"
#include "trav/synth.hpp"
#include "trav/trainer.hpp"

namespace trav {

namespace {

struct GenArgs {
  std::string out;
  int count = 100;
  int rows = 16;
  int cols = 16;
  std::uint64_t seed = 0;
  double beta = 0.0;
  double noise = 0.0;
  double split_ratio = 0.7;
  int imu_length = 100;
  double density = 0.3;
  double roughness = 1.0;
};

struct TrainArgs {
  std::string data;
  std::string algo = "medirl";
  std::string model = "linear";
  int iters = 1000;
  double lr = 1e-3;
  double gamma = 0.95;
  std::uint64_t seed = 0;
  std::string out;
  double weight_decay = 0.0;
  double dropout = 0.0;
  int checkpoint_every = 0;
  int pairs = 1;
  int sweeps = 0;
  bool plain_counts = false;
};

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::string out;
  double gamma = 0.95;
  std::uint64_t seed = 0;
  bool uniform = false;
};

struct RenderArgs {
  std::string data;
  std::string ckpt;
  std::string sample;
  std::string out;
  double gamma = 0.95;
};

int cmd_gen(const GenArgs& a) {
  WorldSpec spec;
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.seed = a.seed;
  spec.beta = a.beta;
  spec.energy_noise = a.noise;
  spec.imu_length = a.imu_length;
  spec.obstacle_density = a.density;
  spec.roughness = a.roughness;
  const std::vector<Sample> samples = gen_dataset(spec, a.count, a.split_ratio);
  write_dataset(a.out, samples);
  const auto n_train = select_split(samples, Split::Train).size();
  std::cout << "wrote " << samples.size() << " samples (" << n_train << " train, "
            << samples.size() - n_train << " test) to " << a.out << "\n";
  return kExitOk;
}

int cmd_train(const TrainArgs& a) {
  const std::vector<Sample> data = read_dataset(a.data);
  if (data.empty()) throw ConfigError("dataset is empty");

  TrainConfig cfg;
  cfg.algorithm = algorithm_from_name(a.algo);
  cfg.lr = a.lr;
  cfg.iterations = a.iters;
  cfg.seed = a.seed;
  cfg.gamma = a.gamma;
  cfg.sweeps = a.sweeps;
  cfg.weight_decay = a.weight_decay;
  cfg.dropout = a.dropout;
  cfg.checkpoint_every = a.checkpoint_every;
  cfg.pairs_per_iter = a.pairs;
  cfg.discounted = !a.plain_counts;
  cfg.validate();

  if (cfg.algorithm == Algorithm::TMedirl) {
    for (const Sample* s : select_split(data, Split::Train)) {
      if (!s->trajectory.aec) {
        std::cerr << "error: sample " << s->id << " has no AEC label; tmedirl needs one on every "
                  << "training sample\n";
        return kExitNoAec;
      }
    }
  }

  ModelConfig mc;
  mc.kind = model_kind_from_name(a.model);
  mc.rows = data.front().rows();
  mc.cols = data.front().cols();
  mc.imu_length = data.front().imu.length;
  mc.dropout = a.dropout;
  auto model = make_model(mc, param_init(mc, a.seed));

  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  const TrainReport report =
      train(*model, data, cfg, [&](int iter, const ParamVector& params) {
        write_checkpoint(out / ("checkpoint_" + std::to_string(iter)), mc, params);
      });
  write_checkpoint(out / "checkpoint", mc, model->params());
  write_bytes(out / "report.csv", train_report_csv(report));
  std::cout << "trained " << a.model << " with " << a.algo << " for " << a.iters
            << " iterations; checkpoint in " << (out / "checkpoint").string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a) {
  const std::vector<Sample> data = read_dataset(a.data);
  if (select_split(data, Split::Test).empty()) {
    std::cerr << "error: dataset has no test split\n";
    return kExitShape;
  }
  const Checkpoint ck = read_checkpoint(a.ckpt);
  for (const Sample& s : data) {
    if (s.rows() != ck.config.rows || s.cols() != ck.config.cols ||
        s.imu.length != ck.config.imu_length) {
      std::cerr << "error: sample " << s.id << " is " << s.rows() << "x" << s.cols() << " (imu "
                << s.imu.length << ") but the checkpoint expects " << ck.config.rows << "x"
                << ck.config.cols << " (imu " << ck.config.imu_length << ")\n";
      return kExitShape;
    }
  }
  auto model = make_model(ck.config, ck.params);

  EvalOptions opt;
  opt.gamma = a.gamma;
  opt.seed = a.seed;
  opt.uniform_baseline = a.uniform;
  bool all_gt = true;
  for (const Sample* s : select_split(data, Split::Test)) all_gt = all_gt && s->gt_cost.has_value();
  if (all_gt) {
    opt.planned_aec = [](const Sample& s, const Trajectory& t) {
      return synthetic_aec(*s.gt_cost, t);
    };
  }
  const EvalReport report = evaluate(*model, data, opt);

  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_bytes(out / "eval.csv", eval_report_csv(report));
  write_bytes(out / "eval.json", eval_report_json(report));
  if (report.nll_infinite) std::cerr << "warning: a demonstrated action has probability 0\n";
  if (!report.has_rank_acc) std::cerr << "warning: fewer than two distinct AEC labels\n";
  std::cout << "nll " << report.nll << "  hd " << report.hd << "  rank_acc " << report.rank_acc
            << "  mean_aec " << report.mean_aec << "  spearman " << report.spearman << "\n";
  return kExitOk;
}

int cmd_render(const RenderArgs& a) {
  const std::vector<Sample> data = read_dataset(a.data);
  const Sample* sample = nullptr;
  for (const Sample& s : data)
    if (s.id == a.sample) sample = &s;
  if (sample == nullptr) throw ConfigError("no sample with id '" + a.sample + "'");

  const Checkpoint ck = read_checkpoint(a.ckpt);
  auto model = make_model(ck.config, ck.params);
  const RewardMaps rewards = model->forward(sample->features, sample->imu);
  GridSpec spec;
  spec.rows = sample->rows();
  spec.cols = sample->cols();
  spec.gamma = a.gamma;
  const MedirlResult res = medirl_gradient(GridMdp(spec), rewards, sample->trajectory);

  auto emit = [&](const std::string& suffix, const Field& f) {
    bool flat = false;
    write_bytes(a.out + suffix, encode_pgm(f, &flat));
    if (flat) std::cerr << "warning: " << a.out + suffix << " is constant; rendered as gray 128\n";
  };
  emit("_path.pgm", rewards.path);
  emit("_goal.pgm", rewards.goal);
  emit("_svf.pgm", res.svf.expected_path);
  write_bytes(a.out + "_overlay.ppm", encode_overlay_ppm(sample->features, sample->trajectory));
  std::cout << "rendered " << sample->id << " to " << a.out << "_{path,goal,svf}.pgm and "
            << a.out << "_overlay.ppm\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Traversability cost learning with MEDIRL and T-MEDIRL"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset");
  g->add_option("--out", gen.out, "Output folder")->required();
  g->add_option("--count", gen.count, "Number of samples")->check(CLI::Range(2, 1000000));
  g->add_option("--rows", gen.rows, "Grid rows")->check(CLI::Range(1, 4096));
  g->add_option("--cols", gen.cols, "Grid columns")->check(CLI::Range(1, 4096));
  g->add_option("--seed", gen.seed, "Base seed");
  g->add_option("--beta", gen.beta, "Demonstrator temperature (0 = optimal)")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--noise", gen.noise, "Energy label noise std")->check(CLI::NonNegativeNumber);
  g->add_option("--split-ratio", gen.split_ratio, "Train fraction")->check(CLI::Range(0.0, 1.0));
  g->add_option("--imu-length", gen.imu_length, "IMU window length")
      ->check(CLI::Range(ImuWindow::kMinLength, 100000));
  g->add_option("--density", gen.density, "Obstacle density")->check(CLI::Range(0.0, 1.0));
  g->add_option("--roughness", gen.roughness, "Terrain roughness")->check(CLI::NonNegativeNumber);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a reward model");
  t->add_option("--data", tr.data, "Dataset folder or manifest")->required();
  t->add_option("--algo", tr.algo, "medirl | tmedirl")
      ->check(CLI::IsMember({"medirl", "tmedirl"}));
  t->add_option("--model", tr.model, "linear | fusion")->check(CLI::IsMember({"linear", "fusion"}));
  t->add_option("--iters", tr.iters, "Iterations")->check(CLI::NonNegativeNumber);
  t->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  t->add_option("--gamma", tr.gamma, "Discount factor")->check(CLI::Range(0.0, 0.999999999));
  t->add_option("--seed", tr.seed, "Seed for initialization and sampling");
  t->add_option("--out", tr.out, "Output folder")->required();
  t->add_option("--weight-decay", tr.weight_decay, "L2 weight decay")->check(CLI::NonNegativeNumber);
  t->add_option("--dropout", tr.dropout, "Dropout rate (fusion)")->check(CLI::Range(0.0, 0.999));
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint cadence (0 = final only)")
      ->check(CLI::NonNegativeNumber);
  t->add_option("--pairs", tr.pairs, "Rank pairs per tmedirl iteration")
      ->check(CLI::Range(1, 1000000));
  t->add_option("--sweeps", tr.sweeps, "Soft value iteration sweeps (0 = 2 (rows + cols))")
      ->check(CLI::NonNegativeNumber);
  t->add_flag("--plain-counts", tr.plain_counts, "Undiscounted visitation counts in the gradient");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  e->add_option("--data", ev.data, "Dataset folder or manifest")->required();
  e->add_option("--ckpt", ev.ckpt, "Checkpoint folder")->required();
  e->add_option("--out", ev.out, "Output folder for eval.csv and eval.json")->required();
  e->add_option("--gamma", ev.gamma, "Discount factor")->check(CLI::Range(0.0, 0.999999999));
  e->add_option("--seed", ev.seed, "Seed for the sampled rollouts");
  e->add_flag("--uniform-baseline", ev.uniform, "Score the uniform policy instead of the model");

  RenderArgs rd;
  auto* r = app.add_subcommand("render", "Render reward maps and the demonstration overlay");
  r->add_option("--data", rd.data, "Dataset folder or manifest")->required();
  r->add_option("--ckpt", rd.ckpt, "Checkpoint folder")->required();
  r->add_option("--sample", rd.sample, "Sample id")->required();
  r->add_option("--out", rd.out, "Output file prefix")->required();
  r->add_option("--gamma", rd.gamma, "Discount factor")->check(CLI::Range(0.0, 0.999999999));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*r) return cmd_render(rd);
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& err) {
    std::cerr << "error: numeric failure: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const DimensionError& err) {
    std::cerr << "error: shape mismatch: " << err.what() << "\n";
    return kExitShape;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace trav
