#include <gtest/gtest.h>

#include <cmath>
#include <initializer_list>

#include "trav/cli.hpp"
#include "trav/cli_io.hpp"

using namespace trav;

namespace {

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> store{"trav"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : store) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trav_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string s(const fs::path& p) { return p.string(); }

std::vector<std::string> files_under(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
  std::sort(out.begin(), out.end());
  return out;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  const auto fa = files_under(a);
  ASSERT_EQ(fa, files_under(b));
  for (const auto& f : fa) EXPECT_EQ(read_bytes(a / f), read_bytes(b / f)) << f;
}

void gen_small(const fs::path& out, const std::string& extra_seed = "1") {
  ASSERT_EQ(run({"gen", "--out", s(out), "--count", "10", "--rows", "6", "--cols", "6",
                 "--imu-length", "16", "--seed", extra_seed}),
            kExitOk);
}

}  // namespace

TEST(CliGen, SplitCountsAndDeterminism) {
  const fs::path a = scratch("gen_a");
  const fs::path b = scratch("gen_b");
  gen_small(a);
  gen_small(b);
  const auto samples = read_dataset(a);
  ASSERT_EQ(samples.size(), 10u);
  int train = 0;
  for (const auto& x : samples) train += x.split == Split::Train;
  EXPECT_EQ(train, 7);
  expect_same_tree(a, b);
}

TEST(CliGen, UsageErrors) {
  EXPECT_EQ(run({"gen", "--out", s(scratch("gen_bad")), "--rows", "0"}), kExitUsage);
  EXPECT_EQ(run({"gen"}), kExitUsage);
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"gen", "--out", "/proc/definitely/not/writable", "--count", "2", "--rows", "2",
                 "--cols", "2"}),
            kExitUsage);
}

TEST(CliTrain, ZeroItersGivesInitialization) {
  const fs::path data = scratch("train_data");
  gen_small(data);
  const fs::path out = scratch("train_out");
  ASSERT_EQ(run({"train", "--data", s(data), "--out", s(out), "--iters", "0", "--seed", "4"}),
            kExitOk);
  const Checkpoint ck = read_checkpoint(out / "checkpoint");
  EXPECT_EQ(ck.params, param_init(ck.config, 4));
  EXPECT_EQ(read_bytes(out / "report.csv"), "iter,nll_proxy,rank_loss,grad_norm,millis\n");
}

TEST(CliTrain, DeterministicCheckpoints) {
  const fs::path data = scratch("det_data");
  gen_small(data);
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const fs::path& out : {a, b}) {
    ASSERT_EQ(run({"train", "--data", s(data), "--out", s(out), "--iters", "5", "--algo", "tmedirl",
                   "--checkpoint-every", "2", "--lr", "0.01", "--plain-counts"}),
              kExitOk);
  }
  EXPECT_TRUE(fs::exists(a / "checkpoint_2"));
  EXPECT_TRUE(fs::exists(a / "checkpoint_4"));
  expect_same_tree(a / "checkpoint", b / "checkpoint");
  expect_same_tree(a / "checkpoint_4", b / "checkpoint_4");
}

TEST(CliTrain, TmedirlWithoutAecExits3) {
  const fs::path data = scratch("noaec_data");
  gen_small(data);
  auto samples = read_dataset(data);
  for (auto& x : samples) x.trajectory.aec.reset();
  fs::remove_all(data);
  write_dataset(data, samples);
  EXPECT_EQ(run({"train", "--data", s(data), "--out", s(scratch("noaec_out")), "--algo", "tmedirl",
                 "--iters", "1"}),
            kExitNoAec);
  EXPECT_EQ(run({"train", "--data", s(data), "--out", s(scratch("noaec_out2")), "--iters", "1"}),
            kExitOk);
}

TEST(CliTrain, NumericFailureExits4) {
  const fs::path data = scratch("nan_data");
  gen_small(data);
  EXPECT_EQ(run({"train", "--data", s(data), "--out", s(scratch("nan_out")), "--iters", "5",
                 "--lr", "1e308"}),
            kExitNumeric);
}

TEST(CliTrain, BadFlags) {
  EXPECT_EQ(run({"train", "--data", "x", "--out", "y", "--algo", "sgd"}), kExitUsage);
  EXPECT_EQ(run({"train", "--data", s(scratch("missing")), "--out", s(scratch("m_out"))}),
            kExitUsage);
}

TEST(CliEval, UniformBaselineAndReports) {
  const fs::path data = scratch("eval_data");
  gen_small(data);
  const fs::path out = scratch("eval_train");
  ASSERT_EQ(run({"train", "--data", s(data), "--out", s(out), "--iters", "2"}), kExitOk);
  const fs::path ev = scratch("eval_out");
  ASSERT_EQ(run({"eval", "--data", s(data), "--ckpt", s(out / "checkpoint"), "--out", s(ev),
                 "--uniform-baseline"}),
            kExitOk);
  const std::string csv = read_bytes(ev / "eval.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "nll,hd,rank_acc,mean_aec,spearman");
  EXPECT_TRUE(fs::exists(ev / "eval.json"));
  const double nll = std::stod(csv.substr(csv.find('\n') + 1));
  // demos start at the centre and stay mostly interior: close to, at most, ln 5
  EXPECT_LE(nll, std::log(5.0) + 1e-12);
  EXPECT_GT(nll, std::log(3.0));
}

TEST(CliEval, MissingTestSplitAndShapeMismatchExit5) {
  const fs::path data = scratch("ev5_data");
  gen_small(data);
  const fs::path out = scratch("ev5_train");
  ASSERT_EQ(run({"train", "--data", s(data), "--out", s(out), "--iters", "1"}), kExitOk);

  const fs::path train_only = scratch("ev5_trainonly");
  ASSERT_EQ(run({"gen", "--out", s(train_only), "--count", "4", "--rows", "6", "--cols", "6",
                 "--imu-length", "16", "--split-ratio", "1"}),
            kExitOk);
  EXPECT_EQ(run({"eval", "--data", s(train_only), "--ckpt", s(out / "checkpoint"), "--out",
                 s(scratch("ev5_a"))}),
            kExitShape);

  const fs::path bigger = scratch("ev5_bigger");
  ASSERT_EQ(run({"gen", "--out", s(bigger), "--count", "4", "--rows", "7", "--cols", "6",
                 "--imu-length", "16"}),
            kExitOk);
  EXPECT_EQ(run({"eval", "--data", s(bigger), "--ckpt", s(out / "checkpoint"), "--out",
                 s(scratch("ev5_b"))}),
            kExitShape);
}

TEST(CliRender, WritesImages) {
  const fs::path data = scratch("render_data");
  gen_small(data);
  const fs::path out = scratch("render_train");
  ASSERT_EQ(run({"train", "--data", s(data), "--out", s(out), "--iters", "1"}), kExitOk);
  const fs::path img = scratch("render_img");
  fs::create_directories(img);
  const std::string prefix = s(img / "s0");
  ASSERT_EQ(run({"render", "--data", s(data), "--ckpt", s(out / "checkpoint"), "--sample",
                 "s00000", "--out", prefix}),
            kExitOk);
  for (const char* suffix : {"_path.pgm", "_goal.pgm", "_svf.pgm"}) {
    const std::string pgm = read_bytes(prefix + suffix);
    EXPECT_EQ(pgm.substr(0, 11), "P5\n6 6\n255\n");
    EXPECT_EQ(pgm.size(), 11u + 36u);
  }
  EXPECT_EQ(read_bytes(prefix + "_overlay.ppm").substr(0, 2), "P6");
  EXPECT_EQ(run({"render", "--data", s(data), "--ckpt", s(out / "checkpoint"), "--sample", "zzz",
                 "--out", prefix}),
            kExitUsage);
}
