#include "trav/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "trav/ranking.hpp"

namespace trav {

double nll(const Policy& policy, const Trajectory& traj) {
  if (traj.steps.empty()) throw DomainError("nll of an empty trajectory");
  double total = 0.0;
  for (const Step& s : traj.steps) {
    if (s.cell.row < 0 || s.cell.row >= policy.rows() || s.cell.col < 0 ||
        s.cell.col >= policy.cols() || action_code(s.action) >= policy.num_actions()) {
      throw DomainError("trajectory leaves the policy's domain");
    }
    const double p = policy.prob(s.cell.row, s.cell.col, s.action);
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    total -= std::log(p);
  }
  return total / static_cast<double>(traj.steps.size());
}

double hausdorff(std::span<const Cell> a, std::span<const Cell> b) {
  if (a.empty() || b.empty()) throw DomainError("hausdorff distance of an empty set");
  auto directed = [](std::span<const Cell> from, std::span<const Cell> to) {
    double worst = 0.0;
    for (const Cell& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Cell& q : to) {
        const double dr = p.row - q.row;
        const double dc = p.col - q.col;
        best = std::min(best, dr * dr + dc * dc);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

std::vector<Cell> trajectory_cells(const Trajectory& traj) {
  std::vector<Cell> out;
  std::set<Cell> seen;
  for (const Step& s : traj.steps)
    if (seen.insert(s.cell).second) out.push_back(s.cell);
  if (seen.insert(traj.terminal).second) out.push_back(traj.terminal);
  return out;
}

double rank_accuracy(std::span<const double> returns, std::span<const double> aecs) {
  if (returns.size() != aecs.size()) throw DimensionError("returns and AEC labels differ in size");
  std::size_t pairs = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    for (std::size_t j = i + 1; j < returns.size(); ++j) {
      if (aecs[i] == aecs[j]) continue;
      ++pairs;
      const std::size_t better = aecs[i] < aecs[j] ? i : j;
      const std::size_t worse = better == i ? j : i;
      if (returns[better] > returns[worse]) ++correct;
    }
  }
  if (pairs == 0) throw DomainError("rank accuracy needs two samples with distinct AEC");
  return static_cast<double>(correct) / static_cast<double>(pairs);
}

namespace {

Trajectory rollout(const GridMdp& mdp, const Policy& policy, const Cell& start, int horizon,
                   Rng* rng) {
  if (!mdp.in_grid(start.row, start.col)) throw DomainError("rollout start lies off the grid");
  Trajectory traj;
  Cell cur = start;
  for (int t = 0;; ++t) {
    Action a = Action::End;
    if (t < horizon) {
      const auto avail = mdp.available(cur.row, cur.col);
      if (rng == nullptr) {
        double best = -1.0;
        for (Action b : avail) {
          const double p = policy.prob(cur.row, cur.col, b);
          if (p > best) {
            best = p;
            a = b;
          }
        }
      } else {
        double u = rng->uniform();
        a = avail.back();
        for (Action b : avail) {
          u -= policy.prob(cur.row, cur.col, b);
          if (u < 0.0) {
            a = b;
            break;
          }
        }
      }
    }
    traj.steps.push_back({cur, a});
    if (a == Action::End) break;
    const StateId next = mdp.transition({StateKind::Path, cur.row, cur.col}, a);
    cur = {next.row, next.col};
  }
  traj.terminal = cur;
  return traj;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Trajectory plan_path(const GridMdp& mdp, const Policy& policy, const Cell& start, int horizon) {
  return rollout(mdp, policy, start, horizon, nullptr);
}

Trajectory sample_path(const GridMdp& mdp, const Policy& policy, const Cell& start, int horizon,
                       Rng& rng) {
  return rollout(mdp, policy, start, horizon, &rng);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("spearman inputs differ in size");
  if (a.size() < 2) throw DomainError("spearman needs at least two values");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      throw DomainError("spearman input is not finite");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double x = ra[i] - mean;
    const double y = rb[i] - mean;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  if (saa == 0.0 || sbb == 0.0) throw DomainError("spearman is undefined for a constant input");
  return sab / std::sqrt(saa * sbb);
}

double spearman(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw DimensionError("spearman maps differ in shape");
  return spearman(std::span<const double>(a.values()), std::span<const double>(b.values()));
}

int eval_threads() {
  const char* env = std::getenv("TRAV_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

namespace {

SampleEval evaluate_one(RewardModel& model, const Sample& sample, std::size_t index,
                        const EvalOptions& opt) {
  GridSpec spec;
  spec.rows = sample.rows();
  spec.cols = sample.cols();
  spec.gamma = opt.gamma;
  const GridMdp mdp(spec);
  require_valid(mdp, sample.trajectory);

  const RewardMaps rewards = model.forward(sample.features, sample.imu);
  const int sweeps = opt.sweeps > 0 ? opt.sweeps : default_sweeps(mdp);
  const Policy policy = opt.uniform_baseline
                            ? uniform_policy(mdp)
                            : soft_value_iteration(mdp, rewards, sweeps, opt.tol).policy;
  const int horizon = opt.horizon > 0 ? opt.horizon : 4 * (spec.rows + spec.cols);
  const Cell start = sample.trajectory.steps.front().cell;

  SampleEval out;
  out.id = sample.id;
  out.nll = nll(policy, sample.trajectory);
  out.path_return = path_return(sample.trajectory, rewards.path);

  const std::vector<Cell> demo_cells = trajectory_cells(sample.trajectory);
  Rng rng(derive_seed(opt.seed, index));
  double hd = 0.0;
  for (int k = 0; k < opt.hd_rollouts; ++k) {
    const Trajectory sampled = sample_path(mdp, policy, start, horizon, rng);
    hd += hausdorff(demo_cells, trajectory_cells(sampled));
  }
  out.hd = opt.hd_rollouts > 0 ? hd / opt.hd_rollouts : 0.0;

  out.planned = plan_path(mdp, policy, start, horizon);
  if (opt.planned_aec) out.planned_aec = opt.planned_aec(sample, out.planned);

  if (sample.gt_cost) {
    Field cost = rewards.path;
    for (double& v : cost.values()) v = -v;
    out.spearman = spearman(cost, *sample.gt_cost);
  }
  return out;
}

}  // namespace

EvalReport evaluate(const RewardModel& model, const std::vector<Sample>& dataset,
                    const EvalOptions& options) {
  const std::vector<const Sample*> tests = select_split(dataset, Split::Test);
  if (tests.empty()) throw ConfigError("dataset has no test split");

  std::vector<SampleEval> results(tests.size());
  const int threads = std::max(
      1, std::min<int>(options.threads > 0 ? options.threads : eval_threads(),
                       static_cast<int>(tests.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  auto worker = [&](int w) {
    try {
      auto local = model.clone();
      local->set_training(false);
      for (std::size_t i = next++; i < tests.size(); i = next++) {
        results[i] = evaluate_one(*local, *tests[i], i, options);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EvalReport report;
  const double n = static_cast<double>(results.size());
  bool all_gt = true;
  std::vector<double> returns;
  std::vector<double> aecs;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SampleEval& r = results[i];
    if (nll_is_infinite(r.nll)) report.nll_infinite = true;
    report.nll += r.nll / n;
    report.hd += r.hd / n;
    report.mean_aec += r.planned_aec / n;
    report.spearman += r.spearman / n;
    all_gt = all_gt && tests[i]->gt_cost.has_value();
    if (tests[i]->trajectory.aec) {
      returns.push_back(r.path_return);
      aecs.push_back(*tests[i]->trajectory.aec);
    }
  }
  report.has_spearman = all_gt;
  if (!all_gt) report.spearman = 0.0;
  if (std::set<double>(aecs.begin(), aecs.end()).size() >= 2) {
    report.rank_acc = rank_accuracy(returns, aecs);
    report.has_rank_acc = true;
  }
  report.samples = std::move(results);
  return report;
}

}  // namespace trav
