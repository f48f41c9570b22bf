#include "trav/grid_mdp.hpp"

#include <sstream>

namespace trav {

int action_code(Action a) { return static_cast<int>(a); }

Action action_from_code(int code) {
  if (code < 0 || code >= kNumActions8) {
    throw DomainError("unknown action code " + std::to_string(code));
  }
  return static_cast<Action>(code);
}

std::string action_name(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::End: return "end";
    case Action::UpLeft: return "up-left";
    case Action::UpRight: return "up-right";
    case Action::DownLeft: return "down-left";
    case Action::DownRight: return "down-right";
  }
  return "?";
}

std::pair<int, int> action_delta(Action a) {
  switch (a) {
    case Action::Up: return {-1, 0};
    case Action::Down: return {1, 0};
    case Action::Left: return {0, -1};
    case Action::Right: return {0, 1};
    case Action::End: return {0, 0};
    case Action::UpLeft: return {-1, -1};
    case Action::UpRight: return {-1, 1};
    case Action::DownLeft: return {1, -1};
    case Action::DownRight: return {1, 1};
  }
  return {0, 0};
}

Action opposite(Action a) {
  switch (a) {
    case Action::Up: return Action::Down;
    case Action::Down: return Action::Up;
    case Action::Left: return Action::Right;
    case Action::Right: return Action::Left;
    case Action::UpLeft: return Action::DownRight;
    case Action::DownRight: return Action::UpLeft;
    case Action::UpRight: return Action::DownLeft;
    case Action::DownLeft: return Action::UpRight;
    case Action::End: break;
  }
  throw DomainError("End has no opposite action");
}

GridMdp::GridMdp(const GridSpec& spec) : spec_(spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw ConstructionError("grid dimensions must be positive, got " +
                            std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
  }
  const bool gamma_ok = spec.oracle_mode ? (spec.gamma >= 0.0 && spec.gamma <= 1.0)
                                         : (spec.gamma >= 0.0 && spec.gamma < 1.0);
  if (!gamma_ok) {
    throw ConstructionError("discount factor out of range: " + std::to_string(spec.gamma));
  }

  action_ranges_.reserve(static_cast<std::size_t>(num_path_states()));
  for (int r = 0; r < rows(); ++r) {
    for (int c = 0; c < cols(); ++c) {
      const auto offset = static_cast<std::uint32_t>(actions_.size());
      std::uint8_t count = 0;
      for (int code = 0; code < num_actions(); ++code) {
        const Action a = static_cast<Action>(code);
        const auto [dr, dc] = action_delta(a);
        if (a == Action::End || in_grid(r + dr, c + dc)) {
          actions_.push_back(a);
          ++count;
        }
      }
      action_ranges_.emplace_back(offset, count);
    }
  }
}

void GridMdp::check_cell(int r, int c) const {
  if (!in_grid(r, c)) {
    throw DomainError("cell (" + std::to_string(r) + "," + std::to_string(c) +
                      ") outside the grid");
  }
}

std::span<const Action> GridMdp::available(int r, int c) const {
  check_cell(r, c);
  const auto [offset, count] = action_ranges_[cell_index(r, c)];
  return std::span<const Action>(actions_).subspan(offset, count);
}

std::span<const Action> GridMdp::available(const StateId& s) const {
  if (s.kind == StateKind::Goal) {
    check_cell(s.row, s.col);
    return {};
  }
  return available(s.row, s.col);
}

bool GridMdp::is_available(const StateId& s, Action a) const {
  for (Action b : available(s))
    if (a == b) return true;
  return false;
}

StateId GridMdp::transition(const StateId& s, Action a) const {
  if (!is_available(s, a)) {
    std::ostringstream msg;
    msg << "action " << action_name(a) << " unavailable at "
        << (s.kind == StateKind::Goal ? "goal" : "path") << " state (" << s.row << ","
        << s.col << ")";
    throw DomainError(msg.str());
  }
  if (a == Action::End) return {StateKind::Goal, s.row, s.col};
  const auto [dr, dc] = action_delta(a);
  return {StateKind::Path, s.row + dr, s.col + dc};
}

GridMdp build_mdp(const GridSpec& spec) { return GridMdp(spec); }

std::optional<Violation> validate_trajectory(const GridMdp& mdp, const Trajectory& traj) {
  if (traj.steps.empty()) return Violation{0, "empty trajectory"};
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Step& step = traj.steps[t];
    if (!mdp.in_grid(step.cell.row, step.cell.col)) {
      return Violation{t, "cell outside the grid"};
    }
    if (static_cast<int>(step.action) >= mdp.num_actions()) {
      return Violation{t, "action not in the configured action set"};
    }
    if (t > 0) {
      const Step& prev = traj.steps[t - 1];
      if (prev.action == Action::End) {
        return Violation{t, "step after End"};
      }
      const StateId from{StateKind::Path, prev.cell.row, prev.cell.col};
      if (!mdp.is_available(from, prev.action) ||
          mdp.transition(from, prev.action) != StateId{StateKind::Path, step.cell.row, step.cell.col}) {
        return Violation{t, "not adjacent to the previous cell under its action"};
      }
    }
  }
  const Step& last = traj.steps.back();
  if (last.action != Action::End) {
    return Violation{traj.steps.size() - 1, "missing terminal End"};
  }
  if (traj.terminal != last.cell) {
    return Violation{traj.steps.size() - 1, "terminal goal not co-located with the last cell"};
  }
  return std::nullopt;
}

void require_valid(const GridMdp& mdp, const Trajectory& traj) {
  if (auto v = validate_trajectory(mdp, traj)) {
    throw DomainError("invalid trajectory at step " + std::to_string(v->index) + ": " +
                      v->message);
  }
}

double trajectory_return(const Trajectory& traj, const Field& path_reward,
                         const Field& goal_reward, double gamma) {
  if (!path_reward.same_shape(goal_reward)) {
    throw DimensionError("path and goal reward fields differ in shape");
  }
  double total = 0.0;
  double discount = 1.0;
  for (const Step& step : traj.steps) {
    if (step.cell.row < 0 || step.cell.row >= path_reward.rows() || step.cell.col < 0 ||
        step.cell.col >= path_reward.cols()) {
      throw DimensionError("trajectory cell outside the reward field");
    }
    total += discount * path_reward(step.cell.row, step.cell.col);
    discount *= gamma;
  }
  if (traj.terminal.row < 0 || traj.terminal.row >= goal_reward.rows() ||
      traj.terminal.col < 0 || traj.terminal.col >= goal_reward.cols()) {
    throw DimensionError("terminal cell outside the reward field");
  }
  return total + discount * goal_reward(traj.terminal.row, traj.terminal.col);
}

}  // namespace trav
