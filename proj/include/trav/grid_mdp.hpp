#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trav/common.hpp"

namespace trav {

struct GridSpec {
  int rows = 1;
  int cols = 1;
  double resolution_m = 0.1;  // metadata only
  double gamma = 0.95;
  // gamma == 1 is accepted only when this is set (oracle / test mode).
  bool oracle_mode = false;
  // Adds the four diagonal moves (action codes 5..8).
  bool eight_connected = false;
};

enum class StateKind { Path, Goal };

struct StateId {
  StateKind kind = StateKind::Path;
  int row = 0;
  int col = 0;

  friend bool operator==(const StateId&, const StateId&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Codes are stable: they are written into dataset manifests.
enum class Action : int {
  Up = 0,
  Down = 1,
  Left = 2,
  Right = 3,
  End = 4,
  UpLeft = 5,
  UpRight = 6,
  DownLeft = 7,
  DownRight = 8,
};

inline constexpr int kNumActions4 = 5;
inline constexpr int kNumActions8 = 9;
inline constexpr int kMaxActions = kNumActions8;

int action_code(Action a);
Action action_from_code(int code);  // throws DomainError for codes outside 0..8
std::string action_name(Action a);
// (d_row, d_col) of a move; (0, 0) for End.
std::pair<int, int> action_delta(Action a);
Action opposite(Action a);  // throws DomainError for End

struct Step {
  Cell cell;
  Action action = Action::End;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
  std::vector<Step> steps;
  Cell terminal;
  std::optional<double> aec;

  std::size_t length() const { return steps.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Decoupled path/goal-state MDP over a rows x cols grid.
///
/// Path state (r, c) can move to in-grid neighbours or play End, which lands
/// in the co-located goal state. Goal states are terminal. Off-grid moves are
/// simply not available. Immutable after construction.
class GridMdp {
 public:
  explicit GridMdp(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int rows() const { return spec_.rows; }
  int cols() const { return spec_.cols; }
  double gamma() const { return spec_.gamma; }
  int num_path_states() const { return rows() * cols(); }
  int num_states() const { return 2 * num_path_states(); }
  // Size of the action alphabet (5 or 9).
  int num_actions() const { return spec_.eight_connected ? kNumActions8 : kNumActions4; }

  bool in_grid(int r, int c) const { return r >= 0 && r < rows() && c >= 0 && c < cols(); }
  std::size_t cell_index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) +
           static_cast<std::size_t>(c);
  }

  /// Actions available at a state, in action-code order. Empty for goals.
  std::span<const Action> available(const StateId& s) const;
  std::span<const Action> available(int r, int c) const;
  bool is_available(const StateId& s, Action a) const;

  /// Deterministic successor; throws DomainError if `a` is unavailable at `s`.
  StateId transition(const StateId& s, Action a) const;

 private:
  void check_cell(int r, int c) const;

  GridSpec spec_;
  // per path cell: offset/count into actions_
  std::vector<std::pair<std::uint32_t, std::uint8_t>> action_ranges_;
  std::vector<Action> actions_;
};

GridMdp build_mdp(const GridSpec& spec);

struct Violation {
  std::size_t index = 0;
  std::string message;
};

/// nullopt when the trajectory is consistent with the MDP; otherwise the
/// first violating step index with a description.
std::optional<Violation> validate_trajectory(const GridMdp& mdp, const Trajectory& traj);

/// Throws DomainError carrying the violation when the trajectory is invalid.
void require_valid(const GridMdp& mdp, const Trajectory& traj);

/// sum_t gamma^t r_p(s_t) + gamma^|traj| r_g(terminal).
double trajectory_return(const Trajectory& traj, const Field& path_reward,
                         const Field& goal_reward, double gamma);

}  // namespace trav
