#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trav/common.hpp"
#include "trav/grid_mdp.hpp"
#include "trav/reward_model.hpp"

namespace trav {

enum class Split { Train, Test };

inline std::string split_name(Split s) { return s == Split::Train ? "train" : "test"; }

/// One training/evaluation item: terrain features, the IMU window leading up
/// to it, the demonstrated trajectory (with optional AEC label) and, for
/// synthetic data, the ground-truth cost field.
struct Sample {
  std::string id;
  FeatureStack features;
  ImuWindow imu;
  Trajectory trajectory;
  std::optional<Field> gt_cost;
  Split split = Split::Train;

  int rows() const { return features.rows; }
  int cols() const { return features.cols; }
};

inline std::vector<const Sample*> select_split(const std::vector<Sample>& samples, Split split) {
  std::vector<const Sample*> out;
  for (const Sample& s : samples)
    if (s.split == split) out.push_back(&s);
  return out;
}

}  // namespace trav
