#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trav/common.hpp"

namespace trav {

/// Five per-cell environmental planes, stored channel-major then row-major.
struct FeatureStack {
  enum Channel : int { Elevation = 0, Variance = 1, Red = 2, Green = 3, Blue = 4 };
  static constexpr int kChannels = 5;

  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  FeatureStack() = default;
  FeatureStack(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(kChannels) * r * c, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(rows) * cols; }
  double& at(int ch, int r, int c) { return data[ch * plane_size() + r * cols + c]; }
  double at(int ch, int r, int c) const { return data[ch * plane_size() + r * cols + c]; }
  std::span<const double> plane(int ch) const {
    return std::span<const double>(data).subspan(ch * plane_size(), plane_size());
  }

  friend bool operator==(const FeatureStack&, const FeatureStack&) = default;
};

/// Fixed-length IMU window: T samples x (ax, ay, az, gx, gy, gz).
struct ImuWindow {
  static constexpr int kChannels = 6;
  static constexpr int kMinLength = 8;

  int length = 0;
  std::vector<double> samples;  // [t][channel]

  ImuWindow() = default;
  explicit ImuWindow(int t) : length(t), samples(static_cast<std::size_t>(t) * kChannels, 0.0) {}

  double& at(int t, int ch) { return samples[static_cast<std::size_t>(t) * kChannels + ch]; }
  double at(int t, int ch) const { return samples[static_cast<std::size_t>(t) * kChannels + ch]; }

  friend bool operator==(const ImuWindow&, const ImuWindow&) = default;
};

struct RewardMaps {
  Field path;
  Field goal;

  RewardMaps() = default;
  RewardMaps(int rows, int cols) : path(rows, cols), goal(rows, cols) {}

  int rows() const { return path.rows(); }
  int cols() const { return path.cols(); }
  friend bool operator==(const RewardMaps&, const RewardMaps&) = default;
};

struct LayerShape {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t count = 0;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  bool is_bias = false;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Flat parameter vector with a parallel gradient accumulator and a layer
/// manifest describing how the flat storage is carved up.
class ParamVector {
 public:
  ParamVector() = default;

  // Appends a layer and returns its index.
  std::size_t add_layer(std::string name, std::vector<std::size_t> shape, std::size_t fan_in,
                        std::size_t fan_out, bool is_bias);

  std::size_t size() const { return values_.size(); }
  const std::vector<LayerShape>& manifest() const { return manifest_; }
  std::optional<std::size_t> find_layer(const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }

  std::span<double> layer(std::size_t i) {
    return std::span<double>(values_).subspan(manifest_[i].offset, manifest_[i].count);
  }
  std::span<const double> layer(std::size_t i) const {
    return std::span<const double>(values_).subspan(manifest_[i].offset, manifest_[i].count);
  }
  std::span<double> layer_grad(std::size_t i) {
    return std::span<double>(grad_).subspan(manifest_[i].offset, manifest_[i].count);
  }

  void zero_grad();
  double grad_norm() const;
  bool grad_finite() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<LayerShape> manifest_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

enum class ModelKind { Linear, Fusion };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);  // throws ConfigError

struct ModelConfig {
  ModelKind kind = ModelKind::Linear;
  int rows = 1;
  int cols = 1;
  int imu_length = 100;
  bool positional = true;
  double dropout = 0.0;  // inverted dropout rate in training mode (FusionNet only)
};

// Coordinate ramp in [-1, 1]; 0 for a single-cell axis.
double positional_ramp(int index, int extent);

/// Differentiable map (features, IMU window) -> (path reward, goal reward).
///
/// forward() retains the activations needed by backward(); backward()
/// accumulates dL/dtheta into params().grad(). An instance is not meant to be
/// shared between threads; use clone() for per-thread copies.
class RewardModel {
 public:
  virtual ~RewardModel() = default;

  ModelKind kind() const { return config_.kind; }
  const ModelConfig& config() const { return config_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  void set_params(const ParamVector& p);

  RewardMaps forward(const FeatureStack& features, const ImuWindow& imu);
  void backward(const RewardMaps& upstream);

  // Dropout is active only in training mode; masks come from `seed`.
  void set_training(bool training, std::uint64_t seed = 0);
  bool training() const { return training_; }

  virtual std::unique_ptr<RewardModel> clone() const = 0;

 protected:
  RewardModel(ModelConfig config, ParamVector params)
      : config_(config), params_(std::move(params)) {}

  virtual RewardMaps do_forward(const FeatureStack& features, const ImuWindow& imu) = 0;
  virtual void do_backward(const RewardMaps& upstream) = 0;

  Rng& dropout_rng() { return dropout_rng_; }

 private:
  void check_inputs(const FeatureStack& features, const ImuWindow& imu) const;

  ModelConfig config_;
  ParamVector params_;
  bool training_ = false;
  Rng dropout_rng_{0};
  bool has_activations_ = false;
};

/// Affine per-cell reward on a 19-dim feature vector:
/// 5 env channels, per-channel IMU mean and std (12), 2 positional ramps.
/// The accelerometer z mean is gravity-compensated (kGravity removed).
class LinearReward final : public RewardModel {
 public:
  static constexpr int kFeatureDim = FeatureStack::kChannels + 2 * ImuWindow::kChannels + 2;
  static constexpr double kGravity = 9.81;
  static constexpr int kAccelZ = 2;

  LinearReward(ModelConfig config, ParamVector params);

  // Per-cell feature vector as seen by the model.
  static std::vector<double> cell_features(const FeatureStack& features, const ImuWindow& imu,
                                           int r, int c, bool positional);

  std::unique_ptr<RewardModel> clone() const override;

 private:
  RewardMaps do_forward(const FeatureStack& features, const ImuWindow& imu) override;
  void do_backward(const RewardMaps& upstream) override;

  // retained
  std::vector<double> phi_;  // [cell][kFeatureDim]
  int rows_ = 0;
  int cols_ = 0;
};

/// Two-branch convolutional reward network.
///
/// Inertial branch: 2 blocks of (conv1d k5 + ReLU) x2 + maxpool(2), then FC
/// to a 16-dim embedding. Environmental branch: three 3x3 convs 5->16->16->16
/// with an additive skip from the first to the third. Fusion: env features,
/// broadcast embedding and 2 positional ramps (34 ch) -> 3x3 conv to 16 ->
/// 1x1 conv to (path, goal).
class FusionNet final : public RewardModel {
 public:
  static constexpr int kEmbed = 16;
  static constexpr int kEnvCh = 16;
  static constexpr int kFuseIn = kEnvCh + kEmbed + 2;
  static constexpr int kFuseCh = 16;
  static constexpr int kKernel1d = 5;

  FusionNet(ModelConfig config, ParamVector params);

  std::unique_ptr<RewardModel> clone() const override;

  // Output of the 34->16 fusion conv (after ReLU) from the last forward.
  const std::vector<double>& fusion_hidden() const { return h4_; }

 private:
  RewardMaps do_forward(const FeatureStack& features, const ImuWindow& imu) override;
  void do_backward(const RewardMaps& upstream) override;

  // retained activations
  int rows_ = 0, cols_ = 0, t0_ = 0, t1_ = 0, t2_ = 0;
  std::vector<double> x0_, a1_, a2_, p1_, a3_, a4_, p2_, emb_, emb_mask_;
  std::vector<std::size_t> pool1_idx_, pool2_idx_;
  std::vector<double> e0_, h1_, h2_, h3_, z3_, u_, h4_, h4_mask_, h4d_;
};

/// Layer manifest + deterministic Glorot-uniform weights, zero biases.
ParamVector param_init(const ModelConfig& config, std::uint64_t seed);

/// Parameter layout only (all zeros).
ParamVector param_layout(const ModelConfig& config);

std::unique_ptr<RewardModel> make_model(const ModelConfig& config, ParamVector params);
std::unique_ptr<RewardModel> make_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace trav
