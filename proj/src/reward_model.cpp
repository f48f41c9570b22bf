#include "trav/reward_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nn_ops.hpp"

namespace trav {

namespace {

// FusionNet layer indices in manifest order.
enum FusionLayer : std::size_t {
  kImu1W, kImu1B, kImu2W, kImu2B, kImu3W, kImu3B, kImu4W, kImu4B, kFcW, kFcB,
  kEnv1W, kEnv1B, kEnv2W, kEnv2B, kEnv3W, kEnv3B, kFuseW, kFuseB, kHeadW, kHeadB,
};

enum LinearLayer : std::size_t { kPathW, kPathB, kGoalW, kGoalB };

void add_conv(ParamVector& p, const std::string& name, std::size_t out, std::size_t in,
              std::vector<std::size_t> kernel) {
  std::size_t k = 1;
  for (std::size_t d : kernel) k *= d;
  std::vector<std::size_t> shape{out, in};
  shape.insert(shape.end(), kernel.begin(), kernel.end());
  p.add_layer(name + ".weight", shape, in * k, out * k, false);
  p.add_layer(name + ".bias", {out}, in * k, out * k, true);
}

}  // namespace

std::size_t ParamVector::add_layer(std::string name, std::vector<std::size_t> shape,
                                   std::size_t fan_in, std::size_t fan_out, bool is_bias) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  LayerShape layer{std::move(name), std::move(shape), values_.size(), count, fan_in, fan_out,
                   is_bias};
  manifest_.push_back(std::move(layer));
  values_.resize(values_.size() + count, 0.0);
  grad_.resize(values_.size(), 0.0);
  return manifest_.size() - 1;
}

std::optional<std::size_t> ParamVector::find_layer(const std::string& name) const {
  for (std::size_t i = 0; i < manifest_.size(); ++i)
    if (manifest_[i].name == name) return i;
  return std::nullopt;
}

void ParamVector::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

double ParamVector::grad_norm() const {
  double s = 0.0;
  for (double g : grad_) s += g * g;
  return std::sqrt(s);
}

bool ParamVector::grad_finite() const {
  return std::all_of(grad_.begin(), grad_.end(), [](double g) { return std::isfinite(g); });
}

std::string model_kind_name(ModelKind kind) {
  return kind == ModelKind::Linear ? "linear" : "fusion";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "fusion") return ModelKind::Fusion;
  throw ConfigError("unknown model kind '" + name + "'");
}

double positional_ramp(int index, int extent) {
  if (extent <= 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(index) / static_cast<double>(extent - 1);
}

ParamVector param_layout(const ModelConfig& config) {
  ParamVector p;
  if (config.kind == ModelKind::Linear) {
    const std::size_t d = LinearReward::kFeatureDim;
    p.add_layer("path.weight", {d}, d, 1, false);
    p.add_layer("path.bias", {1}, d, 1, true);
    p.add_layer("goal.weight", {d}, d, 1, false);
    p.add_layer("goal.bias", {1}, d, 1, true);
    return p;
  }
  if (config.imu_length < ImuWindow::kMinLength) {
    throw ConfigError("FusionNet needs an IMU window of at least 8 samples");
  }
  const std::size_t t2 = static_cast<std::size_t>(config.imu_length / 2 / 2);
  add_conv(p, "imu.conv1", 16, ImuWindow::kChannels, {FusionNet::kKernel1d});
  add_conv(p, "imu.conv2", 16, 16, {FusionNet::kKernel1d});
  add_conv(p, "imu.conv3", 32, 16, {FusionNet::kKernel1d});
  add_conv(p, "imu.conv4", 32, 32, {FusionNet::kKernel1d});
  p.add_layer("imu.fc.weight", {FusionNet::kEmbed, 32 * t2}, 32 * t2, FusionNet::kEmbed, false);
  p.add_layer("imu.fc.bias", {FusionNet::kEmbed}, 32 * t2, FusionNet::kEmbed, true);
  add_conv(p, "env.conv1", FusionNet::kEnvCh, FeatureStack::kChannels, {3, 3});
  add_conv(p, "env.conv2", FusionNet::kEnvCh, FusionNet::kEnvCh, {3, 3});
  add_conv(p, "env.conv3", FusionNet::kEnvCh, FusionNet::kEnvCh, {3, 3});
  add_conv(p, "fuse.conv", FusionNet::kFuseCh, FusionNet::kFuseIn, {3, 3});
  add_conv(p, "head", 2, FusionNet::kFuseCh, {1, 1});
  return p;
}

ParamVector param_init(const ModelConfig& config, std::uint64_t seed) {
  ParamVector p = param_layout(config);
  Rng rng(seed);
  for (std::size_t i = 0; i < p.manifest().size(); ++i) {
    const LayerShape& layer = p.manifest()[i];
    if (layer.is_bias) continue;
    const double scale =
        std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    for (double& w : p.layer(i)) w = rng.uniform(-scale, scale);
  }
  return p;
}

std::unique_ptr<RewardModel> make_model(const ModelConfig& config, ParamVector params) {
  if (config.kind == ModelKind::Linear) {
    return std::make_unique<LinearReward>(config, std::move(params));
  }
  return std::make_unique<FusionNet>(config, std::move(params));
}

std::unique_ptr<RewardModel> make_model(const ModelConfig& config, std::uint64_t seed) {
  return make_model(config, param_init(config, seed));
}

// ---------------------------------------------------------------------------
// RewardModel

void RewardModel::set_params(const ParamVector& p) {
  if (p.size() != params_.size()) {
    throw DimensionError("parameter vector has " + std::to_string(p.size()) +
                         " entries, model expects " + std::to_string(params_.size()));
  }
  params_ = p;
}

void RewardModel::set_training(bool training, std::uint64_t seed) {
  training_ = training;
  dropout_rng_ = Rng(seed);
}

void RewardModel::check_inputs(const FeatureStack& features, const ImuWindow& imu) const {
  if (features.rows != config_.rows || features.cols != config_.cols ||
      features.data.size() != features.plane_size() * FeatureStack::kChannels) {
    throw DimensionError("feature stack is " + std::to_string(features.rows) + "x" +
                         std::to_string(features.cols) + ", model expects " +
                         std::to_string(config_.rows) + "x" + std::to_string(config_.cols));
  }
  if (imu.length != config_.imu_length ||
      imu.samples.size() != static_cast<std::size_t>(imu.length) * ImuWindow::kChannels) {
    throw DimensionError("IMU window has " + std::to_string(imu.length) +
                         " samples, model expects " + std::to_string(config_.imu_length));
  }
  for (double v : features.data)
    if (!std::isfinite(v)) throw DomainError("non-finite value in feature stack");
  for (double v : imu.samples)
    if (!std::isfinite(v)) throw DomainError("non-finite value in IMU window");
}

RewardMaps RewardModel::forward(const FeatureStack& features, const ImuWindow& imu) {
  check_inputs(features, imu);
  RewardMaps out = do_forward(features, imu);
  has_activations_ = true;
  return out;
}

void RewardModel::backward(const RewardMaps& upstream) {
  if (!has_activations_) throw StateError("backward called before forward");
  if (upstream.path.rows() != config_.rows || upstream.path.cols() != config_.cols ||
      !upstream.path.same_shape(upstream.goal)) {
    throw DimensionError("upstream gradient does not match the reward map shape");
  }
  do_backward(upstream);
}

// ---------------------------------------------------------------------------
// LinearReward

LinearReward::LinearReward(ModelConfig config, ParamVector params)
    : RewardModel(config, std::move(params)) {
  if (this->params().size() != 2 * (kFeatureDim + 1)) {
    throw DimensionError("LinearReward expects " + std::to_string(2 * (kFeatureDim + 1)) +
                         " parameters");
  }
}

std::vector<double> LinearReward::cell_features(const FeatureStack& features,
                                                const ImuWindow& imu, int r, int c,
                                                bool positional) {
  std::vector<double> phi;
  phi.reserve(kFeatureDim);
  for (int ch = 0; ch < FeatureStack::kChannels; ++ch) phi.push_back(features.at(ch, r, c));
  const double n = static_cast<double>(imu.length);
  std::array<double, ImuWindow::kChannels> mean{};
  for (int t = 0; t < imu.length; ++t)
    for (int ch = 0; ch < ImuWindow::kChannels; ++ch) mean[ch] += imu.at(t, ch);
  for (double& m : mean) m /= n;
  std::array<double, ImuWindow::kChannels> var{};
  for (int t = 0; t < imu.length; ++t)
    for (int ch = 0; ch < ImuWindow::kChannels; ++ch) {
      const double d = imu.at(t, ch) - mean[ch];
      var[ch] += d * d;
    }
  mean[kAccelZ] -= kGravity;
  for (double m : mean) phi.push_back(m);
  for (double v : var) phi.push_back(std::sqrt(v / n));
  phi.push_back(positional ? positional_ramp(r, features.rows) : 0.0);
  phi.push_back(positional ? positional_ramp(c, features.cols) : 0.0);
  return phi;
}

RewardMaps LinearReward::do_forward(const FeatureStack& features, const ImuWindow& imu) {
  rows_ = features.rows;
  cols_ = features.cols;
  const bool positional = config().positional;
  // the IMU summary is shared by every cell, so compute it once
  const std::vector<double> base = cell_features(features, imu, 0, 0, positional);

  phi_.assign(static_cast<std::size_t>(rows_) * cols_ * kFeatureDim, 0.0);
  RewardMaps out(rows_, cols_);
  const auto wp = params().layer(kPathW);
  const auto wg = params().layer(kGoalW);
  const double bp = params().layer(kPathB)[0];
  const double bg = params().layer(kGoalB)[0];
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * cols_ + c;
      double* phi = phi_.data() + cell * kFeatureDim;
      std::copy(base.begin(), base.end(), phi);
      for (int ch = 0; ch < FeatureStack::kChannels; ++ch) phi[ch] = features.at(ch, r, c);
      phi[kFeatureDim - 2] = positional ? positional_ramp(r, rows_) : 0.0;
      phi[kFeatureDim - 1] = positional ? positional_ramp(c, cols_) : 0.0;
      double p = bp, g = bg;
      for (int k = 0; k < kFeatureDim; ++k) {
        p += wp[k] * phi[k];
        g += wg[k] * phi[k];
      }
      out.path(r, c) = p;
      out.goal(r, c) = g;
    }
  }
  return out;
}

void LinearReward::do_backward(const RewardMaps& upstream) {
  auto dwp = params().layer_grad(kPathW);
  auto dwg = params().layer_grad(kGoalW);
  auto dbp = params().layer_grad(kPathB);
  auto dbg = params().layer_grad(kGoalB);
  for (std::size_t cell = 0; cell < upstream.path.size(); ++cell) {
    const double gp = upstream.path[cell];
    const double gg = upstream.goal[cell];
    if (gp == 0.0 && gg == 0.0) continue;
    const double* phi = phi_.data() + cell * kFeatureDim;
    for (int k = 0; k < kFeatureDim; ++k) {
      dwp[k] += gp * phi[k];
      dwg[k] += gg * phi[k];
    }
    dbp[0] += gp;
    dbg[0] += gg;
  }
}

std::unique_ptr<RewardModel> LinearReward::clone() const {
  return std::make_unique<LinearReward>(*this);
}

// ---------------------------------------------------------------------------
// FusionNet

FusionNet::FusionNet(ModelConfig config, ParamVector params)
    : RewardModel(config, std::move(params)) {
  const ParamVector expected = param_layout(config);
  if (this->params().size() != expected.size() ||
      this->params().manifest().size() != expected.manifest().size()) {
    throw DimensionError("FusionNet parameter vector does not match the layer manifest");
  }
}

std::unique_ptr<RewardModel> FusionNet::clone() const {
  return std::make_unique<FusionNet>(*this);
}

RewardMaps FusionNet::do_forward(const FeatureStack& features, const ImuWindow& imu) {
  using namespace nn;
  const ParamVector& p = params();
  rows_ = features.rows;
  cols_ = features.cols;
  t0_ = imu.length;
  t1_ = t0_ / 2;
  t2_ = t1_ / 2;
  const std::size_t plane = static_cast<std::size_t>(rows_) * cols_;
  const bool dropout = training() && config().dropout > 0.0;
  const double keep = 1.0 - config().dropout;

  // inertial branch
  x0_.assign(static_cast<std::size_t>(ImuWindow::kChannels) * t0_, 0.0);
  for (int t = 0; t < t0_; ++t)
    for (int ch = 0; ch < ImuWindow::kChannels; ++ch)
      x0_[static_cast<std::size_t>(ch) * t0_ + t] = imu.at(t, ch);

  a1_.assign(16 * static_cast<std::size_t>(t0_), 0.0);
  conv1d_forward(x0_, 6, t0_, p.layer(kImu1W), p.layer(kImu1B), 16, kKernel1d, a1_);
  relu_inplace(a1_);
  a2_.assign(16 * static_cast<std::size_t>(t0_), 0.0);
  conv1d_forward(a1_, 16, t0_, p.layer(kImu2W), p.layer(kImu2B), 16, kKernel1d, a2_);
  relu_inplace(a2_);
  p1_.assign(16 * static_cast<std::size_t>(t1_), 0.0);
  pool1_idx_.assign(p1_.size(), 0);
  maxpool1d_forward(a2_, 16, t0_, p1_, pool1_idx_);

  a3_.assign(32 * static_cast<std::size_t>(t1_), 0.0);
  conv1d_forward(p1_, 16, t1_, p.layer(kImu3W), p.layer(kImu3B), 32, kKernel1d, a3_);
  relu_inplace(a3_);
  a4_.assign(32 * static_cast<std::size_t>(t1_), 0.0);
  conv1d_forward(a3_, 32, t1_, p.layer(kImu4W), p.layer(kImu4B), 32, kKernel1d, a4_);
  relu_inplace(a4_);
  p2_.assign(32 * static_cast<std::size_t>(t2_), 0.0);
  pool2_idx_.assign(p2_.size(), 0);
  maxpool1d_forward(a4_, 32, t1_, p2_, pool2_idx_);

  emb_.assign(kEmbed, 0.0);
  linear_forward(p2_, p.layer(kFcW), p.layer(kFcB), emb_);
  emb_mask_.assign(kEmbed, 1.0);
  if (dropout) {
    for (double& m : emb_mask_) m = dropout_rng().uniform() < keep ? 1.0 / keep : 0.0;
  }

  // environmental branch
  e0_ = features.data;
  h1_.assign(kEnvCh * plane, 0.0);
  conv2d_forward(e0_, FeatureStack::kChannels, rows_, cols_, p.layer(kEnv1W), p.layer(kEnv1B),
                 kEnvCh, 3, h1_);
  relu_inplace(h1_);
  h2_.assign(kEnvCh * plane, 0.0);
  conv2d_forward(h1_, kEnvCh, rows_, cols_, p.layer(kEnv2W), p.layer(kEnv2B), kEnvCh, 3, h2_);
  relu_inplace(h2_);
  z3_.assign(kEnvCh * plane, 0.0);
  conv2d_forward(h2_, kEnvCh, rows_, cols_, p.layer(kEnv3W), p.layer(kEnv3B), kEnvCh, 3, z3_);
  h3_.resize(z3_.size());
  for (std::size_t i = 0; i < z3_.size(); ++i) h3_[i] = std::max(0.0, z3_[i] + h1_[i]);

  // fusion stage input: env features | broadcast embedding | positional ramps
  u_.assign(kFuseIn * plane, 0.0);
  std::copy(h3_.begin(), h3_.end(), u_.begin());
  for (int k = 0; k < kEmbed; ++k) {
    const double v = emb_[k] * emb_mask_[k];
    std::fill_n(u_.begin() + (kEnvCh + k) * plane, plane, v);
  }
  if (config().positional) {
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        const std::size_t cell = static_cast<std::size_t>(r) * cols_ + c;
        u_[(kEnvCh + kEmbed) * plane + cell] = positional_ramp(r, rows_);
        u_[(kEnvCh + kEmbed + 1) * plane + cell] = positional_ramp(c, cols_);
      }
    }
  }

  h4_.assign(kFuseCh * plane, 0.0);
  conv2d_forward(u_, kFuseIn, rows_, cols_, p.layer(kFuseW), p.layer(kFuseB), kFuseCh, 3, h4_);
  relu_inplace(h4_);
  h4_mask_.assign(h4_.size(), 1.0);
  if (dropout) {
    for (double& m : h4_mask_) m = dropout_rng().uniform() < keep ? 1.0 / keep : 0.0;
  }
  h4d_.resize(h4_.size());
  for (std::size_t i = 0; i < h4_.size(); ++i) h4d_[i] = h4_[i] * h4_mask_[i];

  std::vector<double> head(2 * plane, 0.0);
  conv2d_forward(h4d_, kFuseCh, rows_, cols_, p.layer(kHeadW), p.layer(kHeadB), 2, 1, head);

  RewardMaps out(rows_, cols_);
  std::copy_n(head.begin(), plane, out.path.values().begin());
  std::copy_n(head.begin() + plane, plane, out.goal.values().begin());
  return out;
}

void FusionNet::do_backward(const RewardMaps& upstream) {
  using namespace nn;
  ParamVector& p = params();
  const std::size_t plane = static_cast<std::size_t>(rows_) * cols_;

  std::vector<double> dhead(2 * plane);
  std::copy(upstream.path.values().begin(), upstream.path.values().end(), dhead.begin());
  std::copy(upstream.goal.values().begin(), upstream.goal.values().end(),
            dhead.begin() + plane);

  std::vector<double> dh4(h4_.size(), 0.0);
  conv2d_backward(h4d_, kFuseCh, rows_, cols_, p.layer(kHeadW), 2, 1, dhead,
                  p.layer_grad(kHeadW), p.layer_grad(kHeadB), dh4);
  for (std::size_t i = 0; i < dh4.size(); ++i) dh4[i] *= h4_mask_[i];
  relu_backward_inplace(h4_, dh4);

  std::vector<double> du(u_.size(), 0.0);
  conv2d_backward(u_, kFuseIn, rows_, cols_, p.layer(kFuseW), kFuseCh, 3, dh4,
                  p.layer_grad(kFuseW), p.layer_grad(kFuseB), du);

  // embedding (broadcast) gradient
  std::vector<double> demb(kEmbed, 0.0);
  for (int k = 0; k < kEmbed; ++k) {
    const double* g = du.data() + (kEnvCh + k) * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += g[i];
    demb[k] = acc * emb_mask_[k];
  }

  // environmental branch
  std::vector<double> dz3(du.begin(), du.begin() + kEnvCh * plane);
  relu_backward_inplace(h3_, dz3);
  std::vector<double> dh2(h2_.size(), 0.0);
  conv2d_backward(h2_, kEnvCh, rows_, cols_, p.layer(kEnv3W), kEnvCh, 3, dz3,
                  p.layer_grad(kEnv3W), p.layer_grad(kEnv3B), dh2);
  relu_backward_inplace(h2_, dh2);
  // skip connection: h3 = relu(z3 + h1) sends dz3 straight to h1
  std::vector<double> dh1(dz3);
  conv2d_backward(h1_, kEnvCh, rows_, cols_, p.layer(kEnv2W), kEnvCh, 3, dh2,
                  p.layer_grad(kEnv2W), p.layer_grad(kEnv2B), dh1);
  relu_backward_inplace(h1_, dh1);
  conv2d_backward(e0_, FeatureStack::kChannels, rows_, cols_, p.layer(kEnv1W), kEnvCh, 3, dh1,
                  p.layer_grad(kEnv1W), p.layer_grad(kEnv1B), {});

  // inertial branch
  std::vector<double> dp2(p2_.size(), 0.0);
  linear_backward(p2_, p.layer(kFcW), demb, p.layer_grad(kFcW), p.layer_grad(kFcB), dp2);
  std::vector<double> da4(a4_.size(), 0.0);
  maxpool1d_backward(dp2, pool2_idx_, da4);
  relu_backward_inplace(a4_, da4);
  std::vector<double> da3(a3_.size(), 0.0);
  conv1d_backward(a3_, 32, t1_, p.layer(kImu4W), 32, kKernel1d, da4, p.layer_grad(kImu4W),
                  p.layer_grad(kImu4B), da3);
  relu_backward_inplace(a3_, da3);
  std::vector<double> dp1(p1_.size(), 0.0);
  conv1d_backward(p1_, 16, t1_, p.layer(kImu3W), 32, kKernel1d, da3, p.layer_grad(kImu3W),
                  p.layer_grad(kImu3B), dp1);
  std::vector<double> da2(a2_.size(), 0.0);
  maxpool1d_backward(dp1, pool1_idx_, da2);
  relu_backward_inplace(a2_, da2);
  std::vector<double> da1(a1_.size(), 0.0);
  conv1d_backward(a1_, 16, t0_, p.layer(kImu2W), 16, kKernel1d, da2, p.layer_grad(kImu2W),
                  p.layer_grad(kImu2B), da1);
  relu_backward_inplace(a1_, da1);
  conv1d_backward(x0_, 6, t0_, p.layer(kImu1W), 16, kKernel1d, da1, p.layer_grad(kImu1W),
                  p.layer_grad(kImu1B), {});
}

}  // namespace trav
