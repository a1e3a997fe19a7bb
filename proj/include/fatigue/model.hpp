#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fatigue/core_types.hpp"
#include "fatigue/nn/checkpoint.hpp"
#include "fatigue/nn/net.hpp"

namespace fatigue::model {

enum class PoolKind { none, max, avg };

// The hybrid architecture: five convolutional blocks (temporal 1x5 kernels
// in blocks 1-3, spatial 5x1/3x1 kernels in blocks 4-5, one batch-norm and
// an ELU per block), two LSTM layers, three fully connected layers, 3-way
// softmax output.
struct FatigueNetConfig {
  int input_channels = 30;
  int input_samples = 100;
  std::vector<int> conv_feature_maps = {32, 64, 128, 128, 256};
  std::vector<int> convs_per_block = {2, 2, 2, 3, 3};
  // kernel (kh, kw) per block: 1x5 temporal for blocks 1-3, then 5x1, 3x1.
  std::vector<std::pair<int, int>> block_kernels = {{1, 5}, {1, 5}, {1, 5}, {5, 1}, {3, 1}};
  // time-axis pooling after blocks 1-3, none after the spatial blocks
  std::vector<PoolKind> block_pool = {PoolKind::max, PoolKind::max, PoolKind::avg,
                                      PoolKind::none, PoolKind::none};
  int pool_width = 2;
  std::vector<int> lstm_units = {256, 128};
  std::vector<int> fc_units = {128, 64, 3};
  double elu_alpha = 1.0;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  nlohmann::json to_json() const;
  static FatigueNetConfig from_json(const nlohmann::json& j);
  void validate() const;
};

template <class T>
nn::Network<T> build_fatigue_net(const FatigueNetConfig& cfg);

// Per-channel affine input normalization fitted on the training split and
// stored with the model.
struct InputStandardizer {
  std::vector<double> mean;  // per channel
  std::vector<double> std;   // per channel

  void fit(const EpochSet& set);
  nlohmann::json to_json() const;
  static InputStandardizer from_json(const nlohmann::json& j);
};

struct TrainConfig {
  std::string optimizer = "adam";  // adam | sgd_momentum
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 30;
  int patience = 20;  // early stopping on validation accuracy
  uint64_t seed = 0;
  std::string weight_init = "kaiming_uniform";

  nlohmann::json to_json() const;
  static FatigueNetConfig net_defaults() { return {}; }
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> train_acc;
  std::vector<double> val_acc;
  int best_epoch = -1;

  nlohmann::json to_json() const;
};

struct TrainedModel {
  nn::Network<float> net;
  InputStandardizer standardizer;
  FatigueNetConfig net_config;
  TrainHistory history;

  std::vector<int> predict(const EpochSet& set, int batch_size = 64);
  double accuracy(const EpochSet& set, int batch_size = 64);

  // "FATN" checkpoint + <path>.json sidecar (train config + history).
  void save(const std::string& path, const TrainConfig& tc) const;
  static TrainedModel load(const std::string& path);
};

// Train on `train`; validation accuracy is tracked on `val` for early
// stopping (best-epoch weights are restored).
TrainedModel train_fatigue_net(const FatigueNetConfig& cfg, const EpochSet& train,
                               const EpochSet& val, const TrainConfig& tc);

}  // namespace fatigue::model
