#include "fatigue/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fatigue/nn/loss.hpp"
#include "fatigue/nn/optim.hpp"
#include "fatigue/rng.hpp"

namespace fatigue::model {

void FatigueNetConfig::validate() const {
  const size_t b = conv_feature_maps.size();
  if (b != 5 || convs_per_block.size() != b || block_kernels.size() != b ||
      block_pool.size() != b)
    raise(ErrorCode::invalid_argument, "fatigue net: expected exactly 5 conv blocks");
  if (lstm_units.size() != 2)
    raise(ErrorCode::invalid_argument, "fatigue net: expected exactly 2 LSTM layers");
  if (fc_units.size() != 3 || fc_units.back() != 3)
    raise(ErrorCode::invalid_argument, "fatigue net: expected 3 FC layers ending in 3 classes");
  for (int m : conv_feature_maps)
    if (m <= 0) raise(ErrorCode::invalid_argument, "fatigue net: non-positive feature maps");
}

nlohmann::json FatigueNetConfig::to_json() const {
  nlohmann::json j;
  j["input_channels"] = input_channels;
  j["input_samples"] = input_samples;
  j["conv_feature_maps"] = conv_feature_maps;
  j["convs_per_block"] = convs_per_block;
  auto kernels = nlohmann::json::array();
  for (const auto& [kh, kw] : block_kernels) kernels.push_back({kh, kw});
  j["block_kernels"] = kernels;
  auto pools = nlohmann::json::array();
  for (PoolKind p : block_pool)
    pools.push_back(p == PoolKind::max ? "max" : (p == PoolKind::avg ? "avg" : "none"));
  j["block_pool"] = pools;
  j["pool_width"] = pool_width;
  j["lstm_units"] = lstm_units;
  j["fc_units"] = fc_units;
  j["elu_alpha"] = elu_alpha;
  j["bn_momentum"] = bn_momentum;
  j["bn_eps"] = bn_eps;
  return j;
}

FatigueNetConfig FatigueNetConfig::from_json(const nlohmann::json& j) {
  FatigueNetConfig c;
  c.input_channels = j.value("input_channels", c.input_channels);
  c.input_samples = j.value("input_samples", c.input_samples);
  if (j.contains("conv_feature_maps")) c.conv_feature_maps = j["conv_feature_maps"].get<std::vector<int>>();
  if (j.contains("convs_per_block")) c.convs_per_block = j["convs_per_block"].get<std::vector<int>>();
  if (j.contains("block_kernels")) {
    c.block_kernels.clear();
    for (const auto& k : j["block_kernels"]) c.block_kernels.emplace_back(k[0].get<int>(), k[1].get<int>());
  }
  if (j.contains("block_pool")) {
    c.block_pool.clear();
    for (const auto& p : j["block_pool"]) {
      const std::string s = p.get<std::string>();
      c.block_pool.push_back(s == "max" ? PoolKind::max : (s == "avg" ? PoolKind::avg : PoolKind::none));
    }
  }
  c.pool_width = j.value("pool_width", c.pool_width);
  if (j.contains("lstm_units")) c.lstm_units = j["lstm_units"].get<std::vector<int>>();
  if (j.contains("fc_units")) c.fc_units = j["fc_units"].get<std::vector<int>>();
  c.elu_alpha = j.value("elu_alpha", c.elu_alpha);
  c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
  c.bn_eps = j.value("bn_eps", c.bn_eps);
  c.validate();
  return c;
}

template <class T>
nn::Network<T> build_fatigue_net(const FatigueNetConfig& cfg) {
  cfg.validate();
  nn::Network<T> net;
  std::vector<int> shape = {1, 1, cfg.input_channels, cfg.input_samples};

  int in_ch = 1;
  for (size_t blk = 0; blk < cfg.conv_feature_maps.size(); ++blk) {
    const int maps = cfg.conv_feature_maps[blk];
    const auto [kh, kw] = cfg.block_kernels[blk];
    for (int c = 0; c < cfg.convs_per_block[blk]; ++c) {
      net.add(std::make_unique<nn::Conv2d<T>>(in_ch, maps, kh, kw));
      in_ch = maps;
    }
    net.add(std::make_unique<nn::BatchNorm2d<T>>(maps, cfg.bn_momentum, cfg.bn_eps));
    net.add(std::make_unique<nn::Elu<T>>(cfg.elu_alpha));
    if (cfg.block_pool[blk] == PoolKind::max)
      net.add(std::make_unique<nn::MaxPool2d<T>>(1, cfg.pool_width));
    else if (cfg.block_pool[blk] == PoolKind::avg)
      net.add(std::make_unique<nn::AvgPool2d<T>>(1, cfg.pool_width));
  }

  net.add(std::make_unique<nn::ConvToSeq<T>>());

  // Probe the conv-stack output shape to size the first LSTM.
  std::vector<int> cur = {1, 1, cfg.input_channels, cfg.input_samples};
  for (size_t i = 0; i < net.size(); ++i) cur = net.layer(i).output_shape(cur);
  int features = cur[2];

  for (int units : cfg.lstm_units) {
    net.add(std::make_unique<nn::Lstm<T>>(features, units));
    features = units;
  }
  net.add(std::make_unique<nn::TakeLastStep<T>>());

  int in_f = features;
  for (size_t i = 0; i < cfg.fc_units.size(); ++i) {
    net.add(std::make_unique<nn::Linear<T>>(in_f, cfg.fc_units[i]));
    if (i + 1 < cfg.fc_units.size()) net.add(std::make_unique<nn::Elu<T>>(cfg.elu_alpha));
    in_f = cfg.fc_units[i];
  }
  return net;
}

template nn::Network<float> build_fatigue_net<float>(const FatigueNetConfig&);
template nn::Network<double> build_fatigue_net<double>(const FatigueNetConfig&);

void InputStandardizer::fit(const EpochSet& set) {
  if (set.epochs.empty()) raise(ErrorCode::domain_error, "standardizer: empty epoch set");
  const int n_ch = set.epochs.front().n_channels;
  const int n_s = set.epochs.front().n_samples;
  mean.assign(n_ch, 0.0);
  std.assign(n_ch, 0.0);
  const double count = static_cast<double>(set.epochs.size()) * n_s;
  for (const auto& e : set.epochs)
    for (int c = 0; c < n_ch; ++c)
      for (int s = 0; s < n_s; ++s) mean[static_cast<size_t>(c)] += e.at(c, s);
  for (auto& m : mean) m /= count;
  for (const auto& e : set.epochs)
    for (int c = 0; c < n_ch; ++c)
      for (int s = 0; s < n_s; ++s) {
        const double d = e.at(c, s) - mean[static_cast<size_t>(c)];
        std[static_cast<size_t>(c)] += d * d;
      }
  for (auto& s : std) s = std::max(std::sqrt(s / count), 1e-9);
}

nlohmann::json InputStandardizer::to_json() const {
  return {{"mean", mean}, {"std", std}};
}

InputStandardizer InputStandardizer::from_json(const nlohmann::json& j) {
  InputStandardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  return s;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"optimizer", optimizer}, {"learning_rate", learning_rate}, {"momentum", momentum},
          {"batch_size", batch_size}, {"epochs", epochs},           {"patience", patience},
          {"seed", seed},             {"weight_init", weight_init}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.optimizer = j.value("optimizer", c.optimizer);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.weight_init = j.value("weight_init", c.weight_init);
  if (c.learning_rate <= 0.0) raise(ErrorCode::invalid_argument, "train: learning_rate must be > 0");
  if (c.batch_size < 1) raise(ErrorCode::invalid_argument, "train: batch_size must be >= 1");
  return c;
}

nlohmann::json TrainHistory::to_json() const {
  return {{"train_loss", train_loss}, {"train_acc", train_acc}, {"val_acc", val_acc},
          {"best_epoch", best_epoch}};
}

namespace {

// Copy a set of epochs into one standardized [N x 1 x C x S] batch tensor.
nn::Tensor<float> make_batch(const EpochSet& set, const std::vector<int>& idx, size_t lo,
                             size_t hi, const InputStandardizer& std) {
  const auto& first = set.epochs.front();
  const int c = first.n_channels, s = first.n_samples;
  nn::Tensor<float> x({static_cast<int>(hi - lo), 1, c, s});
  float* dst = x.ptr();
  for (size_t i = lo; i < hi; ++i) {
    const auto& e = set.epochs[static_cast<size_t>(idx[i])];
    for (int ci = 0; ci < c; ++ci) {
      const double m = std.mean[static_cast<size_t>(ci)];
      const double sd = std.std[static_cast<size_t>(ci)];
      for (int si = 0; si < s; ++si)
        *dst++ = static_cast<float>((e.at(ci, si) - m) / sd);
    }
  }
  return x;
}

std::vector<int> batch_labels(const EpochSet& set, const std::vector<int>& idx, size_t lo,
                              size_t hi) {
  std::vector<int> y;
  y.reserve(hi - lo);
  for (size_t i = lo; i < hi; ++i)
    y.push_back(static_cast<int>(set.epochs[static_cast<size_t>(idx[i])].label));
  return y;
}

std::vector<std::vector<float>> snapshot_params(nn::Network<float>& net) {
  std::vector<std::vector<float>> snap;
  for (auto* p : net.params()) snap.push_back(p->data);
  for (size_t i = 0; i < net.size(); ++i)
    for (auto& [name, buf] : net.layer(i).buffers()) snap.push_back(buf->data);
  return snap;
}

void restore_params(nn::Network<float>& net, const std::vector<std::vector<float>>& snap) {
  size_t k = 0;
  for (auto* p : net.params()) p->data = snap[k++];
  for (size_t i = 0; i < net.size(); ++i)
    for (auto& [name, buf] : net.layer(i).buffers()) buf->data = snap[k++];
}

}  // namespace

std::vector<int> TrainedModel::predict(const EpochSet& set, int batch_size) {
  std::vector<int> idx(set.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> out;
  out.reserve(set.size());
  for (size_t lo = 0; lo < idx.size(); lo += static_cast<size_t>(batch_size)) {
    const size_t hi = std::min(idx.size(), lo + static_cast<size_t>(batch_size));
    const auto x = make_batch(set, idx, lo, hi, standardizer);
    const auto logits = net.forward(x, /*training=*/false);
    const int k = logits.dim(1);
    for (int s = 0; s < logits.dim(0); ++s) {
      const float* row = logits.ptr() + static_cast<size_t>(s) * k;
      out.push_back(static_cast<int>(std::max_element(row, row + k) - row));
    }
  }
  return out;
}

double TrainedModel::accuracy(const EpochSet& set, int batch_size) {
  const auto preds = predict(set, batch_size);
  size_t correct = 0;
  for (size_t i = 0; i < set.size(); ++i)
    if (preds[i] == static_cast<int>(set.epochs[i].label)) ++correct;
  return set.size() ? static_cast<double>(correct) / static_cast<double>(set.size()) : 0.0;
}

TrainedModel train_fatigue_net(const FatigueNetConfig& cfg, const EpochSet& train,
                               const EpochSet& val, const TrainConfig& tc) {
  if (train.epochs.empty()) raise(ErrorCode::domain_error, "train: empty training set");
  {
    const auto counts = train.class_counts();
    int present = 0;
    for (int c : counts) present += c > 0 ? 1 : 0;
    if (present < 2)
      raise(ErrorCode::domain_error, "train: need at least 2 classes in the training set");
  }
  if (tc.learning_rate <= 0.0 && tc.optimizer != "adam" && tc.optimizer != "sgd_momentum")
    raise(ErrorCode::invalid_argument, "train: bad config");

  TrainedModel m;
  m.net_config = cfg;
  m.net = build_fatigue_net<float>(cfg);
  m.net.init(Rng::derive(tc.seed, {0x1157}));
  m.standardizer.fit(train);

  std::unique_ptr<nn::Optimizer<float>> opt;
  if (tc.optimizer == "adam")
    opt = std::make_unique<nn::Adam<float>>(tc.learning_rate);
  else if (tc.optimizer == "sgd_momentum")
    opt = std::make_unique<nn::SgdMomentum<float>>(tc.learning_rate, tc.momentum);
  else
    raise(ErrorCode::invalid_argument, "train: unknown optimizer '" + tc.optimizer + "'");

  Rng shuffle_rng(Rng::derive(tc.seed, {0x5u}));
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double best_val = -1.0;
  int since_best = 0;
  std::vector<std::vector<float>> best_snap;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    size_t correct = 0, seen = 0;
    size_t lo = 0;
    while (lo < order.size()) {
      size_t hi = std::min(order.size(), lo + static_cast<size_t>(tc.batch_size));
      // Batch-norm cannot take a singleton batch in training mode; fold a
      // trailing single sample into the previous batch.
      if (order.size() - hi == 1) hi = order.size();
      const auto x = make_batch(train, order, lo, hi, m.standardizer);
      const auto labels = batch_labels(train, order, lo, hi);
      m.net.zero_grads();
      const auto logits = m.net.forward(x, /*training=*/true);
      auto sx = nn::softmax_xent(logits, labels);
      loss_sum += sx.loss * static_cast<double>(labels.size());
      for (size_t s = 0; s < labels.size(); ++s) {
        const float* row = sx.probs.ptr() + s * 3;
        const int pred = static_cast<int>(std::max_element(row, row + 3) - row);
        if (pred == labels[s]) ++correct;
      }
      seen += labels.size();
      m.net.backward(sx.dlogits);
      const auto params = m.net.params();
      const auto grads = m.net.grads();
      opt->step(params, grads);
      lo = hi;
    }
    m.history.train_loss.push_back(loss_sum / static_cast<double>(seen));
    m.history.train_acc.push_back(static_cast<double>(correct) / static_cast<double>(seen));

    double vacc = 0.0;
    if (!val.epochs.empty()) vacc = m.accuracy(val);
    m.history.val_acc.push_back(vacc);

    if (vacc > best_val + 1e-12) {
      best_val = vacc;
      m.history.best_epoch = epoch;
      since_best = 0;
      best_snap = snapshot_params(m.net);
    } else if (++since_best >= tc.patience) {
      break;
    }
  }
  if (!best_snap.empty()) restore_params(m.net, best_snap);
  return m;
}

void TrainedModel::save(const std::string& path, const TrainConfig& tc) const {
  nlohmann::json meta;
  meta["net_config"] = net_config.to_json();
  meta["standardizer"] = standardizer.to_json();
  auto& self = const_cast<TrainedModel&>(*this);
  nn::save_network(self.net, meta, path);
  nlohmann::json side;
  side["train_config"] = tc.to_json();
  side["history"] = history.to_json();
  io::write_text_file(path + ".json", side.dump(2) + "\n");
}

TrainedModel TrainedModel::load(const std::string& path) {
  TrainedModel m;
  nlohmann::json meta;
  m.net = nn::load_network<float>(path, &meta);
  m.net_config = FatigueNetConfig::from_json(meta.at("net_config"));
  m.standardizer = InputStandardizer::from_json(meta.at("standardizer"));
  return m;
}

}  // namespace fatigue::model
