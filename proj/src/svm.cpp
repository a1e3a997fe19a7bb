#include "fatigue/svm.hpp"

#include <algorithm>
#include <cmath>

#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue::svm {

std::vector<double> SvmModel::decision(const std::vector<double>& x) const {
  if (x.size() != feat_mean.size())
    raise(ErrorCode::shape_error, "svm: feature dimension mismatch");
  std::vector<double> out(weights.size(), 0.0);
  for (size_t c = 0; c < weights.size(); ++c) {
    const auto& w = weights[c];
    double acc = w.back();  // bias
    for (size_t j = 0; j < x.size(); ++j)
      acc += w[j] * (x[j] - feat_mean[j]) / feat_std[j];
    out[c] = acc;
  }
  return out;
}

FatigueClass SvmModel::predict(const std::vector<double>& x) const {
  const auto d = decision(x);
  size_t best = 0;
  for (size_t c = 1; c < d.size(); ++c)
    if (d[c] > d[best]) best = c;
  return static_cast<FatigueClass>(best);
}

SvmModel train_psd_svm(const std::vector<std::vector<double>>& features,
                       const std::vector<FatigueClass>& labels, const SvmConfig& cfg) {
  if (features.empty() || features.size() != labels.size())
    raise(ErrorCode::domain_error, "svm: empty or mismatched training data");
  const size_t m = features.size();
  const size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) raise(ErrorCode::shape_error, "svm: ragged feature rows");
  if (cfg.lambda <= 0.0) raise(ErrorCode::invalid_argument, "svm: lambda must be > 0");

  SvmModel model;
  model.lambda = cfg.lambda;
  model.feat_mean.assign(dim, 0.0);
  model.feat_std.assign(dim, 0.0);
  for (const auto& f : features)
    for (size_t j = 0; j < dim; ++j) model.feat_mean[j] += f[j];
  for (auto& v : model.feat_mean) v /= static_cast<double>(m);
  for (const auto& f : features)
    for (size_t j = 0; j < dim; ++j) {
      const double d = f[j] - model.feat_mean[j];
      model.feat_std[j] += d * d;
    }
  double total_var = 0.0;
  for (auto& v : model.feat_std) {
    v = std::sqrt(v / static_cast<double>(m));
    total_var += v;
    v = std::max(v, 1e-12);
  }
  if (total_var == 0.0)
    raise(ErrorCode::domain_error, "svm: degenerate training set (all feature rows identical)");

  // Standardize once.
  std::vector<std::vector<double>> x(m, std::vector<double>(dim));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < dim; ++j)
      x[i][j] = (features[i][j] - model.feat_mean[j]) / model.feat_std[j];

  model.weights.assign(kNumClasses, std::vector<double>(dim + 1, 0.0));
  for (int cls = 0; cls < kNumClasses; ++cls) {
    auto& w = model.weights[static_cast<size_t>(cls)];
    Rng rng(Rng::derive(cfg.seed, {0x5477u, static_cast<uint64_t>(cls)}));
    for (int t = 1; t <= cfg.iterations; ++t) {
      const size_t i = static_cast<size_t>(rng.uniform_int(m));
      const double y = static_cast<int>(labels[i]) == cls ? 1.0 : -1.0;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      double margin = w[dim];  // bias times augmented 1
      for (size_t j = 0; j < dim; ++j) margin += w[j] * x[i][j];
      margin *= y;
      const double shrink = 1.0 - eta * cfg.lambda;
      for (auto& wj : w) wj *= shrink;
      if (margin < 1.0) {
        for (size_t j = 0; j < dim; ++j) w[j] += eta * y * x[i][j];
        w[dim] += eta * y;
      }
    }
    for (double v : w)
      if (!std::isfinite(v)) raise(ErrorCode::numeric_error, "svm: non-finite weights");
  }
  return model;
}

nlohmann::json SvmModel::to_json() const {
  return {{"weights", weights}, {"feat_mean", feat_mean}, {"feat_std", feat_std},
          {"lambda", lambda}};
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
  SvmModel m;
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.feat_mean = j.at("feat_mean").get<std::vector<double>>();
  m.feat_std = j.at("feat_std").get<std::vector<double>>();
  m.lambda = j.at("lambda").get<double>();
  return m;
}

void SvmModel::save(const std::string& path) const {
  io::write_text_file(path, to_json().dump(2) + "\n");
}

SvmModel SvmModel::load(const std::string& path) {
  return from_json(nlohmann::json::parse(io::read_text_file(path)));
}

}  // namespace fatigue::svm
