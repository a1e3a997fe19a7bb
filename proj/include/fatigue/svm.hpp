#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fatigue/core_types.hpp"
#include "fatigue/features.hpp"

namespace fatigue::svm {

struct SvmConfig {
  double lambda = 1e-4;   // Pegasos regularization
  int iterations = 60000; // stochastic subgradient steps per binary problem
  uint64_t seed = 0;
};

// Three one-vs-rest linear soft-margin SVMs trained with the Pegasos
// stochastic subgradient method on standardized band-power features.
struct SvmModel {
  // weights[c] has dim+1 entries: weight vector plus bias (augmented
  // constant feature).
  std::vector<std::vector<double>> weights;
  std::vector<double> feat_mean;  // feature standardization, fitted on train
  std::vector<double> feat_std;
  double lambda = 0.0;

  // Decision values for one (unstandardized) feature vector.
  std::vector<double> decision(const std::vector<double>& x) const;
  // argmax of decision values; ties resolve to the lowest class index.
  FatigueClass predict(const std::vector<double>& x) const;

  nlohmann::json to_json() const;
  static SvmModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static SvmModel load(const std::string& path);
};

SvmModel train_psd_svm(const std::vector<std::vector<double>>& features,
                       const std::vector<FatigueClass>& labels, const SvmConfig& cfg);

inline SvmModel train_psd_svm(const features::FeatureMatrix& fm, const SvmConfig& cfg) {
  std::vector<std::vector<double>> x;
  x.reserve(fm.rows.size());
  for (const auto& r : fm.rows) x.push_back(r.values);
  return train_psd_svm(x, fm.labels, cfg);
}

}  // namespace fatigue::svm
