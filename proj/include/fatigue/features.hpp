#pragma once

#include <span>
#include <string>
#include <vector>

#include "fatigue/core_types.hpp"

namespace fatigue::features {

struct Psd {
  std::vector<double> freqs;  // Hz, one-sided
  std::vector<double> psd;    // power / Hz
};

struct WelchParams {
  int seg_len = 100;      // samples (1 s at 100 Hz)
  double overlap = 0.5;   // fraction of seg_len
};

// Welch PSD: Hann window, per-segment constant detrend, one-sided output.
// The integral over frequency approximates the signal variance.
Psd welch_psd(std::span<const double> x, double fs, const WelchParams& params = {});

// Trapezoidal integral of the PSD over [band.lo, band.hi).
double band_power(const Psd& psd, const BandDef& band);

struct FeatureVector {
  std::vector<double> values;  // n_eeg * 4, channel-major (ch0: d,t,a,b; ch1: ...)
  bool log_scaled = true;
};

struct EpochFeatureParams {
  WelchParams welch;
  bool log_scaled = true;  // log10(power + 1e-12)
};

// Band powers of every channel of one epoch: the PSD-SVM feature vector.
FeatureVector epoch_features(const Epoch& epoch, double fs,
                             const EpochFeatureParams& params = {});

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<FatigueClass> labels;
  std::vector<std::string> subjects;
  std::vector<int> minutes;
  std::vector<std::string> column_names;  // "<ch>_<band>"
};

FeatureMatrix compute_features(const EpochSet& set, const EpochFeatureParams& params = {});
void save_features_csv(const FeatureMatrix& fm, const std::string& path);

struct TopoStat {
  std::string channel;
  BandDef band;
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < 0.05
};

// Per-channel Kruskal-Wallis test of band power across the three classes.
// Requires all three classes present with at least 2 epochs each.
std::vector<TopoStat> topo_scan(const EpochSet& set, const BandDef& band,
                                const WelchParams& params = {});

void save_topo_csv(const std::vector<TopoStat>& stats, const std::string& path);

// Mean linear band power per (class, channel), used for scalp map coloring.
struct BandClassMeans {
  BandDef band;
  // means[class][channel]
  std::vector<std::vector<double>> means;
};

BandClassMeans band_class_means(const EpochSet& set, const BandDef& band,
                                const WelchParams& params = {});

}  // namespace fatigue::features
