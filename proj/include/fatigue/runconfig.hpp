#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "fatigue/features.hpp"
#include "fatigue/ica.hpp"
#include "fatigue/model.hpp"
#include "fatigue/svm.hpp"
#include "fatigue/synth.hpp"

namespace fatigue {

struct DspConfig {
  double bandpass_lo = 1.0;
  double bandpass_hi = 50.0;
  int bandpass_order = 2;
  double notch_hz = 60.0;
  double notch_q = 30.0;
  double target_fs = 100.0;
};

struct IcaConfig {
  bool enabled = true;
  double threshold = 0.6;
  int max_iter = 500;
  double tol = 1e-6;
};

struct SynthConfig {
  std::string preset = "desk";  // desk | paper | custom
  int subjects = 10;
  double minutes = 10.0;
  double fs = 200.0;
  synth::SubjectProfile profile;
};

struct CvConfig {
  int k = 5;
  int repeats = 4;
  bool stratified = true;
};

// Every tunable of every stage, loaded from one strict JSON document.
// Unknown keys are rejected; the fully resolved config is written next to
// each command's outputs.
struct RunConfig {
  uint64_t seed = 42;
  int jobs = 1;
  SynthConfig synth;
  DspConfig dsp;
  IcaConfig ica;
  features::EpochFeatureParams features;
  model::FatigueNetConfig net;
  model::TrainConfig train;
  svm::SvmConfig svm;
  CvConfig cv;

  static RunConfig defaults() { return {}; }
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  std::string resolved_text() const;  // canonical pretty dump
  std::string hash() const;           // FNV-1a 64 over the canonical dump
};

}  // namespace fatigue
