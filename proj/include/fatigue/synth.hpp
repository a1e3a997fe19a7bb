#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fatigue/core_types.hpp"

namespace fatigue::synth {

// Generator profile for one simulated subject. EEG channels carry 1/f
// background noise plus per-band oscillations; the theta/alpha amplitude on
// the occipital channels scales with the fatigue class of the current
// minute (NS: 1, LF: 1+g/2, HF: 1+g). Blink transients are shared between
// the vertical EOG channels and the frontal EEG channels.
struct SubjectProfile {
  std::string subject_id = "S1";
  double pink_exponent = 1.0;      // background 1/f^beta slope
  double bg_rms_uv = 4.0;          // background RMS per EEG channel
  double band_rms_uv[4] = {4.0, 6.0, 6.0, 2.5};  // delta, theta, alpha, beta
  double env_depth = 0.2;          // slow amplitude-envelope depth
  double signature_gain = 1.0;     // g
  double blink_rate_per_min = 14.0;
  double blink_amp_uv = 180.0;
  double eog_bg_rms_uv = 8.0;
  double kss_start = 2.0;          // fatigue trajectory drift endpoints
  double kss_end = 8.0;
  double miss_rate = 0.0;          // probability a minute's KSS entry is absent
};

struct SessionSpec {
  double minutes = 60.0;
  double fs = 1000.0;
  uint64_t seed = 0;
};

struct SessionData {
  RawRecording recording;
  std::vector<KssLabel> schedule;          // per minute, misses already filled
  std::vector<std::optional<int>> raw_kss; // pre-fill entries (absent = missed)
  std::vector<FatigueClass> classes;       // per minute
  std::vector<float> blink_waveform;       // ground truth at raw rate (tests)
};

SessionData generate_session(const SubjectProfile& profile, const SessionSpec& spec);

// Cohort with per-subject jittered profiles and derived seeds.
struct CohortSpec {
  int n_subjects = 10;
  SessionSpec session;
  SubjectProfile base_profile;
};

std::vector<SubjectProfile> cohort_profiles(const CohortSpec& spec, uint64_t base_seed);
std::vector<SessionData> generate_cohort(const CohortSpec& spec, uint64_t base_seed);

// schedule.csv: `minute,kss,class`
void save_schedule_csv(const SessionData& session, const std::string& path);
std::vector<FatigueClass> load_schedule_classes_csv(const std::string& path);

// Class-dependent amplitude multiplier on occipital theta/alpha.
double class_gain(FatigueClass c, double g);

}  // namespace fatigue::synth
