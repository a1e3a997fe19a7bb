#pragma once

#include <string>
#include <vector>

#include "fatigue/harness.hpp"
#include "fatigue/runconfig.hpp"
#include "fatigue/synth.hpp"

namespace fatigue::pipeline {

// Notch -> zero-phase band-pass -> decimation -> (optional) ICA cleanup ->
// 1 s epochs of the EEG channels.
EpochSet preprocess(const RawRecording& raw, const std::vector<FatigueClass>& minute_labels,
                    const std::string& subject_id, const RunConfig& cfg);

// Per-subject cross-validation of both models over a cohort of epoch sets.
struct SubjectEval {
  std::string subject;
  harness::CvResult hybrid;
  harness::CvResult psd_svm;
};

struct CohortEval {
  std::vector<SubjectEval> subjects;
  harness::TableReport report;  // columns: psd_svm, hybrid
  double p_hybrid_vs_chance = 1.0;
  double p_svm_vs_chance = 1.0;
};

CohortEval evaluate_cohort(const std::vector<EpochSet>& subject_sets, const RunConfig& cfg);

// Table-style report files for a cohort evaluation.
void save_cohort_report(const CohortEval& eval, const std::string& csv_path,
                        const std::string& json_path);

// Topography outputs: the per-band statistics CSV plus one SVG per band.
void write_topo_outputs(const EpochSet& set, const RunConfig& cfg, const std::string& out_dir,
                        const std::string& tag);

// Accuracy-table fixture evaluation: aggregate per-subject accuracies and
// test the last column against every other. When `check` is set, verify the
// bundled reference values (mean 0.8801, std 0.0278 of the last column within
// 5e-5; every p-value < 0.05) and raise on mismatch.
harness::TableReport evaluate_fixture(const std::string& fixture_csv, bool check);

}  // namespace fatigue::pipeline
