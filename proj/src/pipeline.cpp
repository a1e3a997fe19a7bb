#include "fatigue/pipeline.hpp"

#include <cmath>
#include <filesystem>

#include "fatigue/dsp.hpp"
#include "fatigue/ica.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/topo_svg.hpp"

namespace fatigue::pipeline {

namespace {

uint64_t string_tag(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

EpochSet preprocess(const RawRecording& raw, const std::vector<FatigueClass>& minute_labels,
                    const std::string& subject_id, const RunConfig& cfg) {
  raw.validate();
  RawRecording rec = raw;

  if (cfg.dsp.notch_hz > 0.0) {
    if (cfg.dsp.notch_hz >= 0.5 * rec.fs)
      raise(ErrorCode::design_error, "preprocess: notch frequency at or above Nyquist");
    const auto notch = dsp::design_notch(cfg.dsp.notch_hz, cfg.dsp.notch_q, rec.fs);
    dsp::filtfilt_recording(notch, rec);
  }

  const auto bp =
      dsp::design_bandpass(cfg.dsp.bandpass_lo, cfg.dsp.bandpass_hi, cfg.dsp.bandpass_order, rec.fs);
  dsp::filtfilt_recording(bp, rec);

  const double ratio = rec.fs / cfg.dsp.target_fs;
  const int factor = static_cast<int>(std::llround(ratio));
  if (factor < 1 || std::fabs(ratio - factor) > 1e-9)
    raise(ErrorCode::domain_error, "preprocess: sample rate must be an integer multiple of target");
  if (factor > 1) rec = dsp::decimate_recording(rec, factor);

  if (cfg.ica.enabled) {
    ica::FastIcaParams params;
    params.max_iter = cfg.ica.max_iter;
    params.tol = cfg.ica.tol;
    ica::clean_recording(rec, Rng::derive(cfg.seed, {0x1caul, string_tag(subject_id)}),
                         cfg.ica.threshold, params);
  }

  return dsp::epochize(rec, minute_labels, subject_id);
}

CohortEval evaluate_cohort(const std::vector<EpochSet>& subject_sets, const RunConfig& cfg) {
  if (subject_sets.empty()) raise(ErrorCode::domain_error, "evaluate_cohort: no subjects");
  CohortEval eval;
  harness::CvOptions opts;
  opts.net = cfg.net;
  opts.train = cfg.train;
  opts.svm = cfg.svm;
  opts.feature_params = cfg.features;
  opts.jobs = cfg.jobs;

  for (size_t s = 0; s < subject_sets.size(); ++s) {
    const EpochSet& set = subject_sets[s];
    if (set.epochs.empty()) raise(ErrorCode::domain_error, "evaluate_cohort: empty epoch set");
    SubjectEval se;
    se.subject = set.epochs.front().subject_id;

    std::vector<FatigueClass> labels;
    labels.reserve(set.size());
    for (const auto& e : set.epochs) labels.push_back(e.label);
    const uint64_t plan_seed = Rng::derive(cfg.seed, {0xc50u, static_cast<uint64_t>(s)});
    const auto plan =
        harness::make_fold_plan(labels, cfg.cv.k, cfg.cv.repeats, plan_seed, cfg.cv.stratified);

    harness::CvOptions subj_opts = opts;
    subj_opts.train.seed = Rng::derive(cfg.seed, {0x7e57u, static_cast<uint64_t>(s)});
    subj_opts.svm.seed = Rng::derive(cfg.seed, {0x5e3du, static_cast<uint64_t>(s)});

    se.hybrid = harness::run_cv(set, harness::ModelKind::hybrid, plan, subj_opts);
    se.psd_svm = harness::run_cv(set, harness::ModelKind::psd_svm, plan, subj_opts);
    eval.subjects.push_back(std::move(se));
  }

  harness::AccuracyTable table;
  table.model_names = {"psd_svm", "hybrid"};
  for (const auto& se : eval.subjects) {
    table.subjects.push_back(se.subject);
    table.accuracies.push_back({se.psd_svm.mean_accuracy, se.hybrid.mean_accuracy});
  }
  eval.report = harness::aggregate_table(table);

  if (eval.subjects.size() >= 5) {
    std::vector<double> hybrid_acc, svm_acc, chance(eval.subjects.size(), 1.0 / 3.0);
    for (const auto& se : eval.subjects) {
      hybrid_acc.push_back(se.hybrid.mean_accuracy);
      svm_acc.push_back(se.psd_svm.mean_accuracy);
    }
    eval.p_hybrid_vs_chance = harness::paired_significance(hybrid_acc, chance);
    eval.p_svm_vs_chance = harness::paired_significance(svm_acc, chance);
  }
  return eval;
}

void save_cohort_report(const CohortEval& eval, const std::string& csv_path,
                        const std::string& json_path) {
  harness::save_report_csv(eval.report, csv_path);
  std::vector<nlohmann::json> details;
  for (const auto& se : eval.subjects) {
    nlohmann::json d;
    d["subject"] = se.subject;
    d["hybrid"] = se.hybrid.to_json();
    d["psd_svm"] = se.psd_svm.to_json();
    details.push_back(d);
  }
  harness::TableReport rep = eval.report;
  nlohmann::json extra;
  harness::save_report_json(rep, details, json_path);
}

void write_topo_outputs(const EpochSet& set, const RunConfig& cfg, const std::string& out_dir,
                        const std::string& tag) {
  std::filesystem::create_directories(out_dir);
  std::vector<features::TopoStat> all;
  for (const auto& band : standard_bands()) {
    const auto stats = features::topo_scan(set, band, cfg.features.welch);
    const auto means = features::band_class_means(set, band, cfg.features.welch);
    topo::save_topo_svg(set.montage, means, stats,
                        out_dir + "/topo_" + tag + "_" + band.name + ".svg");
    all.insert(all.end(), stats.begin(), stats.end());
  }
  features::save_topo_csv(all, out_dir + "/topo_" + tag + ".csv");
}

harness::TableReport evaluate_fixture(const std::string& fixture_csv, bool check) {
  const auto table = harness::load_accuracy_table_csv(fixture_csv);
  const auto report = harness::aggregate_table(table);
  if (check) {
    const size_t last = report.col_mean.size() - 1;
    const double mean = report.col_mean[last];
    const double std = report.col_std[last];
    if (std::fabs(mean - 0.8801) > 5e-5)
      raise(ErrorCode::check_failed,
            "fixture check failed: last-column mean " + std::to_string(mean) +
                " not within 5e-5 of 0.8801");
    if (std::fabs(std - 0.0278) > 5e-5)
      raise(ErrorCode::check_failed, "fixture check failed: last-column std " +
                                         std::to_string(std) + " not within 5e-5 of 0.0278");
    for (size_t c = 0; c + 1 < report.p_vs_last.size(); ++c)
      if (!report.p_vs_last[c] || *report.p_vs_last[c] >= 0.05)
        raise(ErrorCode::check_failed,
              "fixture check failed: p-value vs column '" + report.table.model_names[c] +
                  "' not below 0.05");
  }
  return report;
}

}  // namespace fatigue::pipeline
