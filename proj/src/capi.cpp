#include "fatigue/capi.h"

#include <cstring>
#include <numeric>
#include <optional>
#include <string>

#include "fatigue/dsp.hpp"
#include "fatigue/pipeline.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/stats.hpp"

using namespace fatigue;

struct ftg_config {
  RunConfig v;
};
struct ftg_montage {
  Montage v;
};
struct ftg_recording {
  RawRecording v;
};
struct ftg_schedule {
  std::vector<KssLabel> labels;
  std::vector<FatigueClass> classes;
};
struct ftg_epochset {
  EpochSet v;
};
struct ftg_model {
  std::string kind;  // "hybrid" | "psd_svm"
  std::optional<model::TrainedModel> hybrid;
  std::optional<svm::SvmModel> svm_model;
  model::TrainConfig train_config;
};

namespace {

thread_local std::string g_last_error;

int set_error(ErrorCode code, const std::string& msg) {
  g_last_error = msg;
  return static_cast<int>(code);
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return FTG_OK;
  } catch (const Error& e) {
    return set_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return set_error(ErrorCode::internal_error, e.what());
  } catch (...) {
    return set_error(ErrorCode::internal_error, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool cond, const char* what) {
  if (!cond) raise(ErrorCode::invalid_argument, std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

const char* ftg_version(void) { return "0.1.0"; }

const char* ftg_status_name(int status) {
  if (status == FTG_OK) return "ok";
  return error_code_name(static_cast<ErrorCode>(status));
}

const char* ftg_last_error(void) { return g_last_error.c_str(); }

void ftg_string_free(char* s) { std::free(s); }

/* --- config -------------------------------------------------------------- */

int ftg_config_create_default(ftg_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ftg_config{RunConfig::defaults()};
  });
}

int ftg_config_load(const char* path, ftg_config** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = new ftg_config{RunConfig::load(path)};
  });
}

int ftg_config_parse(const char* json_text, ftg_config** out) {
  return guarded([&] {
    require(json_text && out, "json_text/out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      raise(ErrorCode::format_error, std::string("invalid JSON: ") + e.what());
    }
    *out = new ftg_config{RunConfig::from_json(j)};
  });
}

int ftg_config_dump(const ftg_config* cfg, char** json_out) {
  return guarded([&] {
    require(cfg && json_out, "cfg/json_out");
    *json_out = dup_string(cfg->v.resolved_text());
  });
}

int ftg_config_hash(const ftg_config* cfg, char** hash_out) {
  return guarded([&] {
    require(cfg && hash_out, "cfg/hash_out");
    *hash_out = dup_string(cfg->v.hash());
  });
}

int ftg_config_set_seed(ftg_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->v.seed = seed;
  });
}

int ftg_config_set_jobs(ftg_config* cfg, int jobs) {
  return guarded([&] {
    require(cfg, "cfg");
    if (jobs < 1) raise(ErrorCode::invalid_argument, "jobs must be >= 1");
    cfg->v.jobs = jobs;
  });
}

void ftg_config_free(ftg_config* cfg) { delete cfg; }

/* --- montage ------------------------------------------------------------- */

int ftg_montage_standard(ftg_montage** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ftg_montage{Montage::standard_cap()};
  });
}

int ftg_montage_load_csv(const char* path, ftg_montage** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = new ftg_montage{Montage::load_csv(path)};
  });
}

int ftg_montage_save_csv(const ftg_montage* m, const char* path) {
  return guarded([&] {
    require(m && path, "montage/path");
    m->v.save_csv(path);
  });
}

int ftg_montage_channel_count(const ftg_montage* m, int* out) {
  return guarded([&] {
    require(m && out, "montage/out");
    *out = static_cast<int>(m->v.size());
  });
}

int ftg_montage_eeg_count(const ftg_montage* m, int* out) {
  return guarded([&] {
    require(m && out, "montage/out");
    *out = static_cast<int>(m->v.n_eeg());
  });
}

int ftg_montage_channel_name(const ftg_montage* m, int index, char** name_out) {
  return guarded([&] {
    require(m && name_out, "montage/name_out");
    if (index < 0 || static_cast<size_t>(index) >= m->v.size())
      raise(ErrorCode::domain_error, "channel index out of range");
    *name_out = dup_string(m->v.channel(static_cast<size_t>(index)).name);
  });
}

void ftg_montage_free(ftg_montage* m) { delete m; }

/* --- synth ---------------------------------------------------------------- */

int ftg_synth_session(const ftg_config* cfg, int subject_index, ftg_recording** rec_out,
                      ftg_schedule** schedule_out) {
  return guarded([&] {
    require(cfg && rec_out && schedule_out, "cfg/rec_out/schedule_out");
    const auto& sc = cfg->v.synth;
    if (subject_index < 0 || subject_index >= sc.subjects)
      raise(ErrorCode::domain_error, "subject index out of configured cohort range");
    synth::CohortSpec cohort;
    cohort.n_subjects = sc.subjects;
    cohort.session.minutes = sc.minutes;
    cohort.session.fs = sc.fs;
    cohort.base_profile = sc.profile;
    const auto profiles = synth::cohort_profiles(cohort, cfg->v.seed);
    synth::SessionSpec spec = cohort.session;
    spec.seed = Rng::derive(cfg->v.seed, {0x5e55u, static_cast<uint64_t>(subject_index)});
    auto session = synth::generate_session(profiles[static_cast<size_t>(subject_index)], spec);
    *rec_out = new ftg_recording{std::move(session.recording)};
    *schedule_out = new ftg_schedule{std::move(session.schedule), std::move(session.classes)};
  });
}

int ftg_schedule_save_csv(const ftg_schedule* s, const char* path) {
  return guarded([&] {
    require(s && path, "schedule/path");
    synth::SessionData tmp;
    tmp.schedule = s->labels;
    tmp.classes = s->classes;
    synth::save_schedule_csv(tmp, path);
  });
}

int ftg_schedule_load_csv(const char* path, ftg_schedule** out) {
  return guarded([&] {
    require(path && out, "path/out");
    auto sched = new ftg_schedule{};
    sched->classes = synth::load_schedule_classes_csv(path);
    for (size_t m = 0; m < sched->classes.size(); ++m) {
      // Level is not needed downstream; reconstruct a representative one.
      const int level = sched->classes[m] == FatigueClass::NS   ? 2
                        : sched->classes[m] == FatigueClass::LF ? 5
                                                                : 8;
      sched->labels.push_back({level, static_cast<int>(m)});
    }
    *out = sched;
  });
}

int ftg_schedule_minutes(const ftg_schedule* s, int* out) {
  return guarded([&] {
    require(s && out, "schedule/out");
    *out = static_cast<int>(s->classes.size());
  });
}

void ftg_schedule_free(ftg_schedule* s) { delete s; }

/* --- recording -------------------------------------------------------------- */

int ftg_recording_save(const ftg_recording* rec, const char* path) {
  return guarded([&] {
    require(rec && path, "rec/path");
    dsp::save_recording(rec->v, path);
  });
}

int ftg_recording_load(const char* path, ftg_recording** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = new ftg_recording{dsp::load_recording(path)};
  });
}

int ftg_recording_info(const ftg_recording* rec, uint32_t* n_channels, uint64_t* n_samples,
                       double* fs) {
  return guarded([&] {
    require(rec, "rec");
    if (n_channels) *n_channels = static_cast<uint32_t>(rec->v.n_channels());
    if (n_samples) *n_samples = rec->v.n_samples;
    if (fs) *fs = rec->v.fs;
  });
}

void ftg_recording_free(ftg_recording* rec) { delete rec; }

/* --- preprocess -------------------------------------------------------------- */

int ftg_preprocess(const ftg_config* cfg, const ftg_recording* rec, const ftg_schedule* schedule,
                   const char* subject_id, ftg_epochset** out) {
  return guarded([&] {
    require(cfg && rec && schedule && subject_id && out, "cfg/rec/schedule/subject_id/out");
    *out = new ftg_epochset{
        pipeline::preprocess(rec->v, schedule->classes, subject_id, cfg->v)};
  });
}

/* --- epochs ------------------------------------------------------------------ */

int ftg_epochset_save(const ftg_epochset* set, const char* path) {
  return guarded([&] {
    require(set && path, "set/path");
    set->v.save(path);
  });
}

int ftg_epochset_load(const char* path, ftg_epochset** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = new ftg_epochset{EpochSet::load(path)};
  });
}

int ftg_epochset_info(const ftg_epochset* set, uint64_t* n_epochs, int* n_channels,
                      int* n_samples, double* fs) {
  return guarded([&] {
    require(set, "set");
    if (n_epochs) *n_epochs = set->v.size();
    if (n_channels) *n_channels = set->v.epochs.empty() ? 0 : set->v.epochs.front().n_channels;
    if (n_samples) *n_samples = set->v.epochs.empty() ? 0 : set->v.epochs.front().n_samples;
    if (fs) *fs = set->v.fs;
  });
}

int ftg_epochset_class_counts(const ftg_epochset* set, int counts_out[3]) {
  return guarded([&] {
    require(set && counts_out, "set/counts_out");
    const auto counts = set->v.class_counts();
    for (int c = 0; c < kNumClasses; ++c) counts_out[c] = counts[static_cast<size_t>(c)];
  });
}

int ftg_epochset_split(const ftg_epochset* set, double val_fraction, uint64_t seed,
                       ftg_epochset** train_out, ftg_epochset** val_out) {
  return guarded([&] {
    require(set && train_out && val_out, "set/train_out/val_out");
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
      raise(ErrorCode::domain_error, "val_fraction must be in (0,1)");
    // Stratified: shuffle each class, take the leading fraction as validation.
    std::vector<size_t> val_idx, train_idx;
    Rng rng(Rng::derive(seed, {0x59117u}));
    for (int c = 0; c < kNumClasses; ++c) {
      std::vector<size_t> cls;
      for (size_t i = 0; i < set->v.size(); ++i)
        if (static_cast<int>(set->v.epochs[i].label) == c) cls.push_back(i);
      rng.shuffle(cls);
      const size_t n_val = static_cast<size_t>(val_fraction * static_cast<double>(cls.size()));
      for (size_t i = 0; i < cls.size(); ++i)
        (i < n_val ? val_idx : train_idx).push_back(cls[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    auto make = [&](const std::vector<size_t>& idx) {
      auto* s = new ftg_epochset{};
      s->v.fs = set->v.fs;
      s->v.montage = set->v.montage;
      for (size_t i : idx) s->v.epochs.push_back(set->v.epochs[i]);
      return s;
    };
    *train_out = make(train_idx);
    *val_out = make(val_idx);
  });
}

void ftg_epochset_free(ftg_epochset* set) { delete set; }

/* --- features ------------------------------------------------------------------ */

int ftg_features_csv(const ftg_config* cfg, const ftg_epochset* set, const char* path) {
  return guarded([&] {
    require(cfg && set && path, "cfg/set/path");
    const auto fm = features::compute_features(set->v, cfg->v.features);
    features::save_features_csv(fm, path);
  });
}

int ftg_topo_outputs(const ftg_config* cfg, const ftg_epochset* set, const char* out_dir,
                     const char* tag) {
  return guarded([&] {
    require(cfg && set && out_dir && tag, "cfg/set/out_dir/tag");
    pipeline::write_topo_outputs(set->v, cfg->v, out_dir, tag);
  });
}

/* --- models ----------------------------------------------------------------------- */

int ftg_train_hybrid(const ftg_config* cfg, const ftg_epochset* train, const ftg_epochset* val,
                     ftg_model** out) {
  return guarded([&] {
    require(cfg && train && out, "cfg/train/out");
    auto* m = new ftg_model{};
    m->kind = "hybrid";
    m->train_config = cfg->v.train;
    static const EpochSet empty_val;
    const EpochSet& v = val ? val->v : empty_val;
    m->hybrid = model::train_fatigue_net(cfg->v.net, train->v, v, cfg->v.train);
    *out = m;
  });
}

int ftg_train_svm(const ftg_config* cfg, const ftg_epochset* train, ftg_model** out) {
  return guarded([&] {
    require(cfg && train && out, "cfg/train/out");
    auto* m = new ftg_model{};
    m->kind = "psd_svm";
    const auto fm = features::compute_features(train->v, cfg->v.features);
    m->svm_model = svm::train_psd_svm(fm, cfg->v.svm);
    *out = m;
  });
}

int ftg_model_kind(const ftg_model* m, char** kind_out) {
  return guarded([&] {
    require(m && kind_out, "model/kind_out");
    *kind_out = dup_string(m->kind);
  });
}

int ftg_model_save(const ftg_model* m, const char* path) {
  return guarded([&] {
    require(m && path, "model/path");
    if (m->kind == "hybrid")
      m->hybrid->save(path, m->train_config);
    else
      m->svm_model->save(path);
  });
}

int ftg_model_load_hybrid(const char* path, ftg_model** out) {
  return guarded([&] {
    require(path && out, "path/out");
    auto* m = new ftg_model{};
    m->kind = "hybrid";
    m->hybrid = model::TrainedModel::load(path);
    *out = m;
  });
}

int ftg_model_load_svm(const char* path, ftg_model** out) {
  return guarded([&] {
    require(path && out, "path/out");
    auto* m = new ftg_model{};
    m->kind = "psd_svm";
    m->svm_model = svm::SvmModel::load(path);
    *out = m;
  });
}

namespace {

std::vector<int> predict_epochs(ftg_model* m, const RunConfig& cfg, const EpochSet& set) {
  if (m->kind == "hybrid") return m->hybrid->predict(set);
  const auto fm = features::compute_features(set, cfg.features);
  std::vector<int> out;
  out.reserve(fm.rows.size());
  for (const auto& r : fm.rows)
    out.push_back(static_cast<int>(m->svm_model->predict(r.values)));
  return out;
}

}  // namespace

int ftg_model_accuracy(ftg_model* m, const ftg_config* cfg, const ftg_epochset* set,
                       double* accuracy_out) {
  return guarded([&] {
    require(m && cfg && set && accuracy_out, "model/cfg/set/accuracy_out");
    const auto preds = predict_epochs(m, cfg->v, set->v);
    size_t correct = 0;
    for (size_t i = 0; i < set->v.size(); ++i)
      if (preds[i] == static_cast<int>(set->v.epochs[i].label)) ++correct;
    *accuracy_out =
        set->v.size() ? static_cast<double>(correct) / static_cast<double>(set->v.size()) : 0.0;
  });
}

int ftg_model_predict(ftg_model* m, const ftg_config* cfg, const ftg_epochset* set,
                      int* labels_out) {
  return guarded([&] {
    require(m && cfg && set && labels_out, "model/cfg/set/labels_out");
    const auto preds = predict_epochs(m, cfg->v, set->v);
    std::copy(preds.begin(), preds.end(), labels_out);
  });
}

int ftg_model_history_json(const ftg_model* m, char** json_out) {
  return guarded([&] {
    require(m && json_out, "model/json_out");
    if (m->kind != "hybrid")
      raise(ErrorCode::domain_error, "history is only recorded for the hybrid model");
    *json_out = dup_string(m->hybrid->history.to_json().dump(2));
  });
}

void ftg_model_free(ftg_model* m) { delete m; }

/* --- evaluation --------------------------------------------------------------------- */

int ftg_evaluate_cohort(const ftg_config* cfg, const char* const* epochset_paths, int n_paths,
                        const char* csv_out, const char* json_out, double* hybrid_mean_out,
                        double* svm_mean_out, double* p_hybrid_vs_chance_out,
                        double* p_svm_vs_chance_out) {
  return guarded([&] {
    require(cfg && epochset_paths && csv_out && json_out, "cfg/paths/csv_out/json_out");
    if (n_paths < 1) raise(ErrorCode::domain_error, "need at least one epoch set");
    std::vector<EpochSet> sets;
    for (int i = 0; i < n_paths; ++i) sets.push_back(EpochSet::load(epochset_paths[i]));
    const auto eval = pipeline::evaluate_cohort(sets, cfg->v);
    pipeline::save_cohort_report(eval, csv_out, json_out);
    if (hybrid_mean_out) *hybrid_mean_out = eval.report.col_mean.back();
    if (svm_mean_out) *svm_mean_out = eval.report.col_mean.front();
    if (p_hybrid_vs_chance_out) *p_hybrid_vs_chance_out = eval.p_hybrid_vs_chance;
    if (p_svm_vs_chance_out) *p_svm_vs_chance_out = eval.p_svm_vs_chance;
    int failed = 0;
    for (const auto& se : eval.subjects) failed += se.hybrid.failed_folds + se.psd_svm.failed_folds;
    if (failed > 0)
      raise(ErrorCode::check_failed, std::to_string(failed) + " folds failed; see " +
                                         std::string(json_out));
  });
}

int ftg_fixture_eval(const char* fixture_csv, int check, const char* csv_out,
                     char** summary_json_out) {
  return guarded([&] {
    require(fixture_csv, "fixture_csv");
    const auto report = pipeline::evaluate_fixture(fixture_csv, check != 0);
    if (csv_out) harness::save_report_csv(report, csv_out);
    if (summary_json_out) {
      nlohmann::json j;
      j["models"] = report.table.model_names;
      j["mean"] = report.col_mean;
      j["std"] = report.col_std;
      auto pv = nlohmann::json::array();
      for (const auto& p : report.p_vs_last)
        pv.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
      j["p_vs_last"] = pv;
      *summary_json_out = dup_string(j.dump(2));
    }
  });
}

int ftg_paired_significance(const double* a, const double* b, int n, double* p_out) {
  return guarded([&] {
    require(a && b && p_out, "a/b/p_out");
    if (n < 5) raise(ErrorCode::domain_error, "need n >= 5 pairs");
    *p_out = stats::wilcoxon_signed_rank(std::span<const double>(a, static_cast<size_t>(n)),
                                         std::span<const double>(b, static_cast<size_t>(n)));
  });
}

} /* extern "C" */
