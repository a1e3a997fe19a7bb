// Command-line front end for the fatigue pipeline. All functionality goes
// through the C API in fatigue/capi.h; this file only parses arguments,
// shuttles file paths, and maps statuses to exit codes (0 ok, 2 bad input,
// 3 failed check).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fatigue/capi.h"

namespace fs = std::filesystem;

namespace {

int exit_code_for(int status) {
  if (status == FTG_OK) return 0;
  return status == FTG_ERR_CHECK_FAILED ? 3 : 2;
}

[[noreturn]] void fail(const std::string& stage, int status) {
  std::fprintf(stderr, "error [%s] %s: %s\n", stage.c_str(), ftg_status_name(status),
               ftg_last_error());
  std::exit(exit_code_for(status));
}

void check(int status, const std::string& stage) {
  if (status != FTG_OK) fail(stage, status);
}

struct ConfigHandle {
  ftg_config* ptr = nullptr;
  ~ConfigHandle() { ftg_config_free(ptr); }
};

ftg_config* load_config(const std::string& path, uint64_t seed_override, bool has_seed,
                        int jobs_override) {
  ftg_config* cfg = nullptr;
  if (path.empty()) {
    check(ftg_config_create_default(&cfg), "config");
  } else {
    check(ftg_config_load(path.c_str(), &cfg), "config");
  }
  if (has_seed) check(ftg_config_set_seed(cfg, seed_override), "config");
  if (jobs_override > 0) check(ftg_config_set_jobs(cfg, jobs_override), "config");
  return cfg;
}

// Every command drops the fully resolved config and its hash next to its
// outputs so a run can be reproduced from the artifacts alone.
void write_run_metadata(ftg_config* cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  char* dump = nullptr;
  check(ftg_config_dump(cfg, &dump), "config");
  std::ofstream((out_dir / "run_config.json").string()) << dump;
  char* hash = nullptr;
  check(ftg_config_hash(cfg, &hash), "config");
  std::ofstream((out_dir / "run_meta.json").string())
      << "{\n  \"config_hash\": \"" << hash << "\",\n  \"tool_version\": \"" << ftg_version()
      << "\"\n}\n";
  ftg_string_free(dump);
  ftg_string_free(hash);
}

std::string subject_id(int index) { return "S" + std::to_string(index + 1); }

std::vector<std::string> list_epoch_files(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".fepo")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG fatigue-classification pipeline (synthetic data, hybrid CNN-LSTM + PSD-SVM)"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  bool has_seed = false;
  int jobs = 0;
  app.add_option("--config", config_path, "Run-config JSON (defaults used when absent)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--jobs", jobs, "Override worker count for fold/subject parallelism");

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort of raw sessions");
  std::string synth_out = "out/synth";
  int synth_subjects = -1;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--subjects", synth_subjects, "Generate only the first N subjects");

  // preprocess ---------------------------------------------------------------
  auto* prep = app.add_subcommand("preprocess", "Filter, decimate, clean and epoch raw sessions");
  std::string prep_in = "out/synth", prep_out = "out/epochs";
  prep->add_option("--in", prep_in, "Directory with sNN_raw.eegr + sNN_schedule.csv pairs");
  prep->add_option("--out", prep_out, "Output directory for .fepo epoch files");

  // features -----------------------------------------------------------------
  auto* feat = app.add_subcommand("features", "Export band-power feature CSV for an epoch set");
  std::string feat_epochs, feat_out = "out/features";
  feat->add_option("--epochs", feat_epochs, "Epoch file (.fepo)")->required();
  feat->add_option("--out", feat_out, "Output directory");

  // train ---------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a model on an epoch set");
  std::string train_epochs, train_model = "hybrid", train_out = "out/train";
  double val_fraction = 0.2;
  train->add_option("--epochs", train_epochs, "Epoch file (.fepo)")->required();
  train->add_option("--model", train_model, "hybrid | psd_svm")
      ->check(CLI::IsMember({"hybrid", "psd_svm"}));
  train->add_option("--out", train_out, "Output directory");
  train->add_option("--val-fraction", val_fraction, "Held-out fraction for early stopping");

  // eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Cross-validated cohort evaluation or fixture report");
  std::string eval_in, eval_out = "out/eval", fixture;
  bool fixture_check = false;
  eval->add_option("--in", eval_in, "Directory with .fepo epoch files (one per subject)");
  eval->add_option("--out", eval_out, "Output directory");
  eval->add_option("--fixture", fixture, "Aggregate a bundled accuracy-table CSV instead");
  eval->add_flag("--check", fixture_check, "Verify the bundled fixture's reference statistics");

  // topo ----------------------------------------------------------------------
  auto* topo = app.add_subcommand("topo", "Per-band scalp statistics and SVG maps");
  std::string topo_epochs, topo_out = "out/topo", topo_tag = "scan";
  topo->add_option("--epochs", topo_epochs, "Epoch file (.fepo)")->required();
  topo->add_option("--out", topo_out, "Output directory");
  topo->add_option("--tag", topo_tag, "Output file tag");

  CLI11_PARSE(app, argc, argv);
  has_seed = seed_opt->count() > 0;

  ConfigHandle cfg;
  cfg.ptr = load_config(config_path, seed, has_seed, jobs);

  if (*synth) {
    write_run_metadata(cfg.ptr, synth_out);
    char* dump = nullptr;
    check(ftg_config_dump(cfg.ptr, &dump), "synth");
    const std::string cfg_text = dump;
    ftg_string_free(dump);
    // Subject count comes from the config; --subjects trims the cohort.
    int n = 0;
    {
      const auto pos = cfg_text.find("\"subjects\":");
      n = pos == std::string::npos ? 10 : std::atoi(cfg_text.c_str() + pos + 11);
    }
    if (synth_subjects > 0 && synth_subjects < n) n = synth_subjects;
    for (int s = 0; s < n; ++s) {
      ftg_recording* rec = nullptr;
      ftg_schedule* sched = nullptr;
      check(ftg_synth_session(cfg.ptr, s, &rec, &sched), "synth");
      const fs::path base = fs::path(synth_out) / subject_id(s);
      check(ftg_recording_save(rec, (base.string() + "_raw.eegr").c_str()), "synth");
      check(ftg_schedule_save_csv(sched, (base.string() + "_schedule.csv").c_str()), "synth");
      uint32_t n_ch = 0;
      uint64_t n_samp = 0;
      double fs_hz = 0;
      ftg_recording_info(rec, &n_ch, &n_samp, &fs_hz);
      std::printf("synth %s: %u channels, %llu samples at %.0f Hz\n", subject_id(s).c_str(), n_ch,
                  static_cast<unsigned long long>(n_samp), fs_hz);
      ftg_recording_free(rec);
      ftg_schedule_free(sched);
    }
    return 0;
  }

  if (*prep) {
    write_run_metadata(cfg.ptr, prep_out);
    int done = 0;
    for (int s = 0;; ++s) {
      const fs::path base = fs::path(prep_in) / subject_id(s);
      const std::string raw = base.string() + "_raw.eegr";
      const std::string sched_csv = base.string() + "_schedule.csv";
      if (!fs::exists(raw)) break;
      if (!fs::exists(sched_csv)) {
        std::fprintf(stderr, "error [preprocess] io_error: missing schedule %s\n",
                     sched_csv.c_str());
        return 2;
      }
      ftg_recording* rec = nullptr;
      check(ftg_recording_load(raw.c_str(), &rec), "preprocess");
      ftg_schedule* sched = nullptr;
      check(ftg_schedule_load_csv(sched_csv.c_str(), &sched), "preprocess");
      ftg_epochset* set = nullptr;
      check(ftg_preprocess(cfg.ptr, rec, sched, subject_id(s).c_str(), &set), "preprocess");
      const std::string out_path = (fs::path(prep_out) / (subject_id(s) + "_epochs.fepo")).string();
      check(ftg_epochset_save(set, out_path.c_str()), "preprocess");
      uint64_t n_epochs = 0;
      ftg_epochset_info(set, &n_epochs, nullptr, nullptr, nullptr);
      std::printf("preprocess %s: %llu epochs -> %s\n", subject_id(s).c_str(),
                  static_cast<unsigned long long>(n_epochs), out_path.c_str());
      ftg_epochset_free(set);
      ftg_schedule_free(sched);
      ftg_recording_free(rec);
      ++done;
    }
    if (done == 0) {
      std::fprintf(stderr, "error [preprocess] io_error: no sNN_raw.eegr files under %s\n",
                   prep_in.c_str());
      return 2;
    }
    return 0;
  }

  if (*feat) {
    write_run_metadata(cfg.ptr, feat_out);
    ftg_epochset* set = nullptr;
    check(ftg_epochset_load(feat_epochs.c_str(), &set), "features");
    const std::string out_csv =
        (fs::path(feat_out) / (fs::path(feat_epochs).stem().string() + "_features.csv")).string();
    check(ftg_features_csv(cfg.ptr, set, out_csv.c_str()), "features");
    std::printf("features -> %s\n", out_csv.c_str());
    ftg_epochset_free(set);
    return 0;
  }

  if (*train) {
    write_run_metadata(cfg.ptr, train_out);
    ftg_epochset* set = nullptr;
    check(ftg_epochset_load(train_epochs.c_str(), &set), "train");
    ftg_model* model = nullptr;
    std::string out_path;
    if (train_model == "hybrid") {
      ftg_epochset* tr = nullptr;
      ftg_epochset* va = nullptr;
      check(ftg_epochset_split(set, val_fraction, 7u, &tr, &va), "train");
      check(ftg_train_hybrid(cfg.ptr, tr, va, &model), "train");
      out_path = (fs::path(train_out) / (fs::path(train_epochs).stem().string() + "_hybrid.fatn"))
                     .string();
      check(ftg_model_save(model, out_path.c_str()), "train");
      char* hist = nullptr;
      check(ftg_model_history_json(model, &hist), "train");
      std::ofstream((fs::path(train_out) / "history.json").string()) << hist << "\n";
      ftg_string_free(hist);
      double acc = 0.0;
      check(ftg_model_accuracy(model, cfg.ptr, va, &acc), "train");
      std::printf("train hybrid: holdout accuracy %.4f -> %s\n", acc, out_path.c_str());
      ftg_epochset_free(tr);
      ftg_epochset_free(va);
    } else {
      check(ftg_train_svm(cfg.ptr, set, &model), "train");
      out_path =
          (fs::path(train_out) / (fs::path(train_epochs).stem().string() + "_svm.json")).string();
      check(ftg_model_save(model, out_path.c_str()), "train");
      double acc = 0.0;
      check(ftg_model_accuracy(model, cfg.ptr, set, &acc), "train");
      std::printf("train psd_svm: train-set accuracy %.4f -> %s\n", acc, out_path.c_str());
    }
    ftg_model_free(model);
    ftg_epochset_free(set);
    return 0;
  }

  if (*eval) {
    write_run_metadata(cfg.ptr, eval_out);
    if (!fixture.empty()) {
      const std::string out_csv = (fs::path(eval_out) / "fixture_report.csv").string();
      char* summary = nullptr;
      const int status =
          ftg_fixture_eval(fixture.c_str(), fixture_check ? 1 : 0, out_csv.c_str(), &summary);
      if (summary) {
        std::printf("%s\n", summary);
        ftg_string_free(summary);
      }
      if (status != FTG_OK) fail("eval", status);
      std::printf("fixture report -> %s\n", out_csv.c_str());
      return 0;
    }
    if (eval_in.empty()) {
      std::fprintf(stderr, "error [eval] invalid_argument: provide --in or --fixture\n");
      return 2;
    }
    const auto paths = list_epoch_files(eval_in);
    if (paths.empty()) {
      std::fprintf(stderr, "error [eval] io_error: no .fepo files under %s\n", eval_in.c_str());
      return 2;
    }
    std::vector<const char*> cpaths;
    for (const auto& p : paths) cpaths.push_back(p.c_str());
    const std::string out_csv = (fs::path(eval_out) / "report.csv").string();
    const std::string out_json = (fs::path(eval_out) / "report.json").string();
    double hybrid_mean = 0, svm_mean = 0, p_hybrid = 1, p_svm = 1;
    const int status =
        ftg_evaluate_cohort(cfg.ptr, cpaths.data(), static_cast<int>(cpaths.size()),
                            out_csv.c_str(), out_json.c_str(), &hybrid_mean, &svm_mean, &p_hybrid,
                            &p_svm);
    std::printf("eval: hybrid mean %.4f (p vs chance %.5f), psd_svm mean %.4f (p vs chance %.5f)\n",
                hybrid_mean, p_hybrid, svm_mean, p_svm);
    std::printf("report -> %s, %s\n", out_csv.c_str(), out_json.c_str());
    if (status != FTG_OK) fail("eval", status);
    return 0;
  }

  if (*topo) {
    write_run_metadata(cfg.ptr, topo_out);
    ftg_epochset* set = nullptr;
    check(ftg_epochset_load(topo_epochs.c_str(), &set), "topo");
    check(ftg_topo_outputs(cfg.ptr, set, topo_out.c_str(), topo_tag.c_str()), "topo");
    std::printf("topo outputs -> %s (topo_%s.csv + per-band SVGs)\n", topo_out.c_str(),
                topo_tag.c_str());
    ftg_epochset_free(set);
    return 0;
  }

  return 0;
}
