#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fatigue/core_types.hpp"
#include "fatigue/features.hpp"
#include "fatigue/model.hpp"
#include "fatigue/svm.hpp"

namespace fatigue::harness {

struct FoldPlan {
  int k = 5;
  int repeats = 4;
  uint64_t seed = 0;
  bool stratified = true;
  // folds[repeat][fold] = validation indices
  std::vector<std::vector<std::vector<int>>> folds;

  size_t n() const;
};

// Unstratified plan over n indices.
FoldPlan make_fold_plan(size_t n, int k, int repeats, uint64_t seed);
// Class-stratified plan (the default used by run_cv).
FoldPlan make_fold_plan(const std::vector<FatigueClass>& labels, int k, int repeats,
                        uint64_t seed, bool stratified = true);

struct Metrics {
  double accuracy = 0.0;
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // [actual][predicted]
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  int total = 0;

  static Metrics from_predictions(std::span<const int> actual, std::span<const int> predicted);
  nlohmann::json to_json() const;
};

enum class ModelKind { hybrid, psd_svm };
const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct FoldResult {
  int repeat = 0;
  int fold = 0;
  bool failed = false;
  std::string failure_reason;
  Metrics metrics;
};

struct CvResult {
  std::vector<FoldResult> folds;  // ordered by (repeat, fold)
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample std over folds
  int failed_folds = 0;

  nlohmann::json to_json() const;
};

struct CvOptions {
  model::FatigueNetConfig net;
  model::TrainConfig train;
  svm::SvmConfig svm;
  features::EpochFeatureParams feature_params;
  int jobs = 1;
};

// k-fold cross-validation of one dataset. Fold runs are independent and may
// execute in parallel; per-fold RNG streams derive from (seed, repeat, fold)
// so results do not depend on `jobs`.
CvResult run_cv(const EpochSet& dataset, ModelKind kind, const FoldPlan& plan,
                const CvOptions& opts);

// Two-sided exact Wilcoxon signed-rank test on paired per-subject accuracies.
double paired_significance(std::span<const double> acc_a, std::span<const double> acc_b);

// ---------------------------------------------------------------------------
// Accuracy tables (per-subject rows, per-model columns) and their reports.

struct AccuracyTable {
  std::vector<std::string> model_names;        // columns
  std::vector<std::string> subjects;           // rows
  std::vector<std::vector<double>> accuracies; // [row][col]

  std::vector<double> column(size_t c) const;
};

struct TableReport {
  AccuracyTable table;
  std::vector<double> col_mean;
  std::vector<double> col_std;  // sample std
  // p-value of the last column vs every other column (exact Wilcoxon);
  // the final entry (last vs itself) is absent.
  std::vector<std::optional<double>> p_vs_last;
};

TableReport aggregate_table(const AccuracyTable& table);

// CSV layout: header `subject,<model...>`, one row per subject, then Avg.,
// Std. and p-value rows.
void save_report_csv(const TableReport& report, const std::string& path);
AccuracyTable load_accuracy_table_csv(const std::string& path);
void save_report_json(const TableReport& report,
                      const std::vector<nlohmann::json>& per_subject_details,
                      const std::string& path);

}  // namespace fatigue::harness
