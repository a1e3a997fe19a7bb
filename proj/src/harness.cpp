#include "fatigue/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"
#include "fatigue/stats.hpp"

namespace fatigue::harness {

size_t FoldPlan::n() const {
  size_t total = 0;
  if (!folds.empty())
    for (const auto& f : folds.front()) total += f.size();
  return total;
}

namespace {

// Deal a shuffled index stream round-robin into k folds. When the stream is
// the concatenation of per-class blocks, every fold receives a balanced
// share of each class and fold sizes still differ by at most one.
std::vector<std::vector<int>> deal_folds(const std::vector<int>& stream, int k) {
  std::vector<std::vector<int>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < stream.size(); ++i)
    folds[i % static_cast<size_t>(k)].push_back(stream[i]);
  return folds;
}

}  // namespace

FoldPlan make_fold_plan(size_t n, int k, int repeats, uint64_t seed) {
  if (k < 2) raise(ErrorCode::domain_error, "fold plan: k must be >= 2");
  if (repeats < 1) raise(ErrorCode::domain_error, "fold plan: repeats must be >= 1");
  if (n < static_cast<size_t>(k))
    raise(ErrorCode::domain_error, "fold plan: need at least k samples");
  FoldPlan plan;
  plan.k = k;
  plan.repeats = repeats;
  plan.seed = seed;
  plan.stratified = false;
  for (int r = 0; r < repeats; ++r) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(Rng::derive(seed, {0xf01d, static_cast<uint64_t>(r)}));
    rng.shuffle(idx);
    plan.folds.push_back(deal_folds(idx, k));
  }
  return plan;
}

FoldPlan make_fold_plan(const std::vector<FatigueClass>& labels, int k, int repeats,
                        uint64_t seed, bool stratified) {
  if (!stratified) return make_fold_plan(labels.size(), k, repeats, seed);
  if (k < 2) raise(ErrorCode::domain_error, "fold plan: k must be >= 2");
  if (repeats < 1) raise(ErrorCode::domain_error, "fold plan: repeats must be >= 1");
  if (labels.size() < static_cast<size_t>(k))
    raise(ErrorCode::domain_error, "fold plan: need at least k samples");
  FoldPlan plan;
  plan.k = k;
  plan.repeats = repeats;
  plan.seed = seed;
  plan.stratified = true;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(Rng::derive(seed, {0xf01d, static_cast<uint64_t>(r)}));
    std::vector<int> stream;
    stream.reserve(labels.size());
    for (int c = 0; c < kNumClasses; ++c) {
      std::vector<int> cls;
      for (size_t i = 0; i < labels.size(); ++i)
        if (static_cast<int>(labels[i]) == c) cls.push_back(static_cast<int>(i));
      rng.shuffle(cls);
      stream.insert(stream.end(), cls.begin(), cls.end());
    }
    plan.folds.push_back(deal_folds(stream, k));
  }
  return plan;
}

Metrics Metrics::from_predictions(std::span<const int> actual, std::span<const int> predicted) {
  if (actual.size() != predicted.size() || actual.empty())
    raise(ErrorCode::domain_error, "metrics: empty or mismatched predictions");
  Metrics m;
  m.total = static_cast<int>(actual.size());
  int correct = 0;
  for (size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 0 || actual[i] >= kNumClasses || predicted[i] < 0 ||
        predicted[i] >= kNumClasses)
      raise(ErrorCode::domain_error, "metrics: class index out of range");
    m.confusion[static_cast<size_t>(actual[i])][static_cast<size_t>(predicted[i])]++;
    if (actual[i] == predicted[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  for (int c = 0; c < kNumClasses; ++c) {
    int pred_c = 0, actual_c = 0;
    for (int o = 0; o < kNumClasses; ++o) {
      pred_c += m.confusion[static_cast<size_t>(o)][static_cast<size_t>(c)];
      actual_c += m.confusion[static_cast<size_t>(c)][static_cast<size_t>(o)];
    }
    const int tp = m.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)];
    m.precision[static_cast<size_t>(c)] = pred_c ? static_cast<double>(tp) / pred_c : 0.0;
    m.recall[static_cast<size_t>(c)] = actual_c ? static_cast<double>(tp) / actual_c : 0.0;
  }
  return m;
}

nlohmann::json Metrics::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["total"] = total;
  auto conf = nlohmann::json::array();
  for (const auto& row : confusion) conf.push_back(row);
  j["confusion"] = conf;
  j["precision"] = precision;
  j["recall"] = recall;
  return j;
}

const char* to_string(ModelKind k) { return k == ModelKind::hybrid ? "hybrid" : "psd_svm"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "hybrid") return ModelKind::hybrid;
  if (s == "psd_svm") return ModelKind::psd_svm;
  raise(ErrorCode::invalid_argument, "unknown model kind: '" + s + "'");
}

nlohmann::json CvResult::to_json() const {
  nlohmann::json j;
  j["mean_accuracy"] = mean_accuracy;
  j["std_accuracy"] = std_accuracy;
  j["failed_folds"] = failed_folds;
  auto arr = nlohmann::json::array();
  for (const auto& f : folds) {
    nlohmann::json fj;
    fj["repeat"] = f.repeat;
    fj["fold"] = f.fold;
    fj["failed"] = f.failed;
    if (f.failed)
      fj["reason"] = f.failure_reason;
    else
      fj["metrics"] = f.metrics.to_json();
    arr.push_back(fj);
  }
  j["folds"] = arr;
  return j;
}

namespace {

EpochSet subset(const EpochSet& set, const std::vector<int>& idx) {
  EpochSet out;
  out.fs = set.fs;
  out.montage = set.montage;
  out.epochs.reserve(idx.size());
  for (int i : idx) out.epochs.push_back(set.epochs[static_cast<size_t>(i)]);
  return out;
}

FoldResult run_one_fold(const EpochSet& dataset, ModelKind kind, const FoldPlan& plan,
                        const CvOptions& opts, const features::FeatureMatrix* all_features,
                        int repeat, int fold) {
  FoldResult res;
  res.repeat = repeat;
  res.fold = fold;

  const auto& val_idx = plan.folds[static_cast<size_t>(repeat)][static_cast<size_t>(fold)];
  std::vector<char> in_val(dataset.size(), 0);
  for (int i : val_idx) in_val[static_cast<size_t>(i)] = 1;
  std::vector<int> train_idx;
  train_idx.reserve(dataset.size() - val_idx.size());
  for (size_t i = 0; i < dataset.size(); ++i)
    if (!in_val[i]) train_idx.push_back(static_cast<int>(i));

  // A training split missing a class cannot fit a 3-way classifier.
  std::array<int, kNumClasses> counts{};
  for (int i : train_idx) counts[static_cast<size_t>(dataset.epochs[static_cast<size_t>(i)].label)]++;
  int present = 0;
  for (int c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) {
    res.failed = true;
    res.failure_reason = "training split contains a single class";
    return res;
  }

  std::vector<int> actual;
  actual.reserve(val_idx.size());
  for (int i : val_idx) actual.push_back(static_cast<int>(dataset.epochs[static_cast<size_t>(i)].label));

  try {
    std::vector<int> predicted;
    if (kind == ModelKind::hybrid) {
      const EpochSet train = subset(dataset, train_idx);
      const EpochSet val = subset(dataset, val_idx);
      model::TrainConfig tc = opts.train;
      tc.seed = Rng::derive(opts.train.seed,
                            {0xcful, static_cast<uint64_t>(repeat), static_cast<uint64_t>(fold)});
      auto trained = model::train_fatigue_net(opts.net, train, val, tc);
      predicted = trained.predict(val);
    } else {
      std::vector<std::vector<double>> xtrain;
      std::vector<FatigueClass> ytrain;
      for (int i : train_idx) {
        xtrain.push_back(all_features->rows[static_cast<size_t>(i)].values);
        ytrain.push_back(all_features->labels[static_cast<size_t>(i)]);
      }
      svm::SvmConfig sc = opts.svm;
      sc.seed = Rng::derive(opts.svm.seed,
                            {0x57bcu, static_cast<uint64_t>(repeat), static_cast<uint64_t>(fold)});
      const auto model = svm::train_psd_svm(xtrain, ytrain, sc);
      for (int i : val_idx)
        predicted.push_back(
            static_cast<int>(model.predict(all_features->rows[static_cast<size_t>(i)].values)));
    }
    res.metrics = Metrics::from_predictions(actual, predicted);
  } catch (const Error& e) {
    res.failed = true;
    res.failure_reason = e.what();
  }
  return res;
}

}  // namespace

CvResult run_cv(const EpochSet& dataset, ModelKind kind, const FoldPlan& plan,
                const CvOptions& opts) {
  if (plan.folds.empty()) raise(ErrorCode::domain_error, "run_cv: empty fold plan");
  if (plan.n() != dataset.size())
    raise(ErrorCode::domain_error, "run_cv: fold plan does not cover the dataset");

  features::FeatureMatrix feats;
  if (kind == ModelKind::psd_svm) feats = features::compute_features(dataset, opts.feature_params);

  std::vector<std::pair<int, int>> jobs_list;
  for (int r = 0; r < plan.repeats; ++r)
    for (int f = 0; f < plan.k; ++f) jobs_list.emplace_back(r, f);

  std::vector<FoldResult> results(jobs_list.size());
  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < jobs_list.size(); ++i)
      results[i] = run_one_fold(dataset, kind, plan, opts, &feats, jobs_list[i].first,
                                jobs_list[i].second);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs_list.size()) return;
        results[i] = run_one_fold(dataset, kind, plan, opts, &feats, jobs_list[i].first,
                                  jobs_list[i].second);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CvResult cv;
  cv.folds = std::move(results);
  std::vector<double> accs;
  for (const auto& f : cv.folds) {
    if (f.failed)
      cv.failed_folds++;
    else
      accs.push_back(f.metrics.accuracy);
  }
  if (!accs.empty()) {
    cv.mean_accuracy = stats::mean(accs);
    cv.std_accuracy = accs.size() >= 2 ? stats::sample_std(accs) : 0.0;
  }
  return cv;
}

double paired_significance(std::span<const double> acc_a, std::span<const double> acc_b) {
  return stats::wilcoxon_signed_rank(acc_a, acc_b);
}

std::vector<double> AccuracyTable::column(size_t c) const {
  std::vector<double> col;
  col.reserve(accuracies.size());
  for (const auto& row : accuracies) col.push_back(row.at(c));
  return col;
}

TableReport aggregate_table(const AccuracyTable& table) {
  if (table.model_names.empty() || table.accuracies.empty())
    raise(ErrorCode::domain_error, "aggregate_table: empty table");
  TableReport rep;
  rep.table = table;
  const size_t n_cols = table.model_names.size();
  for (size_t c = 0; c < n_cols; ++c) {
    const auto col = table.column(c);
    rep.col_mean.push_back(stats::mean(col));
    rep.col_std.push_back(col.size() >= 2 ? stats::sample_std(col) : 0.0);
  }
  const auto last = table.column(n_cols - 1);
  for (size_t c = 0; c < n_cols; ++c) {
    if (c == n_cols - 1) {
      rep.p_vs_last.push_back(std::nullopt);
    } else {
      rep.p_vs_last.push_back(paired_significance(last, table.column(c)));
    }
  }
  return rep;
}

void save_report_csv(const TableReport& report, const std::string& path) {
  std::ostringstream os;
  os.precision(10);
  os << "subject";
  for (const auto& m : report.table.model_names) os << ',' << m;
  os << '\n';
  for (size_t r = 0; r < report.table.subjects.size(); ++r) {
    os << report.table.subjects[r];
    for (double v : report.table.accuracies[r]) os << ',' << v;
    os << '\n';
  }
  os << "Avg.";
  for (double v : report.col_mean) os << ',' << v;
  os << '\n';
  os << "Std.";
  for (double v : report.col_std) os << ',' << v;
  os << '\n';
  os << "p-value";
  for (const auto& p : report.p_vs_last) {
    os << ',';
    if (p) os << *p;
    else os << "-";
  }
  os << '\n';
  io::write_text_file(path, os.str());
}

AccuracyTable load_accuracy_table_csv(const std::string& path) {
  const std::string text = io::read_text_file(path);
  std::istringstream is(text);
  std::string line;
  AccuracyTable t;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header) {
      if (cells.size() < 2 || cells[0] != "subject")
        raise(ErrorCode::format_error, path + ": expected header 'subject,<models...>'");
      t.model_names.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    // Stop at aggregate rows if present.
    if (cells[0] == "Avg." || cells[0] == "Std." || cells[0] == "p-value") continue;
    if (cells.size() != t.model_names.size() + 1)
      raise(ErrorCode::format_error, path + ": ragged row '" + cells[0] + "'");
    t.subjects.push_back(cells[0]);
    std::vector<double> row;
    for (size_t c = 1; c < cells.size(); ++c) {
      try {
        row.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        raise(ErrorCode::format_error, path + ": bad accuracy value '" + cells[c] + "'");
      }
    }
    t.accuracies.push_back(std::move(row));
  }
  if (t.subjects.empty()) raise(ErrorCode::format_error, path + ": no data rows");
  return t;
}

void save_report_json(const TableReport& report,
                      const std::vector<nlohmann::json>& per_subject_details,
                      const std::string& path) {
  nlohmann::json j;
  j["models"] = report.table.model_names;
  j["subjects"] = report.table.subjects;
  j["accuracies"] = report.table.accuracies;
  j["mean"] = report.col_mean;
  j["std"] = report.col_std;
  auto pv = nlohmann::json::array();
  for (const auto& p : report.p_vs_last)
    pv.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
  j["p_vs_last"] = pv;
  if (!per_subject_details.empty()) j["details"] = per_subject_details;
  io::write_text_file(path, j.dump(2) + "\n");
}

}  // namespace fatigue::harness
