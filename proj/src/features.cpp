#include "fatigue/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fatigue/io_util.hpp"
#include "fatigue/stats.hpp"

namespace fatigue::features {

namespace {
constexpr double kPi = std::numbers::pi;
}

Psd welch_psd(std::span<const double> x, double fs, const WelchParams& params) {
  const int L = params.seg_len;
  if (L < 2) raise(ErrorCode::domain_error, "welch: seg_len must be >= 2");
  if (static_cast<size_t>(L) > x.size())
    raise(ErrorCode::length_error, "welch: seg_len exceeds signal length");
  if (params.overlap < 0.0 || params.overlap >= 1.0)
    raise(ErrorCode::domain_error, "welch: overlap must be in [0,1)");
  if (fs <= 0.0) raise(ErrorCode::domain_error, "welch: fs must be positive");

  // Periodic Hann window.
  std::vector<double> w(L);
  double wss = 0.0;
  for (int i = 0; i < L; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / L));
    wss += w[i] * w[i];
  }

  int step = static_cast<int>(std::lround(L * (1.0 - params.overlap)));
  step = std::max(step, 1);

  const int n_bins = L / 2 + 1;
  Psd out;
  out.freqs.resize(n_bins);
  out.psd.assign(n_bins, 0.0);
  for (int k = 0; k < n_bins; ++k) out.freqs[k] = fs * k / L;

  // Phasor-recurrence DFT of each windowed, constant-detrended segment.
  std::vector<double> seg(L);
  int n_segs = 0;
  for (size_t start = 0; start + static_cast<size_t>(L) <= x.size();
       start += static_cast<size_t>(step)) {
    double m = 0.0;
    for (int i = 0; i < L; ++i) m += x[start + i];
    m /= L;
    for (int i = 0; i < L; ++i) seg[i] = (x[start + i] - m) * w[i];

    for (int k = 0; k < n_bins; ++k) {
      const double c0 = std::cos(2.0 * kPi * k / L);
      const double s0 = std::sin(2.0 * kPi * k / L);
      double cr = 1.0, ci = 0.0;  // running e^{-j 2pi k n / L}
      double re = 0.0, im = 0.0;
      for (int i = 0; i < L; ++i) {
        re += seg[i] * cr;
        im -= seg[i] * ci;
        const double ncr = cr * c0 - ci * s0;
        ci = cr * s0 + ci * c0;
        cr = ncr;
      }
      double scale = 2.0 / (fs * wss);
      if (k == 0 || (L % 2 == 0 && k == n_bins - 1)) scale = 1.0 / (fs * wss);
      out.psd[k] += scale * (re * re + im * im);
    }
    ++n_segs;
  }
  for (double& v : out.psd) v /= n_segs;
  return out;
}

double band_power(const Psd& psd, const BandDef& band) {
  if (psd.freqs.size() < 2) raise(ErrorCode::domain_error, "band_power: PSD too short");
  if (band.lo >= band.hi) raise(ErrorCode::domain_error, "band_power: lo >= hi");
  if (band.lo < psd.freqs.front() - 1e-9 || band.hi > psd.freqs.back() + 1e-9)
    raise(ErrorCode::domain_error,
          "band_power: band [" + std::to_string(band.lo) + "," + std::to_string(band.hi) +
              ") outside PSD frequency range");
  // Sum trapezoid segments fully contained in [lo, hi); adjacent bands tile
  // their shared edge without double counting.
  double acc = 0.0;
  for (size_t i = 0; i + 1 < psd.freqs.size(); ++i) {
    if (psd.freqs[i] >= band.lo - 1e-12 && psd.freqs[i + 1] <= band.hi + 1e-12) {
      acc += 0.5 * (psd.psd[i] + psd.psd[i + 1]) * (psd.freqs[i + 1] - psd.freqs[i]);
    }
  }
  return acc;
}

FeatureVector epoch_features(const Epoch& epoch, double fs, const EpochFeatureParams& params) {
  FeatureVector fv;
  fv.log_scaled = params.log_scaled;
  fv.values.reserve(static_cast<size_t>(epoch.n_channels) * standard_bands().size());
  std::vector<double> row(epoch.n_samples);
  for (int ch = 0; ch < epoch.n_channels; ++ch) {
    for (int i = 0; i < epoch.n_samples; ++i) row[i] = epoch.at(ch, i);
    const Psd psd = welch_psd(row, fs, params.welch);
    for (const auto& band : standard_bands()) {
      double p = band_power(psd, band);
      if (params.log_scaled) p = std::log10(p + 1e-12);
      fv.values.push_back(p);
    }
  }
  return fv;
}

FeatureMatrix compute_features(const EpochSet& set, const EpochFeatureParams& params) {
  FeatureMatrix fm;
  fm.rows.reserve(set.size());
  for (const auto& e : set.epochs) {
    fm.rows.push_back(epoch_features(e, set.fs, params));
    fm.labels.push_back(e.label);
    fm.subjects.push_back(e.subject_id);
    fm.minutes.push_back(e.minute_index);
  }
  for (const auto& ch : set.montage.channels())
    for (const auto& band : standard_bands())
      fm.column_names.push_back(ch.name + "_" + band.name);
  return fm;
}

void save_features_csv(const FeatureMatrix& fm, const std::string& path) {
  std::ostringstream os;
  os.precision(10);
  os << "subject,minute,class";
  for (const auto& c : fm.column_names) os << ',' << c;
  os << '\n';
  for (size_t i = 0; i < fm.rows.size(); ++i) {
    os << fm.subjects[i] << ',' << fm.minutes[i] << ',' << to_string(fm.labels[i]);
    for (double v : fm.rows[i].values) os << ',' << v;
    os << '\n';
  }
  io::write_text_file(path, os.str());
}

namespace {

// Linear band power of every epoch for one channel.
std::vector<double> channel_band_powers(const EpochSet& set, int ch, const BandDef& band,
                                        const WelchParams& params) {
  std::vector<double> out;
  out.reserve(set.size());
  std::vector<double> row;
  for (const auto& e : set.epochs) {
    row.assign(e.data.begin() + static_cast<size_t>(ch) * e.n_samples,
               e.data.begin() + static_cast<size_t>(ch + 1) * e.n_samples);
    out.push_back(band_power(welch_psd(row, set.fs, params), band));
  }
  return out;
}

}  // namespace

std::vector<TopoStat> topo_scan(const EpochSet& set, const BandDef& band,
                                const WelchParams& params) {
  const auto counts = set.class_counts();
  for (int c = 0; c < kNumClasses; ++c)
    if (counts[c] < 2)
      raise(ErrorCode::insufficient_classes,
            std::string("topo_scan: class ") + to_string(static_cast<FatigueClass>(c)) +
                " has fewer than 2 epochs");

  std::vector<TopoStat> stats;
  const int n_ch = static_cast<int>(set.montage.size());
  for (int ch = 0; ch < n_ch; ++ch) {
    const auto powers = channel_band_powers(set, ch, band, params);
    std::vector<std::vector<double>> groups(kNumClasses);
    for (size_t i = 0; i < set.size(); ++i)
      groups[static_cast<int>(set.epochs[i].label)].push_back(powers[i]);
    const auto kw = stats::kruskal_wallis(groups);
    TopoStat ts;
    ts.channel = set.montage.channel(ch).name;
    ts.band = band;
    ts.statistic = kw.statistic;
    ts.p_value = kw.p_value;
    ts.significant = kw.p_value < 0.05;
    stats.push_back(std::move(ts));
  }
  return stats;
}

void save_topo_csv(const std::vector<TopoStat>& stats, const std::string& path) {
  std::ostringstream os;
  os.precision(10);
  os << "channel,band,statistic,p,significant\n";
  for (const auto& s : stats)
    os << s.channel << ',' << s.band.name << ',' << s.statistic << ',' << s.p_value << ','
       << (s.significant ? 1 : 0) << '\n';
  io::write_text_file(path, os.str());
}

BandClassMeans band_class_means(const EpochSet& set, const BandDef& band,
                                const WelchParams& params) {
  BandClassMeans out;
  out.band = band;
  out.means.assign(kNumClasses, std::vector<double>(set.montage.size(), 0.0));
  std::vector<std::vector<int>> counts(kNumClasses, std::vector<int>(set.montage.size(), 0));
  for (int ch = 0; ch < static_cast<int>(set.montage.size()); ++ch) {
    const auto powers = channel_band_powers(set, ch, band, params);
    for (size_t i = 0; i < set.size(); ++i) {
      const int c = static_cast<int>(set.epochs[i].label);
      out.means[c][ch] += powers[i];
      counts[c][ch] += 1;
    }
  }
  for (int c = 0; c < kNumClasses; ++c)
    for (size_t ch = 0; ch < set.montage.size(); ++ch)
      if (counts[c][ch] > 0) out.means[c][ch] /= counts[c][ch];
  return out;
}

}  // namespace fatigue::features
