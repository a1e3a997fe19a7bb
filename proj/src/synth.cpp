#include "fatigue/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Marginally stable sinusoid generator: s[n] = 2 cos(w) s[n-1] - s[n-2].
struct Resonator {
  double coef = 0.0;
  double s1 = 0.0, s2 = 0.0;

  void setup(double freq, double fs, double amp, double phase) {
    const double w = 2.0 * kPi * freq / fs;
    coef = 2.0 * std::cos(w);
    s2 = amp * std::sin(phase - w);
    s1 = amp * std::sin(phase);
  }

  double step() {
    const double s0 = coef * s1 - s2;
    s2 = s1;
    s1 = s0;
    return s0;
  }

  void rescale(double factor) {
    s1 *= factor;
    s2 *= factor;
  }
};

// 1/f^beta background approximated by octave-spaced first-order relaxators.
struct PinkStack {
  static constexpr int kStages = 8;
  double pole[kStages];
  double gain[kStages];
  double state[kStages] = {0};

  void setup(double beta, double fs, double target_rms, Rng& rng) {
    const double corners[kStages] = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    double total_var = 0.0;
    for (int k = 0; k < kStages; ++k) {
      pole[k] = std::exp(-2.0 * kPi * corners[k] / fs);
      gain[k] = std::pow(corners[k], (2.0 - beta) / 2.0);
      total_var += gain[k] * gain[k] / (1.0 - pole[k] * pole[k]);
    }
    const double scale = target_rms / std::sqrt(total_var);
    for (int k = 0; k < kStages; ++k) gain[k] *= scale;
    // Draw initial states from the stationary distribution so the first
    // samples are not systematically quiet.
    for (int k = 0; k < kStages; ++k)
      state[k] = rng.gaussian() * gain[k] / std::sqrt(1.0 - pole[k] * pole[k]);
  }

  double step(Rng& rng) {
    double sum = 0.0;
    for (int k = 0; k < kStages; ++k) {
      state[k] = pole[k] * state[k] + gain[k] * rng.white();
      sum += state[k];
    }
    return sum;
  }
};

struct BandOscillator {
  static constexpr int kSines = 3;
  Resonator carrier[kSines];
  Resonator envelope[kSines];
  double env_depth = 0.0;
  double gain = 1.0;  // class-dependent multiplier

  void setup(const BandDef& band, double fs, double band_rms, double depth, Rng& rng) {
    env_depth = depth;
    const double amp = band_rms * std::sqrt(2.0 / 3.0);
    const double margin = 0.1 * (band.hi - band.lo);
    const double lo = band.lo + margin, hi = band.hi - margin;
    // Keep the sinusoids of one band at least a third of the usable span
    // apart; closer pairs beat slowly and make 1 s power estimates swing.
    const double min_sep = std::min(1.0, (hi - lo) / 3.0);
    double freqs[kSines];
    for (int i = 0; i < kSines; ++i) {
      double f = 0.0;
      bool ok = false;
      for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
        f = rng.uniform(lo, hi);
        ok = true;
        for (int j = 0; j < i; ++j)
          if (std::fabs(f - freqs[j]) < min_sep) ok = false;
      }
      if (!ok) f = lo + (hi - lo) * (i + 0.5) / kSines;
      freqs[i] = f;
    }
    for (int i = 0; i < kSines; ++i) {
      carrier[i].setup(freqs[i], fs, amp, rng.uniform(0.0, 2.0 * kPi));
      envelope[i].setup(rng.uniform(0.04, 0.2), fs, 1.0, rng.uniform(0.0, 2.0 * kPi));
    }
  }

  double step() {
    double sum = 0.0;
    for (int i = 0; i < kSines; ++i)
      sum += carrier[i].step() * (1.0 + env_depth * envelope[i].step());
    return gain * sum;
  }

  void set_gain(double g) {
    // The carrier state carries the amplitude; scaling the output keeps the
    // phase continuous across minute boundaries.
    gain = g;
  }
};

double blink_channel_gain(const std::string& name) {
  if (name == "Fp1" || name == "Fp2") return 0.55;
  if (name == "F3" || name == "F4") return 0.30;
  if (name == "Fz") return 0.28;
  if (name == "F7" || name == "F8") return 0.25;
  if (name == "FC1" || name == "FC2") return 0.15;
  if (name == "FC5" || name == "FC6") return 0.10;
  if (name == "VEOGU") return 1.0;
  if (name == "VEOGD") return -0.7;
  if (name == "HEOGL" || name == "HEOGR") return 0.08;
  return 0.0;
}

std::vector<float> make_blink_waveform(size_t n_samples, double fs, double rate_per_min,
                                       double amp_uv, Rng& rng) {
  std::vector<float> wave(n_samples, 0.0f);
  if (rate_per_min <= 0.0) return wave;
  const double mean_gap = 60.0 / rate_per_min;
  double t = rng.uniform(0.2, mean_gap);
  while (true) {
    const double dur = rng.uniform(0.20, 0.35);
    const double a = amp_uv * rng.uniform(0.85, 1.15);
    const size_t start = static_cast<size_t>(t * fs);
    const size_t len = static_cast<size_t>(dur * fs);
    if (start + len >= n_samples) break;
    for (size_t i = 0; i < len; ++i) {
      const double s = std::sin(kPi * static_cast<double>(i) / static_cast<double>(len));
      wave[start + i] += static_cast<float>(a * s * s);
    }
    double gap = -mean_gap * std::log(std::max(rng.uniform(), 1e-12));
    gap = std::max(gap, 0.5);
    t += dur + gap;
  }
  return wave;
}

}  // namespace

double class_gain(FatigueClass c, double g) {
  switch (c) {
    case FatigueClass::NS: return 1.0;
    case FatigueClass::LF: return 1.0 + 0.5 * g;
    case FatigueClass::HF: return 1.0 + g;
  }
  return 1.0;
}

SessionData generate_session(const SubjectProfile& profile, const SessionSpec& spec) {
  if (spec.minutes < 1.0) raise(ErrorCode::domain_error, "synth: duration must be >= 1 minute");
  if (spec.fs <= 0.0) raise(ErrorCode::domain_error, "synth: fs must be positive");
  for (double a : profile.band_rms_uv)
    if (a <= 0.0) raise(ErrorCode::domain_error, "synth: band amplitudes must be positive");
  if (profile.bg_rms_uv <= 0.0)
    raise(ErrorCode::domain_error, "synth: background amplitude must be positive");

  const int n_minutes = static_cast<int>(std::llround(spec.minutes));
  const size_t samples_per_min = static_cast<size_t>(std::llround(60.0 * spec.fs));
  const size_t n_samples = samples_per_min * static_cast<size_t>(n_minutes);

  SessionData out;

  // Per-minute KSS trajectory: linear drift with +-1 jitter, occasional
  // missed entries replaced by level 9.
  {
    Rng rng(Rng::derive(spec.seed, {0x7247u}));
    out.raw_kss.resize(static_cast<size_t>(n_minutes));
    for (int m = 0; m < n_minutes; ++m) {
      const double frac = n_minutes > 1 ? static_cast<double>(m) / (n_minutes - 1) : 0.0;
      const double drift = profile.kss_start + (profile.kss_end - profile.kss_start) * frac;
      const int jitter = static_cast<int>(rng.uniform_int(3)) - 1;
      const int level = std::clamp(static_cast<int>(std::llround(drift)) + jitter, 1, 9);
      if (rng.uniform() < profile.miss_rate)
        out.raw_kss[static_cast<size_t>(m)] = std::nullopt;
      else
        out.raw_kss[static_cast<size_t>(m)] = level;
    }
    out.schedule = fill_missing_kss(out.raw_kss);
    for (const auto& l : out.schedule) out.classes.push_back(map_kss_to_class(l));
  }

  {
    Rng rng(Rng::derive(spec.seed, {0xb111u}));
    out.blink_waveform =
        make_blink_waveform(n_samples, spec.fs, profile.blink_rate_per_min, profile.blink_amp_uv, rng);
  }

  RawRecording& rec = out.recording;
  rec.fs = spec.fs;
  rec.montage = Montage::standard_cap();
  rec.n_samples = n_samples;
  rec.data.resize(rec.montage.size() * n_samples);

  const auto& bands = standard_bands();
  for (size_t ch = 0; ch < rec.montage.size(); ++ch) {
    const ChannelInfo& info = rec.montage.channel(ch);
    Rng rng(Rng::derive(spec.seed, {0xc4a2u, static_cast<uint64_t>(ch)}));
    float* dst = rec.channel(ch);
    const double blink_gain = blink_channel_gain(info.name);
    const bool occipital = info.name == "O1" || info.name == "Oz" || info.name == "O2";

    PinkStack pink;
    const double bg_rms =
        info.role == ChannelRole::EEG ? profile.bg_rms_uv : profile.eog_bg_rms_uv;
    pink.setup(profile.pink_exponent, spec.fs, bg_rms, rng);

    if (info.role == ChannelRole::EOG) {
      for (size_t i = 0; i < n_samples; ++i)
        dst[i] = static_cast<float>(pink.step(rng) +
                                    blink_gain * out.blink_waveform[i]);
      continue;
    }

    BandOscillator osc[4];
    for (size_t b = 0; b < bands.size(); ++b)
      osc[b].setup(bands[b], spec.fs, profile.band_rms_uv[b], profile.env_depth, rng);

    size_t i = 0;
    for (int m = 0; m < n_minutes; ++m) {
      if (occipital) {
        const double g = class_gain(out.classes[static_cast<size_t>(m)], profile.signature_gain);
        osc[1].set_gain(g);  // theta
        osc[2].set_gain(g);  // alpha
      }
      for (size_t s = 0; s < samples_per_min; ++s, ++i) {
        double v = pink.step(rng);
        for (auto& o : osc) v += o.step();
        v += blink_gain * out.blink_waveform[i];
        dst[i] = static_cast<float>(v);
      }
    }
  }

  rec.validate();
  return out;
}

std::vector<SubjectProfile> cohort_profiles(const CohortSpec& spec, uint64_t base_seed) {
  if (spec.n_subjects < 1) raise(ErrorCode::domain_error, "cohort: need >= 1 subject");
  std::vector<SubjectProfile> profiles;
  for (int s = 0; s < spec.n_subjects; ++s) {
    Rng rng(Rng::derive(base_seed, {0x90f1u, static_cast<uint64_t>(s)}));
    SubjectProfile p = spec.base_profile;
    p.subject_id = "S" + std::to_string(s + 1);
    p.pink_exponent += rng.uniform(-0.08, 0.08);
    p.bg_rms_uv *= rng.uniform(0.9, 1.1);
    for (double& a : p.band_rms_uv) a *= rng.uniform(0.9, 1.1);
    p.blink_rate_per_min *= rng.uniform(0.8, 1.2);
    p.kss_start = std::clamp(p.kss_start + rng.uniform(-0.5, 0.5), 1.0, 3.0);
    p.kss_end = std::clamp(p.kss_end + rng.uniform(-0.5, 0.5), 7.0, 9.0);
    profiles.push_back(p);
  }
  return profiles;
}

std::vector<SessionData> generate_cohort(const CohortSpec& spec, uint64_t base_seed) {
  const auto profiles = cohort_profiles(spec, base_seed);
  std::vector<SessionData> sessions;
  sessions.reserve(profiles.size());
  for (size_t s = 0; s < profiles.size(); ++s) {
    SessionSpec ss = spec.session;
    ss.seed = Rng::derive(base_seed, {0x5e55u, static_cast<uint64_t>(s)});
    sessions.push_back(generate_session(profiles[s], ss));
  }
  return sessions;
}

void save_schedule_csv(const SessionData& session, const std::string& path) {
  std::ostringstream os;
  os << "minute,kss,class\n";
  for (size_t m = 0; m < session.schedule.size(); ++m)
    os << m << ',' << session.schedule[m].level << ','
       << to_string(session.classes[m]) << '\n';
  io::write_text_file(path, os.str());
}

std::vector<FatigueClass> load_schedule_classes_csv(const std::string& path) {
  const std::string text = io::read_text_file(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) raise(ErrorCode::format_error, path + ": empty schedule");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "minute,kss,class")
    raise(ErrorCode::format_error, path + ": expected header 'minute,kss,class'");
  std::vector<FatigueClass> classes;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string minute, kss, cls;
    if (!std::getline(ls, minute, ',') || !std::getline(ls, kss, ',') ||
        !std::getline(ls, cls, ','))
      raise(ErrorCode::format_error, path + ": malformed schedule row");
    classes.push_back(fatigue_class_from_string(cls));
  }
  if (classes.empty()) raise(ErrorCode::format_error, path + ": no schedule rows");
  return classes;
}

}  // namespace fatigue::synth
