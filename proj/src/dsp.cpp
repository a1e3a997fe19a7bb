#include "fatigue/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fatigue/io_util.hpp"

namespace fatigue::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::complex<double> Biquad::response(double freq_hz, double fs) const {
  const std::complex<double> z = std::polar(1.0, 2.0 * kPi * freq_hz / fs);
  const std::complex<double> zi = 1.0 / z;
  return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
}

bool Biquad::stable() const {
  // Roots of z^2 + a1 z + a2; product of roots = a2, so |a2| < 1 is
  // necessary; check the actual radii.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  const std::complex<double> r1 = (-a1 + disc) / 2.0;
  const std::complex<double> r2 = (-a1 - disc) / 2.0;
  return std::abs(r1) < 1.0 && std::abs(r2) < 1.0;
}

std::complex<double> FilterSpec::response(double freq_hz) const {
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : stages) h *= s.response(freq_hz, fs);
  return h;
}

double FilterSpec::magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }

namespace {

void check_stability(const FilterSpec& spec, const char* what) {
  for (const auto& s : spec.stages) {
    if (!s.stable()) raise(ErrorCode::design_error, std::string(what) + ": unstable stage");
    if (!std::isfinite(s.b0) || !std::isfinite(s.b1) || !std::isfinite(s.b2) ||
        !std::isfinite(s.a1) || !std::isfinite(s.a2))
      raise(ErrorCode::design_error, std::string(what) + ": non-finite coefficients");
  }
}

}  // namespace

FilterSpec design_bandpass(double lo_hz, double hi_hz, int order, double fs) {
  if (fs <= 0.0) raise(ErrorCode::design_error, "bandpass: fs must be positive");
  if (!(0.0 < lo_hz && lo_hz < hi_hz))
    raise(ErrorCode::design_error, "bandpass: need 0 < lo < hi");
  if (hi_hz >= 0.5 * fs)
    raise(ErrorCode::design_error, "bandpass: upper edge at or above Nyquist");
  if (order < 1 || order > 8)
    raise(ErrorCode::design_error, "bandpass: order out of supported range [1,8]");

  using cd = std::complex<double>;
  const double fs2 = 2.0 * fs;

  // Prewarped analog edge frequencies (rad/s).
  const double wl = fs2 * std::tan(kPi * lo_hz / fs);
  const double wh = fs2 * std::tan(kPi * hi_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Analog Butterworth low-pass prototype poles (left half-plane).
  std::vector<cd> proto;
  for (int k = 0; k < order; ++k) {
    const double phi = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    proto.emplace_back(std::cos(phi), std::sin(phi));
  }

  // Low-pass -> band-pass: each prototype pole p yields the two roots of
  // s^2 - (bw*p) s + w0^2 = 0.
  std::vector<cd> apoles;
  for (const cd& p : proto) {
    const cd bp = bw * p;
    const cd disc = std::sqrt(bp * bp - 4.0 * w0 * w0);
    apoles.push_back((bp + disc) / 2.0);
    apoles.push_back((bp - disc) / 2.0);
  }

  // Bilinear transform of the poles; zeros land at z = +1 (order copies,
  // from the analog zeros at s = 0) and z = -1 (order copies, from infinity).
  std::vector<cd> zpoles;
  for (const cd& s : apoles) zpoles.push_back((fs2 + s) / (fs2 - s));

  // Pair each pole with its conjugate partner to form real biquads.
  std::vector<cd> remaining = zpoles;
  std::vector<Biquad> stages;
  while (!remaining.empty()) {
    const cd p = remaining.back();
    remaining.pop_back();
    auto it = std::min_element(remaining.begin(), remaining.end(), [&](const cd& a, const cd& b) {
      return std::abs(a - std::conj(p)) < std::abs(b - std::conj(p));
    });
    if (it == remaining.end())
      raise(ErrorCode::design_error, "bandpass: odd pole count (internal)");
    const cd q = *it;
    remaining.erase(it);
    Biquad bq;
    bq.a1 = -(p + q).real();
    bq.a2 = (p * q).real();
    // Zero pair (z-1)(z+1) = z^2 - 1.
    bq.b0 = 1.0;
    bq.b1 = 0.0;
    bq.b2 = -1.0;
    stages.push_back(bq);
  }

  FilterSpec spec;
  spec.stages = std::move(stages);
  spec.kind = FilterKind::bandpass;
  spec.fs = fs;
  spec.f_lo = lo_hz;
  spec.f_hi = hi_hz;

  // Normalize each stage to unit gain at the digital center frequency.
  const double f_center = std::atan(w0 / fs2) * fs / kPi;
  for (auto& s : spec.stages) {
    const double g = std::abs(s.response(f_center, fs));
    if (g <= 0.0 || !std::isfinite(g))
      raise(ErrorCode::design_error, "bandpass: degenerate stage gain");
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
  }

  check_stability(spec, "bandpass");
  return spec;
}

FilterSpec design_notch(double f_center_hz, double q, double fs) {
  if (fs <= 0.0) raise(ErrorCode::design_error, "notch: fs must be positive");
  if (!(0.0 < f_center_hz && f_center_hz < 0.5 * fs))
    raise(ErrorCode::design_error, "notch: center frequency must lie in (0, Nyquist)");
  if (q <= 0.0) raise(ErrorCode::design_error, "notch: Q must be positive");

  const double w0 = 2.0 * kPi * f_center_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;

  Biquad bq;
  bq.b0 = 1.0 / a0;
  bq.b1 = -2.0 * std::cos(w0) / a0;
  bq.b2 = 1.0 / a0;
  bq.a1 = -2.0 * std::cos(w0) / a0;
  bq.a2 = (1.0 - alpha) / a0;

  FilterSpec spec;
  spec.stages = {bq};
  spec.kind = FilterKind::notch;
  spec.fs = fs;
  spec.f_center = f_center_hz;
  spec.q = q;
  check_stability(spec, "notch");
  return spec;
}

namespace {

// Steady-state direct-form-II-transposed state for a unit-step input,
// scaled by the first processed sample. Removes the startup transient the
// same way scipy's lfilter_zi does.
struct BiquadState {
  double z1 = 0.0, z2 = 0.0;
};

BiquadState steady_state_zi(const Biquad& s) {
  const double h = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  BiquadState st;
  st.z1 = h - s.b0;
  st.z2 = s.b2 - s.a2 * h;
  return st;
}

void filter_in_place(const Biquad& s, std::vector<double>& x) {
  const BiquadState zi = steady_state_zi(s);
  double z1 = zi.z1 * x[0];
  double z2 = zi.z2 * x[0];
  const double b0 = s.b0, b1 = s.b1, b2 = s.b2, a1 = s.a1, a2 = s.a2;
  for (double& v : x) {
    const double in = v;
    const double out = b0 * in + z1;
    z1 = b1 * in - a1 * out + z2;
    z2 = b2 * in - a2 * out;
    v = out;
  }
}

}  // namespace

std::vector<double> filtfilt(const FilterSpec& spec, std::span<const double> x) {
  if (spec.stages.empty()) raise(ErrorCode::design_error, "filtfilt: empty filter");
  const size_t padlen = 3 * (2 * spec.stages.size());
  if (x.size() <= padlen)
    raise(ErrorCode::length_error,
          "filtfilt: signal length " + std::to_string(x.size()) +
              " must exceed padding length " + std::to_string(padlen));

  // Odd reflection about the end samples.
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * padlen);
  for (size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[0] - x[padlen - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[x.size() - 1] - x[x.size() - 2 - i]);

  for (const auto& s : spec.stages) filter_in_place(s, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : spec.stages) filter_in_place(s, ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<ptrdiff_t>(padlen),
                             ext.end() - static_cast<ptrdiff_t>(padlen));
}

void filtfilt_recording(const FilterSpec& spec, RawRecording& rec) {
  if (spec.fs != rec.fs)
    raise(ErrorCode::domain_error, "filtfilt_recording: filter fs does not match recording fs");
  std::vector<double> buf(rec.n_samples);
  for (size_t ch = 0; ch < rec.n_channels(); ++ch) {
    float* row = rec.channel(ch);
    for (size_t i = 0; i < rec.n_samples; ++i) buf[i] = row[i];
    const auto out = filtfilt(spec, buf);
    for (size_t i = 0; i < rec.n_samples; ++i) row[i] = static_cast<float>(out[i]);
  }
}

std::vector<double> decimate(std::span<const double> x, int factor) {
  if (factor <= 0) raise(ErrorCode::domain_error, "decimate: factor must be positive");
  std::vector<double> out;
  out.reserve(x.size() / static_cast<size_t>(factor));
  for (size_t i = 0; i + 1 <= x.size(); i += static_cast<size_t>(factor)) {
    out.push_back(x[i]);
    if (out.size() == x.size() / static_cast<size_t>(factor)) break;
  }
  out.resize(x.size() / static_cast<size_t>(factor));
  return out;
}

RawRecording decimate_recording(const RawRecording& rec, int factor) {
  if (factor <= 0) raise(ErrorCode::domain_error, "decimate: factor must be positive");
  RawRecording out;
  out.fs = rec.fs / factor;
  out.montage = rec.montage;
  out.n_samples = rec.n_samples / static_cast<size_t>(factor);
  out.data.resize(out.n_samples * rec.n_channels());
  for (size_t ch = 0; ch < rec.n_channels(); ++ch) {
    const float* src = rec.channel(ch);
    float* dst = out.channel(ch);
    for (size_t i = 0; i < out.n_samples; ++i) dst[i] = src[i * static_cast<size_t>(factor)];
  }
  return out;
}

EpochSet epochize(const RawRecording& rec, const std::vector<FatigueClass>& minute_labels,
                  const std::string& subject_id) {
  const int spe = static_cast<int>(std::llround(rec.fs));  // samples per 1 s epoch
  if (spe <= 0) raise(ErrorCode::domain_error, "epochize: bad sample rate");
  const size_t n_epochs = rec.n_samples / static_cast<size_t>(spe);
  if (n_epochs == 0)
    raise(ErrorCode::length_error, "epochize: recording shorter than one epoch");
  const size_t minutes_needed = (n_epochs - 1) / 60 + 1;
  if (minute_labels.size() < minutes_needed)
    raise(ErrorCode::domain_error,
          "epochize: need " + std::to_string(minutes_needed) + " minute labels, got " +
              std::to_string(minute_labels.size()));

  const auto eeg_idx = rec.montage.eeg_indices();
  EpochSet set;
  set.fs = rec.fs;
  set.montage = rec.montage.eeg_only();
  set.epochs.reserve(n_epochs);
  for (size_t e = 0; e < n_epochs; ++e) {
    Epoch ep;
    ep.n_channels = static_cast<int>(eeg_idx.size());
    ep.n_samples = spe;
    ep.subject_id = subject_id;
    ep.minute_index = static_cast<int>(e / 60);
    ep.label = minute_labels[ep.minute_index];
    ep.data.resize(eeg_idx.size() * static_cast<size_t>(spe));
    for (size_t c = 0; c < eeg_idx.size(); ++c) {
      const float* src = rec.channel(eeg_idx[c]) + e * static_cast<size_t>(spe);
      std::copy(src, src + spe, ep.data.begin() + c * static_cast<size_t>(spe));
    }
    set.epochs.push_back(std::move(ep));
  }
  return set;
}

namespace {
constexpr char kRecMagic[4] = {'E', 'E', 'G', 'R'};
constexpr uint32_t kRecVersion = 1;
}  // namespace

void save_recording(const RawRecording& rec, const std::string& path) {
  auto os = io::open_out(path);
  io::write_magic(os, kRecMagic);
  io::write_pod<uint32_t>(os, kRecVersion);
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(rec.n_channels()));
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(rec.n_samples));
  io::write_pod<double>(os, rec.fs);
  io::write_string(os, rec.montage.to_csv());
  io::write_bytes(os, rec.data.data(), rec.data.size() * sizeof(float));
}

RawRecording load_recording(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, kRecMagic, path);
  const auto version = io::read_pod<uint32_t>(is, "version");
  if (version != kRecVersion)
    raise(ErrorCode::format_error, path + ": unsupported recording version");
  RawRecording rec;
  const auto n_ch = io::read_pod<uint32_t>(is, "n_channels");
  const auto n_samples = io::read_pod<uint32_t>(is, "n_samples");
  rec.fs = io::read_pod<double>(is, "fs");
  rec.montage = Montage::parse_csv(io::read_string(is, "montage"));
  if (rec.montage.size() != n_ch)
    raise(ErrorCode::format_error, path + ": montage/channel count mismatch");
  rec.n_samples = n_samples;
  rec.data.resize(static_cast<size_t>(n_ch) * n_samples);
  io::read_bytes(is, rec.data.data(), rec.data.size() * sizeof(float), "samples");
  rec.validate();
  return rec;
}

RawRecording import_recording_csv(const std::string& path, const Montage& montage) {
  auto is = io::open_in(path);
  std::string line;
  if (!std::getline(is, line)) raise(ErrorCode::format_error, path + ": empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.size() != montage.size() + 1 || cols[0] != "time")
    raise(ErrorCode::format_error, path + ": header must be 'time,<channels matching montage>'");
  for (size_t i = 0; i < montage.size(); ++i)
    if (cols[i + 1] != montage.channel(i).name)
      raise(ErrorCode::format_error,
            path + ": column '" + cols[i + 1] + "' does not match montage channel '" +
                montage.channel(i).name + "'");

  std::vector<double> times;
  std::vector<std::vector<float>> rows;  // per sample, montage order
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<float> row;
    row.reserve(montage.size());
    if (!std::getline(ls, cell, ','))
      raise(ErrorCode::format_error, path + ": malformed line " + std::to_string(lineno));
    times.push_back(std::stod(cell));
    while (std::getline(ls, cell, ',')) row.push_back(std::stof(cell));
    if (row.size() != montage.size())
      raise(ErrorCode::format_error, path + ": wrong column count on line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (times.size() < 2) raise(ErrorCode::format_error, path + ": need at least two samples");

  RawRecording rec;
  rec.montage = montage;
  rec.fs = 1.0 / (times[1] - times[0]);
  rec.n_samples = rows.size();
  rec.data.resize(montage.size() * rows.size());
  for (size_t ch = 0; ch < montage.size(); ++ch) {
    float* dst = rec.channel(ch);
    for (size_t i = 0; i < rows.size(); ++i) dst[i] = rows[i][ch];
  }
  rec.validate();
  return rec;
}

}  // namespace fatigue::dsp
