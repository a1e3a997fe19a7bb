#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "fatigue/core_types.hpp"

namespace fatigue::dsp {

// One second-order IIR section, normalized (a0 = 1).
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double freq_hz, double fs) const;
  bool stable() const;  // poles strictly inside the unit circle
};

enum class FilterKind { bandpass, notch };

struct FilterSpec {
  std::vector<Biquad> stages;
  FilterKind kind = FilterKind::bandpass;
  double fs = 0.0;
  double f_lo = 0.0, f_hi = 0.0;  // bandpass edges
  double f_center = 0.0, q = 0.0; // notch parameters

  std::complex<double> response(double freq_hz) const;
  double magnitude(double freq_hz) const;
  size_t n_stages() const { return stages.size(); }
};

// Butterworth band-pass, `order` is the analog prototype order (one biquad
// per band edge after the band-pass transform + bilinear mapping). Edges are
// prewarped so the digital -3 dB points land exactly on lo and hi.
FilterSpec design_bandpass(double lo_hz, double hi_hz, int order, double fs);
inline FilterSpec design_bandpass(double lo_hz, double hi_hz, double fs) {
  return design_bandpass(lo_hz, hi_hz, 2, fs);
}

// Second-order notch, unit-circle zeros at f_center. Default Q = 30.
FilterSpec design_notch(double f_center_hz, double q, double fs);

// Zero-phase forward-backward filtering with odd-reflection edge padding of
// length 3 * (2 * n_stages) and steady-state initial conditions per stage.
std::vector<double> filtfilt(const FilterSpec& spec, std::span<const double> x);

// In-place zero-phase filtering of every channel of a recording.
void filtfilt_recording(const FilterSpec& spec, RawRecording& rec);

// Keep every `factor`-th sample starting at index 0.
std::vector<double> decimate(std::span<const double> x, int factor);
RawRecording decimate_recording(const RawRecording& rec, int factor);

// Cut a (typically 100 Hz) recording into non-overlapping 1 s epochs of its
// EEG channels; each epoch inherits the label of the minute containing it.
// The trailing partial second is dropped.
EpochSet epochize(const RawRecording& rec, const std::vector<FatigueClass>& minute_labels,
                  const std::string& subject_id);

// Recording container: magic "EEGR", version, channel/sample counts, sample
// rate, embedded montage CSV, then row-major f32 samples (little-endian).
void save_recording(const RawRecording& rec, const std::string& path);
RawRecording load_recording(const std::string& path);

// CSV import: header `time,<ch1>,...,<chN>`; channel columns must match the
// montage names in order; sample rate inferred from the time column.
RawRecording import_recording_csv(const std::string& path, const Montage& montage);

}  // namespace fatigue::dsp
