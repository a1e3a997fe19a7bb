#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fatigue/common.hpp"

namespace fatigue {

enum class ChannelRole : uint8_t { EEG = 0, EOG = 1 };

const char* to_string(ChannelRole role);
ChannelRole channel_role_from_string(const std::string& s);

struct ChannelInfo {
  std::string name;
  ChannelRole role = ChannelRole::EEG;
  // Azimuthal-equidistant projection onto the unit disk, nose up.
  // EOG electrodes sit on the face and may fall outside the disk.
  double x = 0.0;
  double y = 0.0;
};

class Montage {
 public:
  Montage() = default;
  explicit Montage(std::vector<ChannelInfo> channels);

  // The built-in extended 10/20 cap: 30 EEG channels (including O1/Oz/O2)
  // plus 4 periocular EOG channels. The exact cap layout of a given
  // recording rig varies; load a montage CSV to substitute another one.
  static Montage standard_cap();

  static Montage load_csv(const std::string& path);
  static Montage parse_csv(const std::string& text);
  void save_csv(const std::string& path) const;
  std::string to_csv() const;

  size_t size() const { return channels_.size(); }
  const ChannelInfo& channel(size_t i) const { return channels_.at(i); }
  const std::vector<ChannelInfo>& channels() const { return channels_; }

  std::vector<size_t> eeg_indices() const;
  std::vector<size_t> eog_indices() const;
  size_t n_eeg() const;
  size_t n_eog() const;

  // Index of a channel by name; raises domain_error when absent.
  size_t index_of(const std::string& name) const;
  bool has_channel(const std::string& name) const;

  // Montage containing only the EEG channels, in order.
  Montage eeg_only() const;

 private:
  void validate() const;
  std::vector<ChannelInfo> channels_;
};

struct KssLabel {
  int level = 1;        // 1..9
  int minute_index = 0; // >= 0
};

enum class FatigueClass : uint8_t { NS = 0, LF = 1, HF = 2 };
inline constexpr int kNumClasses = 3;

const char* to_string(FatigueClass c);
FatigueClass fatigue_class_from_string(const std::string& s);

// KSS partition: 1-3 normal state, 4-6 low fatigue, 7-9 high fatigue.
FatigueClass map_kss_to_class(int level);
inline FatigueClass map_kss_to_class(const KssLabel& l) { return map_kss_to_class(l.level); }

// Missed responses count as the deepest drowsiness level (9).
std::vector<KssLabel> fill_missing_kss(const std::vector<std::optional<int>>& per_minute);

struct BandDef {
  std::string name;
  double lo = 0.0;  // Hz, inclusive
  double hi = 0.0;  // Hz, exclusive
};

// delta [1,4), theta [4,8), alpha [8,13), beta [13,30)
const std::array<BandDef, 4>& standard_bands();
const BandDef& band_by_name(const std::string& name);

// One labeled 1-second segment of EEG (channels x samples), microvolts.
struct Epoch {
  int n_channels = 0;
  int n_samples = 0;
  std::vector<float> data;  // row-major [n_channels x n_samples]
  FatigueClass label = FatigueClass::NS;
  std::string subject_id;
  int minute_index = 0;

  float at(int ch, int s) const { return data[static_cast<size_t>(ch) * n_samples + s]; }
};

struct EpochSet {
  std::vector<Epoch> epochs;
  Montage montage;   // EEG-only montage matching epoch rows
  double fs = 100.0; // Hz

  size_t size() const { return epochs.size(); }
  std::vector<int> class_counts() const;

  void save(const std::string& path) const;
  static EpochSet load(const std::string& path);
};

// Raw multi-channel recording, microvolts, EEG + EOG rows per its montage.
struct RawRecording {
  double fs = 0.0;
  Montage montage;
  std::vector<float> data;  // row-major [n_channels x n_samples]
  size_t n_samples = 0;

  size_t n_channels() const { return montage.size(); }
  float* channel(size_t ch) { return data.data() + ch * n_samples; }
  const float* channel(size_t ch) const { return data.data() + ch * n_samples; }

  void validate() const;  // shape consistency + all samples finite
};

}  // namespace fatigue
