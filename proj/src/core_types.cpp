#include "fatigue/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "fatigue/io_util.hpp"

namespace fatigue {

const char* to_string(ChannelRole role) {
  return role == ChannelRole::EEG ? "EEG" : "EOG";
}

ChannelRole channel_role_from_string(const std::string& s) {
  if (s == "EEG") return ChannelRole::EEG;
  if (s == "EOG") return ChannelRole::EOG;
  raise(ErrorCode::format_error, "unknown channel role: '" + s + "'");
}

Montage::Montage(std::vector<ChannelInfo> channels) : channels_(std::move(channels)) {
  validate();
}

void Montage::validate() const {
  if (channels_.empty()) raise(ErrorCode::format_error, "montage has no channels");
  std::unordered_set<std::string> seen;
  for (const auto& ch : channels_) {
    if (ch.name.empty()) raise(ErrorCode::format_error, "montage: empty channel name");
    if (!seen.insert(ch.name).second)
      raise(ErrorCode::format_error, "montage: duplicate channel name '" + ch.name + "'");
    if (!std::isfinite(ch.x) || !std::isfinite(ch.y))
      raise(ErrorCode::format_error, "montage: non-finite position for '" + ch.name + "'");
    if (ch.role == ChannelRole::EEG && ch.x * ch.x + ch.y * ch.y > 1.0 + 1e-9)
      raise(ErrorCode::format_error,
            "montage: EEG channel '" + ch.name + "' lies outside the unit disk");
  }
}

Montage Montage::standard_cap() {
  // 30-channel extended 10/20 cap plus periocular EOG. Coordinates are the
  // usual azimuthal-equidistant projection, nose up, vertex at the origin.
  static const std::vector<ChannelInfo> cap = {
      {"Fp1", ChannelRole::EEG, -0.253, 0.780},
      {"Fp2", ChannelRole::EEG, 0.253, 0.780},
      {"F7", ChannelRole::EEG, -0.663, 0.482},
      {"F3", ChannelRole::EEG, -0.344, 0.425},
      {"Fz", ChannelRole::EEG, 0.0, 0.410},
      {"F4", ChannelRole::EEG, 0.344, 0.425},
      {"F8", ChannelRole::EEG, 0.663, 0.482},
      {"FC5", ChannelRole::EEG, -0.598, 0.194},
      {"FC1", ChannelRole::EEG, -0.111, 0.260},
      {"FC2", ChannelRole::EEG, 0.111, 0.260},
      {"FC6", ChannelRole::EEG, 0.598, 0.194},
      {"T7", ChannelRole::EEG, -0.820, 0.0},
      {"C3", ChannelRole::EEG, -0.410, 0.0},
      {"Cz", ChannelRole::EEG, 0.0, 0.0},
      {"C4", ChannelRole::EEG, 0.410, 0.0},
      {"T8", ChannelRole::EEG, 0.820, 0.0},
      {"TP9", ChannelRole::EEG, -0.903, -0.294},
      {"CP5", ChannelRole::EEG, -0.598, -0.194},
      {"CP1", ChannelRole::EEG, -0.111, -0.260},
      {"CP2", ChannelRole::EEG, 0.111, -0.260},
      {"CP6", ChannelRole::EEG, 0.598, -0.194},
      {"TP10", ChannelRole::EEG, 0.903, -0.294},
      {"P7", ChannelRole::EEG, -0.663, -0.482},
      {"P3", ChannelRole::EEG, -0.344, -0.425},
      {"Pz", ChannelRole::EEG, 0.0, -0.410},
      {"P4", ChannelRole::EEG, 0.344, -0.425},
      {"P8", ChannelRole::EEG, 0.663, -0.482},
      {"O1", ChannelRole::EEG, -0.253, -0.780},
      {"Oz", ChannelRole::EEG, 0.0, -0.820},
      {"O2", ChannelRole::EEG, 0.253, -0.780},
      {"VEOGU", ChannelRole::EOG, 0.280, 1.020},
      {"VEOGD", ChannelRole::EOG, 0.280, 1.140},
      {"HEOGL", ChannelRole::EOG, -0.950, 0.850},
      {"HEOGR", ChannelRole::EOG, 0.950, 0.850},
  };
  return Montage(cap);
}

Montage Montage::parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) raise(ErrorCode::format_error, "montage CSV: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "name,role,x,y")
    raise(ErrorCode::format_error, "montage CSV: expected header 'name,role,x,y', got '" + line + "'");
  std::vector<ChannelInfo> channels;
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, role, xs, ys;
    if (!std::getline(ls, name, ',') || !std::getline(ls, role, ',') ||
        !std::getline(ls, xs, ',') || !std::getline(ls, ys, ','))
      raise(ErrorCode::format_error,
            "montage CSV: malformed line " + std::to_string(lineno));
    ChannelInfo ch;
    ch.name = name;
    ch.role = channel_role_from_string(role);
    try {
      ch.x = std::stod(xs);
      ch.y = std::stod(ys);
    } catch (const std::exception&) {
      raise(ErrorCode::format_error,
            "montage CSV: bad coordinates on line " + std::to_string(lineno));
    }
    channels.push_back(std::move(ch));
  }
  return Montage(std::move(channels));
}

Montage Montage::load_csv(const std::string& path) {
  return parse_csv(io::read_text_file(path));
}

std::string Montage::to_csv() const {
  std::ostringstream os;
  os << "name,role,x,y\n";
  os.precision(17);
  for (const auto& ch : channels_)
    os << ch.name << ',' << to_string(ch.role) << ',' << ch.x << ',' << ch.y << '\n';
  return os.str();
}

void Montage::save_csv(const std::string& path) const {
  io::write_text_file(path, to_csv());
}

std::vector<size_t> Montage::eeg_indices() const {
  std::vector<size_t> idx;
  for (size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i].role == ChannelRole::EEG) idx.push_back(i);
  return idx;
}

std::vector<size_t> Montage::eog_indices() const {
  std::vector<size_t> idx;
  for (size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i].role == ChannelRole::EOG) idx.push_back(i);
  return idx;
}

size_t Montage::n_eeg() const { return eeg_indices().size(); }
size_t Montage::n_eog() const { return eog_indices().size(); }

size_t Montage::index_of(const std::string& name) const {
  for (size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i].name == name) return i;
  raise(ErrorCode::domain_error, "montage: no channel named '" + name + "'");
}

bool Montage::has_channel(const std::string& name) const {
  return std::any_of(channels_.begin(), channels_.end(),
                     [&](const ChannelInfo& c) { return c.name == name; });
}

Montage Montage::eeg_only() const {
  std::vector<ChannelInfo> eeg;
  for (const auto& ch : channels_)
    if (ch.role == ChannelRole::EEG) eeg.push_back(ch);
  return Montage(std::move(eeg));
}

const char* to_string(FatigueClass c) {
  switch (c) {
    case FatigueClass::NS: return "NS";
    case FatigueClass::LF: return "LF";
    case FatigueClass::HF: return "HF";
  }
  return "?";
}

FatigueClass fatigue_class_from_string(const std::string& s) {
  if (s == "NS") return FatigueClass::NS;
  if (s == "LF") return FatigueClass::LF;
  if (s == "HF") return FatigueClass::HF;
  raise(ErrorCode::format_error, "unknown fatigue class: '" + s + "'");
}

FatigueClass map_kss_to_class(int level) {
  if (level < 1 || level > 9)
    raise(ErrorCode::domain_error, "KSS level out of range [1,9]: " + std::to_string(level));
  if (level <= 3) return FatigueClass::NS;
  if (level <= 6) return FatigueClass::LF;
  return FatigueClass::HF;
}

std::vector<KssLabel> fill_missing_kss(const std::vector<std::optional<int>>& per_minute) {
  std::vector<KssLabel> out;
  out.reserve(per_minute.size());
  for (size_t m = 0; m < per_minute.size(); ++m) {
    KssLabel l;
    l.minute_index = static_cast<int>(m);
    l.level = per_minute[m].value_or(9);
    if (l.level < 1 || l.level > 9)
      raise(ErrorCode::domain_error, "KSS level out of range [1,9] at minute " + std::to_string(m));
    out.push_back(l);
  }
  return out;
}

const std::array<BandDef, 4>& standard_bands() {
  static const std::array<BandDef, 4> bands = {{
      {"delta", 1.0, 4.0},
      {"theta", 4.0, 8.0},
      {"alpha", 8.0, 13.0},
      {"beta", 13.0, 30.0},
  }};
  return bands;
}

const BandDef& band_by_name(const std::string& name) {
  for (const auto& b : standard_bands())
    if (b.name == name) return b;
  raise(ErrorCode::domain_error, "unknown band: '" + name + "'");
}

std::vector<int> EpochSet::class_counts() const {
  std::vector<int> counts(kNumClasses, 0);
  for (const auto& e : epochs) counts[static_cast<int>(e.label)]++;
  return counts;
}

namespace {
constexpr char kEpochMagic[4] = {'F', 'E', 'P', 'O'};
constexpr uint32_t kEpochVersion = 1;
}  // namespace

void EpochSet::save(const std::string& path) const {
  auto os = io::open_out(path);
  io::write_magic(os, kEpochMagic);
  io::write_pod<uint32_t>(os, kEpochVersion);
  io::write_pod<double>(os, fs);
  io::write_string(os, montage.to_csv());
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(epochs.size()));
  if (epochs.empty()) return;
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(epochs.front().n_channels));
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(epochs.front().n_samples));
  for (const auto& e : epochs) {
    io::write_string(os, e.subject_id);
    io::write_pod<uint8_t>(os, static_cast<uint8_t>(e.label));
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(e.minute_index));
    io::write_bytes(os, e.data.data(), e.data.size() * sizeof(float));
  }
}

EpochSet EpochSet::load(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, kEpochMagic, path);
  const auto version = io::read_pod<uint32_t>(is, "version");
  if (version != kEpochVersion)
    raise(ErrorCode::format_error, path + ": unsupported epoch file version");
  EpochSet set;
  set.fs = io::read_pod<double>(is, "fs");
  set.montage = Montage::parse_csv(io::read_string(is, "montage"));
  const auto n = io::read_pod<uint32_t>(is, "epoch count");
  if (n == 0) return set;
  const auto n_ch = io::read_pod<uint32_t>(is, "n_channels");
  const auto n_samp = io::read_pod<uint32_t>(is, "n_samples");
  if (n_ch != set.montage.size())
    raise(ErrorCode::format_error, path + ": montage/channel count mismatch");
  set.epochs.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    Epoch e;
    e.n_channels = static_cast<int>(n_ch);
    e.n_samples = static_cast<int>(n_samp);
    e.subject_id = io::read_string(is, "subject_id");
    const auto label = io::read_pod<uint8_t>(is, "label");
    if (label > 2) raise(ErrorCode::format_error, path + ": bad class label");
    e.label = static_cast<FatigueClass>(label);
    e.minute_index = static_cast<int>(io::read_pod<uint32_t>(is, "minute"));
    e.data.resize(static_cast<size_t>(n_ch) * n_samp);
    io::read_bytes(is, e.data.data(), e.data.size() * sizeof(float), "epoch data");
    for (float v : e.data)
      if (!std::isfinite(v)) raise(ErrorCode::format_error, path + ": non-finite sample");
    set.epochs.push_back(std::move(e));
  }
  return set;
}

void RawRecording::validate() const {
  if (fs <= 0.0) raise(ErrorCode::domain_error, "recording: sample rate must be positive");
  if (data.size() != montage.size() * n_samples)
    raise(ErrorCode::shape_error, "recording: data size does not match channels x samples");
  for (float v : data)
    if (!std::isfinite(v)) raise(ErrorCode::numeric_error, "recording: non-finite sample");
}

}  // namespace fatigue
