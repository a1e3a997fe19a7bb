#include "fatigue/runconfig.hpp"

#include <set>

#include "fatigue/io_util.hpp"

namespace fatigue {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) raise(ErrorCode::format_error, "config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      raise(ErrorCode::format_error, "config: unknown key '" + where + "." + it.key() + "'");
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"seed", "jobs", "synth", "dsp", "ica", "features", "net", "train", "svm", "cv"},
             "");
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.jobs = j.value("jobs", c.jobs);
  if (c.jobs < 1) raise(ErrorCode::format_error, "config: jobs must be >= 1");

  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s,
               {"preset", "subjects", "minutes", "fs", "signature_gain", "pink_exponent",
                "bg_rms_uv", "band_rms_uv", "env_depth", "blink_rate_per_min", "blink_amp_uv",
                "eog_bg_rms_uv", "kss_start", "kss_end", "miss_rate"},
               "synth");
    c.synth.preset = s.value("preset", c.synth.preset);
    if (c.synth.preset == "desk") {
      c.synth.minutes = 10.0;
      c.synth.fs = 200.0;
    } else if (c.synth.preset == "paper") {
      c.synth.minutes = 60.0;
      c.synth.fs = 1000.0;
    } else if (c.synth.preset != "custom") {
      raise(ErrorCode::format_error, "config: synth.preset must be desk|paper|custom");
    }
    c.synth.subjects = s.value("subjects", c.synth.subjects);
    c.synth.minutes = s.value("minutes", c.synth.minutes);
    c.synth.fs = s.value("fs", c.synth.fs);
    auto& p = c.synth.profile;
    p.signature_gain = s.value("signature_gain", p.signature_gain);
    p.pink_exponent = s.value("pink_exponent", p.pink_exponent);
    p.bg_rms_uv = s.value("bg_rms_uv", p.bg_rms_uv);
    if (s.contains("band_rms_uv")) {
      const auto v = s["band_rms_uv"].get<std::vector<double>>();
      if (v.size() != 4) raise(ErrorCode::format_error, "config: synth.band_rms_uv needs 4 values");
      for (size_t i = 0; i < 4; ++i) p.band_rms_uv[i] = v[i];
    }
    p.env_depth = s.value("env_depth", p.env_depth);
    p.blink_rate_per_min = s.value("blink_rate_per_min", p.blink_rate_per_min);
    p.blink_amp_uv = s.value("blink_amp_uv", p.blink_amp_uv);
    p.eog_bg_rms_uv = s.value("eog_bg_rms_uv", p.eog_bg_rms_uv);
    p.kss_start = s.value("kss_start", p.kss_start);
    p.kss_end = s.value("kss_end", p.kss_end);
    p.miss_rate = s.value("miss_rate", p.miss_rate);
  }

  if (j.contains("dsp")) {
    const auto& d = j["dsp"];
    check_keys(d, {"bandpass_lo", "bandpass_hi", "bandpass_order", "notch_hz", "notch_q",
                   "target_fs"},
               "dsp");
    c.dsp.bandpass_lo = d.value("bandpass_lo", c.dsp.bandpass_lo);
    c.dsp.bandpass_hi = d.value("bandpass_hi", c.dsp.bandpass_hi);
    c.dsp.bandpass_order = d.value("bandpass_order", c.dsp.bandpass_order);
    c.dsp.notch_hz = d.value("notch_hz", c.dsp.notch_hz);
    c.dsp.notch_q = d.value("notch_q", c.dsp.notch_q);
    c.dsp.target_fs = d.value("target_fs", c.dsp.target_fs);
  }

  if (j.contains("ica")) {
    const auto& i = j["ica"];
    check_keys(i, {"enabled", "threshold", "max_iter", "tol"}, "ica");
    c.ica.enabled = i.value("enabled", c.ica.enabled);
    c.ica.threshold = i.value("threshold", c.ica.threshold);
    c.ica.max_iter = i.value("max_iter", c.ica.max_iter);
    c.ica.tol = i.value("tol", c.ica.tol);
  }

  if (j.contains("features")) {
    const auto& f = j["features"];
    check_keys(f, {"seg_len", "overlap", "log_scaled"}, "features");
    c.features.welch.seg_len = f.value("seg_len", c.features.welch.seg_len);
    c.features.welch.overlap = f.value("overlap", c.features.welch.overlap);
    c.features.log_scaled = f.value("log_scaled", c.features.log_scaled);
  }

  if (j.contains("net")) c.net = model::FatigueNetConfig::from_json(j["net"]);
  if (j.contains("train")) {
    check_keys(j["train"],
               {"optimizer", "learning_rate", "momentum", "batch_size", "epochs", "patience",
                "seed", "weight_init"},
               "train");
    c.train = model::TrainConfig::from_json(j["train"]);
  }
  if (j.contains("svm")) {
    const auto& s = j["svm"];
    check_keys(s, {"lambda", "iterations"}, "svm");
    c.svm.lambda = s.value("lambda", c.svm.lambda);
    c.svm.iterations = s.value("iterations", c.svm.iterations);
  }
  if (j.contains("cv")) {
    const auto& v = j["cv"];
    check_keys(v, {"k", "repeats", "stratified"}, "cv");
    c.cv.k = v.value("k", c.cv.k);
    c.cv.repeats = v.value("repeats", c.cv.repeats);
    c.cv.stratified = v.value("stratified", c.cv.stratified);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorCode::format_error, path + ": invalid JSON (" + e.what() + ")");
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  auto& s = j["synth"];
  s["preset"] = synth.preset;
  s["subjects"] = synth.subjects;
  s["minutes"] = synth.minutes;
  s["fs"] = synth.fs;
  s["signature_gain"] = synth.profile.signature_gain;
  s["pink_exponent"] = synth.profile.pink_exponent;
  s["bg_rms_uv"] = synth.profile.bg_rms_uv;
  s["band_rms_uv"] = std::vector<double>(synth.profile.band_rms_uv, synth.profile.band_rms_uv + 4);
  s["env_depth"] = synth.profile.env_depth;
  s["blink_rate_per_min"] = synth.profile.blink_rate_per_min;
  s["blink_amp_uv"] = synth.profile.blink_amp_uv;
  s["eog_bg_rms_uv"] = synth.profile.eog_bg_rms_uv;
  s["kss_start"] = synth.profile.kss_start;
  s["kss_end"] = synth.profile.kss_end;
  s["miss_rate"] = synth.profile.miss_rate;
  auto& d = j["dsp"];
  d["bandpass_lo"] = dsp.bandpass_lo;
  d["bandpass_hi"] = dsp.bandpass_hi;
  d["bandpass_order"] = dsp.bandpass_order;
  d["notch_hz"] = dsp.notch_hz;
  d["notch_q"] = dsp.notch_q;
  d["target_fs"] = dsp.target_fs;
  auto& i = j["ica"];
  i["enabled"] = ica.enabled;
  i["threshold"] = ica.threshold;
  i["max_iter"] = ica.max_iter;
  i["tol"] = ica.tol;
  auto& f = j["features"];
  f["seg_len"] = features.welch.seg_len;
  f["overlap"] = features.welch.overlap;
  f["log_scaled"] = features.log_scaled;
  j["net"] = net.to_json();
  j["train"] = train.to_json();
  auto& sv = j["svm"];
  sv["lambda"] = svm.lambda;
  sv["iterations"] = svm.iterations;
  auto& v = j["cv"];
  v["k"] = cv.k;
  v["repeats"] = cv.repeats;
  v["stratified"] = cv.stratified;
  return j;
}

std::string RunConfig::resolved_text() const { return to_json().dump(2) + "\n"; }

std::string RunConfig::hash() const {
  const std::string text = to_json().dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace fatigue
