#include "asrkit/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "asrkit/dsp.hpp"
#include "asrkit/error.hpp"
#include "asrkit/rng.hpp"

namespace asrkit {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Parameter, what);
}

void check_range(double lo, double hi, const char* name) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi,
          std::string(name) + " range must be finite with low <= high");
}

template <class T>
void read_opt(const nlohmann::json& obj, const char* key, T& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Schema, std::string("augment config field '") + key + "' has the wrong type");
  }
}

void read_range(const nlohmann::json& obj, const char* key, double& lo, double& hi) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
    throw Error(ErrorKind::Schema, std::string("augment config field '") + key + "' must be [low, high]");
  }
  lo = (*it)[0].get<double>();
  hi = (*it)[1].get<double>();
}

const nlohmann::json& section(const nlohmann::json& doc, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  const auto it = doc.find(key);
  return it == doc.end() ? empty : *it;
}

}  // namespace

void AugmentConfig::validate() const {
  check_range(noise.snr_db_low, noise.snr_db_high, "noise snr_db");
  check_range(clip.factor_low, clip.factor_high, "clip factor");
  require(clip.factor_low > 0.0 && clip.factor_high <= 1.0, "clip factor range must lie in (0, 1]");
  check_range(reverb.rt60_low, reverb.rt60_high, "reverb rt60");
  require(reverb.rt60_low > 0.0, "rt60 must be positive");
  require(reverb.wet_gain >= 0.0 && reverb.wet_gain <= 1.0, "wet_gain must lie in [0, 1]");
  require(time_dropout.max_segment_s >= 0.0 && std::isfinite(time_dropout.max_segment_s),
          "max_segment_s must be non-negative");
  require(time_dropout.segments_per_10s >= 0.0 && std::isfinite(time_dropout.segments_per_10s),
          "segments_per_10s must be non-negative");
}

AugmentConfig AugmentConfig::from_json(const nlohmann::json& doc) {
  AugmentConfig c;
  if (!doc.is_object()) throw Error(ErrorKind::Schema, "augment config must be a JSON object");
  const auto& n = section(doc, "noise");
  read_range(n, "snr_db_range", c.noise.snr_db_low, c.noise.snr_db_high);
  if (const auto it = n.find("noise_source"); it != n.end()) {
    const std::string src = it->get<std::string>();
    if (src != "white") c.noise.noise_file = src;
  }
  read_range(section(doc, "clip"), "factor_range", c.clip.factor_low, c.clip.factor_high);
  const auto& r = section(doc, "reverb");
  read_range(r, "rt60_range", c.reverb.rt60_low, c.reverb.rt60_high);
  read_opt(r, "wet_gain", c.reverb.wet_gain);
  const auto& d = section(doc, "time_dropout");
  read_opt(d, "max_segment_s", c.time_dropout.max_segment_s);
  read_opt(d, "segments_per_10s", c.time_dropout.segments_per_10s);
  read_opt(doc, "seed", c.seed);
  read_opt(doc, "include_original", c.include_original);
  c.validate();
  return c;
}

nlohmann::ordered_json AugmentConfig::to_json() const {
  nlohmann::ordered_json doc;
  doc["noise"] = {{"snr_db_range", {noise.snr_db_low, noise.snr_db_high}},
                  {"noise_source", noise.noise_file ? noise.noise_file->generic_string() : std::string("white")}};
  doc["clip"] = {{"factor_range", {clip.factor_low, clip.factor_high}}};
  doc["reverb"] = {{"rt60_range", {reverb.rt60_low, reverb.rt60_high}}, {"wet_gain", reverb.wet_gain}};
  doc["time_dropout"] = {{"max_segment_s", time_dropout.max_segment_s},
                         {"segments_per_10s", time_dropout.segments_per_10s}};
  doc["seed"] = seed;
  doc["include_original"] = include_original;
  return doc;
}

void rescale_if_clipping(AudioBuffer& b) {
  const double peak = peak_abs(b.samples);
  if (peak <= 1.0) return;
  const double g = kRescalePeak / peak;
  for (double& s : b.samples) s *= g;
}

AudioBuffer additive_noise(const AudioBuffer& b, double snr_db, std::uint64_t seed, const AudioBuffer* noise_recording) {
  require(!std::isnan(snr_db) && snr_db != -INFINITY, "snr_db must be a number above -inf");
  if (snr_db == INFINITY) return b;

  const double signal_power = mean_power(b.samples);
  if (signal_power == 0.0) {
    throw Error(ErrorKind::DegenerateInput, "cannot set a finite SNR on a silent (zero-power) input");
  }

  Rng rng(seed);
  std::vector<double> noise(b.size());
  if (noise_recording == nullptr) {
    for (double& v : noise) v = rng.normal();
  } else {
    require(!noise_recording->empty(), "noise recording is empty");
    require(noise_recording->sample_rate_hz == b.sample_rate_hz, "noise recording sample rate mismatch");
    const std::size_t len = noise_recording->size();
    std::size_t pos = rng.below(len);
    for (double& v : noise) {
      v = noise_recording->samples[pos];
      pos = (pos + 1) % len;
    }
  }
  const double noise_power = mean_power(noise);
  if (noise_power == 0.0) throw Error(ErrorKind::DegenerateInput, "noise source has zero power");

  const double gain = std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  AudioBuffer out = b;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gain * noise[i];
  rescale_if_clipping(out);
  return out;
}

AudioBuffer clip(const AudioBuffer& b, double factor) {
  require(factor > 0.0 && factor <= 1.0, "clip factor must lie in (0, 1]");
  const double threshold = factor * peak_abs(b.samples);
  AudioBuffer out = b;
  if (threshold == 0.0) return out;
  for (double& s : out.samples) s = std::clamp(s, -threshold, threshold);
  return out;
}

double rir_envelope(double n, double rt60_s, std::uint32_t sample_rate_hz) {
  return std::pow(10.0, -3.0 * n / (rt60_s * static_cast<double>(sample_rate_hz)));
}

AudioBuffer synth_rir(double rt60_s, std::uint32_t sample_rate_hz, std::uint64_t seed) {
  require(rt60_s > 0.0 && std::isfinite(rt60_s), "rt60 must be positive");
  require(sample_rate_hz > 0, "sample rate must be positive");
  const auto len = static_cast<std::size_t>(std::ceil(rt60_s * static_cast<double>(sample_rate_hz)));

  AudioBuffer h;
  h.sample_rate_hz = sample_rate_hz;
  h.samples.resize(std::max<std::size_t>(len, 1));
  Rng rng(seed);
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double w = rng.normal();
    h.samples[n] = n == 0 ? 1.0 : w * rir_envelope(static_cast<double>(n), rt60_s, sample_rate_hz);
  }
  const double norm = std::sqrt(energy(h.samples));
  for (double& v : h.samples) v /= norm;
  return h;
}

AudioBuffer reverberate(const AudioBuffer& b, const AudioBuffer& ir, double wet_gain) {
  require(!ir.empty(), "impulse response is empty");
  require(ir.sample_rate_hz == b.sample_rate_hz, "impulse response sample rate differs from the signal");
  require(wet_gain >= 0.0 && wet_gain <= 1.0, "wet_gain must lie in [0, 1]");

  AudioBuffer out = b;
  if (b.empty()) return out;
  const std::vector<double> wet = convolve(b.samples, ir.samples);
  out.samples.resize(wet.size(), 0.0);
  for (std::size_t i = 0; i < wet.size(); ++i) out.samples[i] += wet_gain * (wet[i] - out.samples[i]);
  rescale_if_clipping(out);
  return out;
}

std::vector<DropoutSegment> plan_time_dropout(std::size_t num_samples, std::uint32_t sample_rate_hz,
                                              double max_segment_s, double segments_per_10s, std::uint64_t seed) {
  require(max_segment_s >= 0.0, "max_segment_s must be non-negative");
  require(segments_per_10s >= 0.0, "segments_per_10s must be non-negative");
  require(sample_rate_hz > 0, "sample rate must be positive");
  std::vector<DropoutSegment> out;
  if (num_samples == 0 || max_segment_s == 0.0) return out;

  const double duration = static_cast<double>(num_samples) / static_cast<double>(sample_rate_hz);
  const auto k = static_cast<std::size_t>(std::llround(segments_per_10s * duration / 10.0));
  Rng rng(seed);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t start = rng.below(num_samples);
    const double len_s = max_segment_s * (1.0 - rng.uniform01());
    const auto len = std::max<long long>(1, std::llround(len_s * static_cast<double>(sample_rate_hz)));
    out.push_back({start, std::min(static_cast<std::size_t>(len), num_samples - start)});
  }
  return out;
}

AudioBuffer apply_time_dropout(const AudioBuffer& b, std::span<const DropoutSegment> segments) {
  AudioBuffer out = b;
  for (const auto& seg : segments) {
    const std::size_t end = std::min(out.size(), seg.start + seg.length);
    for (std::size_t i = std::min(seg.start, end); i < end; ++i) out.samples[i] = 0.0;
  }
  return out;
}

AudioBuffer time_dropout(const AudioBuffer& b, double max_segment_s, double segments_per_10s, std::uint64_t seed) {
  const auto plan = plan_time_dropout(b.size(), b.sample_rate_hz, max_segment_s, segments_per_10s, seed);
  return apply_time_dropout(b, plan);
}

std::uint64_t entry_seed(std::uint64_t global_seed, std::string_view entry_id, Technique technique) {
  return derive_seed(global_seed, entry_id, to_string(technique));
}

AudioBuffer apply_technique(const AudioBuffer& b, Technique technique, const AugmentConfig& config,
                            std::uint64_t seed, const AudioBuffer* noise_recording) {
  Rng rng(seed);
  switch (technique) {
    case Technique::Noise: {
      const double snr = rng.uniform(config.noise.snr_db_low, config.noise.snr_db_high);
      return additive_noise(b, snr, rng.next_u64(), noise_recording);
    }
    case Technique::Clip:
      return clip(b, rng.uniform(config.clip.factor_low, config.clip.factor_high));
    case Technique::Reverb: {
      const double rt60 = rng.uniform(config.reverb.rt60_low, config.reverb.rt60_high);
      const AudioBuffer ir = synth_rir(rt60, b.sample_rate_hz, rng.next_u64());
      return reverberate(b, ir, config.reverb.wet_gain);
    }
    case Technique::TimeDropout:
      return time_dropout(b, config.time_dropout.max_segment_s, config.time_dropout.segments_per_10s,
                          rng.next_u64());
  }
  throw Error(ErrorKind::Parameter, "unknown technique");
}

namespace {

AudioBuffer load_canonical(const fs::path& path) {
  AudioBuffer b = read_wav(path);
  if (b.sample_rate_hz != kCanonicalRateHz) {
    b = resample(b, kCanonicalRateHz);
    rescale_if_clipping(b);
  }
  return b;
}

}  // namespace

Manifest augment_corpus(const Manifest& train, const AugmentConfig& config, const fs::path& audio_dir,
                        unsigned threads) {
  config.validate();
  for (const auto& e : train.entries) {
    if (e.split != Split::Train) {
      throw Error(ErrorKind::Hygiene, "entry '" + e.id + "' has split '" + std::string(to_string(e.split)) +
                                          "'; only train entries may be augmented");
    }
    if (!e.is_original()) {
      throw Error(ErrorKind::Hygiene, "entry '" + e.id + "' is already augmented");
    }
  }
  Manifest out;
  if (train.empty()) return out;

  try {
    fs::create_directories(audio_dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::Io, "cannot create output directory " + audio_dir.string() + ": " + e.what());
  }

  std::optional<AudioBuffer> noise_recording;
  if (config.noise.noise_file) noise_recording = load_canonical(*config.noise.noise_file);
  const AudioBuffer* noise_ptr = noise_recording ? &*noise_recording : nullptr;

  constexpr std::size_t kPerEntry = std::size(kAllTechniques);
  std::vector<ManifestEntry> produced(train.size() * kPerEntry);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < train.size(); i = next++) {
      try {
        const ManifestEntry& src = train.entries[i];
        const AudioBuffer audio = load_canonical(src.audio);
        for (std::size_t t = 0; t < kPerEntry; ++t) {
          const Technique technique = kAllTechniques[t];
          const std::uint64_t seed = entry_seed(config.seed, src.id, technique);
          const AudioBuffer aug = apply_technique(audio, technique, config, seed, noise_ptr);
          const std::string name = src.id + "." + std::string(to_string(technique));
          const fs::path path = audio_dir / (name + ".wav");
          write_wav(aug, path);

          ManifestEntry e;
          e.id = name;
          e.audio = path;
          e.text = src.text;
          e.duration_s = aug.duration_s();
          e.split = Split::Train;
          e.augmentation = Augmentation{technique, seed, src.id};
          produced[i * kPerEntry + t] = std::move(e);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = train.size();
      }
    }
  };

  const unsigned n_threads = std::clamp<unsigned>(threads ? threads : std::thread::hardware_concurrency(), 1,
                                                  static_cast<unsigned>(train.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::set<std::string, std::less<>> ids;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (config.include_original) out.entries.push_back(train.entries[i]);
    for (std::size_t t = 0; t < kPerEntry; ++t) out.entries.push_back(std::move(produced[i * kPerEntry + t]));
  }
  for (const auto& e : out.entries) {
    if (!ids.insert(e.id).second) throw Error(ErrorKind::Schema, "augmented id '" + e.id + "' collides with an existing id");
  }
  return out;
}

}  // namespace asrkit
