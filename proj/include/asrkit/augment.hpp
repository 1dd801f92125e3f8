#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "asrkit/audio.hpp"
#include "asrkit/corpus.hpp"

namespace asrkit {

inline constexpr std::uint64_t kDefaultSeed = 20240101;
inline constexpr double kRescalePeak = 0.99;

struct AugmentConfig {
  struct Noise {
    double snr_db_low = 5.0;
    double snr_db_high = 15.0;
    std::optional<std::filesystem::path> noise_file;  // nullopt: white Gaussian noise
  } noise;
  struct Clip {
    double factor_low = 0.3;
    double factor_high = 0.8;
  } clip;
  struct Reverb {
    double rt60_low = 0.1;
    double rt60_high = 0.5;
    double wet_gain = 0.4;
  } reverb;
  struct TimeDropout {
    double max_segment_s = 0.2;
    double segments_per_10s = 1.0;
  } time_dropout;
  std::uint64_t seed = kDefaultSeed;
  bool include_original = false;

  // Throws Parameter on empty ranges or out-of-domain values.
  void validate() const;

  // Missing keys keep their defaults.
  static AugmentConfig from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;
};

// If the peak exceeds 1, scale the whole buffer so the peak becomes 0.99.
void rescale_if_clipping(AudioBuffer& b);

// out = b + g * noise with g chosen so 10 log10(P_b / P_{g*noise}) = snr_db.
// snr_db = +inf returns the input unchanged. White Gaussian noise when no
// recording is given; a recording is tiled from a seeded offset.
AudioBuffer additive_noise(const AudioBuffer& b, double snr_db, std::uint64_t seed,
                           const AudioBuffer* noise_recording = nullptr);

// Hard limit at factor * max|b|, factor in (0, 1].
AudioBuffer clip(const AudioBuffer& b, double factor);

// Exponentially decaying Gaussian noise of ceil(rt60 * rate) samples, direct
// path forced to 1 before energy normalization (sum h^2 = 1).
AudioBuffer synth_rir(double rt60_s, std::uint32_t sample_rate_hz, std::uint64_t seed);

// Amplitude envelope 10^(-3 n / (rt60 * rate)); -60 dB at n = rt60 * rate.
double rir_envelope(double n, double rt60_s, std::uint32_t sample_rate_hz);

// dry + wet_gain * (b * ir - dry), i.e. (1 - wet_gain) dry + wet_gain wet,
// with the convolution tail kept: length len(b) + len(ir) - 1.
AudioBuffer reverberate(const AudioBuffer& b, const AudioBuffer& ir, double wet_gain);

struct DropoutSegment {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const DropoutSegment&) const = default;
};

// round(segments_per_10s * duration / 10) segments. Per segment, in draw order:
// start = below(num_samples); length = max_segment_s * (1 - uniform01()) seconds,
// rounded to samples (at least one), clamped to the buffer end.
std::vector<DropoutSegment> plan_time_dropout(std::size_t num_samples, std::uint32_t sample_rate_hz,
                                              double max_segment_s, double segments_per_10s, std::uint64_t seed);

AudioBuffer apply_time_dropout(const AudioBuffer& b, std::span<const DropoutSegment> segments);

AudioBuffer time_dropout(const AudioBuffer& b, double max_segment_s, double segments_per_10s, std::uint64_t seed);

// One technique with parameters drawn from the config ranges using entry_seed.
AudioBuffer apply_technique(const AudioBuffer& b, Technique technique, const AugmentConfig& config,
                            std::uint64_t entry_seed, const AudioBuffer* noise_recording = nullptr);

// Seed for (config seed, entry id, technique); independent of processing order.
std::uint64_t entry_seed(std::uint64_t global_seed, std::string_view entry_id, Technique technique);

// One copy per technique for every entry (written to audio_dir as
// <parent_id>.<technique>.wav), plus the originals when include_original.
// Output order follows input order. threads = 0 uses hardware concurrency.
Manifest augment_corpus(const Manifest& train, const AugmentConfig& config, const std::filesystem::path& audio_dir,
                        unsigned threads = 0);

}  // namespace asrkit
