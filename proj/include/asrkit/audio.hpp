#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace asrkit {

inline constexpr std::uint32_t kCanonicalRateHz = 16000;

// Mono waveform with nominal range [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = kCanonicalRateHz;
  std::optional<std::string> source_id;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
  }
};

struct WavInfo {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate_hz = 0;
  std::uint16_t bits_per_sample = 0;
  std::size_t frames = 0;

  double duration_s() const noexcept {
    return static_cast<double>(frames) / static_cast<double>(sample_rate_hz);
  }
};

// Header-only inspection; throws Format / UnsupportedCodec like read_wav.
WavInfo probe_wav(const std::filesystem::path& path);

// PCM16 or IEEE float32, 1 or 2 channels. Stereo is averaged to mono.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

// Always PCM16 mono. Samples must already lie in [-1, 1].
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);

// Windowed-sinc (Kaiser) band-limited rate conversion.
// Output length is round(len * target / source).
AudioBuffer resample(const AudioBuffer& buffer, std::uint32_t target_hz);

double peak_abs(std::span<const double> x);
double mean_power(std::span<const double> x);
double energy(std::span<const double> x);

}  // namespace asrkit
