#include "asrkit/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "asrkit/error.hpp"

namespace asrkit {

namespace {

constexpr std::uint16_t kTagPcm = 1;
constexpr std::uint16_t kTagFloat = 3;
constexpr std::uint16_t kTagExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct ParsedWav {
  WavInfo info;
  std::span<const std::uint8_t> data;
};

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorKind::Format, "malformed WAV: " + why); }

ParsedWav parse(std::span<const std::uint8_t> bytes, bool need_data) {
  if (bytes.size() < 12) malformed("file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) malformed("missing RIFF tag");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) malformed("missing WAVE tag");

  ParsedWav out;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) malformed("chunk extends past end of file");

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) malformed("fmt chunk too small");
      const std::uint8_t* f = bytes.data() + body;
      out.info.format_tag = read_u16(f);
      out.info.channels = read_u16(f + 2);
      out.info.sample_rate_hz = read_u32(f + 4);
      out.info.bits_per_sample = read_u16(f + 14);
      if (out.info.format_tag == kTagExtensible) {
        if (size < 40) malformed("extensible fmt chunk too small");
        out.info.format_tag = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      out.data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) malformed("no fmt chunk");
  if (!have_data) malformed("no data chunk");
  if (out.info.sample_rate_hz == 0) malformed("sample rate is zero");
  if (out.info.channels == 0) malformed("channel count is zero");

  const auto& info = out.info;
  const bool pcm16 = info.format_tag == kTagPcm && info.bits_per_sample == 16;
  const bool float32 = info.format_tag == kTagFloat && info.bits_per_sample == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorKind::UnsupportedCodec, "unsupported WAV encoding: format tag " +
                                                 std::to_string(info.format_tag) + ", " +
                                                 std::to_string(info.bits_per_sample) + " bits");
  }
  if (info.channels > 2) {
    throw Error(ErrorKind::UnsupportedCodec,
                "unsupported channel count " + std::to_string(info.channels));
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(info.channels) * info.bits_per_sample / 8;
  out.info.frames = out.data.size() / frame_bytes;
  if (need_data && out.info.frames == 0) malformed("data chunk holds no samples");
  return out;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

WavInfo probe_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  // Headers normally live in the first few hundred bytes; fall back to the
  // whole file if the data chunk is not reached.
  std::vector<std::uint8_t> head(4096);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (head.size() < 4096) return parse(head, true).info;
  return parse(slurp(path), true).info;
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  const ParsedWav wav = parse(bytes, true);
  const auto& info = wav.info;

  AudioBuffer out;
  out.sample_rate_hz = info.sample_rate_hz;
  out.samples.resize(info.frames);

  const std::size_t bytes_per_sample = info.bits_per_sample / 8;
  const std::uint8_t* p = wav.data.data();
  for (std::size_t i = 0; i < info.frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < info.channels; ++c) {
      double v;
      if (info.format_tag == kTagPcm) {
        const auto q = static_cast<std::int16_t>(read_u16(p));
        // Symmetric scale so that write->read round trips within half an LSB.
        v = std::max(-1.0, static_cast<double>(q) / 32767.0);
      } else {
        const float f = std::bit_cast<float>(read_u32(p));
        if (!std::isfinite(f)) malformed("non-finite float sample");
        v = std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
      acc += v;
      p += bytes_per_sample;
    }
    out.samples[i] = acc / info.channels;
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  if (buffer.sample_rate_hz == 0) throw Error(ErrorKind::Parameter, "sample rate must be positive");
  for (std::size_t i = 0; i < buffer.samples.size(); ++i) {
    const double s = buffer.samples[i];
    if (!(s >= -1.0 && s <= 1.0)) {
      throw Error(ErrorKind::Parameter, "sample " + std::to_string(i) + " outside [-1, 1]; peak-normalize before writing");
    }
  }

  const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kTagPcm);
  put_u16(out, 1);
  put_u32(out, buffer.sample_rate_hz);
  put_u32(out, buffer.sample_rate_hz * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : buffer.samples) {
    const auto q = static_cast<std::int16_t>(std::lround(s * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Write, "write failed for " + path.string());
}

namespace {

constexpr double kZeroCrossings = 32.0;
constexpr double kRolloff = 0.95;
constexpr double kKaiserBeta = 8.6;
constexpr std::uint64_t kMaxTablePhases = 4096;

class SincKernel {
 public:
  SincKernel(double cutoff) : cutoff_(cutoff), half_width_(kZeroCrossings / cutoff) {
    inv_i0_beta_ = 1.0 / std::cyl_bessel_i(0.0, kKaiserBeta);
  }

  double half_width() const { return half_width_; }

  double operator()(double x) const {
    const double u = x / half_width_;
    if (std::abs(u) >= 1.0) return 0.0;
    const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) * inv_i0_beta_;
    const double t = cutoff_ * x;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
    return cutoff_ * sinc * window;
  }

 private:
  double cutoff_;
  double half_width_;
  double inv_i0_beta_;
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buffer, std::uint32_t target_hz) {
  if (target_hz == 0) throw Error(ErrorKind::Parameter, "target sample rate must be positive");
  if (buffer.sample_rate_hz == 0) throw Error(ErrorKind::Parameter, "source sample rate must be positive");
  if (target_hz == buffer.sample_rate_hz) return buffer;

  const std::uint64_t src = buffer.sample_rate_hz;
  const std::uint64_t dst = target_hz;
  const std::uint64_t g = std::gcd(src, dst);
  const std::uint64_t up = dst / g;    // phases
  const std::uint64_t down = src / g;  // source step per output sample, in units of 1/up

  const auto n_in = static_cast<std::int64_t>(buffer.samples.size());
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * static_cast<double>(dst) / static_cast<double>(src)));

  const SincKernel kernel(kRolloff * std::min(1.0, static_cast<double>(dst) / static_cast<double>(src)));
  const auto reach = static_cast<std::int64_t>(std::ceil(kernel.half_width()));
  const auto taps = static_cast<std::size_t>(2 * reach);

  // Tap j of phase p weights source sample (base - reach + 1 + j), where the
  // output instant sits at base + p/up.
  auto fill_phase = [&](std::uint64_t phase, std::span<double> w) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    double sum = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const double offset = static_cast<double>(static_cast<std::int64_t>(j) - reach + 1) - frac;
      w[j] = kernel(offset);
      sum += w[j];
    }
    if (sum != 0.0)
      for (double& v : w) v /= sum;
  };

  std::vector<double> table;
  const bool tabulate = up <= kMaxTablePhases;
  if (tabulate) {
    table.resize(up * taps);
    for (std::uint64_t p = 0; p < up; ++p) fill_phase(p, std::span(table).subspan(p * taps, taps));
  }
  std::vector<double> scratch(tabulate ? 0 : taps);

  AudioBuffer out;
  out.sample_rate_hz = target_hz;
  out.source_id = buffer.source_id;
  out.samples.resize(n_out);
  const double* x = buffer.samples.data();
  for (std::size_t n = 0; n < n_out; ++n) {
    const std::uint64_t pos = static_cast<std::uint64_t>(n) * down;
    const auto base = static_cast<std::int64_t>(pos / up);
    const std::uint64_t phase = pos % up;
    std::span<const double> w;
    if (tabulate) {
      w = std::span<const double>(table).subspan(phase * taps, taps);
    } else {
      fill_phase(phase, scratch);
      w = scratch;
    }
    const std::int64_t first = base - reach + 1;
    const std::int64_t lo = std::max<std::int64_t>(0, -first);
    const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(taps), n_in - first);
    double acc = 0.0;
    for (std::int64_t j = lo; j < hi; ++j) acc += w[static_cast<std::size_t>(j)] * x[first + j];
    out.samples[n] = acc;
  }
  return out;
}

double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double mean_power(std::span<const double> x) {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

}  // namespace asrkit
