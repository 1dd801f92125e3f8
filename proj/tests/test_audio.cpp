#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "asrkit/audio.hpp"
#include "asrkit/error.hpp"

using namespace asrkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "asrkit_test_audio";
  fs::create_directories(dir);
  return dir;
}

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

// Hand-rolled RIFF writer, independent of encode_wav.
std::vector<std::uint8_t> make_wav(std::uint16_t tag, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                                   const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, static_cast<std::uint32_t>(36 + payload.size()));
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(b, 16);
  put16(b, tag);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

void save(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Amplitude of the component at freq_hz over a window holding whole cycles.
double goertzel_amplitude(std::span<const double> x, double freq_hz, double rate_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / rate_hz;
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    re += x[n] * std::cos(w * n);
    im -= x[n] * std::sin(w * n);
  }
  return 2.0 * std::hypot(re, im) / static_cast<double>(x.size());
}

AudioBuffer tone(double freq, std::uint32_t rate, std::size_t n, double amp) {
  AudioBuffer b;
  b.sample_rate_hz = rate;
  b.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return b;
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an asrkit::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("read_wav: one second of 16-bit silence") {
  const auto path = scratch_dir() / "silence.wav";
  save(path, make_wav(1, 1, 16000, 16, std::vector<std::uint8_t>(32000, 0)));
  const AudioBuffer b = read_wav(path);
  CHECK(b.sample_rate_hz == 16000);
  REQUIRE(b.size() == 16000);
  CHECK(std::all_of(b.samples.begin(), b.samples.end(), [](double s) { return s == 0.0; }));
  CHECK(b.duration_s() == 1.0);
}

TEST_CASE("read_wav: stereo (+0.5, -0.5) averages to zero") {
  std::vector<std::uint8_t> payload;
  for (int i = 0; i < 1000; ++i) {
    put16(payload, static_cast<std::uint16_t>(16384));
    put16(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(-16384)));
  }
  const AudioBuffer b = decode_wav(make_wav(1, 2, 8000, 16, payload));
  REQUIRE(b.size() == 1000);
  CHECK(b.sample_rate_hz == 8000);
  CHECK(std::all_of(b.samples.begin(), b.samples.end(), [](double s) { return s == 0.0; }));
}

TEST_CASE("read_wav: full-scale 16-bit sine matches its generator") {
  std::vector<std::uint8_t> payload;
  std::vector<double> truth;
  for (int i = 0; i < 4000; ++i) {
    const double s = std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0);
    truth.push_back(s);
    put16(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(s * 32767.0))));
  }
  const AudioBuffer b = decode_wav(make_wav(1, 1, 16000, 16, payload));
  REQUIRE(b.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(std::abs(b.samples[i] - truth[i]) <= 1.0 / 32768.0);
}

TEST_CASE("read_wav: IEEE float32, mono and stereo") {
  std::vector<std::uint8_t> mono, stereo;
  const float values[] = {0.25f, -0.5f, 1.0f, -1.0f};
  for (float v : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put32(mono, bits);
    put32(stereo, bits);
    put32(stereo, 0);
  }
  const AudioBuffer m = decode_wav(make_wav(3, 1, 44100, 32, mono));
  REQUIRE(m.size() == 4);
  CHECK(m.samples[0] == 0.25);
  CHECK(m.samples[3] == -1.0);
  const AudioBuffer s = decode_wav(make_wav(3, 2, 44100, 32, stereo));
  REQUIRE(s.size() == 4);
  CHECK(s.samples[1] == -0.25);
}

TEST_CASE("read_wav: malformed and unsupported inputs") {
  std::vector<std::uint8_t> payload(100, 0);
  CHECK(kind_of([] { decode_wav(std::vector<std::uint8_t>{'R', 'I', 'F'}); }) == ErrorKind::Format);

  auto not_riff = make_wav(1, 1, 16000, 16, payload);
  not_riff[0] = 'X';
  CHECK(kind_of([&] { decode_wav(not_riff); }) == ErrorKind::Format);

  auto truncated = make_wav(1, 1, 16000, 16, payload);
  truncated.resize(truncated.size() - 10);
  CHECK(kind_of([&] { decode_wav(truncated); }) == ErrorKind::Format);

  CHECK(kind_of([&] { decode_wav(make_wav(1, 1, 16000, 16, {})); }) == ErrorKind::Format);
  CHECK(kind_of([&] { decode_wav(make_wav(0x55, 1, 16000, 16, payload)); }) == ErrorKind::UnsupportedCodec);
  CHECK(kind_of([&] { decode_wav(make_wav(1, 1, 16000, 24, std::vector<std::uint8_t>(99, 0))); }) ==
        ErrorKind::UnsupportedCodec);
  CHECK(kind_of([&] { decode_wav(make_wav(1, 6, 16000, 16, std::vector<std::uint8_t>(120, 0))); }) ==
        ErrorKind::UnsupportedCodec);
  CHECK(kind_of([&] { read_wav(scratch_dir() / "does-not-exist.wav"); }) == ErrorKind::Io);
}

TEST_CASE("write_wav: encoding rules") {
  SUBCASE("zero buffer gives an all-zero data chunk") {
    AudioBuffer b;
    b.samples.assign(50, 0.0);
    const auto bytes = encode_wav(b);
    REQUIRE(bytes.size() == 44 + 100);
    CHECK(std::all_of(bytes.begin() + 44, bytes.end(), [](std::uint8_t v) { return v == 0; }));
  }
  SUBCASE("+1.0 encodes as 32767") {
    AudioBuffer b;
    b.samples = {1.0, -1.0};
    const auto bytes = encode_wav(b);
    CHECK(static_cast<std::int16_t>(bytes[44] | (bytes[45] << 8)) == 32767);
    CHECK(static_cast<std::int16_t>(bytes[46] | (bytes[47] << 8)) == -32767);
  }
  SUBCASE("out-of-range samples are rejected") {
    AudioBuffer b;
    b.samples = {0.1, 1.5};
    CHECK(kind_of([&] { encode_wav(b); }) == ErrorKind::Parameter);
    b.samples = {std::nan("")};
    CHECK(kind_of([&] { encode_wav(b); }) == ErrorKind::Parameter);
  }
  SUBCASE("missing parent directory is a write error") {
    AudioBuffer b;
    b.samples = {0.0};
    CHECK(kind_of([&] { write_wav(b, scratch_dir() / "no" / "such" / "dir.wav"); }) == ErrorKind::Write);
  }
}

TEST_CASE("property: read_wav(write_wav(b)) within 1/32768 per sample") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto path = scratch_dir() / "roundtrip.wav";
  for (int trial = 0; trial < 20; ++trial) {
    AudioBuffer b;
    b.sample_rate_hz = 8000 + 1000 * trial;
    b.samples.resize(1 + gen() % 3000);
    for (double& s : b.samples) s = u(gen);
    b.samples.front() = trial % 2 ? 1.0 : -1.0;
    write_wav(b, path);
    const AudioBuffer r = read_wav(path);
    REQUIRE(r.size() == b.size());
    CHECK(r.sample_rate_hz == b.sample_rate_hz);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(r.samples[i] - b.samples[i]));
    CHECK(worst <= 1.0 / 32768.0);
  }
}

TEST_CASE("probe_wav reads header fields without decoding") {
  AudioBuffer b;
  b.sample_rate_hz = 22050;
  b.samples.assign(22050 * 3 / 2, 0.1);
  const auto path = scratch_dir() / "probe.wav";
  write_wav(b, path);
  const WavInfo info = probe_wav(path);
  CHECK(info.channels == 1);
  CHECK(info.sample_rate_hz == 22050);
  CHECK(info.frames == b.size());
  CHECK(info.duration_s() == doctest::Approx(1.5));
}

TEST_CASE("resample: identity and length rules") {
  const AudioBuffer in = tone(440.0, 16000, 12345, 0.5);
  const AudioBuffer same = resample(in, 16000);
  CHECK(same.samples == in.samples);

  const AudioBuffer one_second = tone(1000.0, 48000, 48000, 0.5);
  CHECK(resample(one_second, 16000).size() == 16000);
  CHECK(resample(tone(1000.0, 44100, 44100, 0.5), 16000).size() == 16000);
  CHECK(resample(tone(1000.0, 44100, 1001, 0.5), 16000).size() == static_cast<std::size_t>(std::llround(1001.0 * 16000 / 44100)));
  CHECK_THROWS_AS(resample(in, 0), Error);
}

TEST_CASE("property: resample preserves duration within one output sample period") {
  const std::uint32_t rates[] = {8000, 11025, 16000, 22050, 44100, 48000};
  for (std::uint32_t src : rates) {
    for (std::uint32_t dst : rates) {
      for (std::size_t n : {1u, 7u, 999u, 4410u}) {
        const AudioBuffer in = tone(300.0, src, n, 0.3);
        const AudioBuffer out = resample(in, dst);
        CHECK(out.sample_rate_hz == dst);
        CHECK(std::abs(out.duration_s() - in.duration_s()) <= 1.0 / dst);
      }
    }
  }
}

TEST_CASE("resample: 1 kHz tone keeps its amplitude within 0.5 dB") {
  struct Case {
    std::uint32_t src, dst;
  };
  // 16000 -> 16001 exceeds the polyphase table limit and takes the direct path.
  for (const Case c : {Case{48000, 16000}, Case{16000, 48000}, Case{44100, 16000}, Case{22050, 16000},
                       Case{16000, 16001}}) {
    CAPTURE(c.src);
    CAPTURE(c.dst);
    const AudioBuffer in = tone(1000.0, c.src, c.src, 0.5);
    const AudioBuffer out = resample(in, c.dst);
    // Middle half-second, whole number of 1 kHz cycles where possible.
    const std::size_t len = c.dst / 2;
    const std::span<const double> mid(out.samples.data() + c.dst / 4, len);
    const double amp = goertzel_amplitude(mid, 1000.0, c.dst);
    const double db = 20.0 * std::log10(amp / 0.5);
    CHECK(std::abs(db) <= 0.5);
  }
}
