#include "asrkit/fixture.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "asrkit/audio.hpp"
#include "asrkit/error.hpp"
#include "asrkit/rng.hpp"
#include "asrkit/transcript.hpp"

namespace asrkit {

namespace fs = std::filesystem;

const std::vector<FixtureUtterance>& fixture_utterances() {
  static const std::vector<FixtureUtterance> utterances = {
      {"utt01", "si jawuči bi gəl jaam si jawuči bi gəl jaam", "si jawuči bi gəl jaam si jawuči bi gəl jaam"},
      {"utt02", "tələ amə duləkə ani əmkə iči bo aləxə", "tələ am dulkə ani əmkə iči bo aləxə"},
      {"utt03", "bi sajwə wakə bi sajwə wakə", "bi sajwə wakə bi sajwə wakə"},
      {"utt04", "bi siskə bitk xolal ba də jom mutulko", "bi siskə bitk xolal ba d jom mutulko"},
      {"utt05", "min do bitk xolal ba joxo", "min do bitk xolal ba joxo"},
      {"utt06", "odun gjak šawulo odun gjak šawulo", "odun gjak šaxulo odun gjak šaxulo"},
      {"utt07", "miŋ ənjə bitk səwə.", "miŋ ənjə bitk səw."},
      {"utt08", "došən ǰo.", "došən ǰo."},
      {"utt09", "gunin ilan damgu", "gunim ila daŋgu"},
      {"utt10", "ilan ba gunin bi", "ila ba gunim bi"},
      {"utt11", "amə do damgu omi", "am do daŋgu omi"},
      {"utt12", "bi šawulo joxo, si ani?", "bi šaxulo joxo, si ani?"},
      {"utt13", "təl bitk ba čakə", "təl bitk ba čako"},
      {"utt14", "ani əmkə sajwə də", "ani əmkə sajwə d"},
      {"utt15", "mutulko wakə min do", "mutulko wak min do"},
      {"utt16", "jawuči gəl ilan jaam", "jawuči gəl ilan jam"},
  };
  return utterances;
}

namespace {

constexpr std::uint32_t kFixtureRateHz = 22050;

// Voiced "syllables": harmonic tones with a raised-cosine envelope, one per
// character, over a faint noise floor.
AudioBuffer synthesize(const std::string& text, double duration_s, Rng& rng) {
  AudioBuffer b;
  b.sample_rate_hz = kFixtureRateHz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * kFixtureRateHz));
  b.samples.assign(n, 0.0);

  const std::u32string chars = decode_utf8(text);
  const std::size_t units = std::max<std::size_t>(chars.size(), 1);
  const std::size_t unit_len = n / units;
  for (std::size_t u = 0; u < units && unit_len > 0; ++u) {
    if (u < chars.size() && chars[u] == U' ') continue;
    const double f0 = rng.uniform(90.0, 180.0);
    const double amp = rng.uniform(0.1, 0.3);
    for (std::size_t k = 0; k < unit_len; ++k) {
      const double t = static_cast<double>(k) / kFixtureRateHz;
      const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / unit_len);
      double v = 0.0;
      for (int h = 1; h <= 4; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t) / h;
      b.samples[u * unit_len + k] += amp * env * v / 2.1;
    }
  }
  for (double& s : b.samples) s += 0.002 * rng.normal();
  return b;
}

void write_tsv(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  for (const auto& [id, text] : rows) out << id << '\t' << text << '\n';
}

}  // namespace

FixtureCorpus write_fixture_corpus(const fs::path& dir, double total_s, std::uint64_t seed) {
  FixtureCorpus corpus{dir / "wav", dir / "references.tsv", dir / "hypotheses.tsv"};
  fs::create_directories(corpus.audio_dir);

  const auto& utts = fixture_utterances();
  std::size_t total_chars = 0;
  for (const auto& u : utts) total_chars += decode_utf8(u.reference).size();

  std::vector<std::pair<std::string, std::string>> refs, hyps;
  for (const auto& u : utts) {
    Rng rng(derive_seed(seed, u.id, "fixture"));
    const double share = static_cast<double>(decode_utf8(u.reference).size()) / static_cast<double>(total_chars);
    write_wav(synthesize(u.reference, total_s * share, rng), corpus.audio_dir / (u.id + ".wav"));
    refs.emplace_back(u.id, u.reference);
    hyps.emplace_back(u.id, u.hypothesis);
  }
  write_tsv(corpus.references, refs);
  write_tsv(corpus.hypotheses, hyps);
  return corpus;
}

}  // namespace asrkit
