#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace asrkit {

struct FixtureUtterance {
  std::string id;
  std::string reference;
  std::string hypothesis;
};

// Transcription pairs of the synthetic corpus; hypotheses carry the kinds of
// errors the taxonomy is meant to pick up.
const std::vector<FixtureUtterance>& fixture_utterances();

struct FixtureCorpus {
  std::filesystem::path audio_dir;
  std::filesystem::path references;  // id<TAB>text
  std::filesystem::path hypotheses;  // id<TAB>text
};

// Deterministic synthetic corpus of about total_s seconds of tonal "speech"
// at 22.05 kHz (so ingest exercises resampling).
FixtureCorpus write_fixture_corpus(const std::filesystem::path& dir, double total_s = 120.0,
                                   std::uint64_t seed = 7);

}  // namespace asrkit
