// Writes the synthetic fixture corpus: wav/, references.tsv, hypotheses.tsv.
#include <CLI11.hpp>

#include <iostream>

#include "asrkit/error.hpp"
#include "asrkit/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"asrkit-fixture: write the bundled synthetic corpus"};
  std::string dir = "fixture";
  double seconds = 120.0;
  std::uint64_t seed = 7;
  app.add_option("dir", dir, "Output directory")->capture_default_str();
  app.add_option("--seconds", seconds, "Total audio duration")->capture_default_str();
  app.add_option("--seed", seed, "Synthesis seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = asrkit::write_fixture_corpus(dir, seconds, seed);
    std::cout << "audio:       " << corpus.audio_dir.string() << "\n"
              << "references:  " << corpus.references.string() << "\n"
              << "hypotheses:  " << corpus.hypotheses.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
