#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "asrkit/augment.hpp"
#include "asrkit/corpus.hpp"

using namespace asrkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "asrkit_test_corpus" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ManifestEntry original(std::string id, double duration_s, Split s = Split::Unassigned) {
  ManifestEntry e;
  e.audio = "audio/" + id + ".wav";
  e.id = std::move(id);
  e.text = normalize("bi");
  e.duration_s = duration_s;
  e.split = s;
  return e;
}

ManifestEntry derived(std::string id, std::string parent, Split s) {
  ManifestEntry e = original(std::move(id), 1.0, s);
  e.augmentation = Augmentation{Technique::Clip, 42, std::move(parent)};
  return e;
}

Manifest random_corpus(std::mt19937_64& gen, std::size_t n, double lo_s, double hi_s) {
  std::uniform_real_distribution<double> dur(lo_s, hi_s);
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) m.entries.push_back(original("u" + std::to_string(i), dur(gen)));
  return m;
}

std::vector<std::string> ids_of(const Manifest& m) {
  std::vector<std::string> out;
  for (const auto& e : m.entries) out.push_back(e.id);
  return out;
}

AudioBuffer tone(double seconds, std::uint32_t rate = 16000) {
  AudioBuffer b;
  b.sample_rate_hz = rate;
  b.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < b.samples.size(); ++i) b.samples[i] = 0.5 * std::sin(0.05 * static_cast<double>(i));
  return b;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("manifest serialization round-trips") {
  Manifest m;
  m.entries.push_back(original("a", 1.25, Split::Train));
  m.entries.push_back(derived("a.clip", "a", Split::Train));
  m.entries[0].text = normalize("amə duləkə");
  const fs::path base = "/data/corpus";
  for (auto& e : m.entries) e.audio = base / e.audio;

  const std::string text = serialize_manifest(m, base);
  CHECK(text.find("\"audio\":\"audio/a.wav\"") != std::string::npos);
  CHECK(text.find(R"("provenance":{"kind":"augmented","technique":"clip","seed":42,"parent":"a"})") !=
        std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const Manifest back = parse_manifest(text, base);
  CHECK(back.entries == m.entries);
  CHECK(serialize_manifest(back, base) == text);
}

TEST_CASE("parse_manifest reports problems with line numbers") {
  const std::string good = R"({"id":"a","audio":"a.wav","text":"bi","duration_s":1.0,"split":"train","provenance":{"kind":"original"}})";
  const auto kind_of = [](const std::string& text) {
    try {
      parse_manifest(text, ".");
    } catch (const Error& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(ErrorKind::Io, std::string("no error"));
  };
  {
    const auto [kind, what] = kind_of(good + "\n" + good + "\n");
    CHECK(kind == ErrorKind::Schema);
    CHECK(what.find("line 2") != std::string::npos);
    CHECK(what.find("duplicate") != std::string::npos);
  }
  {
    std::string bad = good;
    bad.replace(bad.find("\"bi\""), 4, "\"bq\"");
    const auto [kind, what] = kind_of(good + "\n\n" + bad);
    CHECK(kind == ErrorKind::Charset);
    CHECK(what.find("line 3") != std::string::npos);
  }
  CHECK(kind_of(R"({"id":"a","audio":"a.wav","text":"bi","split":"train","provenance":{"kind":"original"}})").first ==
        ErrorKind::Schema);
  CHECK(kind_of("not json").first == ErrorKind::Schema);
  CHECK(parse_manifest("", ".").empty());
}

TEST_CASE("total_duration") {
  Manifest m;
  CHECK(total_duration_min(m) == 0.0);
  m.entries.push_back(original("a", 60.0));
  m.entries.push_back(original("b", 30.0));
  CHECK(total_duration_s(m) == 90.0);
  CHECK(total_duration_min(m) == 1.5);
}

TEST_CASE("property: total_duration is additive over concatenation") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Manifest a = random_corpus(gen, gen() % 40, 0.5, 12.0);
    const Manifest b = random_corpus(gen, gen() % 40, 0.5, 12.0);
    Manifest ab = a;
    ab.entries.insert(ab.entries.end(), b.entries.begin(), b.entries.end());
    REQUIRE(total_duration_s(ab) == doctest::Approx(total_duration_s(a) + total_duration_s(b)).epsilon(1e-12));
  }
}

TEST_CASE("split hits a 9.5 of 90.5 minute test side within one utterance") {
  std::mt19937_64 gen(2024);
  Manifest m;
  std::uniform_real_distribution<double> dur(3.0, 9.0);
  double total = 0.0;
  while (total < 90.5 * 60.0 - 9.0) {
    const double d = dur(gen);
    m.entries.push_back(original("utt" + std::to_string(m.size()), d));
    total += d;
  }
  m.entries.push_back(original("last", 90.5 * 60.0 - total));
  REQUIRE(total_duration_min(m) == doctest::Approx(90.5));
  double longest = 0.0;
  for (const auto& e : m.entries) longest = std::max(longest, e.duration_s);

  for (std::uint64_t seed : {1u, 2u, 3u, 20240101u}) {
    const SplitResult r = split(m, 9.5 / 90.5, seed);
    CHECK(std::abs(total_duration_s(r.test) - 9.5 * 60.0) <= longest);
    CHECK(std::abs(total_duration_s(r.train) - 81.0 * 60.0) <= longest);
    CHECK(r.train.size() + r.test.size() == m.size());
    for (const auto& e : r.train.entries) CHECK(e.split == Split::Train);
    for (const auto& e : r.test.entries) CHECK(e.split == Split::Test);
    CHECK(check_leakage(r.train, r.test).empty());

    // Disjoint partition, input order preserved on each side.
    std::set<std::string> all;
    for (const auto& id : ids_of(r.train)) all.insert(id);
    for (const auto& id : ids_of(r.test)) all.insert(id);
    CHECK(all.size() == m.size());
    for (const Manifest* side : {&r.train, &r.test}) {
      std::size_t cursor = 0;
      for (const auto& e : side->entries) {
        while (cursor < m.size() && m.entries[cursor].id != e.id) ++cursor;
        CHECK(cursor < m.size());
      }
    }
  }
}

TEST_CASE("split errors and determinism") {
  Manifest one;
  one.entries.push_back(original("a", 3.0));
  CHECK_THROWS_WITH_AS(split(one, 0.5, 1), doctest::Contains("two"), Error);
  try {
    split(one, 0.5, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }

  std::mt19937_64 gen(5);
  Manifest m = random_corpus(gen, 30, 1.0, 6.0);
  for (double bad : {0.0, 1.0, -0.2, std::nan("")}) {
    try {
      split(m, bad, 1);
      FAIL("expected parameter error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parameter);
    }
  }

  const SplitResult a = split(m, 0.2, 99);
  const SplitResult b = split(m, 0.2, 99);
  CHECK(serialize_manifest(a.train, ".") == serialize_manifest(b.train, "."));
  CHECK(serialize_manifest(a.test, ".") == serialize_manifest(b.test, "."));
  CHECK_FALSE(a.test.empty());
  CHECK_FALSE(a.train.empty());

  m.entries.push_back(derived("u0.noise", "u0", Split::Unassigned));
  try {
    split(m, 0.2, 99);
    FAIL("expected hygiene error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Hygiene);
  }
}

TEST_CASE("split keeps both sides non-empty for tiny fractions") {
  std::mt19937_64 gen(8);
  const Manifest m = random_corpus(gen, 5, 1.0, 2.0);
  for (double f : {1e-6, 0.999999}) {
    const SplitResult r = split(m, f, 3);
    CHECK_FALSE(r.train.empty());
    CHECK_FALSE(r.test.empty());
  }
}

TEST_CASE("check_leakage") {
  Manifest train, test;
  train.entries.push_back(original("a", 1.0, Split::Train));
  train.entries.push_back(derived("a.noise", "a", Split::Train));
  test.entries.push_back(original("b", 1.0, Split::Test));
  CHECK(check_leakage(train, test).empty());

  SUBCASE("train augmentation of a test parent") {
    train.entries.push_back(derived("b.clip", "b", Split::Train));
    const auto v = check_leakage(train, test);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == LeakageViolation::Kind::TrainParentInTest);
    CHECK(v[0].train_id == "b.clip");
    CHECK(v[0].test_id == "b");
    CHECK(v[0].message.find("b.clip") != std::string::npos);
  }
  SUBCASE("shared original id") {
    train.entries.pop_back();
    test.entries.push_back(original("a", 1.0, Split::Test));
    const auto v = check_leakage(train, test);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == LeakageViolation::Kind::SharedId);
  }
  SUBCASE("test augmentation of a train parent") {
    test.entries.push_back(derived("a.reverb", "a", Split::Test));
    const auto v = check_leakage(train, test);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == LeakageViolation::Kind::TestParentInTrain);
  }
}

TEST_CASE("validate_manifest") {
  const fs::path dir = scratch_dir("validate");
  fs::create_directories(dir / "audio");
  write_wav(tone(0.5), dir / "audio/a.wav");
  write_wav(tone(0.25), dir / "audio/b.wav");

  Manifest m;
  m.entries.push_back(original("a", 0.5, Split::Train));
  m.entries.push_back(original("b", 0.25, Split::Train));
  m.entries.push_back(derived("a.clip", "a", Split::Train));
  m.entries.back().audio = "audio/a.wav";
  m.entries.back().duration_s = 0.5;
  for (auto& e : m.entries) e.audio = dir / e.audio;

  SUBCASE("well-formed") {
    save_manifest(m, dir / "m.jsonl");
    const ValidationReport r = validate_manifest(dir / "m.jsonl");
    CHECK(r.entries == 3);
    CHECK(r.ok());
    CHECK(to_json(r)["ok"] == true);
  }
  SUBCASE("dangling parent") {
    m.entries[2].augmentation->parent_id = "zzz";
    save_manifest(m, dir / "m.jsonl");
    const ValidationReport r = validate_manifest(dir / "m.jsonl");
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].kind == IssueKind::DanglingParent);
    CHECK(r.issues[0].line == 3);
    CHECK(r.issues[0].id == "a.clip");
  }
  SUBCASE("parent found in a parent manifest") {
    Manifest parents, children;
    parents.entries = {m.entries[0]};
    children.entries = {m.entries[2]};
    save_manifest(parents, dir / "p.jsonl");
    save_manifest(children, dir / "c.jsonl");
    CHECK_FALSE(validate_manifest(dir / "c.jsonl").ok());
    CHECK(validate_manifest(dir / "c.jsonl", FeatureTable::standard(), {dir / "p.jsonl"}).ok());
  }
  SUBCASE("duration mismatch beyond 1 ms") {
    m.entries[1].duration_s = 0.25 + 2e-3;
    save_manifest(m, dir / "m.jsonl");
    const ValidationReport r = validate_manifest(dir / "m.jsonl");
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].kind == IssueKind::DurationMismatch);
    CHECK(r.issues[0].id == "b");
  }
  SUBCASE("duration within 1 ms is accepted") {
    m.entries[1].duration_s = 0.25 + 0.5e-3;
    save_manifest(m, dir / "m.jsonl");
    CHECK(validate_manifest(dir / "m.jsonl").ok());
  }
  SUBCASE("schema, charset, duplicate and missing audio are all collected") {
    save_manifest(m, dir / "m.jsonl");
    std::ifstream in(dir / "m.jsonl");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const std::string first = text.substr(0, text.find('\n') + 1);
    text += first;                                            // duplicate id on line 4
    text += "{\"id\":\"x\"}\n";                                 // schema on line 5
    std::string bad = first;
    bad.replace(bad.find("\"id\":\"a\""), 8, "\"id\":\"q\"");
    bad.replace(bad.find("\"text\":\"bi\""), 11, "\"text\":\"qi\"");
    text += bad;                                              // charset on line 6
    std::string missing = first;
    missing.replace(missing.find("\"id\":\"a\""), 8, "\"id\":\"m\"");
    missing.replace(missing.find("audio/a.wav"), 11, "audio/m.wav");
    text += missing;                                          // unreadable audio on line 7
    write_text(dir / "m.jsonl", text);

    const ValidationReport r = validate_manifest(dir / "m.jsonl");
    CHECK(r.entries == 7);
    std::map<IssueKind, std::size_t> line_of;
    for (const auto& i : r.issues) line_of[i.kind] = i.line;
    CHECK(line_of.at(IssueKind::DuplicateId) == 4);
    CHECK(line_of.at(IssueKind::Schema) == 5);
    CHECK(line_of.at(IssueKind::Charset) == 6);
    CHECK(line_of.at(IssueKind::AudioUnreadable) == 7);
  }
  SUBCASE("missing manifest is an I/O error") {
    try {
      validate_manifest(dir / "nope.jsonl");
      FAIL("expected I/O error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }
}

TEST_CASE("property: split then augment never leaks") {
  const fs::path dir = scratch_dir("leak");
  std::mt19937_64 gen(77);
  AugmentConfig cfg;
  for (int trial = 0; trial < 6; ++trial) {
    const fs::path tdir = dir / std::to_string(trial);
    fs::create_directories(tdir / "src");
    Manifest m = random_corpus(gen, 2 + gen() % 5, 0.05, 0.3);
    for (auto& e : m.entries) {
      const AudioBuffer b = tone(e.duration_s);
      e.duration_s = b.duration_s();
      e.audio = tdir / "src" / (e.id + ".wav");
      write_wav(b, e.audio);
    }
    cfg.seed = gen();
    cfg.include_original = trial % 2 == 0;
    const SplitResult r = split(m, 0.3, gen());
    const Manifest aug = augment_corpus(r.train, cfg, tdir / "aug", 2);
    CHECK(check_leakage(aug, r.test).empty());
    CHECK(aug.size() == r.train.size() * (cfg.include_original ? 5 : 4));
  }
}
