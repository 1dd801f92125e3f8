#include "asrkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "asrkit/audio.hpp"
#include "asrkit/augment.hpp"
#include "asrkit/corpus.hpp"
#include "asrkit/metrics.hpp"
#include "asrkit/taxonomy.hpp"
#include "asrkit/transcript.hpp"

namespace asrkit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Write: return kExitIo;
    case ErrorKind::Format:
    case ErrorKind::UnsupportedCodec: return kExitFormat;
    case ErrorKind::Charset: return kExitCharset;
    case ErrorKind::Hygiene: return kExitHygiene;
    case ErrorKind::Pairing: return kExitPairing;
    case ErrorKind::Validation: return kExitValidation;
    case ErrorKind::UndefinedMetric: return kExitUndefinedMetric;
    case ErrorKind::Parameter:
    case ErrorKind::DegenerateInput: return kExitParameter;
    case ErrorKind::Schema: return kExitSchema;
    case ErrorKind::FeatureLookup: return kExitFeatureLookup;
  }
  return kExitInternal;
}

namespace {

struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  fs::path out = "asrkit-out";
  std::optional<fs::path> config;
  double test_fraction = 0.1;
  bool include_original = false;
  bool cer_spaces = true;
  bool strip_punct = true;

  FeatureTable inventory = FeatureTable::standard();
  AugmentConfig augment;

  ScoringOptions scoring() const { return {cer_spaces, strip_punct}; }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Write, "write failed for " + path.string());
}

void write_json(const fs::path& path, const ojson& doc) { write_file(path, doc.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + e.what());
  }
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string codepoint_name(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(c));
  return buf;
}

// Applies --config (JSON with optional "inventory", "augment", "scoring",
// "seed", "test_fraction" keys); explicit flags win over the file.
void load_config(RunConfig& cfg, const CLI::App& app) {
  if (!cfg.config) return;
  std::ifstream in(*cfg.config);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + cfg.config->string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, cfg.config->string() + ": " + e.what());
  }
  const fs::path base = cfg.config->parent_path();
  if (const auto it = doc.find("inventory"); it != doc.end()) {
    cfg.inventory = it->is_string() ? FeatureTable::load(base / it->get<std::string>()) : FeatureTable::from_json(*it);
  }
  if (const auto it = doc.find("augment"); it != doc.end()) {
    cfg.augment = AugmentConfig::from_json(*it);
    if (cfg.augment.noise.noise_file && cfg.augment.noise.noise_file->is_relative()) {
      cfg.augment.noise.noise_file = base / *cfg.augment.noise.noise_file;
    }
    if (!app.count("--include-original")) cfg.include_original = cfg.augment.include_original;
    if (!app.count("--seed") && it->contains("seed")) cfg.seed = cfg.augment.seed;
  }
  if (const auto it = doc.find("scoring"); it != doc.end()) {
    if (!app.count("--cer-spaces")) cfg.cer_spaces = it->value("cer_spaces", cfg.cer_spaces);
    if (!app.count("--strip-punct")) cfg.strip_punct = it->value("strip_punct", cfg.strip_punct);
  }
  if (!app.count("--seed") && doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (!app.count("--test-fraction") && doc.contains("test_fraction")) {
    cfg.test_fraction = doc["test_fraction"].get<double>();
  }
}

// ---------------------------------------------------------------- ingest

std::map<std::string, std::pair<std::size_t, std::string>> read_transcripts(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open transcripts " + path.string());
  std::map<std::string, std::pair<std::size_t, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line_no) + ": expected id<TAB>text");
    }
    std::string id = line.substr(0, tab);
    if (!rows.emplace(id, std::make_pair(line_no, line.substr(tab + 1))).second) {
      throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
  }
  return rows;
}

int cmd_ingest(const RunConfig& cfg, const fs::path& audio_dir, const fs::path& transcripts, std::ostream& out,
               std::ostream& err) {
  if (!fs::is_directory(audio_dir)) throw Error(ErrorKind::Io, "not a directory: " + audio_dir.string());
  const auto texts = read_transcripts(transcripts);

  std::map<std::string, fs::path> wavs;
  for (const auto& de : fs::directory_iterator(audio_dir)) {
    if (de.is_regular_file() && de.path().extension() == ".wav") wavs.emplace(de.path().stem().string(), de.path());
  }

  ojson report;
  auto missing_text = ojson::array();
  auto missing_audio = ojson::array();
  auto charset = ojson::array();
  auto audio_errors = ojson::array();
  for (const auto& [id, _] : wavs)
    if (!texts.contains(id)) missing_text.push_back(id);
  for (const auto& [id, _] : texts)
    if (!wavs.contains(id)) missing_audio.push_back(id);

  ensure_dir(cfg.out / "audio");
  Manifest manifest;
  for (const auto& [id, path] : wavs) {
    const auto t = texts.find(id);
    if (t == texts.end()) continue;
    const auto& [line_no, raw] = t->second;
    ManifestEntry e;
    e.id = id;
    try {
      e.text = normalize(raw, cfg.inventory);
    } catch (const CharsetError& ce) {
      charset.push_back({{"id", id},
                         {"line", line_no},
                         {"codepoint", codepoint_name(ce.codepoint())},
                         {"byte_offset", ce.byte_offset()},
                         {"message", ce.what()}});
      continue;
    }
    try {
      AudioBuffer audio = read_wav(path);
      if (audio.sample_rate_hz != kCanonicalRateHz) {
        audio = resample(audio, kCanonicalRateHz);
        rescale_if_clipping(audio);
      }
      e.audio = cfg.out / "audio" / (id + ".wav");
      write_wav(audio, e.audio);
      e.duration_s = audio.duration_s();
    } catch (const Error& ae) {
      if (ae.kind() == ErrorKind::Write) throw;
      audio_errors.push_back({{"id", id}, {"kind", to_string(ae.kind())}, {"message", ae.what()}});
      continue;
    }
    e.split = Split::Unassigned;
    manifest.entries.push_back(std::move(e));
  }

  report["entries"] = manifest.size();
  report["minutes"] = total_duration_min(manifest);
  report["audio_without_transcript"] = missing_text;
  report["transcript_without_audio"] = missing_audio;
  report["charset_errors"] = charset;
  report["audio_errors"] = audio_errors;
  write_json(cfg.out / "ingest_report.json", report);

  for (const auto& id : missing_text) err << "error: audio without transcript line: " << id.get<std::string>() << "\n";
  for (const auto& id : missing_audio) err << "error: transcript line without audio: " << id.get<std::string>() << "\n";
  for (const auto& c : charset) err << "error: " << c["id"].get<std::string>() << ": " << c["message"].get<std::string>() << "\n";
  for (const auto& a : audio_errors) err << "error: " << a["id"].get<std::string>() << ": " << a["message"].get<std::string>() << "\n";

  if (!missing_text.empty() || !missing_audio.empty()) return kExitPairing;
  if (!charset.empty()) return kExitCharset;
  if (!audio_errors.empty()) return kExitFormat;

  save_manifest(manifest, cfg.out / "manifest.jsonl");
  out << "utterances  minutes\n" << manifest.size() << "  " << fixed(total_duration_min(manifest)) << "\n";
  out << "wrote " << (cfg.out / "manifest.jsonl").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- split

ojson side_summary(const Manifest& m) { return {{"entries", m.size()}, {"minutes", total_duration_min(m)}}; }

int cmd_split(const RunConfig& cfg, const fs::path& manifest_path, std::ostream& out) {
  const Manifest manifest = load_manifest(manifest_path, cfg.inventory);
  const SplitResult parts = split(manifest, cfg.test_fraction, cfg.seed);
  const auto leaks = check_leakage(parts.train, parts.test);

  ensure_dir(cfg.out);
  save_manifest(parts.train, cfg.out / "train.jsonl");
  save_manifest(parts.test, cfg.out / "test.jsonl");
  ojson report;
  report["seed"] = cfg.seed;
  report["test_fraction"] = cfg.test_fraction;
  report["train"] = side_summary(parts.train);
  report["test"] = side_summary(parts.test);
  report["leakage_violations"] = leaks.size();
  write_json(cfg.out / "split_report.json", report);

  out << "split  entries  minutes\n";
  out << "train  " << parts.train.size() << "  " << fixed(total_duration_min(parts.train)) << "\n";
  out << "test   " << parts.test.size() << "  " << fixed(total_duration_min(parts.test)) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- augment

int cmd_augment(const RunConfig& cfg, const fs::path& manifest_path, std::ostream& out) {
  const Manifest train = load_manifest(manifest_path, cfg.inventory);
  AugmentConfig acfg = cfg.augment;
  acfg.seed = cfg.seed;
  acfg.include_original = cfg.include_original;

  ensure_dir(cfg.out);
  const Manifest augmented = augment_corpus(train, acfg, cfg.out / "audio");
  save_manifest(augmented, cfg.out / "augmented.jsonl");

  const double in_min = total_duration_min(train);
  const double out_min = total_duration_min(augmented);
  ojson report;
  report["config"] = acfg.to_json();
  report["input"] = side_summary(train);
  report["output"] = side_summary(augmented);
  report["duration_ratio"] = in_min > 0 ? ojson(out_min / in_min) : ojson(nullptr);
  write_json(cfg.out / "augment_report.json", report);

  out << "set        entries  minutes\n";
  out << "input      " << train.size() << "  " << fixed(in_min) << "\n";
  out << "augmented  " << augmented.size() << "  " << fixed(out_min) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval / taxonomy

std::vector<ScoredPair> pair_manifests(const Manifest& ref, const Manifest& hyp) {
  std::map<std::string, const ManifestEntry*, std::less<>> by_id;
  for (const auto& e : hyp.entries) by_id.emplace(e.id, &e);
  std::vector<ScoredPair> pairs;
  std::vector<std::string> missing;
  for (const auto& e : ref.entries) {
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      missing.push_back(e.id);
      continue;
    }
    pairs.push_back({e.id, e.text, it->second->text});
  }
  if (!missing.empty()) {
    std::string msg = "hypothesis manifest lacks " + std::to_string(missing.size()) + " reference id(s):";
    for (const auto& id : missing) msg += " " + id;
    throw Error(ErrorKind::Pairing, msg);
  }
  return pairs;
}

int cmd_eval(const RunConfig& cfg, const fs::path& ref_path, const fs::path& hyp_path, std::ostream& out) {
  const Manifest ref = load_manifest(ref_path, cfg.inventory);
  const Manifest hyp = load_manifest(hyp_path, cfg.inventory);
  const auto pairs = pair_manifests(ref, hyp);
  const EvalReport report = corpus_eval(pairs, cfg.scoring());

  ensure_dir(cfg.out);
  write_json(cfg.out / "eval.json", to_json(report));
  const std::string text = render_report_text(report);
  write_file(cfg.out / "eval.txt", text);

  out << "metric  value   S  D  I  N\n";
  out << "CER     " << fixed(report.cer) << "  " << report.chars.substitutions << "  " << report.chars.deletions
      << "  " << report.chars.insertions << "  " << report.chars.ref_tokens << "\n";
  out << "WER     " << fixed(report.wer) << "  " << report.words.substitutions << "  " << report.words.deletions
      << "  " << report.words.insertions << "  " << report.words.ref_tokens << "\n";
  return kExitOk;
}

int cmd_taxonomy(const RunConfig& cfg, const fs::path& ref_path, const fs::path& hyp_path, std::ostream& out) {
  const Manifest ref = load_manifest(ref_path, cfg.inventory);
  const Manifest hyp = load_manifest(hyp_path, cfg.inventory);
  const auto pairs = pair_manifests(ref, hyp);

  std::vector<AlignedUtterance> aligned;
  aligned.reserve(pairs.size());
  for (const auto& p : pairs) aligned.push_back(align_chars(p.ref, p.hyp, cfg.strip_punct));
  const TaxonomyReport report = taxonomy_report(aligned, cfg.inventory);

  ensure_dir(cfg.out);
  write_json(cfg.out / "taxonomy.json", to_json(report));
  const std::string table = render_table(report);
  write_file(cfg.out / "taxonomy.txt", table);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const RunConfig& cfg, const fs::path& manifest_path, const std::vector<fs::path>& parents,
                 bool write_report, std::ostream& out, std::ostream& err) {
  const ValidationReport report = validate_manifest(manifest_path, cfg.inventory, parents);
  if (write_report) {
    ensure_dir(cfg.out);
    write_json(cfg.out / "validation.json", to_json(report));
  }
  for (const auto& i : report.issues) {
    err << manifest_path.string() << ":" << i.line << ": " << to_string(i.kind) << ": " << i.message << "\n";
  }
  out << "entries  issues\n" << report.entries << "  " << report.issues.size() << "\n";
  return report.ok() ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"asrkit: corpus preparation, augmentation and CER/WER evaluation for low-resource ASR"};
  app.require_subcommand(1, 1);

  RunConfig cfg;
  std::string out_dir = cfg.out.string();
  std::string config_path;
  app.add_option("--seed", cfg.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", config_path, "JSON config (inventory, augment, scoring)");
  app.add_option("--test-fraction", cfg.test_fraction, "Test share of total duration")->capture_default_str();
  app.add_flag("--include-original", cfg.include_original, "Keep originals in the augmented manifest");
  app.add_option("--cer-spaces", cfg.cer_spaces, "Count inter-word spaces as CER tokens")->capture_default_str();
  app.add_option("--strip-punct", cfg.strip_punct, "Strip . , ? before scoring")->capture_default_str();

  std::string p1, p2;
  std::vector<std::string> parents;

  auto* ingest = app.add_subcommand("ingest", "Build a manifest from a WAV directory and an id<TAB>text file");
  ingest->add_option("audio_dir", p1)->required();
  ingest->add_option("transcripts", p2)->required();

  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split of an original-only manifest");
  split_cmd->add_option("manifest", p1)->required();

  auto* augment = app.add_subcommand("augment", "Four-technique augmentation of a train manifest");
  augment->add_option("manifest", p1)->required();

  auto* eval = app.add_subcommand("eval", "CER/WER of a hypothesis manifest against references");
  eval->add_option("reference", p1)->required();
  eval->add_option("hypothesis", p2)->required();

  auto* taxonomy = app.add_subcommand("taxonomy", "Classify character errors into mismatch categories");
  taxonomy->add_option("reference", p1)->required();
  taxonomy->add_option("hypothesis", p2)->required();

  auto* validate = app.add_subcommand("validate", "Check a manifest's schema, parents, durations and charset");
  validate->add_option("manifest", p1)->required();
  validate->add_option("--parents", parents, "Manifests where augmented entries' parents may live");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.out = out_dir;
    if (!config_path.empty()) cfg.config = config_path;
    load_config(cfg, app);

    if (ingest->parsed()) return cmd_ingest(cfg, p1, p2, out, err);
    if (split_cmd->parsed()) return cmd_split(cfg, p1, out);
    if (augment->parsed()) return cmd_augment(cfg, p1, out);
    if (eval->parsed()) return cmd_eval(cfg, p1, p2, out);
    if (taxonomy->parsed()) return cmd_taxonomy(cfg, p1, p2, out);
    if (validate->parsed()) {
      std::vector<fs::path> parent_paths(parents.begin(), parents.end());
      return cmd_validate(cfg, p1, parent_paths, app.count("--out") > 0, out, err);
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace asrkit
