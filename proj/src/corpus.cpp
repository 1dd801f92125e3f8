#include "asrkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "asrkit/audio.hpp"
#include "asrkit/rng.hpp"

namespace asrkit {

namespace fs = std::filesystem;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "?";
}

std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::Noise: return "noise";
    case Technique::Clip: return "clip";
    case Technique::Reverb: return "reverb";
    case Technique::TimeDropout: return "time_dropout";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "unassigned") return Split::Unassigned;
  throw Error(ErrorKind::Schema, "unknown split '" + std::string(s) + "'");
}

Technique parse_technique(std::string_view s) {
  for (Technique t : kAllTechniques)
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::Schema, "unknown augmentation technique '" + std::string(s) + "'");
}

std::string_view to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::Schema: return "schema";
    case IssueKind::DuplicateId: return "duplicate-id";
    case IssueKind::DanglingParent: return "dangling-parent";
    case IssueKind::DurationMismatch: return "duration-mismatch";
    case IssueKind::AudioUnreadable: return "audio-unreadable";
    case IssueKind::Charset: return "charset";
  }
  return "?";
}

const ManifestEntry* Manifest::find(std::string_view id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

namespace {

fs::path absolute_normal(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

std::string relative_audio(const fs::path& audio, const fs::path& base_dir) {
  const fs::path base = base_dir.empty() ? fs::path(".") : base_dir;
  const fs::path rel = absolute_normal(audio).lexically_relative(absolute_normal(base));
  return rel.empty() ? absolute_normal(audio).generic_string() : rel.generic_string();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Calls fn(line_number, line) for every non-blank line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line_no, line);
    start = end + 1;
  }
}

template <class T>
T required(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::Schema, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Schema, std::string("field '") + key + "' has the wrong type");
  }
}

std::string at_line(std::size_t line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

}  // namespace

nlohmann::ordered_json entry_to_json(const ManifestEntry& e, const fs::path& base_dir) {
  nlohmann::ordered_json obj;
  obj["id"] = e.id;
  obj["audio"] = relative_audio(e.audio, base_dir);
  obj["text"] = e.text.str();
  obj["duration_s"] = e.duration_s;
  obj["split"] = to_string(e.split);
  if (e.augmentation) {
    obj["provenance"] = {{"kind", "augmented"},
                         {"technique", to_string(e.augmentation->technique)},
                         {"seed", e.augmentation->seed},
                         {"parent", e.augmentation->parent_id}};
  } else {
    obj["provenance"] = {{"kind", "original"}};
  }
  return obj;
}

ManifestEntry entry_from_json(const nlohmann::json& obj, const fs::path& base_dir, const FeatureTable& inventory) {
  if (!obj.is_object()) throw Error(ErrorKind::Schema, "manifest line is not a JSON object");
  ManifestEntry e;
  e.id = required<std::string>(obj, "id");
  if (e.id.empty()) throw Error(ErrorKind::Schema, "empty id");
  const fs::path audio = required<std::string>(obj, "audio");
  e.audio = audio.is_absolute() ? audio : (base_dir / audio).lexically_normal();
  e.duration_s = required<double>(obj, "duration_s");
  if (!(e.duration_s >= 0.0) || !std::isfinite(e.duration_s)) {
    throw Error(ErrorKind::Schema, "duration_s must be a non-negative number");
  }
  e.split = parse_split(required<std::string>(obj, "split"));

  const auto prov_it = obj.find("provenance");
  if (prov_it == obj.end() || !prov_it->is_object()) throw Error(ErrorKind::Schema, "missing provenance object");
  const std::string kind = required<std::string>(*prov_it, "kind");
  if (kind == "augmented") {
    Augmentation a;
    a.technique = parse_technique(required<std::string>(*prov_it, "technique"));
    a.seed = required<std::uint64_t>(*prov_it, "seed");
    a.parent_id = required<std::string>(*prov_it, "parent");
    e.augmentation = std::move(a);
  } else if (kind != "original") {
    throw Error(ErrorKind::Schema, "unknown provenance kind '" + kind + "'");
  }
  // Charset last so schema problems are reported first.
  e.text = normalize(required<std::string>(obj, "text"), inventory);
  return e;
}

std::string serialize_manifest(const Manifest& manifest, const fs::path& base_dir) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += entry_to_json(e, base_dir).dump();
    out += '\n';
  }
  return out;
}

Manifest parse_manifest(std::string_view text, const fs::path& base_dir, const FeatureTable& inventory) {
  Manifest m;
  std::set<std::string, std::less<>> ids;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    try {
      ManifestEntry e = entry_from_json(nlohmann::json::parse(line), base_dir, inventory);
      if (!ids.insert(e.id).second) throw Error(ErrorKind::Schema, "duplicate id '" + e.id + "'");
      m.entries.push_back(std::move(e));
    } catch (const CharsetError& e) {
      throw CharsetError(e.codepoint(), e.byte_offset(), at_line(line_no, e.what()));
    } catch (const Error& e) {
      throw Error(e.kind(), at_line(line_no, e.what()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Schema, at_line(line_no, e.what()));
    }
  });
  return m;
}

Manifest load_manifest(const fs::path& path, const FeatureTable& inventory) {
  const std::string text = read_text(path);
  try {
    return parse_manifest(text, path.parent_path(), inventory);
  } catch (const CharsetError& e) {
    throw CharsetError(e.codepoint(), e.byte_offset(), path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  const std::string text = serialize_manifest(manifest, path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Write, "write failed for " + path.string());
}

double total_duration_s(const Manifest& manifest) {
  long double sum = 0.0L;
  for (const auto& e : manifest.entries) sum += e.duration_s;
  return static_cast<double>(sum);
}

double total_duration_min(const Manifest& manifest) { return total_duration_s(manifest) / 60.0; }

SplitResult split(const Manifest& manifest, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::Parameter, "test fraction must lie in (0, 1)");
  }
  for (const auto& e : manifest.entries) {
    if (!e.is_original()) {
      throw Error(ErrorKind::Hygiene, "entry '" + e.id + "' is augmented; split must precede augmentation");
    }
  }
  const std::size_t n = manifest.entries.size();
  if (n < 2) throw Error(ErrorKind::DegenerateInput, "need at least two utterances for a train/test split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  // Take a prefix of the shuffled order; stop at the first overshoot,
  // keeping the overshooting utterance only if it lands closer to target.
  const double target = test_fraction * total_duration_s(manifest);
  std::vector<bool> is_test(n, false);
  std::size_t taken = 0;
  double acc = 0.0;
  for (std::size_t idx : order) {
    const double d = manifest.entries[idx].duration_s;
    if (acc + d <= target) {
      is_test[idx] = true;
      acc += d;
      ++taken;
      continue;
    }
    if (std::abs(acc + d - target) < std::abs(acc - target)) {
      is_test[idx] = true;
      ++taken;
    }
    break;
  }
  if (taken == 0) {
    is_test[order.front()] = true;
  } else if (taken == n) {
    is_test[order.back()] = false;
  }

  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestEntry e = manifest.entries[i];
    e.split = is_test[i] ? Split::Test : Split::Train;
    (is_test[i] ? out.test : out.train).entries.push_back(std::move(e));
  }
  return out;
}

std::vector<LeakageViolation> check_leakage(const Manifest& train, const Manifest& test) {
  std::set<std::string, std::less<>> train_ids, test_ids;
  for (const auto& e : train.entries) train_ids.insert(e.id);
  for (const auto& e : test.entries) test_ids.insert(e.id);

  std::vector<LeakageViolation> out;
  using K = LeakageViolation::Kind;
  for (const auto& e : train.entries) {
    if (test_ids.contains(e.id)) {
      out.push_back({K::SharedId, e.id, e.id, "id '" + e.id + "' appears in both train and test"});
    }
    if (e.augmentation && test_ids.contains(e.augmentation->parent_id)) {
      const auto& p = e.augmentation->parent_id;
      out.push_back({K::TrainParentInTest, e.id, p, "train entry '" + e.id + "' is derived from test entry '" + p + "'"});
    }
  }
  for (const auto& e : test.entries) {
    if (e.augmentation && train_ids.contains(e.augmentation->parent_id)) {
      const auto& p = e.augmentation->parent_id;
      out.push_back({K::TestParentInTrain, p, e.id, "test entry '" + e.id + "' is derived from train entry '" + p + "'"});
    }
  }
  return out;
}

namespace {

struct ParsedLine {
  std::size_t line;
  std::optional<ManifestEntry> entry;
};

// Ids of original entries in the parent manifests; parsed leniently since
// only ids and provenance matter here.
std::map<std::string, bool, std::less<>> parent_ids(const std::vector<fs::path>& paths) {
  std::map<std::string, bool, std::less<>> ids;
  for (const auto& p : paths) {
    for_each_line(read_text(p), [&](std::size_t, std::string_view line) {
      try {
        const auto obj = nlohmann::json::parse(line);
        const bool original = obj.at("provenance").at("kind").get<std::string>() == "original";
        ids.emplace(obj.at("id").get<std::string>(), original);
      } catch (const nlohmann::json::exception&) {
      }
    });
  }
  return ids;
}

}  // namespace

ValidationReport validate_manifest(const fs::path& path, const FeatureTable& inventory,
                                   const std::vector<fs::path>& parent_manifests) {
  const std::string text = read_text(path);
  const fs::path base = path.parent_path();
  ValidationReport report;
  std::vector<ParsedLine> lines;
  // id -> is original
  std::map<std::string, bool, std::less<>> known = parent_ids(parent_manifests);
  std::set<std::string, std::less<>> seen;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    ++report.entries;
    ParsedLine parsed{line_no, std::nullopt};
    std::string id;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (obj.is_object() && obj.contains("id") && obj["id"].is_string()) id = obj["id"].get<std::string>();
      parsed.entry = entry_from_json(obj, base, inventory);
    } catch (const CharsetError& e) {
      report.issues.push_back({line_no, id, IssueKind::Charset, e.what()});
    } catch (const Error& e) {
      report.issues.push_back({line_no, id, IssueKind::Schema, e.what()});
    } catch (const nlohmann::json::exception& e) {
      report.issues.push_back({line_no, id, IssueKind::Schema, e.what()});
    }
    if (!id.empty() && !seen.insert(id).second) {
      report.issues.push_back({line_no, id, IssueKind::DuplicateId, "duplicate id '" + id + "'"});
    }
    if (parsed.entry) known[parsed.entry->id] = parsed.entry->is_original();
    lines.push_back(std::move(parsed));
  });

  for (const auto& [line_no, entry] : lines) {
    if (!entry) continue;
    if (entry->augmentation) {
      const auto it = known.find(entry->augmentation->parent_id);
      if (it == known.end()) {
        report.issues.push_back({line_no, entry->id, IssueKind::DanglingParent,
                                 "parent '" + entry->augmentation->parent_id + "' not found"});
      } else if (!it->second) {
        report.issues.push_back({line_no, entry->id, IssueKind::DanglingParent,
                                 "parent '" + entry->augmentation->parent_id + "' is not an original entry"});
      }
    }
    try {
      const WavInfo info = probe_wav(entry->audio);
      const double actual = info.duration_s();
      if (std::abs(actual - entry->duration_s) > kDurationTolerance_s) {
        std::ostringstream msg;
        msg << "stated duration " << entry->duration_s << " s differs from audio duration " << actual << " s";
        report.issues.push_back({line_no, entry->id, IssueKind::DurationMismatch, msg.str()});
      }
    } catch (const Error& e) {
      report.issues.push_back({line_no, entry->id, IssueKind::AudioUnreadable, e.what()});
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["entries"] = report.entries;
  doc["ok"] = report.ok();
  auto issues = nlohmann::ordered_json::array();
  for (const auto& i : report.issues) {
    issues.push_back({{"line", i.line}, {"id", i.id}, {"kind", to_string(i.kind)}, {"message", i.message}});
  }
  doc["issues"] = std::move(issues);
  return doc;
}

}  // namespace asrkit
