#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asrkit/transcript.hpp"

namespace asrkit {

// Unassigned marks freshly ingested originals that have not been split yet.
enum class Split { Train, Test, Unassigned };

enum class Technique { Noise, Clip, Reverb, TimeDropout };

inline constexpr Technique kAllTechniques[] = {Technique::Noise, Technique::Clip, Technique::Reverb,
                                               Technique::TimeDropout};

std::string_view to_string(Split s);
std::string_view to_string(Technique t);
Split parse_split(std::string_view s);
Technique parse_technique(std::string_view s);

struct Augmentation {
  Technique technique = Technique::Noise;
  std::uint64_t seed = 0;
  std::string parent_id;

  bool operator==(const Augmentation&) const = default;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path audio;
  PhonemeString text;
  double duration_s = 0.0;
  Split split = Split::Unassigned;
  std::optional<Augmentation> augmentation;  // nullopt: original recording

  bool is_original() const { return !augmentation.has_value(); }
  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  static constexpr int kSchemaVersion = 1;

  std::vector<ManifestEntry> entries;
  int schema_version = kSchemaVersion;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const ManifestEntry* find(std::string_view id) const;
};

// One JSON object per line. Relative audio paths are resolved against base_dir
// on parse and written relative to base_dir on serialize.
nlohmann::ordered_json entry_to_json(const ManifestEntry& entry, const std::filesystem::path& base_dir);
ManifestEntry entry_from_json(const nlohmann::json& obj, const std::filesystem::path& base_dir,
                              const FeatureTable& inventory);

std::string serialize_manifest(const Manifest& manifest, const std::filesystem::path& base_dir);
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        const FeatureTable& inventory = FeatureTable::standard());

// Strict: the first schema, charset or duplicate-id problem throws (with its line number).
Manifest load_manifest(const std::filesystem::path& path, const FeatureTable& inventory = FeatureTable::standard());
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitResult {
  Manifest train;
  Manifest test;
};

// Seeded, duration-targeted split at utterance granularity. The test side
// lands within one utterance of test_fraction * total duration. Entries keep
// their input order within each side.
SplitResult split(const Manifest& manifest, double test_fraction, std::uint64_t seed);

double total_duration_s(const Manifest& manifest);
double total_duration_min(const Manifest& manifest);

struct LeakageViolation {
  enum class Kind { SharedId, TrainParentInTest, TestParentInTrain };
  Kind kind;
  std::string train_id;
  std::string test_id;
  std::string message;
};

std::vector<LeakageViolation> check_leakage(const Manifest& train, const Manifest& test);

enum class IssueKind { Schema, DuplicateId, DanglingParent, DurationMismatch, AudioUnreadable, Charset };

std::string_view to_string(IssueKind kind);

struct ValidationIssue {
  std::size_t line = 0;  // 1-based
  std::string id;
  IssueKind kind;
  std::string message;
};

struct ValidationReport {
  std::size_t entries = 0;
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
};

inline constexpr double kDurationTolerance_s = 1e-3;

// Parent ids may resolve in the manifest itself or in any of parent_manifests
// (an augmented-only manifest's parents live in the train manifest).
ValidationReport validate_manifest(const std::filesystem::path& path,
                                   const FeatureTable& inventory = FeatureTable::standard(),
                                   const std::vector<std::filesystem::path>& parent_manifests = {});

nlohmann::ordered_json to_json(const ValidationReport& report);

}  // namespace asrkit
