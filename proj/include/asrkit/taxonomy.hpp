#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asrkit/metrics.hpp"
#include "asrkit/transcript.hpp"

namespace asrkit {

// Numbered in rule order; Uncategorized is the fall-through.
enum class MismatchCategory { SchwaLoss, FinalNasal, PlaceAssimilation, WXConfusion, Uncategorized };

inline constexpr std::array kAllCategories = {MismatchCategory::SchwaLoss, MismatchCategory::FinalNasal,
                                              MismatchCategory::PlaceAssimilation,
                                              MismatchCategory::WXConfusion, MismatchCategory::Uncategorized};

std::string_view to_string(MismatchCategory c);

// Neighbours of an op in the reference character stream; nullopt is a word
// boundary (space or either end of the utterance).
struct RefContext {
  std::optional<char32_t> prev;
  std::optional<char32_t> next;
};

struct ErrorRecord {
  EditOp<char32_t> op;
  RefContext context;
  bool word_final = false;
  MismatchCategory category = MismatchCategory::Uncategorized;
};

// Context of a non-match op over char tokens. Sub/Del sit on ref[ref_pos];
// an Ins sits between ref[ref_pos - 1] and ref[ref_pos].
RefContext reference_context(std::span<const char32_t> ref, const EditOp<char32_t>& op);

// True when the op's reference position is the last non-space token of a
// word. For an Ins that position is the reference token before the insertion.
bool is_word_final(const EditOp<char32_t>& op, const RefContext& context);

// First matching rule, in order:
//   1 SchwaLoss          ə involved, and word-final or between sonorant and obstruent
//   2 FinalNasal         nasal:nasal Sub, or nasal Del/Ins, word-finally
//   3 PlaceAssimilation  same-class Sub differing only in place, next ref consonant shares hyp place
//   4 WXConfusion        w:x Sub (either direction) between two reference vowels
// Throws FeatureLookup if a symbol in the op or its context is unknown.
MismatchCategory classify_error(const EditOp<char32_t>& op, const RefContext& context,
                                const FeatureTable& features = FeatureTable::standard());

// ErrorRecords for every non-match op of a char-level alignment.
std::vector<ErrorRecord> extract_errors(std::span<const char32_t> ref, const Alignment<char32_t>& alignment,
                                        const FeatureTable& features = FeatureTable::standard());

struct TaxonomyExample {
  std::string ref_word;
  std::string hyp_word;
  std::string context;  // e.g. "__#", "R__C", "__g", "V__V"
  std::string render() const { return ref_word + " : " + hyp_word + " / " + context; }
};

struct CategoryTally {
  std::size_t count = 0;
  double share = 0.0;
  std::vector<TaxonomyExample> examples;
};

struct TaxonomyReport {
  std::array<CategoryTally, kAllCategories.size()> categories{};
  std::size_t total_errors = 0;

  const CategoryTally& operator[](MismatchCategory c) const { return categories[static_cast<std::size_t>(c)]; }
  CategoryTally& operator[](MismatchCategory c) { return categories[static_cast<std::size_t>(c)]; }
};

struct AlignedUtterance {
  std::vector<char32_t> ref;
  std::vector<char32_t> hyp;
  Alignment<char32_t> alignment;
};

AlignedUtterance align_chars(const PhonemeString& ref, const PhonemeString& hyp, bool strip_punct = true);

TaxonomyReport taxonomy_report(std::span<const AlignedUtterance> utterances,
                               const FeatureTable& features = FeatureTable::standard(),
                               std::size_t max_examples = 5);

nlohmann::ordered_json to_json(const TaxonomyReport& report);
// Two-column "Mismatch Types | Examples" table plus counts.
std::string render_table(const TaxonomyReport& report);

}  // namespace asrkit
