#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asrkit/error.hpp"

namespace asrkit {

enum class PhoneClass { Vowel, Stop, Nasal, Fricative, Affricate, Approximant, TrillLateral };
enum class Place { Bilabial, Alveolar, Palatal, Velar, None };

std::string_view to_string(PhoneClass c);
std::string_view to_string(Place p);

struct FeatureBundle {
  PhoneClass phone_class = PhoneClass::Vowel;
  Place place = Place::None;
  bool sonorant = false;
  bool aspirated = false;

  bool is_vowel() const { return phone_class == PhoneClass::Vowel; }
  bool is_consonant() const { return !is_vowel(); }
  bool operator==(const FeatureBundle&) const = default;
};

// Symbol inventory with one feature bundle per symbol. A symbol is a single
// Unicode scalar after NFC.
class FeatureTable {
 public:
  // a e i o u ə, b d g p t k, m n ŋ, l r, s š x w j, č ǰ, f v
  static const FeatureTable& standard();

  // {"<symbol>": {"class": ..., "place": ..., "sonorant": bool, "aspirated": bool}, ...}
  static FeatureTable from_json(const nlohmann::json& doc);
  static FeatureTable load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  void add(char32_t symbol, FeatureBundle bundle);
  bool contains(char32_t symbol) const { return table_.contains(symbol); }
  // Throws FeatureLookup for symbols outside the inventory.
  const FeatureBundle& features(char32_t symbol) const;
  std::size_t size() const { return table_.size(); }
  std::vector<char32_t> symbols() const;

 private:
  std::map<char32_t, FeatureBundle> table_;
};

inline bool is_punctuation(char32_t c) { return c == U'.' || c == U',' || c == U'?'; }

class CharsetError : public Error {
 public:
  CharsetError(char32_t codepoint, std::size_t byte_offset, const std::string& what)
      : Error(ErrorKind::Charset, what), codepoint_(codepoint), byte_offset_(byte_offset) {}

  char32_t codepoint() const noexcept { return codepoint_; }
  // Offset into the raw (pre-normalization) UTF-8 input.
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  char32_t codepoint_;
  std::size_t byte_offset_;
};

// NFC, single-space separated, trimmed, inventory-conformant transcription.
class PhonemeString {
 public:
  PhonemeString() = default;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }
  bool operator==(const PhonemeString&) const = default;

 private:
  explicit PhonemeString(std::string text) : text_(std::move(text)) {}
  std::string text_;

  friend PhonemeString normalize(std::string_view, const FeatureTable&);
  friend PhonemeString strip_punctuation(const PhonemeString&);
};

// Throws CharsetError for invalid UTF-8 or symbols outside inventory ∪ {space . , ?}.
PhonemeString normalize(std::string_view raw, const FeatureTable& inventory = FeatureTable::standard());

PhonemeString strip_punctuation(const PhonemeString& s);

// One token per Unicode scalar, spaces included.
std::vector<char32_t> tokenize_chars(const PhonemeString& s);
std::vector<std::string> tokenize_words(const PhonemeString& s);

struct ScoringOptions {
  bool count_spaces = true;
  bool strip_punctuation = true;
};

// Token streams as scored by CER / WER under the given conventions.
std::vector<char32_t> scoring_chars(const PhonemeString& s, const ScoringOptions& opts);
std::vector<std::string> scoring_words(const PhonemeString& s, const ScoringOptions& opts);

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t c);

}  // namespace asrkit
