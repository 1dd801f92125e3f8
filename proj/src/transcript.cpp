#include "asrkit/transcript.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cstdio>
#include <fstream>

namespace asrkit {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset in the source UTF-8
};

std::string describe(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(c));
  return buf;
}

[[noreturn]] void bad_utf8(std::size_t offset) {
  throw CharsetError(0xFFFD, offset, "invalid UTF-8 at byte offset " + std::to_string(offset));
}

std::vector<CodePoint> decode_with_offsets(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      bad_utf8(i);
    }
    if (i + len > s.size()) bad_utf8(i);
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) bad_utf8(i);
      cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) bad_utf8(i);
    out.push_back({cp, i});
    i += len;
  }
  return out;
}

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error(ErrorKind::Charset, "ICU NFC normalizer unavailable");
  return *n;
}

// NFC per normalization segment so every output scalar can be traced to the
// raw offset of the segment it came from.
std::vector<CodePoint> nfc_with_offsets(const std::vector<CodePoint>& in) {
  const icu::Normalizer2& norm = nfc();
  std::vector<CodePoint> out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t j = i + 1;
    while (j < in.size() && !norm.hasBoundaryBefore(static_cast<UChar32>(in[j].value))) ++j;

    icu::UnicodeString segment;
    for (std::size_t k = i; k < j; ++k) segment.append(static_cast<UChar32>(in[k].value));
    UErrorCode status = U_ZERO_ERROR;
    const icu::UnicodeString composed = norm.normalize(segment, status);
    if (U_FAILURE(status)) throw Error(ErrorKind::Charset, "NFC normalization failed");
    for (int32_t k = 0; k < composed.length();) {
      const UChar32 c = composed.char32At(k);
      out.push_back({static_cast<char32_t>(c), in[i].offset});
      k += U16_LENGTH(c);
    }
    i = j;
  }
  return out;
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

PhoneClass parse_class(const std::string& s) {
  if (s == "vowel") return PhoneClass::Vowel;
  if (s == "stop") return PhoneClass::Stop;
  if (s == "nasal") return PhoneClass::Nasal;
  if (s == "fricative") return PhoneClass::Fricative;
  if (s == "affricate") return PhoneClass::Affricate;
  if (s == "approximant") return PhoneClass::Approximant;
  if (s == "trill-lateral") return PhoneClass::TrillLateral;
  throw Error(ErrorKind::Schema, "unknown phone class '" + s + "'");
}

Place parse_place(const std::string& s) {
  if (s == "bilabial") return Place::Bilabial;
  if (s == "alveolar") return Place::Alveolar;
  if (s == "palatal") return Place::Palatal;
  if (s == "velar") return Place::Velar;
  if (s == "none") return Place::None;
  throw Error(ErrorKind::Schema, "unknown place '" + s + "'");
}

FeatureTable build_standard() {
  using C = PhoneClass;
  using P = Place;
  FeatureTable t;
  for (char32_t v : std::u32string_view(U"aeiouə")) t.add(v, {C::Vowel, P::None, true, false});
  // b d g unaspirated, p t k aspirated; no voiced stops in the romanization
  t.add(U'b', {C::Stop, P::Bilabial, false, false});
  t.add(U'd', {C::Stop, P::Alveolar, false, false});
  t.add(U'g', {C::Stop, P::Velar, false, false});
  t.add(U'p', {C::Stop, P::Bilabial, false, true});
  t.add(U't', {C::Stop, P::Alveolar, false, true});
  t.add(U'k', {C::Stop, P::Velar, false, true});
  t.add(U'm', {C::Nasal, P::Bilabial, true, false});
  t.add(U'n', {C::Nasal, P::Alveolar, true, false});
  t.add(U'ŋ', {C::Nasal, P::Velar, true, false});
  t.add(U'l', {C::TrillLateral, P::Alveolar, true, false});
  t.add(U'r', {C::TrillLateral, P::Alveolar, true, false});
  t.add(U's', {C::Fricative, P::Alveolar, false, false});
  t.add(U'š', {C::Fricative, P::Palatal, false, false});
  t.add(U'f', {C::Fricative, P::Bilabial, false, false});
  t.add(U'v', {C::Fricative, P::Bilabial, false, false});
  // w is the labial approximant, x its voiceless palatal counterpart
  t.add(U'w', {C::Approximant, P::Bilabial, true, false});
  t.add(U'x', {C::Approximant, P::Palatal, false, false});
  t.add(U'j', {C::Approximant, P::Palatal, true, false});
  t.add(U'ǰ', {C::Affricate, P::Palatal, false, false});
  t.add(U'č', {C::Affricate, P::Palatal, false, true});
  return t;
}

}  // namespace

std::string_view to_string(PhoneClass c) {
  switch (c) {
    case PhoneClass::Vowel: return "vowel";
    case PhoneClass::Stop: return "stop";
    case PhoneClass::Nasal: return "nasal";
    case PhoneClass::Fricative: return "fricative";
    case PhoneClass::Affricate: return "affricate";
    case PhoneClass::Approximant: return "approximant";
    case PhoneClass::TrillLateral: return "trill-lateral";
  }
  return "?";
}

std::string_view to_string(Place p) {
  switch (p) {
    case Place::Bilabial: return "bilabial";
    case Place::Alveolar: return "alveolar";
    case Place::Palatal: return "palatal";
    case Place::Velar: return "velar";
    case Place::None: return "none";
  }
  return "?";
}

const FeatureTable& FeatureTable::standard() {
  static const FeatureTable table = build_standard();
  return table;
}

void FeatureTable::add(char32_t symbol, FeatureBundle bundle) {
  if (symbol == U' ' || is_punctuation(symbol)) {
    throw Error(ErrorKind::Schema, "space and punctuation cannot be inventory symbols");
  }
  if (!table_.emplace(symbol, bundle).second) {
    throw Error(ErrorKind::Schema, "duplicate inventory symbol " + describe(symbol));
  }
}

const FeatureBundle& FeatureTable::features(char32_t symbol) const {
  const auto it = table_.find(symbol);
  if (it == table_.end()) {
    throw Error(ErrorKind::FeatureLookup, "no feature bundle for symbol " + describe(symbol) + " '" +
                                              encode_utf8(symbol) + "'");
  }
  return it->second;
}

std::vector<char32_t> FeatureTable::symbols() const {
  std::vector<char32_t> out;
  out.reserve(table_.size());
  for (const auto& [sym, _] : table_) out.push_back(sym);
  return out;
}

FeatureTable FeatureTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Schema, "inventory must be a JSON object");
  FeatureTable t;
  for (const auto& [key, bundle] : doc.items()) {
    const std::vector<CodePoint> cps = nfc_with_offsets(decode_with_offsets(key));
    if (cps.size() != 1) {
      throw Error(ErrorKind::Schema, "inventory key '" + key + "' is not a single Unicode scalar after NFC");
    }
    try {
      FeatureBundle f;
      f.phone_class = parse_class(bundle.at("class").get<std::string>());
      f.place = parse_place(bundle.value("place", std::string("none")));
      f.sonorant = bundle.value("sonorant", false);
      f.aspirated = bundle.value("aspirated", false);
      t.add(cps.front().value, f);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Schema, "inventory entry '" + key + "': " + e.what());
    }
  }
  return t;
}

FeatureTable FeatureTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open inventory " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::ordered_json FeatureTable::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [sym, f] : table_) {
    doc[encode_utf8(sym)] = {{"class", to_string(f.phone_class)},
                             {"place", to_string(f.place)},
                             {"sonorant", f.sonorant},
                             {"aspirated", f.aspirated}};
  }
  return doc;
}

PhonemeString normalize(std::string_view raw, const FeatureTable& inventory) {
  const std::vector<CodePoint> composed = nfc_with_offsets(decode_with_offsets(raw));

  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const CodePoint& cp : composed) {
    if (is_space(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (!is_punctuation(cp.value) && !inventory.contains(cp.value)) {
      throw CharsetError(cp.value, cp.offset,
                         "character " + describe(cp.value) + " '" + encode_utf8(cp.value) +
                             "' at byte offset " + std::to_string(cp.offset) + " is not in the inventory");
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, cp.value);
  }
  return PhonemeString(std::move(out));
}

PhonemeString strip_punctuation(const PhonemeString& s) {
  std::string out;
  out.reserve(s.str().size());
  bool pending_space = false;
  for (char32_t c : decode_utf8(s.str())) {
    if (is_punctuation(c)) continue;
    if (c == U' ') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  }
  return PhonemeString(std::move(out));
}

std::vector<char32_t> tokenize_chars(const PhonemeString& s) {
  const std::u32string u = decode_utf8(s.str());
  return {u.begin(), u.end()};
}

std::vector<std::string> tokenize_words(const PhonemeString& s) {
  std::vector<std::string> words;
  const std::string& t = s.str();
  std::size_t start = 0;
  while (start < t.size()) {
    std::size_t end = t.find(' ', start);
    if (end == std::string::npos) end = t.size();
    words.push_back(t.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::vector<char32_t> scoring_chars(const PhonemeString& s, const ScoringOptions& opts) {
  std::vector<char32_t> tokens = tokenize_chars(opts.strip_punctuation ? strip_punctuation(s) : s);
  if (!opts.count_spaces) std::erase(tokens, U' ');
  return tokens;
}

std::vector<std::string> scoring_words(const PhonemeString& s, const ScoringOptions& opts) {
  return tokenize_words(opts.strip_punctuation ? strip_punctuation(s) : s);
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  for (const CodePoint& cp : decode_with_offsets(s)) out.push_back(cp.value);
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

std::string encode_utf8(char32_t c) {
  std::string out;
  append_utf8(out, c);
  return out;
}

}  // namespace asrkit
