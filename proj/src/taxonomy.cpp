#include "asrkit/taxonomy.hpp"

#include <cstdio>
#include <sstream>

namespace asrkit {

namespace {

constexpr char32_t kSchwa = U'ə';
constexpr char32_t kSpace = U' ';

// Space and punctuation carry no phonological features.
const FeatureBundle* lookup(const FeatureTable& table, std::optional<char32_t> c) {
  if (!c || *c == kSpace || is_punctuation(*c)) return nullptr;
  return &table.features(*c);
}

bool is_nasal(const FeatureBundle* f) { return f && f->phone_class == PhoneClass::Nasal; }
bool is_vowel(const FeatureBundle* f) { return f && f->is_vowel(); }

bool involves(const EditOp<char32_t>& op, char32_t c) { return op.ref == c || op.hyp == c; }

bool schwa_loss(const EditOp<char32_t>& op, const RefContext& ctx, bool word_final, const FeatureTable& t) {
  if (!involves(op, kSchwa)) return false;
  if (word_final) return true;
  const FeatureBundle* prev = lookup(t, ctx.prev);
  const FeatureBundle* next = lookup(t, ctx.next);
  return prev && prev->sonorant && next && next->is_consonant() && !next->sonorant;
}

bool final_nasal(const EditOp<char32_t>& op, bool word_final, const FeatureTable& t) {
  if (!word_final) return false;
  switch (op.kind) {
    case EditKind::Sub: return is_nasal(lookup(t, op.ref)) && is_nasal(lookup(t, op.hyp));
    case EditKind::Del: return is_nasal(lookup(t, op.ref));
    case EditKind::Ins: return is_nasal(lookup(t, op.hyp));
    case EditKind::Match: return false;
  }
  return false;
}

bool place_assimilation(const EditOp<char32_t>& op, const RefContext& ctx, const FeatureTable& t) {
  if (op.kind != EditKind::Sub) return false;
  const FeatureBundle* from = lookup(t, op.ref);
  const FeatureBundle* to = lookup(t, op.hyp);
  if (!from || !to) return false;
  const bool place_only = from->phone_class == to->phone_class && from->sonorant == to->sonorant &&
                          from->aspirated == to->aspirated && from->place != to->place;
  if (!place_only) return false;
  const FeatureBundle* next = lookup(t, ctx.next);
  return next && next->is_consonant() && next->place == to->place;
}

bool wx_confusion(const EditOp<char32_t>& op, const RefContext& ctx, const FeatureTable& t) {
  if (op.kind != EditKind::Sub) return false;
  const bool pair = (op.ref == U'w' && op.hyp == U'x') || (op.ref == U'x' && op.hyp == U'w');
  return pair && is_vowel(lookup(t, ctx.prev)) && is_vowel(lookup(t, ctx.next));
}

std::string symbol_or_boundary(std::optional<char32_t> c) { return c ? encode_utf8(*c) : std::string("#"); }

std::string describe_context(MismatchCategory c, const ErrorRecord& r) {
  switch (c) {
    case MismatchCategory::SchwaLoss: return r.word_final ? "__#" : "R__C";
    case MismatchCategory::FinalNasal: return "__#";
    case MismatchCategory::PlaceAssimilation: return "__" + symbol_or_boundary(r.context.next);
    case MismatchCategory::WXConfusion: return "V__V";
    case MismatchCategory::Uncategorized: break;
  }
  return symbol_or_boundary(r.context.prev) + "__" + symbol_or_boundary(r.context.next);
}

std::size_t display_width(const std::string& s) { return decode_utf8(s).size(); }

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string_view category_label(MismatchCategory c) {
  switch (c) {
    case MismatchCategory::SchwaLoss: return "(1) ə / __#, R__C";
    case MismatchCategory::FinalNasal: return "(2) n, m / __#";
    case MismatchCategory::PlaceAssimilation: return "(3) assimilation";
    case MismatchCategory::WXConfusion: return "(4) w : x / V__V";
    case MismatchCategory::Uncategorized: return "uncategorized";
  }
  return "?";
}

}  // namespace

std::string_view to_string(MismatchCategory c) {
  switch (c) {
    case MismatchCategory::SchwaLoss: return "SchwaLoss";
    case MismatchCategory::FinalNasal: return "FinalNasal";
    case MismatchCategory::PlaceAssimilation: return "PlaceAssimilation";
    case MismatchCategory::WXConfusion: return "WXConfusion";
    case MismatchCategory::Uncategorized: return "Uncategorized";
  }
  return "?";
}

RefContext reference_context(std::span<const char32_t> ref, const EditOp<char32_t>& op) {
  auto at = [&](std::size_t i) -> std::optional<char32_t> {
    if (i >= ref.size() || ref[i] == kSpace) return std::nullopt;
    return ref[i];
  };
  RefContext ctx;
  if (op.kind == EditKind::Ins) {
    ctx.prev = op.ref_pos > 0 ? at(op.ref_pos - 1) : std::nullopt;
    ctx.next = at(op.ref_pos);
  } else {
    ctx.prev = op.ref_pos > 0 ? at(op.ref_pos - 1) : std::nullopt;
    ctx.next = at(op.ref_pos + 1);
  }
  return ctx;
}

bool is_word_final(const EditOp<char32_t>& op, const RefContext& context) {
  if (context.next) return false;
  if (op.kind == EditKind::Ins) return context.prev.has_value();
  return op.ref && *op.ref != kSpace;
}

MismatchCategory classify_error(const EditOp<char32_t>& op, const RefContext& context, const FeatureTable& features) {
  if (op.kind == EditKind::Match) {
    throw Error(ErrorKind::Parameter, "match ops are not errors");
  }
  // Unknown symbols surface as lookup errors regardless of which rule fires.
  lookup(features, op.ref);
  lookup(features, op.hyp);

  const bool word_final = is_word_final(op, context);
  if (schwa_loss(op, context, word_final, features)) return MismatchCategory::SchwaLoss;
  if (final_nasal(op, word_final, features)) return MismatchCategory::FinalNasal;
  if (place_assimilation(op, context, features)) return MismatchCategory::PlaceAssimilation;
  if (wx_confusion(op, context, features)) return MismatchCategory::WXConfusion;
  return MismatchCategory::Uncategorized;
}

std::vector<ErrorRecord> extract_errors(std::span<const char32_t> ref, const Alignment<char32_t>& alignment,
                                        const FeatureTable& features) {
  std::vector<ErrorRecord> out;
  for (const auto& op : alignment.ops) {
    if (op.kind == EditKind::Match) continue;
    ErrorRecord r{op, reference_context(ref, op), false, MismatchCategory::Uncategorized};
    r.word_final = is_word_final(op, r.context);
    r.category = classify_error(op, r.context, features);
    out.push_back(std::move(r));
  }
  return out;
}

AlignedUtterance align_chars(const PhonemeString& ref, const PhonemeString& hyp, bool strip_punct) {
  const ScoringOptions opts{true, strip_punct};
  AlignedUtterance u{scoring_chars(ref, opts), scoring_chars(hyp, opts), {}};
  u.alignment = align(u.ref, u.hyp);
  return u;
}

namespace {

// Word index of every reference token; -1 for spaces.
std::vector<long> ref_word_index(std::span<const char32_t> ref) {
  std::vector<long> idx(ref.size(), -1);
  long word = -1;
  bool in_word = false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] == kSpace) {
      in_word = false;
      continue;
    }
    if (!in_word) ++word;
    in_word = true;
    idx[i] = word;
  }
  return idx;
}

long anchor_word(const EditOp<char32_t>& op, const std::vector<long>& idx) {
  if (op.kind != EditKind::Ins) return op.ref_pos < idx.size() ? idx[op.ref_pos] : -1;
  if (op.ref_pos > 0 && idx[op.ref_pos - 1] >= 0) return idx[op.ref_pos - 1];
  return op.ref_pos < idx.size() ? idx[op.ref_pos] : -1;
}

std::pair<std::string, std::string> word_pair(const AlignedUtterance& u, long word) {
  const std::vector<long> idx = ref_word_index(u.ref);
  std::u32string ref_word, hyp_word;
  for (std::size_t i = 0; i < u.ref.size(); ++i)
    if (idx[i] == word) ref_word.push_back(u.ref[i]);
  for (const auto& op : u.alignment.ops) {
    if (anchor_word(op, idx) != word || !op.hyp || *op.hyp == kSpace) continue;
    hyp_word.push_back(*op.hyp);
  }
  return {encode_utf8(ref_word), encode_utf8(hyp_word)};
}

}  // namespace

TaxonomyReport taxonomy_report(std::span<const AlignedUtterance> utterances, const FeatureTable& features,
                               std::size_t max_examples) {
  TaxonomyReport report;
  for (const AlignedUtterance& u : utterances) {
    const std::vector<long> idx = ref_word_index(u.ref);
    for (const ErrorRecord& r : extract_errors(u.ref, u.alignment, features)) {
      CategoryTally& tally = report[r.category];
      ++tally.count;
      ++report.total_errors;
      if (tally.examples.size() >= max_examples) continue;
      auto [ref_word, hyp_word] = word_pair(u, anchor_word(r.op, idx));
      tally.examples.push_back({std::move(ref_word), std::move(hyp_word), describe_context(r.category, r)});
    }
  }
  for (CategoryTally& t : report.categories) {
    t.share = report.total_errors ? static_cast<double>(t.count) / static_cast<double>(report.total_errors) : 0.0;
  }
  return report;
}

nlohmann::ordered_json to_json(const TaxonomyReport& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (MismatchCategory c : kAllCategories) {
    const CategoryTally& t = report[c];
    auto examples = nlohmann::ordered_json::array();
    for (const auto& e : t.examples) examples.push_back(e.render());
    doc[std::string(to_string(c))] = {{"count", t.count}, {"share", t.share}, {"examples", std::move(examples)}};
  }
  return doc;
}

std::string render_table(const TaxonomyReport& report) {
  std::vector<std::array<std::string, 4>> rows;
  rows.push_back({"Mismatch Types", "Count", "Share", "Examples"});
  for (MismatchCategory c : kAllCategories) {
    const CategoryTally& t = report[c];
    char share[16];
    std::snprintf(share, sizeof share, "%.4f", t.share);
    std::string examples;
    for (const auto& e : t.examples) {
      if (!examples.empty()) examples += ", ";
      examples += e.ref_word + " : " + e.hyp_word;
    }
    rows.push_back({std::string(category_label(c)), std::to_string(t.count), share, examples});
  }
  rows.push_back({"total", std::to_string(report.total_errors), "", ""});

  std::array<std::size_t, 3> width{};
  for (const auto& row : rows)
    for (std::size_t k = 0; k < width.size(); ++k) width[k] = std::max(width[k], display_width(row[k]));

  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t k = 0; k < 3; ++k) line += pad(rows[r][k], width[k]) + " | ";
    line += rows[r][3];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
    if (r == 0 || r + 2 == rows.size()) out << std::string(display_width(line), '-') << "\n";
  }
  return out.str();
}

}  // namespace asrkit
