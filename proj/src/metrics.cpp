#include "asrkit/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace asrkit {

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Match: return "match";
    case EditKind::Sub: return "sub";
    case EditKind::Del: return "del";
    case EditKind::Ins: return "ins";
  }
  return "?";
}

double EditCounts::rate() const {
  if (ref_tokens == 0) throw Error(ErrorKind::UndefinedMetric, "error rate undefined for an empty reference");
  return static_cast<double>(errors()) / static_cast<double>(ref_tokens);
}

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_tokens += o.ref_tokens;
  return *this;
}

namespace {

EditCounts char_counts(const PhonemeString& ref, const PhonemeString& hyp, const ScoringOptions& opts) {
  const auto r = scoring_chars(ref, opts);
  const auto h = scoring_chars(hyp, opts);
  return count_edits(align(r, h), r.size());
}

std::pair<EditCounts, Alignment<std::string>> word_counts(const PhonemeString& ref, const PhonemeString& hyp,
                                                          const ScoringOptions& opts) {
  const auto r = scoring_words(ref, opts);
  const auto h = scoring_words(hyp, opts);
  auto a = align(r, h);
  const EditCounts c = count_edits(a, r.size());
  return {c, std::move(a)};
}

nlohmann::ordered_json counts_json(const EditCounts& c) {
  return {{"substitutions", c.substitutions},
          {"deletions", c.deletions},
          {"insertions", c.insertions},
          {"errors", c.errors()},
          {"ref_tokens", c.ref_tokens}};
}

std::size_t display_width(const std::string& s) { return decode_utf8(s).size(); }

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string fmt_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

double cer(const PhonemeString& ref, const PhonemeString& hyp, const ScoringOptions& opts) {
  return char_counts(ref, hyp, opts).rate();
}

double wer(const PhonemeString& ref, const PhonemeString& hyp, const ScoringOptions& opts) {
  return word_counts(ref, hyp, opts).first.rate();
}

EvalReport corpus_eval(std::span<const ScoredPair> pairs, const ScoringOptions& opts) {
  EvalReport report;
  report.options = opts;
  report.utterances.reserve(pairs.size());
  for (const ScoredPair& p : pairs) {
    UtteranceScore u{p.id, p.ref, p.hyp, char_counts(p.ref, p.hyp, opts), {}, {}};
    std::tie(u.words, u.word_alignment) = word_counts(p.ref, p.hyp, opts);
    report.chars += u.chars;
    report.words += u.words;
    report.utterances.push_back(std::move(u));
  }
  if (report.chars.ref_tokens == 0 || report.words.ref_tokens == 0) {
    throw Error(ErrorKind::UndefinedMetric, "corpus has no non-empty reference transcription");
  }
  report.cer = report.chars.rate();
  report.wer = report.words.rate();
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["cer"] = report.cer;
  doc["wer"] = report.wer;
  doc["options"] = {{"cer_spaces", report.options.count_spaces},
                    {"strip_punct", report.options.strip_punctuation}};
  doc["char"] = counts_json(report.chars);
  doc["word"] = counts_json(report.words);
  auto rows = nlohmann::ordered_json::array();
  for (const UtteranceScore& u : report.utterances) {
    nlohmann::ordered_json row;
    row["id"] = u.id;
    row["ref"] = u.ref.str();
    row["hyp"] = u.hyp.str();
    row["cer"] = u.chars.ref_tokens ? nlohmann::ordered_json(u.chars.rate()) : nlohmann::ordered_json(nullptr);
    row["wer"] = u.words.ref_tokens ? nlohmann::ordered_json(u.words.rate()) : nlohmann::ordered_json(nullptr);
    row["char"] = counts_json(u.chars);
    row["word"] = counts_json(u.words);
    rows.push_back(std::move(row));
  }
  doc["utterances"] = std::move(rows);
  return doc;
}

std::string render_alignment(const Alignment<std::string>& alignment) {
  std::string ref_line = "REF:";
  std::string hyp_line = "HYP:";
  for (const auto& op : alignment.ops) {
    std::string r = op.ref.value_or("*");
    std::string h = op.hyp.value_or("*");
    if (op.kind != EditKind::Match) {
      r = "[" + r + "]";
      h = "[" + h + "]";
    }
    const std::size_t width = std::max(display_width(r), display_width(h));
    ref_line += " " + pad(r, width);
    hyp_line += " " + pad(h, width);
  }
  while (!ref_line.empty() && ref_line.back() == ' ') ref_line.pop_back();
  while (!hyp_line.empty() && hyp_line.back() == ' ') hyp_line.pop_back();
  return ref_line + "\n" + hyp_line + "\n";
}

std::string render_report_text(const EvalReport& report) {
  std::ostringstream out;
  for (const UtteranceScore& u : report.utterances) {
    out << "id: " << u.id << "  char errors " << u.chars.errors() << "/" << u.chars.ref_tokens
        << "  word errors " << u.words.errors() << "/" << u.words.ref_tokens << "\n";
    out << render_alignment(u.word_alignment) << "\n";
  }
  out << "CER " << fmt_rate(report.cer) << " (S " << report.chars.substitutions << " D "
      << report.chars.deletions << " I " << report.chars.insertions << " / N " << report.chars.ref_tokens
      << ")\n";
  out << "WER " << fmt_rate(report.wer) << " (S " << report.words.substitutions << " D "
      << report.words.deletions << " I " << report.words.insertions << " / N " << report.words.ref_tokens
      << ")\n";
  return out.str();
}

}  // namespace asrkit
