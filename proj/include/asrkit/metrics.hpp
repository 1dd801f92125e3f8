#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asrkit/transcript.hpp"

namespace asrkit {

enum class EditKind { Match, Sub, Del, Ins };

std::string_view to_string(EditKind kind);

// ref_pos / hyp_pos index the consumed token. For Ins, ref_pos is the index of
// the reference token that follows the insertion point (== ref.size() at the end);
// for Del, hyp_pos is the analogous insertion point in the hypothesis.
template <class Token>
struct EditOp {
  EditKind kind;
  std::optional<Token> ref;
  std::optional<Token> hyp;
  std::size_t ref_pos;
  std::size_t hyp_pos;

  bool operator==(const EditOp&) const = default;
};

template <class Token>
struct Alignment {
  std::vector<EditOp<Token>> ops;

  std::size_t count(EditKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(ops.begin(), ops.end(), [kind](const auto& op) { return op.kind == kind; }));
  }
  std::size_t distance() const { return ops.size() - count(EditKind::Match); }
};

// Unit-cost Levenshtein alignment. Backtrace prefers Match > Sub > Del > Ins
// among optimal predecessors, walking from the end of both sequences.
template <class Token>
Alignment<Token> align(std::span<const Token> ref, std::span<const Token> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::size_t> cost((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) cost[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cost[i * w] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t up = cost[(i - 1) * w + j] + 1;
      const std::size_t left = cost[i * w + j - 1] + 1;
      cost[i * w + j] = std::min({diag, up, left});
    }
  }

  Alignment<Token> out;
  out.ops.reserve(std::max(n, m));
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[i * w + j];
    if (i > 0 && j > 0) {
      const std::size_t diag = cost[(i - 1) * w + j - 1];
      if (ref[i - 1] == hyp[j - 1] && diag == here) {
        out.ops.push_back({EditKind::Match, ref[i - 1], hyp[j - 1], i - 1, j - 1});
        --i, --j;
        continue;
      }
      if (ref[i - 1] != hyp[j - 1] && diag + 1 == here) {
        out.ops.push_back({EditKind::Sub, ref[i - 1], hyp[j - 1], i - 1, j - 1});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && cost[(i - 1) * w + j] + 1 == here) {
      out.ops.push_back({EditKind::Del, ref[i - 1], std::nullopt, i - 1, j});
      --i;
      continue;
    }
    out.ops.push_back({EditKind::Ins, std::nullopt, hyp[j - 1], i, j - 1});
    --j;
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

template <class Token>
Alignment<Token> align(const std::vector<Token>& ref, const std::vector<Token>& hyp) {
  return align(std::span<const Token>(ref), std::span<const Token>(hyp));
}

// Rebuilds the hypothesis by applying the ops to the reference.
template <class Token>
std::vector<Token> replay(std::span<const Token> ref, const Alignment<Token>& alignment) {
  std::vector<Token> out;
  for (const auto& op : alignment.ops) {
    switch (op.kind) {
      case EditKind::Match: out.push_back(ref[op.ref_pos]); break;
      case EditKind::Sub:
      case EditKind::Ins: out.push_back(*op.hyp); break;
      case EditKind::Del: break;
    }
  }
  return out;
}

template <class Token>
std::size_t edit_distance(std::span<const Token> ref, std::span<const Token> hyp) {
  // Two-row DP; same recurrence as align() without the backtrace.
  std::vector<std::size_t> prev(hyp.size() + 1), row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      row[j] = std::min({prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), prev[j] + 1, row[j - 1] + 1});
    }
    std::swap(prev, row);
  }
  return prev[hyp.size()];
}

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_tokens = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  // Throws UndefinedMetric when ref_tokens == 0.
  double rate() const;
  EditCounts& operator+=(const EditCounts& o);
};

template <class Token>
EditCounts count_edits(const Alignment<Token>& a, std::size_t ref_tokens) {
  return {a.count(EditKind::Sub), a.count(EditKind::Del), a.count(EditKind::Ins), ref_tokens};
}

double cer(const PhonemeString& ref, const PhonemeString& hyp, const ScoringOptions& opts = {});
double wer(const PhonemeString& ref, const PhonemeString& hyp, const ScoringOptions& opts = {});

struct UtteranceScore {
  std::string id;
  PhonemeString ref;
  PhonemeString hyp;
  EditCounts chars;
  EditCounts words;
  Alignment<std::string> word_alignment;
};

struct EvalReport {
  double cer = 0.0;
  double wer = 0.0;
  EditCounts chars;
  EditCounts words;
  ScoringOptions options;
  std::vector<UtteranceScore> utterances;
};

struct ScoredPair {
  std::string id;
  PhonemeString ref;
  PhonemeString hyp;
};

// Micro-averaged: summed distances over summed reference lengths.
EvalReport corpus_eval(std::span<const ScoredPair> pairs, const ScoringOptions& opts = {});

nlohmann::ordered_json to_json(const EvalReport& report);

// REF/HYP line pairs with mismatching words bracketed and columns aligned;
// "*" stands for the missing side of an insertion or deletion.
std::string render_alignment(const Alignment<std::string>& alignment);
std::string render_report_text(const EvalReport& report);

}  // namespace asrkit
