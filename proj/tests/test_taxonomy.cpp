#include <doctest.h>

#include <random>

#include "asrkit/taxonomy.hpp"

using namespace asrkit;
using MC = MismatchCategory;

namespace {

std::vector<ErrorRecord> errors_of(const char* ref, const char* hyp) {
  const AlignedUtterance u = align_chars(normalize(ref), normalize(hyp));
  return extract_errors(u.ref, u.alignment);
}

MC only_category(const char* ref, const char* hyp) {
  const auto errs = errors_of(ref, hyp);
  REQUIRE(errs.size() == 1);
  return errs.front().category;
}

}  // namespace

TEST_CASE("golden mismatch pairs classify to their categories") {
  CHECK(only_category("amə", "am") == MC::SchwaLoss);
  CHECK(only_category("də", "d") == MC::SchwaLoss);
  CHECK(only_category("duləkə", "dulkə") == MC::SchwaLoss);
  CHECK(only_category("gunin", "gunim") == MC::FinalNasal);
  CHECK(only_category("ilan", "ila") == MC::FinalNasal);
  CHECK(only_category("damgu", "daŋgu") == MC::PlaceAssimilation);
  CHECK(only_category("šawulo", "šaxulo") == MC::WXConfusion);
}

TEST_CASE("error records carry context and word-finality") {
  const auto amə = errors_of("amə", "am");
  CHECK(amə[0].op.kind == EditKind::Del);
  CHECK(amə[0].word_final);
  CHECK(amə[0].context.prev == U'm');
  CHECK_FALSE(amə[0].context.next.has_value());

  const auto dul = errors_of("duləkə", "dulkə");
  CHECK(dul[0].op.ref == U'ə');
  CHECK(dul[0].op.ref_pos == 3);
  CHECK_FALSE(dul[0].word_final);
  CHECK(dul[0].context.prev == U'l');
  CHECK(dul[0].context.next == U'k');

  // Mid-utterance word boundary counts as a boundary.
  const auto two = errors_of("amə bi", "am bi");
  CHECK(two[0].word_final);
  CHECK(two[0].category == MC::SchwaLoss);
}

TEST_CASE("classification is symmetric in substitution direction") {
  CHECK(only_category("šaxulo", "šawulo") == MC::WXConfusion);
  CHECK(only_category("gunim", "gunin") == MC::FinalNasal);
}

TEST_CASE("insertions are covered by rules 1 and 2") {
  CHECK(only_category("dulkə", "duləkə") == MC::SchwaLoss);
  CHECK(only_category("am", "amə") == MC::SchwaLoss);
  CHECK(only_category("ila", "ilan") == MC::FinalNasal);
}

TEST_CASE("fall-through and near misses are Uncategorized") {
  CHECK(only_category("damgu", "domgu") == MC::Uncategorized);
  // m -> n before velar g: place does not agree with the following consonant.
  CHECK(only_category("damgu", "dangu") == MC::Uncategorized);
  // n deleted mid-word is not word-final.
  CHECK(only_category("gunin", "guin") == MC::Uncategorized);
  // w -> x next to a consonant is not intervocalic.
  CHECK(only_category("awlo", "axlo") == MC::Uncategorized);
  // schwa after an obstruent and before a consonant is neither environment.
  CHECK(only_category("tədko", "tdko") == MC::Uncategorized);
}

TEST_CASE("classify_error on hand-built ops") {
  EditOp<char32_t> sub{EditKind::Sub, U'a', U'o', 1, 1};
  CHECK(classify_error(sub, {U'd', U'm'}) == MC::Uncategorized);
  CHECK(classify_error(sub, {U'd', U'm'}) == classify_error(sub, {U'd', U'm'}));

  EditOp<char32_t> unknown{EditKind::Sub, U'q', U'o', 0, 0};
  try {
    classify_error(unknown, {std::nullopt, std::nullopt});
    FAIL("expected feature lookup error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FeatureLookup);
  }

  EditOp<char32_t> match{EditKind::Match, U'a', U'a', 0, 0};
  CHECK_THROWS_AS(classify_error(match, {}), Error);
}

TEST_CASE("property: word_final agrees with the word tokenizer") {
  const auto symbols = FeatureTable::standard().symbols();
  std::mt19937 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::u32string ref_raw, hyp_raw;
    for (int i = 0, n = 1 + gen() % 15; i < n; ++i) ref_raw += gen() % 4 == 0 ? U' ' : symbols[gen() % symbols.size()];
    for (int i = 0, n = gen() % 15; i < n; ++i) hyp_raw += gen() % 4 == 0 ? U' ' : symbols[gen() % symbols.size()];
    const PhonemeString ref = normalize(encode_utf8(ref_raw));
    const PhonemeString hyp = normalize(encode_utf8(hyp_raw));
    const AlignedUtterance u = align_chars(ref, hyp);

    // Last character index of every word, from tokenize_words.
    std::vector<bool> last(u.ref.size(), false);
    std::size_t pos = 0;
    for (const auto& w : tokenize_words(ref)) {
      pos += decode_utf8(w).size();
      last[pos - 1] = true;
      pos += 1;
    }
    for (const ErrorRecord& r : extract_errors(u.ref, u.alignment)) {
      if (r.op.kind == EditKind::Ins) {
        const bool expected = r.op.ref_pos > 0 && last[r.op.ref_pos - 1];
        REQUIRE(r.word_final == expected);
      } else {
        REQUIRE(r.word_final == last[r.op.ref_pos]);
      }
    }

    // Category counts sum to the number of non-match ops.
    const std::vector<AlignedUtterance> one{u};
    const TaxonomyReport rep = taxonomy_report(one);
    std::size_t sum = 0;
    for (const auto& c : rep.categories) sum += c.count;
    REQUIRE(sum == u.alignment.distance());
    REQUIRE(rep.total_errors == sum);
  }
}

TEST_CASE("taxonomy_report") {
  SUBCASE("empty input gives zero counts") {
    const TaxonomyReport r = taxonomy_report({});
    CHECK(r.total_errors == 0);
    for (const auto& c : r.categories) CHECK(c.count == 0);
  }
  SUBCASE("golden pairs as a corpus") {
    const char* pairs[][2] = {{"də", "d"},       {"amə", "am"},   {"duləkə", "dulkə"}, {"gunin", "gunim"},
                              {"ilan", "ila"},   {"damgu", "daŋgu"}, {"šawulo", "šaxulo"}};
    std::vector<AlignedUtterance> utts;
    for (const auto& p : pairs) utts.push_back(align_chars(normalize(p[0]), normalize(p[1])));
    const TaxonomyReport r = taxonomy_report(utts);
    CHECK(r[MC::SchwaLoss].count == 3);
    CHECK(r[MC::FinalNasal].count == 2);
    CHECK(r[MC::PlaceAssimilation].count == 1);
    CHECK(r[MC::WXConfusion].count == 1);
    CHECK(r[MC::Uncategorized].count == 0);
    CHECK(r[MC::SchwaLoss].share == doctest::Approx(3.0 / 7.0));
    REQUIRE(r[MC::SchwaLoss].examples.size() == 3);
    CHECK(r[MC::SchwaLoss].examples[1].render() == "amə : am / __#");
    CHECK(r[MC::SchwaLoss].examples[2].render() == "duləkə : dulkə / R__C");
    CHECK(r[MC::PlaceAssimilation].examples[0].render() == "damgu : daŋgu / __g");
    CHECK(r[MC::WXConfusion].examples[0].render() == "šawulo : šaxulo / V__V");

    const auto doc = to_json(r);
    CHECK(doc["FinalNasal"]["count"] == 2);
    CHECK(doc["WXConfusion"]["examples"][0] == "šawulo : šaxulo / V__V");
    CHECK(doc.size() == 5);

    const std::string table = render_table(r);
    CHECK(table.find("(3) assimilation") != std::string::npos);
    CHECK(table.find("damgu : daŋgu") != std::string::npos);
  }
  SUBCASE("only uncategorized substitutions") {
    std::vector<AlignedUtterance> utts;
    utts.push_back(align_chars(normalize("bi joxo"), normalize("bo juxo")));
    utts.push_back(align_chars(normalize("tal"), normalize("tol")));
    const TaxonomyReport r = taxonomy_report(utts);
    CHECK(r.total_errors == 3);
    CHECK(r[MC::Uncategorized].count == 3);
    for (MC c : {MC::SchwaLoss, MC::FinalNasal, MC::PlaceAssimilation, MC::WXConfusion}) CHECK(r[c].count == 0);
  }
  SUBCASE("examples are capped per category") {
    std::vector<AlignedUtterance> utts;
    for (int i = 0; i < 10; ++i) utts.push_back(align_chars(normalize("amə"), normalize("am")));
    const TaxonomyReport r = taxonomy_report(utts, FeatureTable::standard(), 3);
    CHECK(r[MC::SchwaLoss].count == 10);
    CHECK(r[MC::SchwaLoss].examples.size() == 3);
  }
  SUBCASE("hypothesis word reconstruction across a multi-word line") {
    std::vector<AlignedUtterance> utts{
        align_chars(normalize("tələ amə duləkə ani"), normalize("tələ am dulkə ani"))};
    const TaxonomyReport r = taxonomy_report(utts);
    REQUIRE(r[MC::SchwaLoss].examples.size() == 2);
    CHECK(r[MC::SchwaLoss].examples[0].render() == "amə : am / __#");
    CHECK(r[MC::SchwaLoss].examples[1].render() == "duləkə : dulkə / R__C");
  }
}
