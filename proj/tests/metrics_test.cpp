// Copyright 2026 The dualknow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dualknow/error.hpp"
#include "dualknow/metrics.hpp"
#include "oracles/metric_oracle.hpp"
#include "oracles/random_corpus.hpp"
#include "support.hpp"

namespace dualknow::metrics {
namespace {

std::vector<TokenizedPair> convert(const std::vector<oracle::Pair>& corpus) {
  std::vector<TokenizedPair> out;
  for (const auto& p : corpus) out.push_back({p.hyp, p.refs});
  return out;
}

std::vector<TokenizedPair> single(const std::string& hyp, const std::string& ref) {
  return {{tokenize(hyp), {tokenize(ref)}}};
}

TEST(Tokenize, HandRules) {
  EXPECT_EQ(tokenize("Ok, how about wingstop?"),
            (Tokens{"ok", ",", "how", "about", "wingstop", "?"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n").empty());
  EXPECT_EQ(tokenize("+65 6844-9200"), (Tokens{"+", "65", "6844", "-", "9200"}));
  EXPECT_EQ(tokenize("7.5/10"), (Tokens{"7", ".", "5", "/", "10"}));
  EXPECT_EQ(tokenize("Caf\xC3\xA9 OK"), (Tokens{"caf\xC3\xA9", "ok"}));
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  for (const char* s : {"Ok, how about wingstop?", "It's 7.5/10!!", "A  B\tc", "don't-stop"}) {
    Tokens once = tokenize(s);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined), once) << s;
  }
}

TEST(CorpusBleu, IdentityIsHundred) {
  auto pairs = single("the cat sat on the mat", "the cat sat on the mat");
  for (double b : corpus_bleu(pairs)) EXPECT_DOUBLE_EQ(b, 100.0);
}

TEST(CorpusBleu, ClippedUnigramPrecision) {
  auto pairs = single("the the the the", "the cat");
  BleuStats s = bleu_stats(pairs);
  EXPECT_EQ(s.matches[0], 1.0);
  EXPECT_EQ(s.totals[0], 4.0);
  EXPECT_EQ(s.matches[0] / s.totals[0], 0.25);
}

TEST(CorpusBleu, BrevityPenaltyHandValue) {
  auto bleu = corpus_bleu(single("the cat", "the cat sat"));
  // p1 = 1, BP = exp(1 - 3/2).
  EXPECT_NEAR(bleu[0], 100.0 * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(bleu[0], 60.65, 0.01);
  EXPECT_NEAR(bleu[1], 100.0 * std::exp(-0.5), 1e-12);
  EXPECT_EQ(bleu[2], 0.0);
}

TEST(CorpusBleu, Errors) {
  std::vector<TokenizedPair> none;
  EXPECT_THROW(corpus_bleu(none), PreconditionError);
  EXPECT_THROW(corpus_bleu(single("a", "a"), 3), PreconditionError);
  std::vector<TokenizedPair> no_refs{{{"a"}, {}}};
  EXPECT_THROW(corpus_bleu(no_refs), PreconditionError);
}

TEST(CorpusNist, TwoWordHandValue) {
  EXPECT_NEAR(corpus_nist(single("the cat", "the cat")), 1.0, 1e-9);
}

TEST(CorpusNist, NoOverlapIsZero) {
  EXPECT_EQ(corpus_nist(single("dog ran", "the cat")), 0.0);
  std::vector<TokenizedPair> none;
  EXPECT_THROW(corpus_nist(none), PreconditionError);
}

TEST(CorpusNist, BrevityFactorCalibration) {
  const double beta = nist_beta();
  const double l = std::log(2.0 / 3.0);
  EXPECT_NEAR(std::exp(beta * l * l), 0.5, 1e-12);
}

TEST(Metrics, OracleEquivalenceOnRandomCorpora) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    auto corpus = oracle::random_corpus(rng, 10, 12, trial % 3 + 1);
    auto pairs = convert(corpus);
    auto got = corpus_bleu(pairs);
    auto want = oracle::bleu(corpus);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(got[n], want[n], 1e-9) << trial;
    EXPECT_NEAR(corpus_nist(pairs), oracle::nist(corpus), 1e-9) << trial;
  }
}

TEST(Metrics, RangeAndOrderInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto pairs = convert(oracle::random_corpus(rng, 10, 12, 2));
    auto bleu = corpus_bleu(pairs);
    const double nist = corpus_nist(pairs);
    for (double b : bleu) {
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, 100.0);
    }
    EXPECT_GE(nist, 0.0);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    auto shuffled = corpus_bleu(pairs);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(shuffled[n], bleu[n], 1e-9);
    EXPECT_NEAR(corpus_nist(pairs), nist, 1e-9);
  }
}

TEST(Metrics, DuplicatingCorpusKeepsNist) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto pairs = convert(oracle::random_corpus(rng, 8, 10, 1));
    auto doubled = pairs;
    doubled.insert(doubled.end(), pairs.begin(), pairs.end());
    EXPECT_NEAR(corpus_nist(doubled), corpus_nist(pairs), 1e-9);
    auto a = corpus_bleu(pairs), b = corpus_bleu(doubled);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(a[n], b[n], 1e-9);
  }
}

TEST(Metrics, ExtraReferenceNeverLowersNumerators) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto corpus = oracle::random_corpus(rng, 6, 10, 1);
    auto pairs = convert(corpus);
    BleuStats before = bleu_stats(pairs);
    auto extra = oracle::random_corpus(rng, 1, 10, 1);
    pairs[0].references.push_back(extra[0].refs[0]);
    BleuStats after = bleu_stats(pairs);
    for (int n = 0; n < 4; ++n) EXPECT_GE(after.matches[n], before.matches[n]);
  }
}

TEST(Metrics, HundredOnlyForExactMatches) {
  auto exact = single("a b c d e", "a b c d e");
  EXPECT_DOUBLE_EQ(corpus_bleu(exact)[3], 100.0);
  auto reordered = single("a b c e d", "a b c d e");
  EXPECT_LT(corpus_bleu(reordered)[3], 100.0);
  auto longer = single("a b c d e e", "a b c d e");
  EXPECT_LT(corpus_bleu(longer)[0], 100.0);
}

TEST(Evaluate, ReportAndTable) {
  std::vector<ScoredRecord> records{{"d1", 1, "the cat sat", "the cat sat"},
                                    {"d2", 3, "Wingstop is great!", "wingstop is great!"}};
  EvalReport r = evaluate(records);
  EXPECT_EQ(r.sample_count, 2u);
  for (double b : r.bleu) EXPECT_DOUBLE_EQ(b, 100.0);
  ASSERT_EQ(r.per_sample.size(), 2u);
  EXPECT_EQ(r.per_sample[1].hypothesis_tokens, 4u);
  EXPECT_EQ(r.per_sample[1].unigram_matches, 4u);
  const std::string table = format_table(r);
  EXPECT_NE(table.find("BLEU-1"), std::string::npos);
  EXPECT_NE(table.find("100.00"), std::string::npos);
  EXPECT_NE(table.find("samples: 2"), std::string::npos);
  EXPECT_THROW(evaluate({}), PreconditionError);
}

TEST(ReadResults, MissingReferenceNamesRecord) {
  testing::TempDir tmp;
  testing::write_file(tmp / "r.jsonl",
                      R"({"dialog_id":"d1","turn_index":1,"hypothesis":"a","reference":"a"})" "\n"
                      R"({"dialog_id":"d9","turn_index":5,"hypothesis":"a"})" "\n");
  try {
    read_results(tmp / "r.jsonl");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("d9/5"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace dualknow::metrics
