// tests/test_score.cc

// Copyright 2026  CASR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "casr/score.h"

#include <map>

#include "casr/common.h"
#include "casr/error.h"
#include "doctest.h"
#include "oracles.h"

using namespace casr;
using namespace casr::score;

namespace {

std::vector<std::string> Words(const std::string& s) { return SplitWhitespace(s); }

}  // namespace

TEST_CASE("strip_optional removes hesitations from the hypothesis only") {
  CHECK(StripOptional(Words("um yes"), DefaultOptionalSet()) == Words("yes"));
  CHECK(StripOptional({}, DefaultOptionalSet()).empty());
}

TEST_CASE("hesitation/backchannel scoring asymmetry") {
  // backchannel hypothesized for a reference hesitation: survives stripping,
  // scores as a substitution
  auto hyp1 = StripOptional(Words("uh-huh"), DefaultOptionalSet());
  auto [a1, r1] = AlignAndScore(Words("uh"), hyp1);
  CHECK(r1.subs == 1);
  CHECK(r1.dels == 0);
  // hesitation hypothesized for a reference backchannel: stripped away,
  // scores as a deletion, never as the reverse substitution
  auto hyp2 = StripOptional(Words("uh"), DefaultOptionalSet());
  auto [a2, r2] = AlignAndScore(Words("uh-huh"), hyp2);
  CHECK(r2.subs == 0);
  CHECK(r2.dels == 1);
}

TEST_CASE("identity alignment has zero WER") {
  auto [alignment, report] = AlignAndScore(Words("a b c"), Words("a b c"));
  CHECK(report.Wer() == 0.0);
  CHECK(report.matches == 3);
  for (const auto& op : alignment.ops) CHECK(op.tag == OpTag::kMatch);
}

TEST_CASE("single substitution in three words is 33.333%") {
  auto [alignment, report] = AlignAndScore(Words("a b c"), Words("a x c"));
  CHECK(report.subs == 1);
  CHECK(report.Wer() == doctest::Approx(33.333).epsilon(1e-3));
}

TEST_CASE("insertion and deletion rates") {
  auto [a1, r1] = AlignAndScore(Words("a b"), Words("a b c"));
  CHECK(r1.inss == 1);
  CHECK(r1.Wer() == doctest::Approx(50.0));
  auto [a2, r2] = AlignAndScore(Words("a b c"), Words("a c"));
  CHECK(r2.dels == 1);
  CHECK(r2.Wer() == doctest::Approx(33.333).epsilon(1e-3));
}

TEST_CASE("comparison is case-insensitive") {
  auto [alignment, report] = AlignAndScore(Words("Hello World"), Words("hello world"));
  CHECK(report.Errors() == 0);
}

TEST_CASE("empty reference is rejected") {
  CHECK_THROWS_AS(AlignAndScore({}, Words("a")), EmptyReference);
}

TEST_CASE("alignment reconstructs reference and hypothesis") {
  auto ref = Words("the cat sat on the mat");
  auto hyp = Words("the cat sit on mat today");
  auto [alignment, report] = AlignAndScore(ref, hyp);
  std::vector<std::string> got_ref, got_hyp;
  for (const auto& op : alignment.ops) {
    if (!op.ref.empty()) got_ref.push_back(op.ref);
    if (!op.hyp.empty()) got_hyp.push_back(op.hyp);
  }
  CHECK(got_ref == ref);
  CHECK(got_hyp == hyp);
  CHECK(report.matches + report.subs + report.dels == static_cast<long long>(ref.size()));
  CHECK(report.matches + report.subs + report.inss == static_cast<long long>(hyp.size()));
}

TEST_CASE("alignment cost matches an independent DP oracle on random pairs") {
  Rng rng(97);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> ref, hyp;
    for (int i = 0; i < 10; ++i) ref.push_back(vocab[rng.UniformInt(vocab.size())]);
    const int hyp_len = 5 + static_cast<int>(rng.UniformInt(10));
    for (int i = 0; i < hyp_len; ++i) hyp.push_back(vocab[rng.UniformInt(vocab.size())]);
    CHECK(AlignmentCost(ref, hyp) == testing::PlainEditCost(ref, hyp, 4, 3, 3));
  }
}

TEST_CASE("WER is invariant under vocabulary renaming") {
  Rng rng(101);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  const std::vector<std::string> renamed{"w", "x", "y", "z"};
  std::map<std::string, std::string> bijection;
  for (std::size_t i = 0; i < vocab.size(); ++i) bijection[vocab[i]] = renamed[i];
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> ref, hyp;
    for (int i = 0; i < 8; ++i) ref.push_back(vocab[rng.UniformInt(4)]);
    for (int i = 0; i < 9; ++i) hyp.push_back(vocab[rng.UniformInt(4)]);
    auto [a1, r1] = AlignAndScore(ref, hyp);
    for (auto& w : ref) w = bijection[w];
    for (auto& w : hyp) w = bijection[w];
    auto [a2, r2] = AlignAndScore(ref, hyp);
    CHECK(r1.subs == r2.subs);
    CHECK(r1.dels == r2.dels);
    CHECK(r1.inss == r2.inss);
  }
}

TEST_CASE("error tables rank by count then lexicographically") {
  CorpusStats stats;
  auto add = [&](const std::string& ref, const std::string& hyp) {
    auto [alignment, report] = AlignAndScore(Words(ref), Words(hyp));
    stats.Add(alignment, report);
  };
  add("was here", "is here");
  add("was there", "is there");
  add("was it", "is it");
  add("a day", "the day");
  auto tables = TopErrors(stats, 10);
  REQUIRE(!tables.subs.empty());
  CHECK(tables.subs[0] == "3: was / is");
  CHECK(tables.subs[1] == "1: a / the");
}

TEST_CASE("no errors gives empty tables") {
  CorpusStats stats;
  auto [alignment, report] = AlignAndScore(Words("a b"), Words("a b"));
  stats.Add(alignment, report);
  auto tables = TopErrors(stats, 5);
  CHECK(tables.subs.empty());
  CHECK(tables.dels.empty());
  CHECK(tables.inss.empty());
}

TEST_CASE("error table rendering has one column group per system") {
  CorpusStats a, b;
  auto add = [](CorpusStats& stats, const std::string& ref, const std::string& hyp) {
    auto [alignment, report] = AlignAndScore(Words(ref), Words(hyp));
    stats.Add(alignment, report);
  };
  add(a, "was here", "is here");
  add(b, "a cat", "the cat");
  auto text = RenderErrorTables({{"sysA", TopErrors(a, 5)}, {"sysB", TopErrors(b, 5)}});
  CHECK(text.find("sysA") != std::string::npos);
  CHECK(text.find("sysB") != std::string::npos);
  CHECK(text.find("1: was / is") != std::string::npos);
  CHECK(text.find("1: a / the") != std::string::npos);
}

TEST_CASE("rate table has sub/del/ins/all rows") {
  ErrorReport rep;
  rep.ref_words = 100;
  rep.subs = 6;
  rep.dels = 3;
  rep.inss = 1;
  auto text = RenderRateTable({{"asr", rep}});
  CHECK(text.find("sub") != std::string::npos);
  CHECK(text.find("del") != std::string::npos);
  CHECK(text.find("ins") != std::string::npos);
  CHECK(text.find("all") != std::string::npos);
  CHECK(text.find("10.00") != std::string::npos);  // overall WER
}
