// casr/score.h

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

#ifndef CASR_SCORE_H_
#define CASR_SCORE_H_

#include <map>
#include <set>
#include <string>
#include <vector>

namespace casr::score {

enum class OpTag { kMatch, kSub, kDel, kIns };

struct AlignOp {
  OpTag tag;
  std::string ref;  // empty for insertions
  std::string hyp;  // empty for deletions
};

// Ref words in order reconstruct the reference; hyp words the hypothesis.
struct WordAlignment {
  std::vector<AlignOp> ops;
};

// Edit costs follow the sclite convention (sub 4, ins 3, del 3).
struct AlignCosts {
  int sub = 4;
  int ins = 3;
  int del = 3;
};

struct ErrorReport {
  long long matches = 0;
  long long subs = 0;
  long long dels = 0;
  long long inss = 0;
  long long ref_words = 0;

  long long Errors() const { return subs + dels + inss; }
  double SubRate() const { return 100.0 * subs / ref_words; }
  double DelRate() const { return 100.0 * dels / ref_words; }
  double InsRate() const { return 100.0 * inss / ref_words; }
  double Wer() const { return 100.0 * Errors() / ref_words; }
  void Accumulate(const ErrorReport& o);
};

// Hesitations are optional under the NIST protocol: they are deleted from
// the hypothesis prior to scoring.  The reference is never touched, so a
// backchannel hypothesized for a reference hesitation still scores as a
// substitution while the reverse becomes a deletion.
const std::set<std::string>& DefaultOptionalSet();   // %hesitation, uh, um
const std::set<std::string>& BackchannelSet();       // uh-huh, mhm, %bcack

std::vector<std::string> StripOptional(const std::vector<std::string>& hyp,
                                       const std::set<std::string>& optional_set);

// Minimum-edit-distance alignment with deterministic tie-breaking
// (match, then del, then ins, then sub).  Words compare case-insensitively.
// Throws EmptyReference when ref is empty.
std::pair<WordAlignment, ErrorReport> AlignAndScore(
    const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
    const AlignCosts& costs = {});

// Minimal DP cost only; used for cross-checks.
long long AlignmentCost(const std::vector<std::string>& ref,
                        const std::vector<std::string>& hyp,
                        const AlignCosts& costs = {});

// Corpus-wide error tallies feeding the error-analysis tables.
struct CorpusStats {
  ErrorReport totals;
  std::map<std::pair<std::string, std::string>, long long> sub_pairs;
  std::map<std::string, long long> del_words;
  std::map<std::string, long long> ins_words;

  void Add(const WordAlignment& alignment, const ErrorReport& report);
};

struct ErrorTables {
  // formatted "count: ref / hyp" for substitutions, "count: word" otherwise
  std::vector<std::string> subs;
  std::vector<std::string> dels;
  std::vector<std::string> inss;
};

// Top-k lists, descending count, ties lexicographic.
ErrorTables TopErrors(const CorpusStats& stats, int k);

// Side-by-side text rendering, one column group per labelled input.
std::string RenderErrorTables(
    const std::vector<std::pair<std::string, ErrorTables>>& columns);

// Overall sub/del/ins/all table, one column per labelled report.
std::string RenderRateTable(
    const std::vector<std::pair<std::string, ErrorReport>>& columns);

}  // namespace casr::score

#endif  // CASR_SCORE_H_
