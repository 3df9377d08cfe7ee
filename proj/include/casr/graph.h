// casr/graph.h

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

#ifndef CASR_GRAPH_H_
#define CASR_GRAPH_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "casr/common.h"

namespace casr::graph {

constexpr int kNoPhone = -1;

// Senone and phone inventories.  Senone ids are dense ints; names are the
// external string ids used in alignment and senone-table files.
struct SenoneInventory {
  std::vector<std::string> senone_names;
  std::vector<std::string> phone_names;
  std::vector<int> phone_of;  // senone id -> phone id

  int NumSenones() const { return static_cast<int>(senone_names.size()); }
  int NumPhones() const { return static_cast<int>(phone_names.size()); }
  int SenoneId(const std::string& name) const;    // throws UnknownSenone
  int PhoneIdOrAdd(const std::string& name);
  int SenoneIdOrAdd(const std::string& senone, const std::string& phone);

 private:
  std::map<std::string, int> senone_ids_;
  std::map<std::string, int> phone_ids_;
};

// One frame-aligned training utterance: one senone id per 10 ms frame.
struct SenoneAlignment {
  std::string utt_id;
  std::vector<int> frames;
};

// Run-length collapsed alignment; adjacent entries always differ.
struct CompressedSequence {
  std::string utt_id;
  std::vector<int> runs;
};

// LM history: the previous phone plus the senones seen so far within the
// current phone (at most states_per_phone of them).
struct MixedHistory {
  int prev_phone = kNoPhone;
  std::vector<int> senones;

  bool operator==(const MixedHistory& o) const {
    return prev_phone == o.prev_phone && senones == o.senones;
  }
  bool operator<(const MixedHistory& o) const {
    if (prev_phone != o.prev_phone) return prev_phone < o.prev_phone;
    return senones < o.senones;
  }
  int LastSenone() const { return senones.empty() ? -1 : senones.back(); }
};

// Unsmoothed variable-length senone LM over mixed phone/senone histories.
// Conditional probabilities are exact ratios of observed counts.
// phone_marginals aggregates counts per previous-phone only; it is used to
// give dead-end histories (those only ever observed utterance-finally) a
// continuation when the denominator graph is built.
struct MixedHistoryLm {
  int states_per_phone = 3;
  std::vector<int> phone_of;  // senone id -> phone id
  std::map<MixedHistory, std::map<int, double>> table;
  std::map<MixedHistory, std::map<int, long long>> counts;
  std::map<int, std::map<int, double>> phone_marginals;  // prev_phone -> dist

  // State transition of the history automaton: consume senone s from h.
  MixedHistory NextState(const MixedHistory& h, int senone) const;
};

// Per-senone HMM self-loop / exit probabilities from transition counting.
struct TransitionModel {
  std::vector<long long> self_counts;
  std::vector<long long> exit_counts;
  std::vector<double> self_loop_prob;
  std::vector<double> exit_prob;

  int NumSenones() const { return static_cast<int>(self_loop_prob.size()); }
  bool Covers(int senone) const {
    return senone >= 0 && senone < NumSenones() &&
           self_counts[senone] + exit_counts[senone] > 0;
  }
};

// Sparse weighted acceptor over senones.  States are LM histories; arcs
// carry a senone label and a natural-log probability.  Self-loops are arcs
// with dst == src.  Every state is final with log-weight 0.
struct DenominatorGraph {
  struct Arc {
    int dst;
    int senone;
    double logprob;
  };

  int num_states = 0;
  int start_state = 0;
  int num_senones = 0;
  std::vector<int> row_offsets;  // CSR over src state, size num_states + 1
  std::vector<Arc> arcs;
  std::vector<double> final_logweight;

  std::span<const Arc> ArcsFrom(int state) const {
    return {arcs.data() + row_offsets[state],
            arcs.data() + row_offsets[state + 1]};
  }
  int NumArcs() const { return static_cast<int>(arcs.size()); }

  // Direct construction, mainly for tests and tools.  Arcs are triplets
  // (src, dst, senone, logprob).
  static DenominatorGraph FromArcs(
      int num_states, int start_state, int num_senones,
      const std::vector<std::tuple<int, int, int, double>>& arc_list);

  // log-sum-exp of all outgoing arcs per state; 0 for a stochastic state.
  double MaxStochasticityGap() const;
};

// Run-length collapse.  Throws EmptyInput on an empty alignment.
CompressedSequence CompressSenones(const SenoneAlignment& alignment);

// Estimates the unsmoothed mixed-history senone LM.  phone_of maps senone
// id -> phone id; senones outside it throw UnknownSenone.
MixedHistoryLm EstimateMixedHistoryLm(const std::vector<CompressedSequence>& sequences,
                                      const std::vector<int>& phone_of,
                                      int states_per_phone = 3);

// Transition counting over frame-level alignments.  Every run of a senone
// contributes run_length-1 self transitions and one exit (utterance end
// counts as an exit).
TransitionModel CountTransitions(const std::vector<SenoneAlignment>& alignments,
                                 int num_senones);

// Builds the denominator graph: one state per distinct history, arcs realize
// LM transitions weighted by LM log-prob plus HMM exit log-prob, self-loops
// carry the HMM self-loop log-prob.  Histories with no observed successors
// fall back to the phone-level marginal, then to the start distribution.
DenominatorGraph BuildDenominatorGraph(const MixedHistoryLm& lm,
                                       const TransitionModel& tm);

// File formats (see README): alignments are "utt_id senone senone ...",
// the senone table is "senone_id phone_id" pairs, the graph dump is a
// header "num_states start_state" followed by "src dst senone logprob".
SenoneInventory ReadSenoneTable(const std::filesystem::path& path);
std::vector<SenoneAlignment> ReadAlignments(const std::filesystem::path& path,
                                            const SenoneInventory& inventory);
void WriteGraph(const std::filesystem::path& path, const DenominatorGraph& g,
                const SenoneInventory& inventory);

}  // namespace casr::graph

#endif  // CASR_GRAPH_H_
