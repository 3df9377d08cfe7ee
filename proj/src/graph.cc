// casr/graph.cc

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

#include "casr/graph.h"

#include <algorithm>
#include <deque>
#include <sstream>

#include "casr/error.h"
#include "casr/io.h"

namespace casr::graph {

int SenoneInventory::SenoneId(const std::string& name) const {
  auto it = senone_ids_.find(name);
  if (it == senone_ids_.end()) throw UnknownSenone("senone '" + name + "' not in inventory");
  return it->second;
}

int SenoneInventory::PhoneIdOrAdd(const std::string& name) {
  auto it = phone_ids_.find(name);
  if (it != phone_ids_.end()) return it->second;
  int id = NumPhones();
  phone_ids_[name] = id;
  phone_names.push_back(name);
  return id;
}

int SenoneInventory::SenoneIdOrAdd(const std::string& senone, const std::string& phone) {
  auto it = senone_ids_.find(senone);
  if (it != senone_ids_.end()) return it->second;
  int id = NumSenones();
  senone_ids_[senone] = id;
  senone_names.push_back(senone);
  phone_of.push_back(PhoneIdOrAdd(phone));
  return id;
}

CompressedSequence CompressSenones(const SenoneAlignment& alignment) {
  if (alignment.frames.empty())
    throw EmptyInput("alignment '" + alignment.utt_id + "' has no frames");
  CompressedSequence out;
  out.utt_id = alignment.utt_id;
  for (int s : alignment.frames)
    if (out.runs.empty() || out.runs.back() != s) out.runs.push_back(s);
  return out;
}

MixedHistory MixedHistoryLm::NextState(const MixedHistory& h, int senone) const {
  const int new_phone = phone_of[senone];
  MixedHistory next;
  if (h.senones.empty()) {
    // start of utterance, or a phone-level fallback state
    next.prev_phone = h.prev_phone;
    next.senones = {senone};
    return next;
  }
  const int cur_phone = phone_of[h.senones.back()];
  if (new_phone == cur_phone &&
      static_cast<int>(h.senones.size()) < states_per_phone) {
    next.prev_phone = h.prev_phone;
    next.senones = h.senones;
    next.senones.push_back(senone);
  } else {
    // phone boundary: the senone component resets, the finished phone
    // becomes the previous phone
    next.prev_phone = cur_phone;
    next.senones = {senone};
  }
  return next;
}

MixedHistoryLm EstimateMixedHistoryLm(const std::vector<CompressedSequence>& sequences,
                                      const std::vector<int>& phone_of,
                                      int states_per_phone) {
  if (sequences.empty()) throw EmptyInput("no sequences for LM estimation");
  MixedHistoryLm lm;
  lm.states_per_phone = states_per_phone;
  lm.phone_of = phone_of;
  for (const auto& seq : sequences) {
    MixedHistory h;  // (no phone, empty)
    for (int s : seq.runs) {
      if (s < 0 || s >= static_cast<int>(phone_of.size()))
        throw UnknownSenone("senone id " + std::to_string(s) + " has no phone mapping");
      lm.counts[h][s] += 1;
      h = lm.NextState(h, s);
    }
  }
  for (const auto& [h, succ] : lm.counts) {
    long long total = 0;
    for (const auto& [s, c] : succ) total += c;
    auto& dist = lm.table[h];
    auto& marginal = lm.phone_marginals[h.prev_phone];
    for (const auto& [s, c] : succ) {
      dist[s] = static_cast<double>(c) / static_cast<double>(total);
      marginal[s] += static_cast<double>(c);
    }
  }
  for (auto& [phone, marginal] : lm.phone_marginals) {
    double total = 0;
    for (const auto& [s, c] : marginal) total += c;
    for (auto& [s, c] : marginal) c /= total;
  }
  return lm;
}

TransitionModel CountTransitions(const std::vector<SenoneAlignment>& alignments,
                                 int num_senones) {
  TransitionModel tm;
  tm.self_counts.assign(num_senones, 0);
  tm.exit_counts.assign(num_senones, 0);
  for (const auto& a : alignments) {
    const auto& f = a.frames;
    for (std::size_t t = 0; t < f.size(); ++t) {
      if (f[t] < 0 || f[t] >= num_senones)
        throw UnknownSenone("alignment senone id out of range in " + a.utt_id);
      if (t + 1 < f.size() && f[t + 1] == f[t])
        tm.self_counts[f[t]] += 1;
      else
        tm.exit_counts[f[t]] += 1;  // run ends here (utterance end included)
    }
  }
  tm.self_loop_prob.assign(num_senones, 0.0);
  tm.exit_prob.assign(num_senones, 0.0);
  for (int s = 0; s < num_senones; ++s) {
    const long long n = tm.self_counts[s] + tm.exit_counts[s];
    if (n == 0) continue;
    tm.self_loop_prob[s] = static_cast<double>(tm.self_counts[s]) / static_cast<double>(n);
    tm.exit_prob[s] = static_cast<double>(tm.exit_counts[s]) / static_cast<double>(n);
  }
  return tm;
}

namespace {

struct GraphBuilder {
  const MixedHistoryLm& lm;
  const TransitionModel& tm;
  std::map<MixedHistory, int> state_ids;
  std::deque<MixedHistory> worklist;
  std::vector<std::vector<DenominatorGraph::Arc>> out_arcs;

  int StateId(const MixedHistory& h) {
    auto it = state_ids.find(h);
    if (it != state_ids.end()) return it->second;
    int id = static_cast<int>(state_ids.size());
    state_ids[h] = id;
    out_arcs.emplace_back();
    worklist.push_back(h);
    return id;
  }

  // Distribution a state continues with: its own observed successors, else
  // the previous-phone marginal, else the start-of-utterance distribution.
  std::pair<const std::map<int, double>*, const MixedHistory*> Owner(const MixedHistory& h) {
    static const MixedHistory kStart{};
    auto it = lm.table.find(h);
    if (it != lm.table.end()) return {&it->second, &it->first};
    auto ph = lm.phone_marginals.find(h.prev_phone);
    if (ph != lm.phone_marginals.end() && !ph->second.empty()) {
      auto owner_it = owner_cache.emplace(h.prev_phone, MixedHistory{h.prev_phone, {}}).first;
      return {&ph->second, &owner_it->second};
    }
    auto start_it = lm.table.find(kStart);
    if (start_it == lm.table.end())
      throw EmptyInput("mixed-history LM has no start distribution");
    return {&start_it->second, &start_it->first};
  }

  std::map<int, MixedHistory> owner_cache;
};

}  // namespace

DenominatorGraph BuildDenominatorGraph(const MixedHistoryLm& lm,
                                       const TransitionModel& tm) {
  if (lm.table.empty()) throw EmptyInput("mixed-history LM is empty");
  for (const auto& [h, dist] : lm.table)
    for (const auto& [s, p] : dist)
      if (!tm.Covers(s))
        throw IncompleteTransitionModel("senone id " + std::to_string(s) +
                                        " missing from transition model");

  GraphBuilder b{lm, tm};
  MixedHistory start;
  b.StateId(start);
  while (!b.worklist.empty()) {
    MixedHistory h = b.worklist.front();
    b.worklist.pop_front();
    const int src = b.state_ids.at(h);
    const int in_senone = h.LastSenone();

    double log_exit = 0.0;
    if (in_senone >= 0) {
      if (tm.self_loop_prob[in_senone] > 0.0)
        b.out_arcs[src].push_back(
            {src, in_senone, std::log(tm.self_loop_prob[in_senone])});
      log_exit = std::log(tm.exit_prob[in_senone]);
    }

    auto [dist, owner] = b.Owner(h);
    for (const auto& [s, p] : *dist) {
      if (p <= 0.0) continue;
      MixedHistory dst_h = lm.NextState(*owner, s);
      const int dst = b.StateId(dst_h);
      b.out_arcs[src].push_back({dst, s, log_exit + std::log(p)});
    }
  }

  DenominatorGraph g;
  g.num_states = static_cast<int>(b.state_ids.size());
  g.start_state = 0;
  g.num_senones = static_cast<int>(lm.phone_of.size());
  g.row_offsets.assign(g.num_states + 1, 0);
  for (int u = 0; u < g.num_states; ++u)
    g.row_offsets[u + 1] = g.row_offsets[u] + static_cast<int>(b.out_arcs[u].size());
  g.arcs.reserve(g.row_offsets.back());
  for (int u = 0; u < g.num_states; ++u)
    for (const auto& arc : b.out_arcs[u]) g.arcs.push_back(arc);
  g.final_logweight.assign(g.num_states, 0.0);
  return g;
}

DenominatorGraph DenominatorGraph::FromArcs(
    int num_states, int start_state, int num_senones,
    const std::vector<std::tuple<int, int, int, double>>& arc_list) {
  DenominatorGraph g;
  g.num_states = num_states;
  g.start_state = start_state;
  g.num_senones = num_senones;
  std::vector<std::vector<Arc>> rows(num_states);
  for (const auto& [src, dst, senone, lp] : arc_list)
    rows[src].push_back({dst, senone, lp});
  g.row_offsets.assign(num_states + 1, 0);
  for (int u = 0; u < num_states; ++u)
    g.row_offsets[u + 1] = g.row_offsets[u] + static_cast<int>(rows[u].size());
  for (int u = 0; u < num_states; ++u)
    for (const auto& a : rows[u]) g.arcs.push_back(a);
  g.final_logweight.assign(num_states, 0.0);
  return g;
}

double DenominatorGraph::MaxStochasticityGap() const {
  double worst = 0.0;
  for (int u = 0; u < num_states; ++u) {
    std::vector<double> lps;
    for (const auto& a : ArcsFrom(u)) lps.push_back(a.logprob);
    if (lps.empty()) continue;
    worst = std::max(worst, std::abs(LogSumExp(lps)));
  }
  return worst;
}

SenoneInventory ReadSenoneTable(const std::filesystem::path& path) {
  SenoneInventory inv;
  for (const auto& line : ReadLines(path)) {
    auto toks = SplitWhitespace(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw IoError("bad senone table line: " + line);
    inv.SenoneIdOrAdd(toks[0], toks[1]);
  }
  return inv;
}

std::vector<SenoneAlignment> ReadAlignments(const std::filesystem::path& path,
                                            const SenoneInventory& inventory) {
  std::vector<SenoneAlignment> out;
  for (const auto& line : ReadLines(path)) {
    auto toks = SplitWhitespace(line);
    if (toks.empty()) continue;
    SenoneAlignment a;
    a.utt_id = toks[0];
    for (std::size_t i = 1; i < toks.size(); ++i)
      a.frames.push_back(inventory.SenoneId(toks[i]));
    out.push_back(std::move(a));
  }
  return out;
}

void WriteGraph(const std::filesystem::path& path, const DenominatorGraph& g,
                const SenoneInventory& inventory) {
  std::ostringstream os;
  os << g.num_states << " " << g.start_state << "\n";
  for (int u = 0; u < g.num_states; ++u)
    for (const auto& a : g.ArcsFrom(u))
      os << u << " " << a.dst << " " << inventory.senone_names.at(a.senone)
         << " " << FormatG17(a.logprob) << "\n";
  WriteStringToFile(path, os.str());
}

}  // namespace casr::graph
