// casr/score.cc

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

#include <algorithm>
#include <sstream>

#include "casr/common.h"
#include "casr/error.h"

namespace casr::score {

void ErrorReport::Accumulate(const ErrorReport& o) {
  matches += o.matches;
  subs += o.subs;
  dels += o.dels;
  inss += o.inss;
  ref_words += o.ref_words;
}

const std::set<std::string>& DefaultOptionalSet() {
  static const std::set<std::string> kSet = {"%hesitation", "uh", "um"};
  return kSet;
}

const std::set<std::string>& BackchannelSet() {
  static const std::set<std::string> kSet = {"uh-huh", "mhm", "%bcack"};
  return kSet;
}

std::vector<std::string> StripOptional(const std::vector<std::string>& hyp,
                                       const std::set<std::string>& optional_set) {
  std::vector<std::string> out;
  for (const auto& w : hyp)
    if (!optional_set.count(Lowercase(w))) out.push_back(w);
  return out;
}

namespace {

std::vector<std::string> LowerAll(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(Lowercase(w));
  return out;
}

}  // namespace

std::pair<WordAlignment, ErrorReport> AlignAndScore(
    const std::vector<std::string>& ref_in, const std::vector<std::string>& hyp_in,
    const AlignCosts& costs) {
  if (ref_in.empty()) throw EmptyReference("reference is empty");
  const auto ref = LowerAll(ref_in);
  const auto hyp = LowerAll(hyp_in);
  const int m = static_cast<int>(ref.size());
  const int n = static_cast<int>(hyp.size());

  std::vector<std::vector<long long>> d(m + 1, std::vector<long long>(n + 1));
  for (int i = 0; i <= m; ++i) d[i][0] = static_cast<long long>(i) * costs.del;
  for (int j = 0; j <= n; ++j) d[0][j] = static_cast<long long>(j) * costs.ins;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      const long long diag =
          d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : costs.sub);
      const long long up = d[i - 1][j] + costs.del;
      const long long left = d[i][j - 1] + costs.ins;
      d[i][j] = std::min({diag, up, left});
    }
  }

  // backtrace; tie preference: match, del, ins, sub
  WordAlignment alignment;
  ErrorReport report;
  report.ref_words = m;
  int i = m, j = n;
  std::vector<AlignOp> rev;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        d[i][j] == d[i - 1][j - 1]) {
      rev.push_back({OpTag::kMatch, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + costs.del) {
      rev.push_back({OpTag::kDel, ref[i - 1], ""});
      --i;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + costs.ins) {
      rev.push_back({OpTag::kIns, "", hyp[j - 1]});
      --j;
    } else {
      rev.push_back({OpTag::kSub, ref[i - 1], hyp[j - 1]});
      --i, --j;
    }
  }
  alignment.ops.assign(rev.rbegin(), rev.rend());
  for (const auto& op : alignment.ops) {
    switch (op.tag) {
      case OpTag::kMatch: ++report.matches; break;
      case OpTag::kSub: ++report.subs; break;
      case OpTag::kDel: ++report.dels; break;
      case OpTag::kIns: ++report.inss; break;
    }
  }
  return {std::move(alignment), report};
}

long long AlignmentCost(const std::vector<std::string>& ref,
                        const std::vector<std::string>& hyp,
                        const AlignCosts& costs) {
  auto [alignment, report] = AlignAndScore(ref, hyp, costs);
  return report.subs * costs.sub + report.dels * costs.del +
         report.inss * costs.ins;
}

void CorpusStats::Add(const WordAlignment& alignment, const ErrorReport& report) {
  totals.Accumulate(report);
  for (const auto& op : alignment.ops) {
    switch (op.tag) {
      case OpTag::kMatch: break;
      case OpTag::kSub: sub_pairs[{op.ref, op.hyp}] += 1; break;
      case OpTag::kDel: del_words[op.ref] += 1; break;
      case OpTag::kIns: ins_words[op.hyp] += 1; break;
    }
  }
}

namespace {

template <typename Map, typename Fmt>
std::vector<std::string> TopK(const Map& counts, int k, Fmt fmt) {
  using Entry = typename Map::value_type;
  std::vector<const Entry*> entries;
  for (const auto& e : counts) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](const Entry* a, const Entry* b) {
    if (a->second != b->second) return a->second > b->second;
    return a->first < b->first;
  });
  std::vector<std::string> out;
  for (int i = 0; i < k && i < static_cast<int>(entries.size()); ++i)
    out.push_back(fmt(*entries[i]));
  return out;
}

}  // namespace

ErrorTables TopErrors(const CorpusStats& stats, int k) {
  ErrorTables t;
  t.subs = TopK(stats.sub_pairs, k, [](const auto& e) {
    return std::to_string(e.second) + ": " + e.first.first + " / " + e.first.second;
  });
  t.dels = TopK(stats.del_words, k, [](const auto& e) {
    return std::to_string(e.second) + ": " + e.first;
  });
  t.inss = TopK(stats.ins_words, k, [](const auto& e) {
    return std::to_string(e.second) + ": " + e.first;
  });
  return t;
}

namespace {

std::string RenderSection(
    const std::string& title,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& cols) {
  constexpr int kWidth = 28;
  std::ostringstream os;
  os << title << "\n";
  for (const auto& [name, _] : cols)
    os << StrPrintf("%-*s", kWidth, name.c_str());
  os << "\n";
  std::size_t rows = 0;
  for (const auto& [_, lines] : cols) rows = std::max(rows, lines.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& [_, lines] : cols) {
      const std::string cell = r < lines.size() ? lines[r] : "";
      os << StrPrintf("%-*s", kWidth, cell.c_str());
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string RenderErrorTables(
    const std::vector<std::pair<std::string, ErrorTables>>& columns) {
  std::ostringstream os;
  std::vector<std::pair<std::string, std::vector<std::string>>> sub_cols, del_cols, ins_cols;
  for (const auto& [name, t] : columns) {
    sub_cols.emplace_back(name, t.subs);
    del_cols.emplace_back(name, t.dels);
    ins_cols.emplace_back(name, t.inss);
  }
  os << RenderSection("Most common substitutions (count: reference / hypothesis)", sub_cols)
     << "\n"
     << RenderSection("Most common deletions", del_cols) << "\n"
     << RenderSection("Most common insertions", ins_cols);
  return os.str();
}

std::string RenderRateTable(
    const std::vector<std::pair<std::string, ErrorReport>>& columns) {
  std::ostringstream os;
  os << StrPrintf("%-6s", "");
  for (const auto& [name, _] : columns) os << StrPrintf("%12s", name.c_str());
  os << "\n";
  auto row = [&](const char* label, auto getter) {
    os << StrPrintf("%-6s", label);
    for (const auto& [_, rep] : columns) os << StrPrintf("%12.2f", getter(rep));
    os << "\n";
  };
  row("sub", [](const ErrorReport& r) { return r.SubRate(); });
  row("del", [](const ErrorReport& r) { return r.DelRate(); });
  row("ins", [](const ErrorReport& r) { return r.InsRate(); });
  row("all", [](const ErrorReport& r) { return r.Wer(); });
  return os.str();
}

}  // namespace casr::score
