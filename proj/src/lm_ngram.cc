// casr/lm_ngram.cc

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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "casr/error.h"
#include "casr/io.h"
#include "casr/lm.h"
#include "json.hpp"

namespace casr::lm {

Corpus ReadCorpus(const std::filesystem::path& path) {
  Corpus corpus;
  for (const auto& line : ReadLines(path)) {
    auto toks = SplitWhitespace(line);
    if (!toks.empty()) corpus.push_back(std::move(toks));
  }
  return corpus;
}

void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream os;
  for (const auto& sentence : corpus) os << Join(sentence, " ") << "\n";
  WriteStringToFile(path, os.str());
}

Corpus Reversed(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& s : out) std::reverse(s.begin(), s.end());
  return out;
}

int Vocab::Add(const std::string& w) {
  auto it = ids.find(w);
  if (it != ids.end()) return it->second;
  const int id = Size();
  ids[w] = id;
  words.push_back(w);
  return id;
}

std::vector<double> SentenceEventProbs(const LanguageModelScorer& lm,
                                       const Sentence& tokens) {
  auto session = lm.NewSession();
  std::vector<double> probs;
  probs.reserve(tokens.size() + 1);
  for (const auto& tok : tokens) probs.push_back(session->ProbAndAdvance(tok));
  probs.push_back(session->EndProb());
  return probs;
}

PerplexityResult Perplexity(const LanguageModelScorer& lm, const Corpus& text) {
  if (text.empty()) throw EmptyInput("no text for perplexity");
  PerplexityResult res;
  for (const auto& sentence : text) {
    auto probs = SentenceEventProbs(lm, sentence);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      res.events += 1;
      if (probs[i] <= 0.0) {
        res.zero_prob_tokens.push_back(i < sentence.size() ? sentence[i]
                                                           : std::string(kSentEnd));
        res.log_prob = kLogZero;
      } else if (res.log_prob != kLogZero) {
        res.log_prob += std::log(probs[i]);
      }
    }
  }
  res.ppl = res.log_prob == kLogZero
                ? std::numeric_limits<double>::infinity()
                : std::exp(-res.log_prob / static_cast<double>(res.events));
  return res;
}

namespace {

class UniformSession : public LmSession {
 public:
  explicit UniformSession(double p) : p_(p) {}
  double ProbAndAdvance(const std::string&) override { return p_; }
  double EndProb() override { return p_; }

 private:
  double p_;
};

}  // namespace

UniformLm::UniformLm(const std::vector<std::string>& words) {
  for (const auto& w : words) vocab_.Add(w);
  if (vocab_.IdOf(kSentEnd) < 0) vocab_.Add(kSentEnd);
}

std::unique_ptr<LmSession> UniformLm::NewSession() const {
  return std::make_unique<UniformSession>(1.0 / vocab_.Size());
}

// ---------------------------------------------------------------------------

BackoffNgram BackoffNgram::Train(const Corpus& corpus, int order) {
  if (corpus.empty()) throw EmptyInput("empty corpus for N-gram training");
  if (order < 1) throw InvalidConfig("N-gram order must be >= 1");
  BackoffNgram lm;
  lm.order_ = order;
  for (const auto& sentence : corpus)
    for (const auto& w : sentence) lm.vocab_.Add(w);
  lm.vocab_.Add(kSentEnd);

  // raw counts per context length 0..order-1
  std::map<std::vector<int>, std::map<int, long long>> counts;
  for (const auto& sentence : corpus) {
    std::vector<int> hist{kBosId};
    auto count_token = [&](int id) {
      for (int len = 0; len <= std::min<int>(order - 1, static_cast<int>(hist.size()));
           ++len) {
        std::vector<int> ctx(hist.end() - len, hist.end());
        counts[ctx][id] += 1;
      }
      hist.push_back(id);
    };
    for (const auto& w : sentence) count_token(lm.vocab_.IdOf(w));
    count_token(lm.vocab_.IdOf(kSentEnd));
  }

  // Witten-Bell, interpolated, materialized bottom-up so lower orders exist
  // when the higher ones are built.
  std::vector<std::vector<int>> contexts_by_len;
  for (const auto& [ctx, succ] : counts) contexts_by_len.push_back(ctx);
  std::stable_sort(contexts_by_len.begin(), contexts_by_len.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  const double uniform = 1.0 / lm.vocab_.Size();
  for (const auto& ctx : contexts_by_len) {
    const auto& succ = counts.at(ctx);
    long long total = 0;
    for (const auto& [w, c] : succ) total += c;
    const double distinct = static_cast<double>(succ.size());
    const double denom = static_cast<double>(total) + distinct;
    Context node;
    node.bow = distinct / denom;
    const std::vector<int> shorter(ctx.empty() ? ctx
                                               : std::vector<int>(ctx.begin() + 1, ctx.end()));
    for (const auto& [w, c] : succ) {
      double lower;
      if (ctx.empty())
        lower = uniform;
      else
        lower = lm.ProbIds(std::deque<int>(shorter.begin(), shorter.end()), w);
      node.probs[w] = static_cast<double>(c) / denom + node.bow * lower;
    }
    lm.contexts_[ctx] = std::move(node);
  }
  return lm;
}

double BackoffNgram::ProbIds(std::deque<int> context, int word) const {
  while (static_cast<int>(context.size()) > order_ - 1) context.pop_front();
  for (;;) {
    auto it = contexts_.find(std::vector<int>(context.begin(), context.end()));
    if (it == contexts_.end()) {
      // unseen context carries no explicit mass; drop the oldest word
      if (context.empty()) return 0.0;
      context.pop_front();
      continue;
    }
    auto p = it->second.probs.find(word);
    if (p != it->second.probs.end()) return p->second;
    if (context.empty())
      return word >= 0 && word < vocab_.Size() ? it->second.bow / vocab_.Size() : 0.0;
    context.pop_front();
    return it->second.bow * ProbIds(std::move(context), word);
  }
}

double BackoffNgram::Prob(const std::vector<std::string>& history,
                          const std::string& word) const {
  std::deque<int> ctx;
  for (const auto& h : history) {
    if (h == kSentStart) {
      ctx.push_back(kBosId);
    } else {
      const int id = vocab_.IdOf(h);
      ctx.push_back(id >= 0 ? id : -2);  // -2: unknown history word
    }
  }
  const int id = vocab_.IdOf(word);
  if (id < 0) return 0.0;
  return ProbIds(std::move(ctx), id);
}

double BackoffNgram::SumOverVocab(const std::vector<std::string>& history) const {
  double sum = 0.0;
  for (const auto& w : vocab_.words) sum += Prob(history, w);
  return sum;
}

namespace {

class NgramSession : public LmSession {
 public:
  explicit NgramSession(const BackoffNgram& lm) : lm_(lm) {
    history_.push_back(kSentStart);
  }
  double ProbAndAdvance(const std::string& word) override {
    const double p = lm_.Prob(history_, word);
    history_.push_back(word);
    while (static_cast<int>(history_.size()) > lm_.order() - 1)
      history_.erase(history_.begin());
    return p;
  }
  double EndProb() override { return lm_.Prob(history_, kSentEnd); }

 private:
  const BackoffNgram& lm_;
  std::vector<std::string> history_;
};

}  // namespace

std::unique_ptr<LmSession> BackoffNgram::NewSession() const {
  return std::make_unique<NgramSession>(*this);
}

namespace {

std::string IdName(const BackoffNgram& lm, int id) {
  return id == -1 ? kSentStart : lm.vocab().words.at(id);
}

double Log10Floor(double p) {
  return p > 0 ? std::log10(p) : -99.0;
}

}  // namespace

void BackoffNgram::ExportArpa(const std::filesystem::path& path) const {
  // group seen n-grams by order
  std::map<int, std::vector<std::pair<std::vector<int>, int>>> ngrams;
  for (const auto& [ctx, node] : contexts_)
    for (const auto& [w, p] : node.probs)
      ngrams[static_cast<int>(ctx.size()) + 1].push_back({ctx, w});
  // <s> itself is listed as a unigram with no probability mass
  std::ostringstream os;
  os << "\\data\\\n";
  for (int n = 1; n <= order_; ++n) {
    std::size_t count = ngrams.count(n) ? ngrams[n].size() : 0;
    if (n == 1) count += 1;  // <s>
    os << "ngram " << n << "=" << count << "\n";
  }
  for (int n = 1; n <= order_; ++n) {
    os << "\n\\" << n << "-grams:\n";
    if (n == 1) {
      std::vector<int> bos_ctx{kBosId};
      auto it = contexts_.find(bos_ctx);
      os << "-99\t" << kSentStart;
      if (n < order_ && it != contexts_.end())
        os << "\t" << FormatG17(Log10Floor(it->second.bow));
      os << "\n";
    }
    if (!ngrams.count(n)) continue;
    for (const auto& [ctx, w] : ngrams[n]) {
      const auto& node = contexts_.at(ctx);
      os << FormatG17(Log10Floor(node.probs.at(w))) << "\t";
      for (int id : ctx) os << IdName(*this, id) << " ";
      os << vocab_.words.at(w);
      if (n < order_) {
        std::vector<int> as_ctx = ctx;
        as_ctx.push_back(w);
        auto it = contexts_.find(as_ctx);
        if (it != contexts_.end())
          os << "\t" << FormatG17(Log10Floor(it->second.bow));
      }
      os << "\n";
    }
  }
  os << "\n\\end\\\n";
  WriteStringToFile(path, os.str());
}

void BackoffNgram::Save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = "casr-ngram";
  j["version"] = 1;
  j["order"] = order_;
  j["vocab"] = vocab_.words;
  nlohmann::json ctxs = nlohmann::json::array();
  for (const auto& [ctx, node] : contexts_) {
    nlohmann::json e;
    e["ctx"] = ctx;
    e["bow"] = node.bow;
    nlohmann::json probs = nlohmann::json::array();
    for (const auto& [w, p] : node.probs) probs.push_back({w, p});
    e["probs"] = std::move(probs);
    ctxs.push_back(std::move(e));
  }
  j["contexts"] = std::move(ctxs);
  WriteStringToFile(path, j.dump());
}

BackoffNgram BackoffNgram::Load(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(ReadFileToString(path));
  if (j.value("format", "") != "casr-ngram")
    throw IoError("not an N-gram checkpoint: " + path.string());
  BackoffNgram lm;
  lm.order_ = j["order"].get<int>();
  for (const auto& w : j["vocab"]) lm.vocab_.Add(w.get<std::string>());
  for (const auto& e : j["contexts"]) {
    Context node;
    node.bow = e["bow"].get<double>();
    for (const auto& p : e["probs"]) node.probs[p[0].get<int>()] = p[1].get<double>();
    lm.contexts_[e["ctx"].get<std::vector<int>>()] = std::move(node);
  }
  return lm;
}

void InterpolationSpec::Validate() const {
  if (weights.empty()) throw InvalidConfig("no interpolation weights");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidConfig("interpolation weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidConfig("interpolation weights must sum to 1");
}

double InterpolateProbs(const std::vector<double>& components,
                        const InterpolationSpec& spec) {
  spec.Validate();
  if (components.size() != spec.weights.size())
    throw InvalidConfig("component/weight count mismatch");
  double p = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i)
    p += spec.weights[i] * components[i];
  return p;
}

}  // namespace casr::lm
