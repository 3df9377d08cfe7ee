// casr/lm.h

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

#ifndef CASR_LM_H_
#define CASR_LM_H_

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "casr/common.h"

namespace casr::lm {

inline constexpr const char* kSentEnd = "</s>";
inline constexpr const char* kSentStart = "<s>";
inline constexpr const char* kUnk = "<unk>";

using Sentence = std::vector<std::string>;
using Corpus = std::vector<Sentence>;

Corpus ReadCorpus(const std::filesystem::path& path);
void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus Reversed(const Corpus& corpus);

// Predicted vocabulary: words plus </s> (and <unk> when the model is open).
struct Vocab {
  std::vector<std::string> words;
  std::map<std::string, int> ids;

  int Size() const { return static_cast<int>(words.size()); }
  int IdOf(const std::string& w) const {
    auto it = ids.find(w);
    return it == ids.end() ? -1 : it->second;
  }
  int Add(const std::string& w);
};

// One scoring pass over a sentence; the session owns the LM state.
class LmSession {
 public:
  virtual ~LmSession() = default;
  // P(word | consumed history); consumes the word.
  virtual double ProbAndAdvance(const std::string& word) = 0;
  // P(</s> | consumed history); does not advance.
  virtual double EndProb() = 0;
};

// Uniform probability interface over (history, word).  Implementations:
// backoff N-gram and the toy recurrent LM, forward or backward.  Backward
// models expect their input pre-reversed (scoring a reversed sentence with
// the forward machinery is the definition of the backward probability).
class LanguageModelScorer {
 public:
  virtual ~LanguageModelScorer() = default;
  virtual std::unique_ptr<LmSession> NewSession() const = 0;
  virtual const Vocab& vocab() const = 0;
  // True when the word is a real in-set word (not mapped to <unk>).
  virtual bool InVocab(const std::string& w) const {
    return vocab().IdOf(w) >= 0 && w != kUnk;
  }
};

// Per-event probabilities for one sentence: one entry per token plus the
// final </s> event.  Tokens must already be in the model's scoring order.
std::vector<double> SentenceEventProbs(const LanguageModelScorer& lm,
                                       const Sentence& tokens);

struct PerplexityResult {
  double ppl = 0.0;
  double log_prob = 0.0;  // natural log, summed
  long long events = 0;
  std::vector<std::string> zero_prob_tokens;
};

// exp of mean negative log-prob per event, sentence ends included.  Tokens
// with zero probability make the perplexity infinite and are listed.
PerplexityResult Perplexity(const LanguageModelScorer& lm, const Corpus& text);

class UniformLm : public LanguageModelScorer {
 public:
  explicit UniformLm(const std::vector<std::string>& words);
  std::unique_ptr<LmSession> NewSession() const override;
  const Vocab& vocab() const override { return vocab_; }

 private:
  Vocab vocab_;
};

// ---------------------------------------------------------------------------
// Count-based backoff N-gram with Witten-Bell interpolation.  Unigrams back
// off to the uniform distribution over the closed vocabulary, so every
// conditional sums to exactly 1 over vocabulary (including </s>).
class BackoffNgram : public LanguageModelScorer {
 public:
  static BackoffNgram Train(const Corpus& corpus, int order);

  // history: most recent word last; <s> is implicit at sentence start and
  // passed as lm::kSentStart.
  double Prob(const std::vector<std::string>& history, const std::string& word) const;
  double SumOverVocab(const std::vector<std::string>& history) const;

  int order() const { return order_; }
  std::unique_ptr<LmSession> NewSession() const override;
  const Vocab& vocab() const override { return vocab_; }

  // ARPA text export (log10 like the usual toolkits) and JSON checkpoint.
  void ExportArpa(const std::filesystem::path& path) const;
  void Save(const std::filesystem::path& path) const;
  static BackoffNgram Load(const std::filesystem::path& path);

 private:
  friend class NgramSession;
  struct Context {
    std::map<int, double> probs;  // interpolated Witten-Bell, linear domain
    double bow = 1.0;
  };
  static constexpr int kBosId = -1;

  double ProbIds(std::deque<int> context, int word) const;

  int order_ = 0;
  Vocab vocab_;
  std::map<std::vector<int>, Context> contexts_;
};

// ---------------------------------------------------------------------------
// Letter-trigram input encoding: counts of character trigrams of the word
// wrapped in boundary markers.  Index 0 is the out-of-inventory bucket.
class LetterTrigramEncoder {
 public:
  static LetterTrigramEncoder Build(const std::vector<std::string>& vocabulary);

  // sparse (index, count) pairs; deterministic for equal words
  std::vector<std::pair<int, int>> Encode(const std::string& word) const;
  int Dim() const { return static_cast<int>(inventory_.size()) + 1; }

  const std::map<std::string, int>& inventory() const { return inventory_; }
  static std::vector<std::string> Trigrams(const std::string& word);

 private:
  std::map<std::string, int> inventory_;  // trigram -> index (1-based)
};

// Self-stabilizer scale 0.25 * ln(1 + e^{4 beta}), computed overflow-safely;
// strictly positive and strictly increasing in beta.
double StabilizerScale(double beta);
double StabilizerScaleGrad(double beta);  // d scale / d beta = sigmoid(4 beta)

// ---------------------------------------------------------------------------
enum class Direction { kForward, kBackward };
enum class InputEncoding { kOneHot, kLetterTrigram };

struct RnnLmConfig {
  Direction direction = Direction::kForward;
  InputEncoding encoding = InputEncoding::kOneHot;
  int embed_dim = 24;
  int hidden_dim = 24;
  int rec_layers = 1;
  bool extra_hidden_layer = false;  // second, non-recurrent hidden layer
  bool tied_embeddings = false;     // one-hot only; requires hidden == embed
  int min_count = 2;                // in-domain words occurring >= min_count

  int union_passes = 4;   // phase 1: union of in- and out-of-domain data
  double lr = 0.1;
  int max_epochs = 12;    // phase 2 cap
  double clip = 5.0;
  std::uint64_t seed = 1;
};

struct RnnTrainStats {
  double phase1_val_ppl = 0.0;
  double final_val_ppl = 0.0;
  int phase2_epochs = 0;
};

// Toy recurrent LM: embedding, tanh recurrent layer(s) each scaled by a
// learned self-stabilizer, optional non-recurrent second hidden layer, full
// softmax over vocabulary + <unk>.
class ToyRecurrentLm : public LanguageModelScorer {
 public:
  struct Layer {
    Matrix wx, wh;  // wh empty for the non-recurrent layer
    Vector b;
    double beta = 0.0;
  };

  // Two-phase training: union data for a fixed number of passes at fixed
  // learning rate, then in-domain only with a validation-driven halving
  // schedule, keeping the best-validation checkpoint.  Backward models are
  // trained on token-reversed sentences.
  static ToyRecurrentLm Train(const Corpus& in_domain, const Corpus& out_domain,
                              const Corpus& validation, const RnnLmConfig& cfg,
                              RnnTrainStats* stats = nullptr);

  std::unique_ptr<LmSession> NewSession() const override;
  const Vocab& vocab() const override { return vocab_; }

  // Distribution over the output vocabulary after consuming `prefix`.
  Vector Distribution(const Sentence& prefix) const;

  // Summed negative log-likelihood of one sentence (already reversed for
  // backward models); accumulates parameter gradients when grads != null.
  double SentenceLoss(const Sentence& tokens, ToyRecurrentLm* grads) const;

  void Save(const std::filesystem::path& path) const;
  static ToyRecurrentLm Load(const std::filesystem::path& path);

  const RnnLmConfig& config() const { return cfg_; }

  // parameters are public-ish for the trainer and gradient tests
  Matrix embed;
  std::vector<Layer> layers;  // rec_layers recurrent, then optional extra
  Matrix wout;                // unused when tied
  Vector bout;

  RnnLmConfig cfg_;
  Vocab vocab_;                         // output: words + </s> + <unk>
  LetterTrigramEncoder trigram_;        // letter-trigram mode only
  int input_dim_ = 0;

  static ToyRecurrentLm Init(const RnnLmConfig& cfg, const Vocab& vocab,
                             const LetterTrigramEncoder& encoder);
  ToyRecurrentLm ZeroClone() const;
  void ApplyUpdate(const ToyRecurrentLm& grads, double lr, double clip);

 private:
  friend class RnnSession;
  std::vector<std::pair<int, int>> EncodeInput(const std::string& token) const;
  int OutputId(const std::string& token) const;
};

// Weighted word-level interpolation of per-word probabilities in the linear
// domain; default weights (0.375, 0.375, 0.25).
struct InterpolationSpec {
  std::vector<double> weights;

  static InterpolationSpec Default3() { return {{0.375, 0.375, 0.25}}; }
  void Validate() const;
};

double InterpolateProbs(const std::vector<double>& components,
                        const InterpolationSpec& spec);

// Perplexity-vs-layer-count table, formatted like the usual LM reports.
std::string LayerSweepReport(const Corpus& in_domain, const Corpus& out_domain,
                             const Corpus& validation, const RnnLmConfig& base,
                             const std::vector<int>& layer_counts);

}  // namespace casr::lm

#endif  // CASR_LM_H_
