// casr/seqtrain.h

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

#ifndef CASR_SEQTRAIN_H_
#define CASR_SEQTRAIN_H_

#include <string>
#include <vector>

#include "casr/common.h"
#include "casr/graph.h"

namespace casr::seqtrain {

// Per-utterance T x S matrix of acoustic log-scores (frames x senones),
// natural log, double precision.
struct LogLikeMatrix {
  std::string utt_id;
  Matrix values;

  int NumFrames() const { return static_cast<int>(values.rows()); }
  int NumSenones() const { return static_cast<int>(values.cols()); }
};

// Forced alignment used as the MMI numerator: one senone per frame.
struct NumeratorSupervision {
  std::vector<int> frames;
};

struct ForwardBackwardResult {
  double log_prob = kLogZero;  // log-sum over final states
  Matrix posteriors;           // T x S, rows sum to 1
};

struct MmiResult {
  double objective = 0.0;   // num_logprob - den_logprob (+ CE term if any)
  double num_logprob = 0.0;
  double den_logprob = 0.0;
  Matrix gradient;          // T x S, d objective / d loglikes
};

// Alpha-beta over the sparse acceptor.  Each recursion step is a sparse
// transition-matrix by dense state-vector product carried out in log space.
// Posteriors marginalize arc occupancies onto senones per frame.
ForwardBackwardResult ForwardBackward(const graph::DenominatorGraph& g,
                                      const LogLikeMatrix& loglikes);

// Forward score restricted to paths whose frame-level emission sequence is
// exactly `frames`.  This is the numerator score: it includes the graph's
// LM and transition weights, so it never exceeds the denominator score.
double ConstrainedForwardScore(const graph::DenominatorGraph& g,
                               const LogLikeMatrix& loglikes,
                               const std::vector<int>& frames);

// gradient[t][s] = indicator(num.frames[t] == s) - posteriors[t][s]
Matrix MmiGradient(const NumeratorSupervision& num, const Matrix& posteriors);

// MMI objective and gradient w.r.t. the loglikes, with optional frame-level
// cross-entropy regularization against the numerator alignment.  The CE term
// sums log-softmax(loglikes[t])[num.frames[t]] over frames; ce_weight = 0
// reduces bit-for-bit to pure MMI.
MmiResult MmiObjectiveWithCe(const graph::DenominatorGraph& g,
                             const LogLikeMatrix& loglikes,
                             const NumeratorSupervision& num,
                             double ce_weight);

}  // namespace casr::seqtrain

#endif  // CASR_SEQTRAIN_H_
