// casr/seqtrain.cc

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

#include "casr/seqtrain.h"

#include <cmath>

#include "casr/error.h"

namespace casr::seqtrain {

namespace {

void CheckLabels(const graph::DenominatorGraph& g, const LogLikeMatrix& loglikes) {
  if (loglikes.NumFrames() < 1)
    throw ShapeError("loglikes for '" + loglikes.utt_id + "' has no frames");
  for (const auto& a : g.arcs)
    if (a.senone < 0 || a.senone >= loglikes.NumSenones())
      throw LabelMismatch("graph senone label " + std::to_string(a.senone) +
                          " outside loglike columns");
}

// One log-space alpha step: next[v] += cur[u] + arc + emission.
void AlphaStep(const graph::DenominatorGraph& g, const Matrix& ll, int t,
               const std::vector<double>& cur, std::vector<double>& next) {
  std::fill(next.begin(), next.end(), kLogZero);
  for (int u = 0; u < g.num_states; ++u) {
    const double a = cur[u];
    if (a == kLogZero) continue;
    for (const auto& arc : g.ArcsFrom(u)) {
      const double w = a + arc.logprob + ll(t, arc.senone);
      next[arc.dst] = LogAdd(next[arc.dst], w);
    }
  }
}

}  // namespace

ForwardBackwardResult ForwardBackward(const graph::DenominatorGraph& g,
                                      const LogLikeMatrix& loglikes) {
  CheckLabels(g, loglikes);
  const int T = loglikes.NumFrames();
  const int S = loglikes.NumSenones();
  const Matrix& ll = loglikes.values;

  // alpha[t][u]: paths consuming t frames ending at u
  std::vector<std::vector<double>> alpha(T + 1,
                                         std::vector<double>(g.num_states, kLogZero));
  alpha[0][g.start_state] = 0.0;
  for (int t = 0; t < T; ++t) AlphaStep(g, ll, t, alpha[t], alpha[t + 1]);

  double total = kLogZero;
  for (int u = 0; u < g.num_states; ++u)
    total = LogAdd(total, alpha[T][u] + g.final_logweight[u]);
  if (std::isnan(total))
    throw NumericalOverflow("non-finite forward score for '" + loglikes.utt_id + "'");

  // beta[t][u]: paths consuming frames t..T-1 starting at u
  std::vector<std::vector<double>> beta(T + 1,
                                        std::vector<double>(g.num_states, kLogZero));
  for (int u = 0; u < g.num_states; ++u) beta[T][u] = g.final_logweight[u];
  for (int t = T - 1; t >= 0; --t) {
    for (int u = 0; u < g.num_states; ++u) {
      double acc = kLogZero;
      for (const auto& arc : g.ArcsFrom(u)) {
        const double down = beta[t + 1][arc.dst];
        if (down == kLogZero) continue;
        acc = LogAdd(acc, arc.logprob + ll(t, arc.senone) + down);
      }
      beta[t][u] = acc;
    }
  }

  ForwardBackwardResult res;
  res.log_prob = total;
  res.posteriors = Matrix::Zero(T, S);
  if (total == kLogZero) return res;  // no accepting path
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u < g.num_states; ++u) {
      const double a = alpha[t][u];
      if (a == kLogZero) continue;
      for (const auto& arc : g.ArcsFrom(u)) {
        const double down = beta[t + 1][arc.dst];
        if (down == kLogZero) continue;
        const double occ = a + arc.logprob + ll(t, arc.senone) + down - total;
        res.posteriors(t, arc.senone) += std::exp(occ);
      }
    }
  }
  return res;
}

double ConstrainedForwardScore(const graph::DenominatorGraph& g,
                               const LogLikeMatrix& loglikes,
                               const std::vector<int>& frames) {
  CheckLabels(g, loglikes);
  if (static_cast<int>(frames.size()) != loglikes.NumFrames())
    throw ShapeError("numerator alignment length does not match loglikes");
  const Matrix& ll = loglikes.values;
  std::vector<double> cur(g.num_states, kLogZero), next(g.num_states, kLogZero);
  cur[g.start_state] = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::fill(next.begin(), next.end(), kLogZero);
    const int want = frames[t];
    for (int u = 0; u < g.num_states; ++u) {
      const double a = cur[u];
      if (a == kLogZero) continue;
      for (const auto& arc : g.ArcsFrom(u)) {
        if (arc.senone != want) continue;
        const double w = a + arc.logprob + ll(static_cast<int>(t), arc.senone);
        next[arc.dst] = LogAdd(next[arc.dst], w);
      }
    }
    cur.swap(next);
  }
  double total = kLogZero;
  for (int u = 0; u < g.num_states; ++u)
    total = LogAdd(total, cur[u] + g.final_logweight[u]);
  return total;
}

Matrix MmiGradient(const NumeratorSupervision& num, const Matrix& posteriors) {
  if (static_cast<Eigen::Index>(num.frames.size()) != posteriors.rows())
    throw ShapeError("numerator alignment length does not match posteriors");
  Matrix grad = -posteriors;
  for (Eigen::Index t = 0; t < posteriors.rows(); ++t) {
    const int s = num.frames[t];
    if (s < 0 || s >= posteriors.cols())
      throw ShapeError("numerator senone id out of range");
    grad(t, s) += 1.0;
  }
  return grad;
}

MmiResult MmiObjectiveWithCe(const graph::DenominatorGraph& g,
                             const LogLikeMatrix& loglikes,
                             const NumeratorSupervision& num,
                             double ce_weight) {
  if (ce_weight < 0.0) throw InvalidConfig("ce_weight must be >= 0");
  auto fb = ForwardBackward(g, loglikes);
  MmiResult res;
  res.den_logprob = fb.log_prob;
  res.num_logprob = ConstrainedForwardScore(g, loglikes, num.frames);
  res.objective = res.num_logprob - res.den_logprob;
  res.gradient = MmiGradient(num, fb.posteriors);

  if (ce_weight > 0.0) {
    const Matrix& ll = loglikes.values;
    for (Eigen::Index t = 0; t < ll.rows(); ++t) {
      const double m = ll.row(t).maxCoeff();
      const double lse = m + std::log((ll.row(t).array() - m).exp().sum());
      res.objective += ce_weight * (ll(t, num.frames[t]) - lse);
      for (Eigen::Index s = 0; s < ll.cols(); ++s) {
        const double soft = std::exp(ll(t, s) - lse);
        res.gradient(t, s) += ce_weight * ((num.frames[t] == s ? 1.0 : 0.0) - soft);
      }
    }
  }
  return res;
}

}  // namespace casr::seqtrain
