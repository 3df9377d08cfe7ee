// casr/am.h

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

#ifndef CASR_AM_H_
#define CASR_AM_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "casr/common.h"
#include "casr/graph.h"
#include "casr/seqtrain.h"

namespace casr::am {

// High-pass penalty on a layer's activations re-interpreted as a 2-D image.
// The 3x3 kernel has center tap 1 and the eight remaining taps -1/8, applied
// as a circular convolution on both axes; the penalty is `weight` times the
// energy of the filtered image.  The kernel sums to zero, so constant images
// are annihilated exactly (neighbor sums are accumulated pairwise to keep
// the cancellation exact in floating point).
struct SpatialFilter {
  int rows = 0;
  int cols = 0;
  double weight = 0.1;

  int Width() const { return rows * cols; }

  // Most-square factorization with cols >= rows (512 -> 16 x 32).
  static SpatialFilter ForWidth(int width, double weight = 0.1);

  // Circular 3x3 high-pass of a row-major rows x cols image.
  Vector Filter(const Vector& image) const;

  // Penalty value; if grad is non-null the exact derivative w.r.t. the
  // activations is accumulated into it (grad must be pre-sized).
  double Penalty(const Vector& activations, Vector* grad) const;
};

enum class Nonlin { kSigmoid, kRelu };
enum class SpeakerMode { kNone, kAppend, kLayerBias };

struct AmConfig {
  int feat_dim = 0;
  std::vector<int> hidden_dims;
  int num_senones = 0;
  Nonlin nonlin = Nonlin::kSigmoid;
  bool recurrent = false;  // simple recurrence on the first hidden layer
  SpeakerMode speaker_mode = SpeakerMode::kNone;
  int speaker_dim = 0;

  int InputDim() const {
    return feat_dim + (speaker_mode == SpeakerMode::kAppend ? speaker_dim : 0);
  }
};

struct ForwardCache {
  Matrix input;                      // T x input_dim after any append
  std::vector<Matrix> preact;        // per hidden layer, T x dim
  std::vector<Matrix> activations;   // post-nonlinearity
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix recur;
  std::vector<Matrix> speaker;

  void SetZero();
  double SquaredNorm() const;
  void Scale(double s);
};

// Toy trainable acoustic model: a small MLP (optionally with a simple
// recurrence on the first hidden layer) whose output row for frame t is the
// vector of acoustic log-scores used as a LogLikeMatrix.  Speaker vectors
// condition the model either by frame-level append or by a learned per-layer
// bias W^l v_s added before the nonlinearity.
struct ToyAcousticModel {
  AmConfig cfg;
  std::vector<Matrix> weights;  // hidden layers then output, out x in
  std::vector<Vector> biases;
  Matrix recur;                     // hidden0 x hidden0 when recurrent
  std::vector<Matrix> speaker_proj;  // per hidden layer when layer-bias

  static ToyAcousticModel Init(const AmConfig& cfg, Rng& rng);

  int NumHiddenLayers() const { return static_cast<int>(cfg.hidden_dims.size()); }

  // frames: T x feat_dim.  speaker may be null unless the mode requires it.
  Matrix Forward(const Matrix& frames, const Vector* speaker,
                 ForwardCache* cache) const;

  // Backpropagates d loss / d scores; accumulates parameter gradients.
  // If penalty_weight > 0 a spatial penalty on every hidden activation is
  // added: its value is returned and its gradient chained through.
  double Backward(const ForwardCache& cache, const Matrix& grad_scores,
                  const Vector* speaker, double penalty_weight,
                  Gradients* grads) const;

  Gradients ZeroGradients() const;
  void ApplyUpdate(const Gradients& grads, double lr);

  void Save(const std::filesystem::path& path) const;
  static ToyAcousticModel Load(const std::filesystem::path& path);
};

enum class Objective { kCrossEntropy, kLfmmi };

struct TrainingUtterance {
  std::string utt_id;
  Matrix feats;             // T x feat_dim
  std::vector<int> align;   // senone per frame
  Vector speaker;           // empty when unused
};

struct TrainConfig {
  Objective objective = Objective::kCrossEntropy;
  int epochs = 4;
  double lr = 0.1;
  double smoothing_weight = 0.0;  // 0 disables the spatial penalty
  double ce_weight = 0.0;         // CE regularization inside LFMMI
  double clip_norm = 25.0;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean per-frame loss per epoch
};

// Summed loss and d loss / d scores for one utterance under the configured
// objective (CE needs no graph; LFMMI does).
std::pair<double, Matrix> ObjectiveLossAndGrad(const Matrix& scores,
                                               const TrainingUtterance& utt,
                                               const graph::DenominatorGraph* den_graph,
                                               const TrainConfig& cfg);

// Forward-only spatial penalty over all hidden activations in the cache.
double SpatialPenaltyValue(const ToyAcousticModel& model,
                           const ForwardCache& cache, double weight);

// Plain SGD over utterances.  Throws TrainingDiverged on non-finite loss.
TrainResult TrainToyAm(ToyAcousticModel& model,
                       const std::vector<TrainingUtterance>& data,
                       const graph::DenominatorGraph* den_graph,
                       const TrainConfig& cfg);

// Mean LFMMI objective per frame over the data; used to monitor the
// CE-then-LFMMI schedule.
double MeanLfmmiObjective(const ToyAcousticModel& model,
                          const std::vector<TrainingUtterance>& data,
                          const graph::DenominatorGraph& den_graph,
                          double ce_weight);

// Mean absolute Pearson correlation between grid-adjacent neurons (right and
// down, circular) of the first hidden layer's activations over all frames.
// Pairs with (numerically) zero variance contribute zero.
double MeanNeighborCorrelation(const ToyAcousticModel& model,
                               const std::vector<TrainingUtterance>& data);

}  // namespace casr::am

#endif  // CASR_AM_H_
