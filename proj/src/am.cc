// casr/am.cc

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

#include "casr/am.h"

#include <cmath>

#include "casr/error.h"
#include "casr/io.h"
#include "json.hpp"

namespace casr::am {

SpatialFilter SpatialFilter::ForWidth(int width, double weight) {
  SpatialFilter f;
  f.weight = weight;
  f.rows = 1;
  for (int r = 1; r * r <= width; ++r)
    if (width % r == 0) f.rows = r;
  f.cols = width / f.rows;
  return f;
}

Vector SpatialFilter::Filter(const Vector& image) const {
  if (image.size() != Width())
    throw ShapeError("activation width " + std::to_string(image.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " image");
  Vector out(Width());
  auto at = [&](int r, int c) -> double {
    return image[((r + rows) % rows) * cols + ((c + cols) % cols)];
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // pairwise neighbor sums so a constant image cancels exactly
      const double corners =
          (at(r - 1, c - 1) + at(r - 1, c + 1)) + (at(r + 1, c - 1) + at(r + 1, c + 1));
      const double edges = (at(r - 1, c) + at(r + 1, c)) + (at(r, c - 1) + at(r, c + 1));
      out[r * cols + c] = at(r, c) - 0.125 * (corners + edges);
    }
  }
  return out;
}

double SpatialFilter::Penalty(const Vector& activations, Vector* grad) const {
  const Vector filtered = Filter(activations);
  const double value = weight * filtered.squaredNorm();
  if (grad != nullptr) {
    // kernel is symmetric, so the adjoint is the same filter
    *grad += 2.0 * weight * Filter(filtered);
  }
  return value;
}

namespace {

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix ApplyNonlin(const Matrix& z, Nonlin nonlin) {
  if (nonlin == Nonlin::kSigmoid)
    return z.unaryExpr([](double v) { return Sigmoid(v); });
  return z.cwiseMax(0.0);
}

// derivative expressed through activation (sigmoid) or preactivation (relu)
Matrix NonlinDeriv(const Matrix& act, const Matrix& preact, Nonlin nonlin) {
  if (nonlin == Nonlin::kSigmoid)
    return act.array() * (1.0 - act.array());
  return (preact.array() > 0.0).cast<double>();
}

}  // namespace

void Gradients::SetZero() {
  for (auto& m : weights) m.setZero();
  for (auto& v : biases) v.setZero();
  recur.setZero();
  for (auto& m : speaker) m.setZero();
}

double Gradients::SquaredNorm() const {
  double n = 0.0;
  for (const auto& m : weights) n += m.squaredNorm();
  for (const auto& v : biases) n += v.squaredNorm();
  n += recur.squaredNorm();
  for (const auto& m : speaker) n += m.squaredNorm();
  return n;
}

void Gradients::Scale(double s) {
  for (auto& m : weights) m *= s;
  for (auto& v : biases) v *= s;
  recur *= s;
  for (auto& m : speaker) m *= s;
}

ToyAcousticModel ToyAcousticModel::Init(const AmConfig& cfg, Rng& rng) {
  ToyAcousticModel m;
  m.cfg = cfg;
  int in = cfg.InputDim();
  auto init_matrix = [&](int out_dim, int in_dim) {
    Matrix w(out_dim, in_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (int r = 0; r < out_dim; ++r)
      for (int c = 0; c < in_dim; ++c) w(r, c) = scale * rng.Gaussian();
    return w;
  };
  for (int h : cfg.hidden_dims) {
    m.weights.push_back(init_matrix(h, in));
    m.biases.push_back(Vector::Zero(h));
    in = h;
  }
  m.weights.push_back(init_matrix(cfg.num_senones, in));
  m.biases.push_back(Vector::Zero(cfg.num_senones));
  if (cfg.recurrent && !cfg.hidden_dims.empty())
    m.recur = init_matrix(cfg.hidden_dims[0], cfg.hidden_dims[0]) * 0.5;
  else
    m.recur = Matrix::Zero(0, 0);
  if (cfg.speaker_mode == SpeakerMode::kLayerBias)
    for (int h : cfg.hidden_dims)
      m.speaker_proj.push_back(init_matrix(h, cfg.speaker_dim) * 0.1);
  return m;
}

Matrix ToyAcousticModel::Forward(const Matrix& frames, const Vector* speaker,
                                 ForwardCache* cache) const {
  if (frames.cols() != cfg.feat_dim)
    throw ShapeError("feature dim " + std::to_string(frames.cols()) +
                     ", expected " + std::to_string(cfg.feat_dim));
  if (cfg.speaker_mode != SpeakerMode::kNone) {
    if (speaker == nullptr || speaker->size() != cfg.speaker_dim)
      throw ShapeError("speaker vector missing or of wrong dimension");
  }
  const int T = static_cast<int>(frames.rows());

  Matrix input;
  if (cfg.speaker_mode == SpeakerMode::kAppend) {
    input.resize(T, cfg.InputDim());
    input.leftCols(cfg.feat_dim) = frames;
    input.rightCols(cfg.speaker_dim) = speaker->transpose().replicate(T, 1);
  } else {
    input = frames;
  }

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.input = input;
  c.preact.clear();
  c.activations.clear();

  Matrix cur = input;
  for (int l = 0; l < NumHiddenLayers(); ++l) {
    Matrix z = cur * weights[l].transpose();
    z.rowwise() += biases[l].transpose();
    if (cfg.speaker_mode == SpeakerMode::kLayerBias)
      z.rowwise() += (speaker_proj[l] * (*speaker)).transpose();
    if (cfg.recurrent && l == 0) {
      // simple recurrence, one frame at a time
      Matrix act(T, cfg.hidden_dims[0]);
      Vector prev = Vector::Zero(cfg.hidden_dims[0]);
      for (int t = 0; t < T; ++t) {
        Vector zt = z.row(t).transpose() + recur * prev;
        z.row(t) = zt.transpose();
        Vector at = ApplyNonlin(zt.transpose(), cfg.nonlin).transpose();
        act.row(t) = at.transpose();
        prev = at;
      }
      c.preact.push_back(z);
      c.activations.push_back(act);
      cur = act;
    } else {
      c.preact.push_back(z);
      c.activations.push_back(ApplyNonlin(z, cfg.nonlin));
      cur = c.activations.back();
    }
  }
  Matrix scores = cur * weights.back().transpose();
  scores.rowwise() += biases.back().transpose();
  return scores;
}

Gradients ToyAcousticModel::ZeroGradients() const {
  Gradients g;
  for (const auto& w : weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : biases) g.biases.push_back(Vector::Zero(b.size()));
  g.recur = Matrix::Zero(recur.rows(), recur.cols());
  for (const auto& w : speaker_proj) g.speaker.push_back(Matrix::Zero(w.rows(), w.cols()));
  return g;
}

double ToyAcousticModel::Backward(const ForwardCache& cache, const Matrix& grad_scores,
                                  const Vector* speaker, double penalty_weight,
                                  Gradients* grads) const {
  const int T = static_cast<int>(cache.input.rows());
  const int H = NumHiddenLayers();

  // output layer
  const Matrix& top_act = H > 0 ? cache.activations.back() : cache.input;
  grads->weights[H] += grad_scores.transpose() * top_act;
  grads->biases[H] += grad_scores.colwise().sum().transpose();
  Matrix grad_act = grad_scores * weights[H];  // d loss / d top activation

  double penalty_value = 0.0;
  for (int l = H - 1; l >= 0; --l) {
    if (penalty_weight > 0.0) {
      auto filter = SpatialFilter::ForWidth(cfg.hidden_dims[l], penalty_weight);
      for (int t = 0; t < T; ++t) {
        Vector g = Vector::Zero(cfg.hidden_dims[l]);
        penalty_value += filter.Penalty(cache.activations[l].row(t).transpose(), &g);
        grad_act.row(t) += g.transpose();
      }
    }
    const Matrix deriv = NonlinDeriv(cache.activations[l], cache.preact[l], cfg.nonlin);
    const Matrix& below = l == 0 ? cache.input : cache.activations[l - 1];

    if (cfg.recurrent && l == 0) {
      // BPTT through the simple recurrence
      Matrix grad_z(T, cfg.hidden_dims[0]);
      Vector carry = Vector::Zero(cfg.hidden_dims[0]);
      for (int t = T - 1; t >= 0; --t) {
        Vector gz = (grad_act.row(t).transpose() + carry).cwiseProduct(
            deriv.row(t).transpose());
        grad_z.row(t) = gz.transpose();
        carry = recur.transpose() * gz;
        if (t > 0)
          grads->recur += gz * cache.activations[0].row(t - 1);
      }
      grads->weights[0] += grad_z.transpose() * below;
      grads->biases[0] += grad_z.colwise().sum().transpose();
      if (cfg.speaker_mode == SpeakerMode::kLayerBias)
        grads->speaker[0] += grad_z.colwise().sum().transpose() * speaker->transpose();
      grad_act = grad_z * weights[0];
    } else {
      Matrix grad_z = grad_act.cwiseProduct(deriv);
      grads->weights[l] += grad_z.transpose() * below;
      grads->biases[l] += grad_z.colwise().sum().transpose();
      if (cfg.speaker_mode == SpeakerMode::kLayerBias)
        grads->speaker[l] += grad_z.colwise().sum().transpose() * speaker->transpose();
      grad_act = grad_z * weights[l];
    }
  }
  return penalty_value;
}

void ToyAcousticModel::ApplyUpdate(const Gradients& grads, double lr) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] -= lr * grads.weights[l];
    biases[l] -= lr * grads.biases[l];
  }
  if (recur.size() > 0) recur -= lr * grads.recur;
  for (std::size_t l = 0; l < speaker_proj.size(); ++l)
    speaker_proj[l] -= lr * grads.speaker[l];
}

std::pair<double, Matrix> ObjectiveLossAndGrad(const Matrix& scores,
                                               const TrainingUtterance& utt,
                                               const graph::DenominatorGraph* den_graph,
                                               const TrainConfig& cfg) {
  const int T = static_cast<int>(scores.rows());
  if (cfg.objective == Objective::kCrossEntropy) {
    double loss = 0.0;
    Matrix grad(T, scores.cols());
    for (int t = 0; t < T; ++t) {
      const double m = scores.row(t).maxCoeff();
      const double lse = m + std::log((scores.row(t).array() - m).exp().sum());
      loss += lse - scores(t, utt.align[t]);
      for (Eigen::Index s = 0; s < scores.cols(); ++s)
        grad(t, s) = std::exp(scores(t, s) - lse) - (utt.align[t] == s ? 1.0 : 0.0);
    }
    return {loss, std::move(grad)};
  }
  if (den_graph == nullptr)
    throw InvalidConfig("LFMMI objective requires a denominator graph");
  seqtrain::LogLikeMatrix ll{utt.utt_id, scores};
  auto res = seqtrain::MmiObjectiveWithCe(*den_graph, ll, {utt.align}, cfg.ce_weight);
  return {-res.objective, -res.gradient};
}

double SpatialPenaltyValue(const ToyAcousticModel& model,
                           const ForwardCache& cache, double weight) {
  double value = 0.0;
  for (int l = 0; l < model.NumHiddenLayers(); ++l) {
    auto filter = SpatialFilter::ForWidth(model.cfg.hidden_dims[l], weight);
    for (Eigen::Index t = 0; t < cache.activations[l].rows(); ++t)
      value += filter.Penalty(cache.activations[l].row(t).transpose(), nullptr);
  }
  return value;
}

TrainResult TrainToyAm(ToyAcousticModel& model,
                       const std::vector<TrainingUtterance>& data,
                       const graph::DenominatorGraph* den_graph,
                       const TrainConfig& cfg) {
  if (data.empty()) throw EmptyInput("no training utterances");
  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    long long frames = 0;
    for (const auto& utt : data) {
      ForwardCache cache;
      const Vector* spk =
          model.cfg.speaker_mode == SpeakerMode::kNone ? nullptr : &utt.speaker;
      Matrix scores = model.Forward(utt.feats, spk, &cache);
      auto [loss, grad_scores] = ObjectiveLossAndGrad(scores, utt, den_graph, cfg);
      Gradients grads = model.ZeroGradients();
      loss += model.Backward(cache, grad_scores, spk, cfg.smoothing_weight, &grads);
      if (!std::isfinite(loss))
        throw TrainingDiverged("non-finite loss on '" + utt.utt_id + "'");
      const double n2 = grads.SquaredNorm();
      if (cfg.clip_norm > 0 && n2 > cfg.clip_norm * cfg.clip_norm)
        grads.Scale(cfg.clip_norm / std::sqrt(n2));
      model.ApplyUpdate(grads, cfg.lr);
      loss_sum += loss;
      frames += utt.feats.rows();
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(frames));
  }
  return result;
}

double MeanLfmmiObjective(const ToyAcousticModel& model,
                          const std::vector<TrainingUtterance>& data,
                          const graph::DenominatorGraph& den_graph,
                          double ce_weight) {
  double total = 0.0;
  long long frames = 0;
  for (const auto& utt : data) {
    const Vector* spk =
        model.cfg.speaker_mode == SpeakerMode::kNone ? nullptr : &utt.speaker;
    Matrix scores = model.Forward(utt.feats, spk, nullptr);
    seqtrain::LogLikeMatrix ll{utt.utt_id, scores};
    auto res = seqtrain::MmiObjectiveWithCe(den_graph, ll, {utt.align}, ce_weight);
    total += res.objective;
    frames += utt.feats.rows();
  }
  return total / static_cast<double>(frames);
}

double MeanNeighborCorrelation(const ToyAcousticModel& model,
                               const std::vector<TrainingUtterance>& data) {
  if (model.NumHiddenLayers() == 0) throw InvalidConfig("model has no hidden layer");
  const int width = model.cfg.hidden_dims[0];
  auto filter = SpatialFilter::ForWidth(width);
  std::vector<Matrix> act_blocks;
  long long total_rows = 0;
  for (const auto& utt : data) {
    ForwardCache cache;
    const Vector* spk =
        model.cfg.speaker_mode == SpeakerMode::kNone ? nullptr : &utt.speaker;
    model.Forward(utt.feats, spk, &cache);
    act_blocks.push_back(cache.activations[0]);
    total_rows += cache.activations[0].rows();
  }
  Matrix acts(total_rows, width);
  long long row = 0;
  for (const auto& block : act_blocks) {
    acts.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  const Vector mean = acts.colwise().mean().transpose();
  Matrix centered = acts.rowwise() - mean.transpose();
  const Vector var = centered.array().square().colwise().mean().transpose();

  auto corr = [&](int i, int j) {
    if (var[i] < 1e-12 || var[j] < 1e-12) return 0.0;
    const double cov = (centered.col(i).array() * centered.col(j).array()).mean();
    return cov / std::sqrt(var[i] * var[j]);
  };
  double sum = 0.0;
  int pairs = 0;
  for (int r = 0; r < filter.rows; ++r) {
    for (int c = 0; c < filter.cols; ++c) {
      const int i = r * filter.cols + c;
      const int right = r * filter.cols + (c + 1) % filter.cols;
      const int down = ((r + 1) % filter.rows) * filter.cols + c;
      if (right != i) {
        sum += std::abs(corr(i, right));
        ++pairs;
      }
      if (down != i) {
        sum += std::abs(corr(i, down));
        ++pairs;
      }
    }
  }
  return pairs > 0 ? sum / pairs : 0.0;
}

namespace {

nlohmann::json MatrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix MatrixFromJson(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

void ToyAcousticModel::Save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = "casr-am";
  j["version"] = 1;
  j["config"] = {
      {"feat_dim", cfg.feat_dim},
      {"hidden_dims", cfg.hidden_dims},
      {"num_senones", cfg.num_senones},
      {"nonlin", cfg.nonlin == Nonlin::kSigmoid ? "sigmoid" : "relu"},
      {"recurrent", cfg.recurrent},
      {"speaker_mode", cfg.speaker_mode == SpeakerMode::kNone
                           ? "none"
                           : (cfg.speaker_mode == SpeakerMode::kAppend ? "append"
                                                                       : "layer_bias")},
      {"speaker_dim", cfg.speaker_dim},
  };
  for (const auto& w : weights) j["weights"].push_back(MatrixToJson(w));
  for (const auto& b : biases) j["biases"].push_back(MatrixToJson(b));
  j["recur"] = MatrixToJson(recur);
  j["speaker_proj"] = nlohmann::json::array();
  for (const auto& w : speaker_proj) j["speaker_proj"].push_back(MatrixToJson(w));
  WriteStringToFile(path, j.dump(1));
}

ToyAcousticModel ToyAcousticModel::Load(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(ReadFileToString(path));
  if (j.value("format", "") != "casr-am")
    throw IoError("not an acoustic model checkpoint: " + path.string());
  ToyAcousticModel m;
  const auto& c = j["config"];
  m.cfg.feat_dim = c["feat_dim"].get<int>();
  m.cfg.hidden_dims = c["hidden_dims"].get<std::vector<int>>();
  m.cfg.num_senones = c["num_senones"].get<int>();
  m.cfg.nonlin = c["nonlin"] == "sigmoid" ? Nonlin::kSigmoid : Nonlin::kRelu;
  m.cfg.recurrent = c["recurrent"].get<bool>();
  const std::string mode = c["speaker_mode"].get<std::string>();
  m.cfg.speaker_mode = mode == "none" ? SpeakerMode::kNone
                                      : (mode == "append" ? SpeakerMode::kAppend
                                                          : SpeakerMode::kLayerBias);
  m.cfg.speaker_dim = c["speaker_dim"].get<int>();
  for (const auto& w : j["weights"]) m.weights.push_back(MatrixFromJson(w));
  for (const auto& b : j["biases"]) {
    Matrix col = MatrixFromJson(b);
    m.biases.push_back(col.cols() == 1 ? Vector(col.col(0)) : Vector(col.transpose().col(0)));
  }
  m.recur = MatrixFromJson(j["recur"]);
  for (const auto& w : j["speaker_proj"]) m.speaker_proj.push_back(MatrixFromJson(w));
  return m;
}

}  // namespace casr::am
