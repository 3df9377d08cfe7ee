// tests/test_seqtrain.cc

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

#include "casr/error.h"
#include "doctest.h"
#include "oracles.h"
#include "test_util.h"

using namespace casr;
using namespace casr::seqtrain;

namespace {

// Fixed 6-state, 3-senone stochastic acceptor used by the oracle and
// gradient checks below.
graph::DenominatorGraph SixStateGraph() {
  Rng rng(41);
  std::vector<std::tuple<int, int, int, double>> arcs;
  for (int u = 0; u < 6; ++u) {
    const int degree = 2 + static_cast<int>(rng.UniformInt(2));
    std::vector<double> w(degree);
    double total = 0.0;
    for (auto& x : w) {
      x = 0.1 + rng.Uniform();
      total += x;
    }
    for (int k = 0; k < degree; ++k)
      arcs.emplace_back(u, static_cast<int>(rng.UniformInt(6)),
                        static_cast<int>(rng.UniformInt(3)),
                        std::log(w[k] / total));
  }
  return graph::DenominatorGraph::FromArcs(6, 0, 3, arcs);
}

LogLikeMatrix SeededLoglikes(int T, int S, std::uint64_t seed) {
  Rng rng(seed);
  return {"seeded", testing::RandomMatrix(rng, T, S, 0.8)};
}

// A numerator alignment guaranteed to be accepted: emitted by a random walk
// over the graph itself.
std::vector<int> AcceptedFrames(const graph::DenominatorGraph& g, int T,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> frames;
  int state = g.start_state;
  for (int t = 0; t < T; ++t) {
    auto arcs = g.ArcsFrom(state);
    const auto& a = arcs[rng.UniformInt(arcs.size())];
    frames.push_back(a.senone);
    state = a.dst;
  }
  return frames;
}

}  // namespace

TEST_CASE("forward-backward on a single self-loop state") {
  const double lp = -0.25;
  auto g = graph::DenominatorGraph::FromArcs(1, 0, 1, {{0, 0, 0, lp}});
  LogLikeMatrix ll{"u", Matrix::Zero(3, 1)};
  auto fb = ForwardBackward(g, ll);
  CHECK(fb.log_prob == doctest::Approx(3 * lp).epsilon(1e-12));
  CHECK(fb.posteriors.minCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fb.posteriors.rows() == 3);
}

TEST_CASE("forward-backward matches exhaustive path enumeration") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(4, 3, 17);
  auto fb = ForwardBackward(g, ll);
  auto oracle = testing::EnumeratePaths(g, ll.values);
  CHECK(fb.log_prob == doctest::Approx(std::log(oracle.total_mass)).epsilon(1e-10));
  for (int t = 0; t < 4; ++t)
    for (int s = 0; s < 3; ++s)
      CHECK(fb.posteriors(t, s) ==
            doctest::Approx(oracle.occupancy(t, s) / oracle.total_mass)
                .epsilon(1e-10));
}

TEST_CASE("posterior rows sum to 1") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(5, 3, 23);
  auto fb = ForwardBackward(g, ll);
  for (int t = 0; t < 5; ++t)
    CHECK(fb.posteriors.row(t).sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("forward-backward rejects out-of-range labels") {
  auto g = graph::DenominatorGraph::FromArcs(1, 0, 2, {{0, 0, 1, -0.1}});
  LogLikeMatrix ll{"u", Matrix::Zero(2, 1)};  // only one senone column
  CHECK_THROWS_AS(ForwardBackward(g, ll), LabelMismatch);
}

TEST_CASE("mmi gradient is indicator minus posterior") {
  SUBCASE("perfect posterior gives zero row") {
    Matrix post(1, 2);
    post << 1.0, 0.0;
    auto grad = MmiGradient({{0}}, post);
    CHECK(grad(0, 0) == 0.0);
    CHECK(grad(0, 1) == 0.0);
  }
  SUBCASE("off-posterior mass flows to the aligned senone") {
    Matrix post(1, 2);
    post << 0.25, 0.75;
    auto grad = MmiGradient({{0}}, post);
    CHECK(grad(0, 0) == doctest::Approx(0.75));
    CHECK(grad(0, 1) == doctest::Approx(-0.75));
  }
  SUBCASE("dimension mismatch throws") {
    Matrix post(2, 2);
    post.setZero();
    CHECK_THROWS_AS(MmiGradient({{0}}, post), ShapeError);
  }
}

TEST_CASE("pure MMI gradient rows sum to zero") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(4, 3, 31);
  NumeratorSupervision num{AcceptedFrames(g, 4, 5)};
  auto res = MmiObjectiveWithCe(g, ll, num, 0.0);
  for (int t = 0; t < 4; ++t)
    CHECK(res.gradient.row(t).sum() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("mmi gradient matches central finite differences") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(4, 3, 37);
  NumeratorSupervision num{AcceptedFrames(g, 4, 7)};
  for (double ce_weight : {0.0, 0.1}) {
    auto res = MmiObjectiveWithCe(g, ll, num, ce_weight);
    auto fd = testing::CentralDifferences(
        ll.values,
        [&](const Matrix& m) {
          LogLikeMatrix probe{"p", m};
          return MmiObjectiveWithCe(g, probe, num, ce_weight).objective;
        },
        1e-4);
    CHECK(testing::MaxRelError(fd, res.gradient) <= 1e-4);
  }
}

TEST_CASE("ce_weight 0 reduces exactly to pure MMI") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(3, 3, 43);
  NumeratorSupervision num{AcceptedFrames(g, 3, 11)};
  auto with_ce = MmiObjectiveWithCe(g, ll, num, 0.0);
  auto fb = ForwardBackward(g, ll);
  const double num_lp = ConstrainedForwardScore(g, ll, num.frames);
  CHECK(with_ce.objective == num_lp - fb.log_prob);
  CHECK((with_ce.gradient - MmiGradient(num, fb.posteriors)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ce_weight 0.1 objective composes MMI and CE terms") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(4, 3, 47);
  NumeratorSupervision num{AcceptedFrames(g, 4, 13)};
  auto pure = MmiObjectiveWithCe(g, ll, num, 0.0);
  double ce = 0.0;
  for (int t = 0; t < 4; ++t) {
    double lse = kLogZero;
    for (int s = 0; s < 3; ++s) lse = LogAdd(lse, ll.values(t, s));
    ce += ll.values(t, num.frames[t]) - lse;
  }
  auto blended = MmiObjectiveWithCe(g, ll, num, 0.1);
  CHECK(blended.objective == doctest::Approx(pure.objective + 0.1 * ce).epsilon(1e-12));
}

TEST_CASE("negative ce weight is rejected") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(2, 3, 53);
  CHECK_THROWS_AS(MmiObjectiveWithCe(g, ll, {{0, 0}}, -0.5), InvalidConfig);
}

TEST_CASE("numerator score never exceeds denominator score") {
  auto g = SixStateGraph();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ll = SeededLoglikes(4, 3, seed);
    NumeratorSupervision num{AcceptedFrames(g, 4, seed + 100)};
    auto res = MmiObjectiveWithCe(g, ll, num, 0.0);
    CHECK(res.objective <= 1e-9);
    // cross-check the constrained score against explicit enumeration
    const double oracle = testing::EnumerateConstrained(g, ll.values, num.frames);
    CHECK(res.num_logprob == doctest::Approx(std::log(oracle)).epsilon(1e-10));
  }
}

TEST_CASE("adding a constant to all loglikes shifts num and den by T*c") {
  auto g = SixStateGraph();
  auto ll = SeededLoglikes(4, 3, 59);
  NumeratorSupervision num{AcceptedFrames(g, 4, 17)};
  auto base = MmiObjectiveWithCe(g, ll, num, 0.0);
  const double c = 0.7;
  LogLikeMatrix shifted{"s", ll.values.array() + c};
  auto moved = MmiObjectiveWithCe(g, shifted, num, 0.0);
  CHECK(moved.num_logprob == doctest::Approx(base.num_logprob + 4 * c).epsilon(1e-10));
  CHECK(moved.den_logprob == doctest::Approx(base.den_logprob + 4 * c).epsilon(1e-10));
  CHECK(moved.objective == doctest::Approx(base.objective).epsilon(1e-8));
}

TEST_CASE("oracle equivalence holds across random graphs") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = testing::RandomGraph(rng, 8, 3);
    const int T = 1 + static_cast<int>(rng.UniformInt(5));
    LogLikeMatrix ll{"r", testing::RandomMatrix(rng, T, 3, 0.5)};
    auto fb = ForwardBackward(g, ll);
    auto oracle = testing::EnumeratePaths(g, ll.values);
    CHECK(fb.log_prob == doctest::Approx(std::log(oracle.total_mass)).epsilon(1e-8));
  }
}
