// Copyright 2026 The CRTM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <boost/math/special_functions/digamma.hpp>
#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace crtm;

TEST(Digamma, MatchesBoost) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> expo(-3.0, 6.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(10.0, expo(rng));
    const double want = boost::math::digamma(x);
    EXPECT_NEAR(digamma(x), want, 1e-12 * std::max(1.0, std::abs(want))) << "x = " << x;
  }
}

TEST(Digamma, KnownValues) {
  EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-14);
  EXPECT_NEAR(digamma(0.5), -0.57721566490153286 - 2.0 * std::log(2.0), 1e-14);
  // psi(x + 1) = psi(x) + 1/x
  for (double x : {0.3, 2.5, 7.25, 40.0}) EXPECT_NEAR(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-13);
}

TEST(Digamma, RejectsNonPositive) {
  EXPECT_THROW(digamma(0.0), NumericError);
  EXPECT_THROW(digamma(-1.5), NumericError);
  EXPECT_THROW(digamma(std::nan("")), NumericError);
}

TEST(Topics, GammaUpdate) {
  Matrix phi(3, 2);
  phi.data() = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(update_gamma(phi, 5.0), (std::vector<double>{6.5, 6.5}));
  phi.data() = {1, 0, 1, 0, 0, 1};
  EXPECT_EQ(update_gamma(phi, 0.1), (std::vector<double>{2.1, 1.1}));
}

TEST(Topics, PhiRowUniformBetaFollowsGamma) {
  Matrix beta(2, 3, 1.0 / 3.0);
  const auto phi = update_phi_row(0, std::vector<double>{1.0, 1.0}, beta);
  EXPECT_NEAR(phi[0], 0.5, 1e-15);
  // unequal gamma: phi_k proportional to exp(Psi(gamma_k))
  const auto skew = update_phi_row(1, std::vector<double>{2.0, 1.0}, beta);
  const double ratio = std::exp(boost::math::digamma(2.0) - boost::math::digamma(1.0));
  EXPECT_NEAR(skew[0] / skew[1], ratio, 1e-12);
}

TEST(Topics, PhiRowEqualGammaFollowsBeta) {
  Matrix beta(3, 2);
  beta.data() = {0.2, 0.8, 0.5, 0.5, 0.9, 0.1};
  const auto phi = update_phi_row(0, std::vector<double>{3.0, 3.0, 3.0}, beta);
  EXPECT_NEAR(phi[0], 0.2 / 1.6, 1e-14);
  EXPECT_NEAR(phi[1], 0.5 / 1.6, 1e-14);
  EXPECT_NEAR(phi[2], 0.9 / 1.6, 1e-14);
}

TEST(Topics, PhiRowWithGradient) {
  Matrix beta(2, 2, 0.5);
  const std::vector<double> grad{std::log(3.0), 0.0};
  const auto phi = update_phi_row(0, std::vector<double>{1.0, 1.0}, beta, grad);
  EXPECT_NEAR(phi[0], 0.75, 1e-14);
}

TEST(Topics, PhiRowExtremeLogitsStayFinite) {
  Matrix beta(2, 2, 0.5);
  const std::vector<double> grad{800.0, -800.0};
  const auto phi = update_phi_row(0, std::vector<double>{1.0, 1.0}, beta, grad);
  EXPECT_TRUE(std::isfinite(phi[0]) && std::isfinite(phi[1]));
  EXPECT_NEAR(phi[0] + phi[1], 1.0, 1e-15);
}

TEST(Topics, PhiRowZeroWordRejected) {
  Matrix beta(2, 2);
  beta.data() = {1.0, 0.0, 1.0, 0.0};
  EXPECT_THROW(update_phi_row(1, std::vector<double>{1.0, 1.0}, beta), Error);
}

TEST(Topics, BetaUpdateCountsResponsibilities) {
  Document d;
  d.tokens = {0, 1, 1};
  d.sentences = {{0, 3}};
  VariationalState st;
  st.docs.resize(1);
  st.docs[0].phi = Matrix(3, 2);
  st.docs[0].phi.data() = {1, 0, 0.5, 0.5, 0, 1};
  const std::vector<Document> docs{d};
  const auto beta = update_beta(st, docs, 3);
  // topic 0: word0 1, word1 0.5 ; topic 1: word1 1.5 ; word2 floored
  EXPECT_NEAR(beta(0, 0), 1.0 / 1.5, 1e-11);
  EXPECT_NEAR(beta(1, 1), 1.0, 1e-11);
  EXPECT_GT(beta(0, 2), 0.0);
  EXPECT_EQ(check_beta(beta), "");
}

TEST(Topics, InitIsNormalizedAndSeeded) {
  const auto c = fixtures::small_corpus();
  const auto a = init_model(5, c.network.vocab.size(), 5.0, 7, c.network.docs);
  const auto b = init_model(5, c.network.vocab.size(), 5.0, 7, c.network.docs);
  EXPECT_EQ(a.params.beta, b.params.beta);
  EXPECT_EQ(check_beta(a.params.beta), "");
  EXPECT_EQ(check_state(a.state), "");
  EXPECT_THROW(init_model(1, 10, 5.0, 1, c.network.docs), Error);
  EXPECT_THROW(init_model(3, 10, 0.0, 1, c.network.docs), Error);
}

// Coordinate ascent must never decrease the bound.
TEST(Topics, ElboIsMonotone) {
  const auto c = fixtures::small_corpus(5, 25, 0);
  const auto& docs = c.network.docs;
  auto init = init_model(4, c.network.vocab.size(), 0.5, 2, docs, 0.5);
  auto& params = init.params;
  auto& state = init.state;
  double prev = lda_elbo(params, state, docs);
  for (int iter = 0; iter < 6; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      auto& s = state.docs[d];
      for (int inner = 0; inner < 3; ++inner) {
        for (std::size_t i = 0; i < docs[d].size(); ++i) {
          const auto row = update_phi_row(docs[d].tokens[i], s.gamma, params.beta);
          std::copy(row.begin(), row.end(), s.phi.row(i).begin());
        }
        recompute_phibar(s);
        double now = lda_elbo(params, state, docs);
        EXPECT_GE(now, prev - 1e-9 * std::abs(prev)) << "phi step, iter " << iter;
        prev = now;
        s.gamma = update_gamma(s.phi, params.alpha);
        now = lda_elbo(params, state, docs);
        EXPECT_GE(now, prev - 1e-9 * std::abs(prev)) << "gamma step, iter " << iter;
        prev = now;
      }
    }
    params.beta = update_beta(state, docs, c.network.vocab.size());
    const double now = lda_elbo(params, state, docs);
    EXPECT_GE(now, prev - 1e-9 * std::abs(prev)) << "beta step, iter " << iter;
    prev = now;
  }
}

TEST(Topics, ExpectedLogTheta) {
  const std::vector<double> g{2.0, 3.0};
  const auto e = expected_log_theta(g);
  EXPECT_NEAR(e[0], boost::math::digamma(2.0) - boost::math::digamma(5.0), 1e-13);
  EXPECT_NEAR(e[1], boost::math::digamma(3.0) - boost::math::digamma(5.0), 1e-13);
}
