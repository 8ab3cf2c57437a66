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

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crtm;

TEST(Attention, Singleton) {
  Matrix ctx(1, 3, 0.7);
  const auto a = attention_weights(std::vector<double>{1, 2, 3}, ctx, 3);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], 1.0);
}

TEST(Attention, IdenticalRowsUniform) {
  Matrix ctx(4, 2, 0.3);
  const auto a = attention_weights(std::vector<double>{5, -1}, ctx, 2);
  for (double x : a) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(Attention, HandEvaluated) {
  Matrix ctx(2, 4, 0.0);
  ctx(0, 0) = 1.0;
  ctx(1, 1) = 1.0;
  const auto a = attention_weights(std::vector<double>{1, 0, 0, 0}, ctx, 4);
  // scores (0.5, 0): a_1 = 1 / (1 + e^-0.5)
  EXPECT_NEAR(a[0], 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(a[0], 0.6225, 1e-4);
  EXPECT_NEAR(a[1], 0.3775, 1e-4);
}

TEST(Attention, LargeScoresStayFinite) {
  Matrix ctx(2, 1);
  ctx(0, 0) = 1e4;
  ctx(1, 0) = -1e4;
  const auto a = attention_weights(std::vector<double>{1e4}, ctx, 1);
  EXPECT_NEAR(a[0] + a[1], 1.0, 1e-15);
  EXPECT_EQ(a[0], 1.0);
}

TEST(ContextAverage, Examples) {
  Matrix rows(2, 2);
  rows.data() = {1, 0, 0, 1};
  EXPECT_EQ(context_topic_average(std::vector<double>{0.5, 0.5}, rows), (std::vector<double>{0.5, 0.5}));
  const auto z = context_topic_average(std::vector<double>{0.6225, 0.3775}, rows);
  EXPECT_NEAR(z[0], 0.6225, 1e-15);
  EXPECT_NEAR(z[1], 0.3775, 1e-15);
  Matrix one(1, 3);
  one.data() = {0.2, 0.3, 0.5};
  EXPECT_EQ(context_topic_average(std::vector<double>{1.0}, one), (std::vector<double>{0.2, 0.3, 0.5}));
}

TEST(LinkScore, HandEvaluated) {
  LinkParams p = init_link_params(2, 0, 0.0, false, 1);
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(link_score(half, half, p), 1.0);
  p.eta = {1.0, 1.0};
  EXPECT_NEAR(link_score(half, half, p), std::exp(0.5), 1e-15);
  EXPECT_NEAR(rtm_link_score(std::vector<double>{1, 0}, std::vector<double>{1, 0}, std::vector<double>{2, 0}, -1.0),
              std::exp(1.0), 1e-15);
  EXPECT_EQ(rtm_link_score(half, half, std::vector<double>{0, 0}, 0.0), 1.0);
}

TEST(LinkScore, ZeroEtaIgnoresQ) {
  std::mt19937_64 rng(3);
  LinkParams p = init_link_params(4, 0, 0.0, false, 1);
  p.q = fixtures::random_matrix(rng, 4, 4, -2, 2);
  const auto s = fixtures::random_simplex(rng, 4), t = fixtures::random_simplex(rng, 4);
  EXPECT_EQ(link_score(s, t, p), 1.0);
}

TEST(LinkScore, MatchesReferenceWithQ) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    LinkParams p = init_link_params(6, 0, 0.0, false, 1);
    p.q = fixtures::random_matrix(rng, 6, 6, -1, 1);
    p.eta = fixtures::random_matrix(rng, 1, 6, -3, 3).data();
    p.nu = -0.7;
    const auto s = fixtures::random_simplex(rng, 6), t = fixtures::random_simplex(rng, 6);
    EXPECT_NEAR(std::log(link_score(s, t, p)), fixtures::ref_log_link(s, t, p.eta, p.nu, p.q), 1e-12);
  }
}

TEST(LinkScore, OverflowReported) {
  LinkParams p = init_link_params(2, 0, 0.0, false, 1);
  p.eta = {1e6, 1e6};
  EXPECT_THROW(link_score(std::vector<double>{1, 0}, std::vector<double>{1, 0}, p), NumericError);
}

TEST(PhiGradient, MatchesFiniteDifferences) {
  const auto worst = oracles::phi_gradient_check(17, 25);
  EXPECT_LE(worst.source, 1e-4);
  EXPECT_LE(worst.target, 1e-4);
}

TEST(PhiGradient, IdentityQAndZeroEta) {
  std::mt19937_64 rng(2);
  auto src = oracles::random_doc(rng, 5, 3);
  auto tgt = oracles::random_doc(rng, 4, 3);
  LinkParams p = init_link_params(3, 0, 0.0, false, 1);
  p.eta = {1.0, -2.0, 0.5};
  const std::vector<std::size_t> pos{1, 2};
  const std::vector<double> a{0.25, 0.75};
  const auto g = relational_phi_gradient(LinkSide::source, pos, a, src, tgt, p);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(g.values(j, t), a[j] * p.eta[t] * tgt.phibar[t], 1e-15);
  p.eta.assign(3, 0.0);
  const auto zero = relational_phi_gradient(LinkSide::target, pos, a, src, tgt, p);
  for (double x : zero.values.data()) EXPECT_EQ(x, 0.0);
}

TEST(EtaNu, ZeroRhoIsExactlyZero) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto pi = fixtures::random_matrix(rng, 1, 5, 0.01, 0.5).data();
    const auto pa = fixtures::random_matrix(rng, 1, 5, 0.01, 0.1).data();
    const auto [eta, nu] = update_eta_nu(pi, pa, 10.0, 0.0);
    EXPECT_EQ(nu, 0.0);
    for (double e : eta) EXPECT_EQ(e, 0.0);
  }
}

TEST(EtaNu, HandEvaluated) {
  const auto [eta, nu] = update_eta_nu(std::vector<double>{1, 1}, std::vector<double>{0.1, 0.1}, 4.0, 10.0);
  EXPECT_NEAR(nu, std::log(0.2), 1e-15);
  EXPECT_NEAR(nu, -1.6094, 1e-4);
  EXPECT_NEAR(eta[0], std::log(2.5), 1e-14);
  EXPECT_NEAR(eta[1], 0.9163, 1e-4);
}

TEST(EtaNu, NuNonPositive) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto pi = fixtures::random_matrix(rng, 1, 4, 0.01, 0.5).data();
    const auto pa = fixtures::random_matrix(rng, 1, 4, 0.01, 0.2).data();
    EXPECT_LE(update_eta_nu(pi, pa, 5.0, static_cast<double>(i * 10)).second, 0.0);
  }
}

TEST(EtaNu, GuardsNamed) {
  auto msg = [](auto&& f) {
    try {
      f();
    } catch (const NumericError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg([] { update_eta_nu(std::vector<double>{0.0, 1}, std::vector<double>{0.1, 0.1}, 4, 1); }).find("Pi_k > 0"),
            std::string::npos);
  EXPECT_NE(msg([] { update_eta_nu(std::vector<double>{3, 2}, std::vector<double>{0.1, 0.1}, 4, 1); }).find("1^T Pi < L"),
            std::string::npos);
  EXPECT_NE(msg([] { update_eta_nu(std::vector<double>{1, 1}, std::vector<double>{0.1, 0.1}, 0, 1); }).find("L > 0"),
            std::string::npos);
}

TEST(UpdateQ, HandEvaluatedIncrement) {
  const Matrix q = Matrix::identity(2);
  const std::vector<LinkSummary> links{{{0.5, 0.5}, {0.5, 0.5}}};
  const std::vector<double> eta{1.0, 1.0};
  const auto d = q_increment(q, links, eta);
  for (double x : d.data()) EXPECT_NEAR(0.1 * x, 0.025, 1e-16);
  const auto next = update_q(q, links, eta, 0.1);
  const double n = std::sqrt(1.025 * 1.025 + 0.025 * 0.025);
  EXPECT_NEAR(next(0, 0), 1.025 / n, 1e-15);
  EXPECT_NEAR(next(0, 1), 0.025 / n, 1e-15);
}

TEST(UpdateQ, ZeroRateKeepsNormalizedQ) {
  auto p = init_link_params(5, 10, 0.01, true, 3);
  const std::vector<LinkSummary> links{{std::vector<double>(5, 0.2), std::vector<double>(5, 0.2)}};
  const auto next = update_q(p.q, links, std::vector<double>(5, 1.0), 0.0);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(next.data()[i], p.q.data()[i], 1e-15);
}

TEST(UpdateQ, RowsUnitNorm) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    LinkParams p = init_link_params(4, 10, 0.5, true, static_cast<std::uint64_t>(i));
    std::vector<LinkSummary> links;
    for (int l = 0; l < 5; ++l) links.push_back({fixtures::random_simplex(rng, 4), fixtures::random_simplex(rng, 4)});
    p.q = update_q(p.q, links, fixtures::random_matrix(rng, 1, 4, -3, 3).data(), 0.5);
    EXPECT_EQ(check_link_params(p), "");
  }
}

TEST(UpdateQ, ZeroRowRejected) {
  Matrix q(2, 2, 0.0);
  q(0, 0) = 1.0;
  EXPECT_THROW(update_q(q, {}, std::vector<double>{1, 1}, 0.0), NumericError);
}

TEST(UpdateQ, IncrementMatchesFiniteDifferences) { EXPECT_LE(oracles::q_increment_check(21, 25), 1e-4); }

TEST(LinkLoglik, Examples) {
  LinkParams p = init_link_params(2, 0, 0.0, false, 1);
  std::vector<LinkSummary> links{{{0.5, 0.5}, {0.5, 0.5}}};
  EXPECT_EQ(expected_link_loglik(links, p), 0.0);
  p.eta = {1, 1};
  EXPECT_NEAR(expected_link_loglik(links, p), 0.5, 1e-15);
  links.push_back({{1, 0}, {0.2, 0.8}});
  const double forward = expected_link_loglik(links, p);
  std::swap(links[0], links[1]);
  EXPECT_NEAR(expected_link_loglik(links, p), forward, 1e-15);
}

TEST(OracleEquivalence, IdentityQMatchesRtm) {
  std::mt19937_64 rng(1234);
  LinkParams p = init_link_params(8, 0, 0.0, false, 1);
  for (int i = 0; i < 10000; ++i) {
    p.eta = fixtures::random_matrix(rng, 1, 8, -5, 5).data();
    p.nu = fixtures::random_matrix(rng, 1, 1, -2, 0).data()[0];
    const auto s = fixtures::random_simplex(rng, 8), t = fixtures::random_simplex(rng, 8);
    ASSERT_NEAR(link_score(s, t, p), rtm_link_score(s, t, p.eta, p.nu), 1e-12);
  }
}
