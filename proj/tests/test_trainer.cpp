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

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.num_topics = 4;
  c.alpha = 0.5;
  c.rho = 50;
  c.max_iterations = 3;
  c.patience = 100;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(Trainer, WholeDocumentIdentityIsBitwiseRtm) {
  const auto corpus = fixtures::small_corpus(4, 40, 2);
  const auto& net = corpus.network;
  const auto split = make_anchor_split(net, 2);
  TrainConfig c = small_config();
  c.context = ContextMode::whole_document;
  c.q_mode = QMode::identity;

  Matrix beta_at_3;
  LinkParams link_at_3;
  fit(net, split, nullptr, c, [&](const IterationView& v) {
    if (v.iteration == 3) {
      beta_at_3 = v.topics.beta;
      link_at_3 = v.link;
    }
  });
  const auto oracle = oracles::run_rtm_oracle(net, split.train, c, 3);
  ASSERT_EQ(beta_at_3.rows(), 4u);
  EXPECT_TRUE(beta_at_3 == oracle.beta);
  EXPECT_EQ(link_at_3.eta, oracle.eta);
  EXPECT_EQ(link_at_3.nu, oracle.nu);
  // the oracle actually moved the link parameters
  EXPECT_NE(oracle.eta, std::vector<double>(4, 0.0));
}

TEST(Trainer, NoTrainLinksIsPlainLda) {
  const auto corpus = fixtures::small_corpus(6, 30, 1);
  const auto& net = corpus.network;
  SplitSpec split;
  split.task = SplitTask::anchor_prediction;
  for (std::size_t l = 0; l < net.links.size(); ++l) split.test.push_back(l);
  TrainConfig c = small_config();
  const auto res = fit(net, split, nullptr, c);
  EXPECT_FALSE(res.report.warnings.empty());
  const auto oracle = oracles::run_rtm_oracle(net, {}, c, 3);
  EXPECT_TRUE(res.model.topics.beta == oracle.beta);
  EXPECT_EQ(res.model.link.eta, std::vector<double>(4, 0.0));
  EXPECT_EQ(res.model.link.nu, 0.0);
}

TEST(Trainer, HasConverged) {
  EXPECT_FALSE(has_converged(std::vector<double>{1, 2, 3}, 3));
  EXPECT_TRUE(has_converged(std::vector<double>{3, 2, 2, 2}, 3));
  EXPECT_TRUE(has_converged(std::vector<double>{1, 2, 1.999999999}, 1));
  EXPECT_FALSE(has_converged(std::vector<double>{1, 2, 2.1}, 1));
  EXPECT_TRUE(has_converged(std::vector<double>{1, 2, 2.0 + 5e-10}, 1));
  EXPECT_THROW(has_converged(std::vector<double>{}, 1), Error);
}

TEST(Trainer, InvariantsHoldEveryIteration) {
  const auto corpus = fixtures::small_corpus(7, 40, 3);
  const auto& net = corpus.network;
  SgnsOptions so;
  so.dim = 16;
  so.epochs = 1;
  const auto emb = train_sgns(net, so);
  const auto split = make_anchor_split(net, 3);
  for (auto mode : {ContextMode::sentence, ContextMode::positional, ContextMode::singleton, ContextMode::uniform}) {
    TrainConfig c = small_config();
    c.context = mode;
    c.max_iterations = 4;
    c.learning_rate = 0.5;
    std::size_t seen = 0;
    fit(net, split, &emb, c, [&](const IterationView& v) {
      ++seen;
      EXPECT_EQ(check_state(v.state), "");
      EXPECT_EQ(check_beta(v.topics.beta), "");
      EXPECT_EQ(check_link_params(v.link), "");
      for (const auto& l : v.train_links) {
        double total = 0.0;
        for (double w : l.weights) total += w;
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    });
    EXPECT_EQ(seen, 4u) << to_string(mode);
  }
}

TEST(Trainer, DeterministicAndThreadInvariant) {
  const auto corpus = fixtures::small_corpus(8, 30, 2);
  const auto& net = corpus.network;
  const auto split = make_anchor_split(net, 1);
  TrainConfig c = small_config();
  c.context = ContextMode::positional;
  const auto a = model_to_json(fit(net, split, nullptr, c).model);
  const auto b = model_to_json(fit(net, split, nullptr, c).model);
  EXPECT_EQ(a, b);
  c.threads = 3;
  auto threaded = model_to_json(fit(net, split, nullptr, c).model);
  threaded["config"]["threads"] = 1;
  EXPECT_EQ(a, threaded);
}

TEST(Trainer, ConvergesWithBestScoreKept) {
  crtm::PlantedOptions o;
  o.num_docs = 200;
  o.seed = 2;
  const auto corpus = generate_planted_corpus(o);
  const auto split = make_anchor_split(corpus.network, 2);
  TrainConfig c;
  c.num_topics = 10;
  c.context = ContextMode::positional;
  const auto res = fit(corpus.network, split, nullptr, c);
  EXPECT_LT(res.report.iterations, 100u);
  EXPECT_EQ(res.report.stop_reason, "converged");
  double best = -INFINITY;
  std::vector<double> running;
  for (double s : res.report.scores) running.push_back(best = std::max(best, s));
  EXPECT_TRUE(std::is_sorted(running.begin(), running.end()));
  EXPECT_EQ(res.report.scores[res.report.best_iteration - 1], best);
}

TEST(Trainer, AttentionNeedsEmbeddings) {
  const auto corpus = fixtures::small_corpus();
  const auto split = make_anchor_split(corpus.network, 1);
  TrainConfig c = small_config();
  EXPECT_THROW(fit(corpus.network, split, nullptr, c), Error);
}

TEST(Trainer, PrintedGradientModeRuns) {
  const auto corpus = fixtures::small_corpus(9, 30, 2);
  const auto split = make_anchor_split(corpus.network, 1);
  TrainConfig c = small_config();
  c.context = ContextMode::uniform;
  c.phi_gradient = PhiGradientMode::printed;
  const auto res = fit(corpus.network, split, nullptr, c);
  EXPECT_EQ(check_state(res.model.state), "");
}

TEST(Trainer, LogFormat) {
  const auto corpus = fixtures::small_corpus();
  const auto split = make_anchor_split(corpus.network, 1);
  TrainConfig c = small_config();
  c.context = ContextMode::uniform;
  const auto res = fit(corpus.network, split, nullptr, c);
  const auto log = res.report.log();
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), static_cast<long>(res.report.iterations));
  EXPECT_EQ(log.rfind("1, ", 0), 0u);
}

TEST(Config, ParseAndDefaults) {
  TrainConfig d;
  EXPECT_EQ(d.num_topics, 50u);
  EXPECT_EQ(d.alpha, 5.0);
  EXPECT_EQ(d.rho, 2000u);
  EXPECT_EQ(d.learning_rate, 0.01);
  EXPECT_EQ(d.max_iterations, 100u);
  std::istringstream in("# comment\ntopics = 12\n\ncontext = positional  # trailing\nsigma=2.5\n");
  const auto c = parse_train_config(in);
  EXPECT_EQ(c.num_topics, 12u);
  EXPECT_EQ(c.context, ContextMode::positional);
  EXPECT_EQ(c.sigma, 2.5);
  std::istringstream bad("topics = 3\nbogus = 1\n");
  try {
    parse_train_config(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(TrainConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Model, JsonRoundTrip) {
  const auto corpus = fixtures::small_corpus();
  const auto split = make_anchor_split(corpus.network, 1);
  TrainConfig c = small_config();
  c.context = ContextMode::uniform;
  const auto m = fit(corpus.network, split, nullptr, c).model;
  const auto back = model_from_json(model_to_json(m));
  EXPECT_TRUE(back.topics.beta == m.topics.beta);
  EXPECT_TRUE(back.link.q == m.link.q);
  EXPECT_EQ(back.link.eta, m.link.eta);
  EXPECT_EQ(back.state.docs[3].phibar, m.state.docs[3].phibar);
  EXPECT_EQ(model_to_json(back), model_to_json(m));
  EXPECT_THROW(model_from_json(nlohmann::json{{"format", "other"}}), ParseError);
}
