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

#pragma once

// Variational EM for the contextual relational topic model.
//
// Each iteration runs an E-step over every document against frozen global
// parameters (beta, eta, nu, Q and the previous sweep's topic means), then
// an M-step that refits beta, the closed-form eta/nu with rho negative
// pseudo-observations, and takes one normalized step on Q. Convergence is
// controlled by the expected link log-likelihood on validation links.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crtm/config.hpp"
#include "crtm/context.hpp"
#include "crtm/model.hpp"
#include "crtm/network.hpp"
#include "crtm/relational.hpp"
#include "crtm/split.hpp"
#include "crtm/topics.hpp"

namespace crtm {

// A link with its context and fixed context weights.
struct PreparedLink {
  DocId source = 0;
  DocId target = 0;
  ContextView view;
  std::vector<double> weights;
};

inline std::vector<PreparedLink> prepare_links(const DocumentNetwork& net, std::span<const std::size_t> indices,
                                               const TrainConfig& config, const EmbeddingTable* embeddings) {
  std::vector<PreparedLink> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto& link = net.links.at(idx);
    PreparedLink p;
    p.source = link.source;
    p.target = link.target;
    p.view = make_context(net.docs[link.source], link, config.context);
    p.weights = context_weights(net.docs[link.source], p.view, config.context, config.sigma, embeddings);
    out.push_back(std::move(p));
  }
  return out;
}

// Source/target vectors for every link from the current state.
inline std::vector<LinkSummary> summarize_links(std::span<const PreparedLink> links, const VariationalState& state,
                                                const TrainConfig& config) {
  std::vector<LinkSummary> out;
  out.reserve(links.size());
  const bool whole = config.context == ContextMode::whole_document ||
                     config.source_summary == SourceSummary::document;
  for (const auto& l : links) {
    const auto& src = state.docs[l.source];
    LinkSummary s;
    s.source = whole ? src.phibar : context_topic_average(l.weights, src.phi, l.view.positions);
    s.target = state.docs[l.target].phibar;
    out.push_back(std::move(s));
  }
  return out;
}

// The relational half of the M-step: link summaries, Pi, eta/nu and the
// Q step. Cost is O(L K^2).
inline void relational_m_step(std::span<const PreparedLink> links, const VariationalState& state,
                              const TrainConfig& config, LinkParams& params) {
  const auto summaries = summarize_links(links, state, config);
  const auto pi = link_overlap(params.q, summaries);
  const auto pi_alpha = prior_similarity(params.q);
  auto [eta, nu] = update_eta_nu(pi, pi_alpha, static_cast<double>(links.size()), static_cast<double>(params.rho));
  params.eta = std::move(eta);
  params.nu = nu;
  if (!all_finite(params.eta) || !std::isfinite(params.nu))
    throw NumericError("update_eta_nu produced a non-finite value");
  if (config.q_mode == QMode::learned) {
    params.q = update_q(params.q, summaries, params.eta, params.learning_rate);
    if (!all_finite(params.q.data())) throw NumericError("update_q produced a non-finite value");
  }
}

// True iff the last `patience` scores are all <= the best score before them
// (with 1e-9 slack).
inline bool has_converged(std::span<const double> history, std::size_t patience) {
  if (history.empty()) throw Error("has_converged: empty score history");
  if (patience == 0 || history.size() <= patience) return false;
  const std::size_t split = history.size() - patience;
  const double best = *std::max_element(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(split));
  return std::all_of(history.begin() + static_cast<std::ptrdiff_t>(split), history.end(),
                     [&](double s) { return s <= best + 1e-9; });
}

struct TrainReport {
  std::size_t iterations = 0;
  std::vector<double> scores;  // validation score per iteration
  std::vector<double> e_ms;
  std::vector<double> m_ms;
  std::vector<double> relational_ms;
  std::size_t best_iteration = 0;  // 1-based
  std::string stop_reason;
  std::vector<std::string> warnings;

  // "iter, val_score, e_ms, m_ms" per iteration.
  std::string log() const {
    std::string out;
    char buf[160];
    for (std::size_t i = 0; i < iterations; ++i) {
      std::snprintf(buf, sizeof(buf), "%zu, %.10g, %.3f, %.3f\n", i + 1, scores[i], e_ms[i], m_ms[i]);
      out += buf;
    }
    return out;
  }
};

// Read-only view handed to the per-iteration observer.
struct IterationView {
  std::size_t iteration;
  const TopicModelParams& topics;
  const VariationalState& state;
  const LinkParams& link;
  std::span<const PreparedLink> train_links;
  double score;
};

using IterationObserver = std::function<void(const IterationView&)>;

struct FitResult {
  Model model;
  TrainReport report;
};

namespace detail {

// Additive phi-update terms for one document: a term shared by every token
// plus optional per-token terms for context positions.
struct DocGradient {
  std::vector<double> shared;
  Matrix tokens;  // empty unless some context covers this document
};

inline std::vector<DocGradient> relational_gradients(const DocumentNetwork& net, std::span<const PreparedLink> links,
                                                     const VariationalState& state, const LinkParams& params,
                                                     const TrainConfig& config) {
  const std::size_t k = params.eta.size();
  std::vector<DocGradient> g(net.docs.size());
  for (auto& d : g) d.shared.assign(k, 0.0);
  if (links.empty()) return g;

  if (config.phi_gradient == PhiGradientMode::printed) {
    for (const auto& l : links) {
      for (DocId e : {l.source, l.target}) {
        const auto qq = mat_vec(params.q, mat_vec(params.q, state.docs[e].phibar));
        const double n = static_cast<double>(net.docs[e].size());
        for (std::size_t t = 0; t < k; ++t) g[e].shared[t] += params.eta[t] * qq[t] / n;
      }
    }
    return g;
  }

  const bool whole = config.context == ContextMode::whole_document;
  for (const auto& l : links) {
    const auto& src = state.docs[l.source];
    const auto v_src = link_direction(params.q, params.eta, state.docs[l.target].phibar);
    if (whole) {
      const double n = static_cast<double>(net.docs[l.source].size());
      for (std::size_t t = 0; t < k; ++t) g[l.source].shared[t] += v_src[t] / n;
    } else {
      auto& tok = g[l.source].tokens;
      if (tok.empty()) tok = Matrix(net.docs[l.source].size(), k, 0.0);
      for (std::size_t j = 0; j < l.view.positions.size(); ++j) {
        auto row = tok.row(l.view.positions[j]);
        for (std::size_t t = 0; t < k; ++t) row[t] += l.weights[j] * v_src[t];
      }
    }
    const auto zbar = whole ? src.phibar : context_topic_average(l.weights, src.phi, l.view.positions);
    const auto v_tgt = link_direction(params.q, params.eta, zbar);
    const double n = static_cast<double>(net.docs[l.target].size());
    for (std::size_t t = 0; t < k; ++t) g[l.target].shared[t] += v_tgt[t] / n;
  }
  return g;
}

// Coordinate ascent on one document's gamma and phi with beta and the
// relational terms held fixed.
inline void e_step_document(const Document& doc, const LogBeta& log_beta, double alpha, const DocGradient& grad,
                            std::size_t max_inner, double tolerance, DocState& s) {
  const std::size_t k = s.gamma.size();
  std::vector<double> g(k);
  const bool has_tokens = !grad.tokens.empty();
  for (std::size_t inner = 0; inner < max_inner; ++inner) {
    const auto elog = expected_log_theta(s.gamma);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (has_tokens) {
        const auto tr = grad.tokens.row(i);
        for (std::size_t t = 0; t < k; ++t) g[t] = grad.shared[t] + tr[t];
      } else {
        std::copy(grad.shared.begin(), grad.shared.end(), g.begin());
      }
      phi_row_into(log_beta.column(doc.tokens[i]), elog, g, s.phi.row(i));
    }
    auto gamma = update_gamma(s.phi, alpha);
    double change = 0.0;
    for (std::size_t t = 0; t < k; ++t) change = std::max(change, std::abs(gamma[t] - s.gamma[t]));
    s.gamma = std::move(gamma);
    if (change < tolerance) break;
  }
  recompute_phibar(s);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

// One full E-step sweep over every document.
inline void e_step(const DocumentNetwork& net, const TopicModelParams& topics, const LogBeta& log_beta,
                   std::span<const PreparedLink> links, const LinkParams& params, const TrainConfig& config,
                   VariationalState& state) {
  const auto grads = detail::relational_gradients(net, links, state, params, config);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d)
      detail::e_step_document(net.docs[d], log_beta, topics.alpha, grads[d], config.max_inner,
                              config.inner_tolerance, state.docs[d]);
  };
  const std::size_t n = net.docs.size();
  const std::size_t workers = std::min(config.threads, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    run(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(run, b, e);
  }
  for (auto& t : pool) t.join();
}

// Trains topics and link parameters on the split's train links.
inline FitResult fit(const DocumentNetwork& net, const SplitSpec& split, const EmbeddingTable* embeddings,
                     const TrainConfig& config, const IterationObserver& observer = {}) {
  config.validate();
  split.check_partition(net.links.size());
  // without train links nothing reads the context, so plain LDA runs
  // without embeddings
  if (needs_embeddings(config.context) && !split.train.empty()) {
    if (!embeddings) throw Error("context mode '" + to_string(config.context) + "' requires word embeddings");
    if (embeddings->size() != net.vocab.size())
      throw Error("embedding table does not match the vocabulary size");
  }

  FitResult result;
  auto& report = result.report;
  auto init = init_model(config.num_topics, net.vocab.size(), config.alpha, config.seed, net.docs,
                         config.beta_jitter);
  TopicModelParams topics = std::move(init.params);
  VariationalState state = std::move(init.state);
  LinkParams link = init_link_params(config.num_topics, config.rho, config.learning_rate,
                                     config.q_mode == QMode::learned, config.seed);

  const auto train = prepare_links(net, split.train, config, embeddings);
  const bool relational = !train.empty();
  if (!relational) report.warnings.push_back("no train links: fitting plain LDA, link parameters left at init");
  std::vector<PreparedLink> validation;
  if (relational && !split.validation.empty()) {
    validation = prepare_links(net, split.validation, config, embeddings);
  } else if (relational) {
    report.warnings.push_back("empty validation set: convergence is monitored on train links");
    validation = train;
  }

  LogBeta log_beta(topics.beta);
  Model best;
  double best_score = -INFINITY;
  report.stop_reason = "max_iterations";

  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    const auto e_start = std::chrono::steady_clock::now();
    e_step(net, topics, log_beta, train, link, config, state);
    report.e_ms.push_back(detail::elapsed_ms(e_start));
    if (auto bad = check_state(state); !bad.empty())
      throw NumericError("E-step at iteration " + std::to_string(iter) + ": " + bad);

    const auto m_start = std::chrono::steady_clock::now();
    topics.beta = update_beta(state, net.docs, net.vocab.size());
    if (!all_finite(topics.beta.data())) throw NumericError("update_beta produced a non-finite value");
    log_beta = LogBeta(topics.beta);
    double rel_ms = 0.0;
    if (relational) {
      const auto r_start = std::chrono::steady_clock::now();
      relational_m_step(train, state, config, link);
      rel_ms = detail::elapsed_ms(r_start);
    }
    report.m_ms.push_back(detail::elapsed_ms(m_start));
    report.relational_ms.push_back(rel_ms);

    const double score = relational ? expected_link_loglik(summarize_links(validation, state, config), link)
                                    : lda_elbo(topics, state, net.docs);
    if (!std::isfinite(score)) throw NumericError("validation score is not finite");
    report.scores.push_back(score);
    report.iterations = iter;
    if (observer) observer({iter, topics, state, link, train, score});

    if (!relational || score > best_score + 1e-9 || iter == 1) {
      best_score = std::max(score, best_score);
      best.topics = topics;
      best.link = link;
      best.state = state;
      report.best_iteration = iter;
    }
    if (relational && has_converged(report.scores, config.patience)) {
      report.stop_reason = "converged";
      break;
    }
  }

  result.model = std::move(best);
  result.model.config = config;
  result.model.vocab_hash = net.vocab.hash();
  return result;
}

}  // namespace crtm
