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

// LDA core shared by RTM and CRTM: topic-word distributions, per-document
// variational state and the coordinate-ascent update primitives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crtm/common.hpp"
#include "crtm/network.hpp"
#include "crtm/special.hpp"

namespace crtm {

// Floor applied to beta entries of words never assigned to a topic.
inline constexpr double kBetaFloor = 1e-12;

struct TopicModelParams {
  std::size_t num_topics = 0;
  double alpha = 0.0;
  Matrix beta;  // K x V, rows are distributions over words

  std::size_t vocab_size() const { return beta.cols(); }
};

struct DocState {
  std::vector<double> gamma;   // K
  Matrix phi;                  // N_d x K
  std::vector<double> phibar;  // K, row mean of phi
};

struct VariationalState {
  std::vector<DocState> docs;
};

inline void recompute_phibar(DocState& s) {
  const std::size_t k = s.phi.cols();
  s.phibar.assign(k, 0.0);
  for (std::size_t i = 0; i < s.phi.rows(); ++i) {
    const auto r = s.phi.row(i);
    for (std::size_t t = 0; t < k; ++t) s.phibar[t] += r[t];
  }
  const double n = static_cast<double>(s.phi.rows());
  for (auto& v : s.phibar) v /= n;
}

// gamma_d = alpha + sum_i phi_{d,i}.
inline std::vector<double> update_gamma(const Matrix& phi, double alpha) {
  std::vector<double> gamma(phi.cols(), 0.0);
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    const auto r = phi.row(i);
    for (std::size_t k = 0; k < gamma.size(); ++k) gamma[k] += r[k];
  }
  for (auto& g : gamma) g += alpha;
  return gamma;
}

struct ModelInit {
  TopicModelParams params;
  VariationalState state;
};

// Beta rows are uniform plus seeded multiplicative jitter, phi rows are
// uniform and gamma is the gamma update evaluated at uniform phi.
inline ModelInit init_model(std::size_t num_topics, std::size_t vocab_size, double alpha, std::uint64_t seed,
                            std::span<const Document> docs, double jitter = 0.1) {
  if (num_topics < 2) throw Error("init_model: need at least 2 topics");
  if (vocab_size < 2) throw Error("init_model: need a vocabulary of at least 2 words");
  if (!(alpha > 0.0)) throw Error("init_model: alpha must be positive");

  ModelInit m;
  m.params.num_topics = num_topics;
  m.params.alpha = alpha;
  m.params.beta = Matrix(num_topics, vocab_size);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < num_topics; ++k) {
    auto row = m.params.beta.row(k);
    double total = 0.0;
    for (auto& b : row) total += (b = 1.0 + jitter * unit(rng));
    for (auto& b : row) b /= total;
  }

  const double k = static_cast<double>(num_topics);
  m.state.docs.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto& s = m.state.docs[d];
    s.phi = Matrix(docs[d].size(), num_topics, 1.0 / k);
    s.gamma.assign(num_topics, alpha + static_cast<double>(docs[d].size()) / k);
    s.phibar.assign(num_topics, 1.0 / k);
  }
  return m;
}

// Psi(gamma_k) - Psi(sum gamma), the expected log topic proportions.
inline std::vector<double> expected_log_theta(std::span<const double> gamma) {
  double total = 0.0;
  for (double g : gamma) total += g;
  const double psi_total = digamma(total);
  std::vector<double> out(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = digamma(gamma[k]) - psi_total;
  return out;
}

// Natural-log beta stored word-major (V x K) so a token's column is contiguous.
class LogBeta {
 public:
  LogBeta() = default;
  explicit LogBeta(const Matrix& beta) : logs_(beta.cols(), beta.rows()) {
    for (std::size_t k = 0; k < beta.rows(); ++k)
      for (std::size_t w = 0; w < beta.cols(); ++w) logs_(w, k) = std::log(beta(k, w));
  }
  std::span<const double> column(WordId w) const { return logs_.row(w); }
  std::size_t vocab_size() const { return logs_.rows(); }

 private:
  Matrix logs_;
};

// Fills `out` with softmax(log_beta + elog_theta + grad), evaluated with
// max-subtraction. This is the single arithmetic path for every phi update.
inline void phi_row_into(std::span<const double> log_beta, std::span<const double> elog_theta,
                         std::span<const double> grad, std::span<double> out) {
  const std::size_t k = out.size();
  double mx = -INFINITY;
  for (std::size_t t = 0; t < k; ++t) {
    out[t] = log_beta[t] + elog_theta[t] + (grad.empty() ? 0.0 : grad[t]);
    mx = std::max(mx, out[t]);
  }
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) total += (out[t] = std::exp(out[t] - mx));
  for (std::size_t t = 0; t < k; ++t) out[t] /= total;
}

// phi_{d,i} proportional to exp(log beta_{.,w} + Psi(gamma) - Psi(1^T gamma) + g).
// An empty `grad` means a zero relational gradient.
inline std::vector<double> update_phi_row(WordId word, std::span<const double> gamma, const Matrix& beta,
                                          std::span<const double> grad = {}) {
  if (word >= beta.cols()) throw Error("update_phi_row: word id outside the model vocabulary");
  std::vector<double> log_beta(beta.rows());
  bool any = false;
  for (std::size_t k = 0; k < beta.rows(); ++k) {
    any = any || beta(k, word) > 0.0;
    log_beta[k] = std::log(beta(k, word));
  }
  if (!any) throw Error("update_phi_row: word " + std::to_string(word) + " has zero probability under every topic");
  const auto elog = expected_log_theta(gamma);
  std::vector<double> out(beta.rows());
  phi_row_into(log_beta, elog, grad, out);
  return out;
}

// beta_{k,w} proportional to sum_d sum_n 1(w_{d,n} = w) phi^k_{d,n}, floored.
inline Matrix update_beta(const VariationalState& state, std::span<const Document> docs, std::size_t vocab_size) {
  const std::size_t k = state.docs.empty() ? 0 : state.docs.front().phi.cols();
  Matrix beta(k, vocab_size, 0.0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& phi = state.docs[d].phi;
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const WordId w = docs[d].tokens[i];
      const auto r = phi.row(i);
      for (std::size_t t = 0; t < k; ++t) beta(t, w) += r[t];
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    auto row = beta.row(t);
    double total = 0.0;
    for (auto& b : row) total += (b = std::max(b, kBetaFloor));
    for (auto& b : row) b /= total;
  }
  return beta;
}

// Per-document LDA evidence lower bound (no link terms), summed over the corpus.
inline double lda_elbo(const TopicModelParams& params, const VariationalState& state, std::span<const Document> docs) {
  const double k = static_cast<double>(params.num_topics);
  const double alpha = params.alpha;
  double total = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& s = state.docs[d];
    const auto elog = expected_log_theta(s.gamma);
    double gsum = 0.0;
    for (double g : s.gamma) gsum += g;
    double term = std::lgamma(k * alpha) - k * std::lgamma(alpha) - std::lgamma(gsum);
    for (std::size_t t = 0; t < params.num_topics; ++t)
      term += (alpha - 1.0) * elog[t] + std::lgamma(s.gamma[t]) - (s.gamma[t] - 1.0) * elog[t];
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const auto r = s.phi.row(i);
      const WordId w = docs[d].tokens[i];
      for (std::size_t t = 0; t < params.num_topics; ++t) {
        if (r[t] <= 0.0) continue;
        term += r[t] * (elog[t] + std::log(params.beta(t, w)) - std::log(r[t]));
      }
    }
    total += term;
  }
  return total;
}

// Returns a description of the first violated invariant of beta, or "".
inline std::string check_beta(const Matrix& beta, double tol = 1e-9) {
  for (std::size_t k = 0; k < beta.rows(); ++k) {
    double total = 0.0;
    for (double b : beta.row(k)) {
      if (!(b >= 0.0) || !std::isfinite(b)) return "beta row " + std::to_string(k) + " has an invalid entry";
      total += b;
    }
    if (std::abs(total - 1.0) > tol) return "beta row " + std::to_string(k) + " sums to " + std::to_string(total);
  }
  return "";
}

// Returns a description of the first violated invariant of the state, or "".
inline std::string check_state(const VariationalState& state, double tol = 1e-9) {
  for (std::size_t d = 0; d < state.docs.size(); ++d) {
    const auto& s = state.docs[d];
    for (double g : s.gamma)
      if (!(g > 0.0) || !std::isfinite(g)) return "gamma of document " + std::to_string(d) + " is not positive";
    std::vector<double> mean(s.phi.cols(), 0.0);
    for (std::size_t i = 0; i < s.phi.rows(); ++i) {
      double total = 0.0;
      const auto r = s.phi.row(i);
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (!(r[k] >= 0.0 && r[k] <= 1.0)) return "phi entry outside [0,1] in document " + std::to_string(d);
        total += r[k];
        mean[k] += r[k];
      }
      if (std::abs(total - 1.0) > tol) return "phi row does not sum to 1 in document " + std::to_string(d);
    }
    for (std::size_t k = 0; k < mean.size(); ++k)
      if (std::abs(mean[k] / static_cast<double>(s.phi.rows()) - s.phibar[k]) > tol)
        return "cached phibar is stale in document " + std::to_string(d);
  }
  return "";
}

}  // namespace crtm
