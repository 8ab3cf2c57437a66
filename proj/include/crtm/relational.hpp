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

// The contextual link function and its estimation.
//
// For a link (d, d') with context c in d, the link log-likelihood is
//   log psi = eta^T (Q zbar_{d,c} o Q phibar_{d'}) + nu
// where zbar_{d,c} is the attention-weighted average of the context tokens'
// topic responsibilities. With Q = I and c the whole document this is the
// plain relational topic model link function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crtm/common.hpp"
#include "crtm/topics.hpp"

namespace crtm {

struct LinkParams {
  std::vector<double> eta;      // K
  double nu = 0.0;              // scalar offset
  Matrix q;                     // K x K projection, unit L2 rows
  std::size_t rho = 2000;       // pseudo-count of negative observations
  double learning_rate = 0.01;  // step size of the Q update
};

// eta = 0, nu = 0. Q is the identity, or identity plus non-negative jitter
// of magnitude 1e-2 with rows renormalized when `jitter_q` is set.
inline LinkParams init_link_params(std::size_t num_topics, std::size_t rho, double learning_rate, bool jitter_q,
                                   std::uint64_t seed) {
  LinkParams p;
  p.eta.assign(num_topics, 0.0);
  p.nu = 0.0;
  p.rho = rho;
  p.learning_rate = learning_rate;
  p.q = Matrix::identity(num_topics);
  if (jitter_q) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> jitter(0.0, 1e-2);
    for (std::size_t i = 0; i < num_topics; ++i) {
      auto row = p.q.row(i);
      double norm = 0.0;
      for (auto& x : row) {
        x += jitter(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (auto& x : row) x /= norm;
    }
  }
  return p;
}

// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (auto& x : out) total += (x = std::exp(x - mx));
  for (auto& x : out) x /= total;
  return out;
}

// a = softmax(u_link . u_j / sqrt(p)) over the rows of `context` (C x p).
inline std::vector<double> attention_weights(std::span<const double> u_link, const Matrix& context, std::size_t p) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  std::vector<double> scores(context.rows());
  for (std::size_t j = 0; j < context.rows(); ++j) scores[j] = dot(u_link, context.row(j)) * scale;
  return softmax(scores);
}

// zbar = sum_j a_j phi_{positions[j]}.
inline std::vector<double> context_topic_average(std::span<const double> a, const Matrix& phi,
                                                 std::span<const std::size_t> positions) {
  std::vector<double> z(phi.cols(), 0.0);
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const auto r = phi.row(positions[j]);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += a[j] * r[k];
  }
  return z;
}

// Overload over an explicit C x K block of rows.
inline std::vector<double> context_topic_average(std::span<const double> a, const Matrix& rows) {
  std::vector<std::size_t> all(rows.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return context_topic_average(a, rows, all);
}

// eta^T (Q s o Q t) + nu.
inline double log_link_score(std::span<const double> s, std::span<const double> t, std::span<const double> eta,
                             double nu, const Matrix& q) {
  const auto qs = mat_vec(q, s);
  const auto qt = mat_vec(q, t);
  double acc = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) acc += eta[k] * (qs[k] * qt[k]);
  return acc + nu;
}

namespace detail {
inline double checked_exp(double x, const char* what) {
  const double v = std::exp(x);
  if (!std::isfinite(v) || !(v > 0.0)) throw NumericError(std::string(what) + ": non-finite link score");
  return v;
}
}  // namespace detail

// psi = exp(eta^T (Q zbar o Q phibar') + nu).
inline double link_score(std::span<const double> zbar, std::span<const double> phibar_target, const LinkParams& p) {
  return detail::checked_exp(log_link_score(zbar, phibar_target, p.eta, p.nu, p.q), "link_score");
}

// psi = exp(eta^T (a o b) + nu), the Q-free relational topic model form.
inline double rtm_link_score(std::span<const double> a, std::span<const double> b, std::span<const double> eta,
                             double nu) {
  double acc = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) acc += eta[k] * (a[k] * b[k]);
  return detail::checked_exp(acc + nu, "rtm_link_score");
}

// Q^T (eta o Q other): the gradient of the link term with respect to the
// vector on the opposite side of the Hadamard product.
inline std::vector<double> link_direction(const Matrix& q, std::span<const double> eta,
                                          std::span<const double> other) {
  auto qo = mat_vec(q, other);
  for (std::size_t k = 0; k < qo.size(); ++k) qo[k] = eta[k] * qo[k];
  return mat_t_vec(q, qo);
}

enum class LinkSide { source, target };

// Per-token additive terms for the phi update induced by one link.
struct PhiGradient {
  std::vector<std::size_t> positions;
  Matrix values;  // positions.size() x K
};

// Gradient of log psi with respect to phi rows, for one side of a link.
//   source token j in the context:  a_j * Q^T (eta o Q phibar_{d'})
//   target token n:                 (1/N_{d'}) * Q^T (eta o Q zbar_{d,c})
inline PhiGradient relational_phi_gradient(LinkSide side, std::span<const std::size_t> context_positions,
                                           std::span<const double> attention, const DocState& source,
                                           const DocState& target, const LinkParams& p) {
  const std::size_t k = p.eta.size();
  PhiGradient g;
  if (side == LinkSide::source) {
    const auto v = link_direction(p.q, p.eta, target.phibar);
    g.positions.assign(context_positions.begin(), context_positions.end());
    g.values = Matrix(g.positions.size(), k);
    for (std::size_t j = 0; j < g.positions.size(); ++j)
      for (std::size_t t = 0; t < k; ++t) g.values(j, t) = attention[j] * v[t];
  } else {
    const auto zbar = context_topic_average(attention, source.phi, context_positions);
    const auto v = link_direction(p.q, p.eta, zbar);
    const std::size_t n = target.phi.rows();
    g.positions.resize(n);
    g.values = Matrix(n, k);
    for (std::size_t i = 0; i < n; ++i) {
      g.positions[i] = i;
      for (std::size_t t = 0; t < k; ++t) g.values(i, t) = v[t] / static_cast<double>(n);
    }
  }
  return g;
}

// Q(1/K) o Q(1/K): expected Hadamard similarity of two documents drawn from
// the symmetric Dirichlet prior mean.
inline std::vector<double> prior_similarity(const Matrix& q) {
  const std::size_t k = q.rows();
  const std::vector<double> mean(k, 1.0 / static_cast<double>(k));
  auto qm = mat_vec(q, mean);
  for (auto& x : qm) x = x * x;
  return qm;
}

// Source- and target-side topic vectors of one observed link.
struct LinkSummary {
  std::vector<double> source;  // zbar_{d,c} (or phibar_d)
  std::vector<double> target;  // phibar_{d'}
};

// Pi = sum over links of Q s_d o Q s_{d'}.
inline std::vector<double> link_overlap(const Matrix& q, std::span<const LinkSummary> links) {
  std::vector<double> pi(q.rows(), 0.0);
  for (const auto& l : links) {
    const auto qs = mat_vec(q, l.source);
    const auto qt = mat_vec(q, l.target);
    for (std::size_t k = 0; k < pi.size(); ++k) pi[k] += qs[k] * qt[k];
  }
  return pi;
}

// Closed-form eta and nu with rho negative pseudo-observations of
// similarity pi_alpha.
//   nu  = log(L - 1^T Pi) - log(rho (1 - 1^T pi_alpha) + L - 1^T Pi)
//   eta = log Pi - log(Pi + rho pi_alpha) - nu
inline std::pair<std::vector<double>, double> update_eta_nu(std::span<const double> pi,
                                                            std::span<const double> pi_alpha,
                                                            double num_links, double rho) {
  if (!(num_links > 0.0)) throw NumericError("update_eta_nu: guard L > 0 failed");
  double pi_sum = 0.0, prior_sum = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (!(pi[k] > 0.0))
      throw NumericError("update_eta_nu: guard Pi_k > 0 failed at k=" + std::to_string(k) + " (" +
                         std::to_string(pi[k]) + ")");
    pi_sum += pi[k];
    prior_sum += pi_alpha[k];
  }
  if (!(pi_sum < num_links))
    throw NumericError("update_eta_nu: guard 1^T Pi < L failed (" + std::to_string(pi_sum) + " >= " +
                       std::to_string(num_links) + ")");
  if (!(prior_sum < 1.0)) throw NumericError("update_eta_nu: guard 1^T pi_alpha < 1 failed");

  const double slack = num_links - pi_sum;
  const double nu = std::log(slack) - std::log(rho * (1.0 - prior_sum) + slack);
  std::vector<double> eta(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) eta[k] = std::log(pi[k]) - std::log(pi[k] + rho * pi_alpha[k]) - nu;
  return {std::move(eta), nu};
}

// Raw Q increment before scaling by the learning rate:
//   D_{i,j} = sum_links (eta_i / K) (s_{d,j} (Q s_{d'})_i + s_{d',j} (Q s_d)_i)
inline Matrix q_increment(const Matrix& q, std::span<const LinkSummary> links, std::span<const double> eta) {
  const std::size_t k = q.rows();
  Matrix delta(k, k, 0.0);
  const double inv_k = 1.0 / static_cast<double>(k);
  for (const auto& l : links) {
    const auto qs = mat_vec(q, l.source);
    const auto qt = mat_vec(q, l.target);
    for (std::size_t i = 0; i < k; ++i) {
      const double ei = eta[i] * inv_k;
      auto row = delta.row(i);
      for (std::size_t j = 0; j < k; ++j) row[j] += ei * (l.source[j] * qt[i] + l.target[j] * qs[i]);
    }
  }
  return delta;
}

// Q <- Q + l * D, clipped at zero, then every row divided by its L2 norm.
// Negative entries would let Q s go negative and break log Pi; a row the
// clip empties keeps its previous value.
inline Matrix update_q(const Matrix& q, std::span<const LinkSummary> links, std::span<const double> eta,
                       double learning_rate) {
  if (!(learning_rate >= 0.0)) throw NumericError("update_q: learning rate must be non-negative");
  Matrix next = q;
  if (learning_rate > 0.0) {
    const Matrix delta = q_increment(q, links, eta);
    for (std::size_t i = 0; i < next.data().size(); ++i)
      next.data()[i] = std::max(0.0, next.data()[i] + learning_rate * delta.data()[i]);
  }
  for (std::size_t i = 0; i < next.rows(); ++i) {
    auto row = next.row(i);
    if (std::all_of(row.begin(), row.end(), [](double x) { return x == 0.0; })) {
      const auto prev = q.row(i);
      std::copy(prev.begin(), prev.end(), row.begin());
    }
    double norm = 0.0;
    for (double x : row) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NumericError("update_q: row " + std::to_string(i) + " has zero or non-finite norm");
    for (auto& x : row) x /= norm;
  }
  return next;
}

// Mean over links of eta^T (Q s_d o Q s_{d'}) + nu.
inline double expected_link_loglik(std::span<const LinkSummary> links, const LinkParams& p) {
  if (links.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : links) total += log_link_score(l.source, l.target, p.eta, p.nu, p.q);
  return total / static_cast<double>(links.size());
}

// Returns a description of the first violated LinkParams invariant, or "".
inline std::string check_link_params(const LinkParams& p, double tol = 1e-9) {
  if (!all_finite(p.eta) || !std::isfinite(p.nu) || !all_finite(p.q.data())) return "non-finite link parameter";
  for (std::size_t i = 0; i < p.q.rows(); ++i) {
    double norm = 0.0;
    for (double x : p.q.row(i)) norm += x * x;
    if (std::abs(std::sqrt(norm) - 1.0) > tol) return "Q row " + std::to_string(i) + " is not unit norm";
  }
  return "";
}

}  // namespace crtm
