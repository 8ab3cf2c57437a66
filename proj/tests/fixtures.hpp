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

// Shared fixtures and independent reference computations for the tests.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "crtm/crtm.hpp"

namespace fixtures {

inline crtm::PlantedCorpus small_corpus(std::uint64_t seed = 3, std::size_t docs = 30, std::size_t links = 2,
                                        std::size_t topics = 4, std::size_t vocab = 60, double length = 30.0) {
  crtm::PlantedOptions o;
  o.num_topics = topics;
  o.vocab_size = vocab;
  o.num_docs = docs;
  o.mean_length = length;
  o.links_per_doc = links;
  o.seed = seed;
  return crtm::generate_planted_corpus(o);
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double total = 0.0;
  for (auto& x : v) total += (x = e(rng));
  for (auto& x : v) x /= total;
  return v;
}

inline crtm::Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  crtm::Matrix m(r, c);
  for (auto& x : m.data()) x = u(rng);
  return m;
}

// Plain loops, no library helpers: (M x)_i.
inline std::vector<double> ref_mat_vec(const crtm::Matrix& m, const std::vector<double>& x) {
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
  return y;
}

// log psi = eta^T (Q s o Q t) + nu.
inline double ref_log_link(const std::vector<double>& s, const std::vector<double>& t, const std::vector<double>& eta,
                           double nu, const crtm::Matrix& q) {
  const auto qs = ref_mat_vec(q, s);
  const auto qt = ref_mat_vec(q, t);
  double acc = nu;
  for (std::size_t k = 0; k < eta.size(); ++k) acc += eta[k] * qs[k] * qt[k];
  return acc;
}

inline double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace fixtures
