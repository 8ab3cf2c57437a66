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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crtm/common.hpp"
#include "crtm/network.hpp"

namespace crtm {

// One p-dimensional vector per vocabulary word. Words absent from a loaded
// file keep the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t vocab_size, std::size_t dim) : vectors_(vocab_size, dim, 0.0) {}

  std::size_t dim() const { return vectors_.cols(); }
  std::size_t size() const { return vectors_.rows(); }
  std::span<const double> operator[](WordId w) const { return vectors_.row(w); }
  std::span<double> mutable_row(WordId w) { return vectors_.row(w); }
  const Matrix& matrix() const { return vectors_; }
  bool operator==(const EmbeddingTable&) const = default;

 private:
  Matrix vectors_;
};

struct SgnsOptions {
  std::size_t dim = 100;
  std::size_t window = 10;
  std::size_t negatives = 20;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

// Skip-gram with negative sampling over the network's own documents.
//
// word2vec-style: the effective window of each centre word is drawn
// uniformly from [1, window], negatives come from the unigram^0.75
// distribution and the learning rate decays linearly to 1e-4 of its start.
// No frequent-word subsampling. Single-threaded and deterministic.
inline EmbeddingTable train_sgns(const DocumentNetwork& net, const SgnsOptions& opt) {
  const std::size_t vocab = net.vocab.size();
  if (vocab < 2) throw Error("train_sgns: vocabulary needs at least 2 words");
  if (opt.dim < 2) throw Error("train_sgns: dimension must be at least 2");
  if (net.docs.empty()) throw Error("train_sgns: empty network");

  const std::size_t p = opt.dim;
  std::mt19937_64 rng(opt.seed);
  EmbeddingTable table(vocab, p);
  Matrix context(vocab, p, 0.0);
  {
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(p), 0.5 / static_cast<double>(p));
    for (WordId w = 0; w < vocab; ++w)
      for (auto& x : table.mutable_row(w)) x = init(rng);
  }

  std::vector<double> freq(vocab, 0.0);
  std::size_t total_tokens = 0;
  for (const auto& d : net.docs) {
    total_tokens += d.size();
    for (WordId w : d.tokens) freq[w] += 1.0;
  }
  for (auto& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<WordId> noise(freq.begin(), freq.end());
  std::uniform_int_distribution<std::size_t> shrink(1, std::max<std::size_t>(opt.window, 1));

  const double total_steps = static_cast<double>(opt.epochs * total_tokens);
  double step = 0.0;
  std::vector<double> grad_in(p);
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& doc : net.docs) {
      const std::size_t n = doc.size();
      for (std::size_t i = 0; i < n; ++i, step += 1.0) {
        const double lr = opt.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
        const std::size_t win = shrink(rng);
        const WordId center = doc.tokens[i];
        auto in = table.mutable_row(center);
        const std::size_t lo = i >= win ? i - win : 0;
        const std::size_t hi = std::min(n, i + win + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          const WordId positive = doc.tokens[j];
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          for (std::size_t s = 0; s <= opt.negatives; ++s) {
            WordId target = positive;
            double label = 1.0;
            if (s > 0) {
              target = noise(rng);
              if (target == positive) continue;
              label = 0.0;
            }
            auto out = context.row(target);
            const double f = dot(in, out);
            const double g = (label - 1.0 / (1.0 + std::exp(-f))) * lr;
            for (std::size_t c = 0; c < p; ++c) {
              grad_in[c] += g * out[c];
              out[c] += g * in[c];
            }
          }
          for (std::size_t c = 0; c < p; ++c) in[c] += grad_in[c];
        }
      }
    }
  }
  return table;
}

struct EmbeddingCoverage {
  std::size_t covered = 0;
  std::size_t total = 0;
  double fraction() const { return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0; }
};

struct LoadedEmbeddings {
  EmbeddingTable table;
  EmbeddingCoverage coverage;
};

// Text format: header "V p", then "word v1 ... vp" per line. Words outside
// the vocabulary are ignored; vocabulary words missing from the file keep
// the zero vector.
inline LoadedEmbeddings load_embeddings(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("embeddings: missing header line");
  std::istringstream header(line);
  std::size_t rows = 0, dim = 0;
  if (!(header >> rows >> dim) || dim == 0) throw ParseError("embeddings line 1: expected \"V p\" header");

  LoadedEmbeddings out{EmbeddingTable(vocab.size(), dim), {0, vocab.size()}};
  std::vector<char> seen(vocab.size(), 0);
  std::vector<double> values;
  values.reserve(dim);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    values.clear();
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("embeddings line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
      }
    }
    if (values.size() != dim)
      throw ParseError("embeddings line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                       " values, found " + std::to_string(values.size()));
    if (!all_finite(values)) throw ParseError("embeddings line " + std::to_string(lineno) + ": non-finite value");
    auto id = vocab.find(word);
    if (!id) continue;
    std::copy(values.begin(), values.end(), out.table.mutable_row(*id).begin());
    if (!seen[*id]) {
      seen[*id] = 1;
      ++out.coverage.covered;
    }
  }
  return out;
}

inline void save_embeddings(std::ostream& out, const EmbeddingTable& table, const Vocabulary& vocab) {
  out << table.size() << ' ' << table.dim() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (WordId w = 0; w < table.size(); ++w) {
    out << vocab.word(w);
    for (double x : table[w]) out << ' ' << x;
    out << '\n';
  }
}

inline LoadedEmbeddings load_embeddings_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path);
  return load_embeddings(in, vocab);
}

}  // namespace crtm
