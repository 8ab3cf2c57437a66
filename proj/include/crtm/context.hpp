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
#include <span>
#include <string>
#include <vector>

#include "crtm/embeddings.hpp"
#include "crtm/network.hpp"
#include "crtm/relational.hpp"

namespace crtm {

// How the context of an anchor is chosen and weighted.
enum class ContextMode {
  sentence,       // enclosing sentence, attention weights
  singleton,      // anchor tokens only, attention weights
  uniform,        // enclosing sentence, uniform weights
  positional,     // enclosing sentence, Gaussian weights around the anchor
  whole_document  // every token of the source, uniform weights
};

inline std::string to_string(ContextMode m) {
  switch (m) {
    case ContextMode::sentence: return "sentence";
    case ContextMode::singleton: return "singleton";
    case ContextMode::uniform: return "uniform";
    case ContextMode::positional: return "positional";
    case ContextMode::whole_document: return "whole-document";
  }
  return "?";
}

inline ContextMode context_mode_from_string(const std::string& s) {
  if (s == "sentence") return ContextMode::sentence;
  if (s == "singleton") return ContextMode::singleton;
  if (s == "uniform") return ContextMode::uniform;
  if (s == "positional") return ContextMode::positional;
  if (s == "whole-document") return ContextMode::whole_document;
  throw Error("unknown context mode '" + s + "'");
}

inline bool needs_embeddings(ContextMode m) { return m == ContextMode::sentence || m == ContextMode::singleton; }

// Token positions of a link's context inside the source document.
struct ContextView {
  std::vector<std::size_t> positions;
  TokenRange anchor;
  std::vector<WordId> words;
};

inline ContextView make_context(const Document& source, const AnchorLink& link, ContextMode mode) {
  ContextView v;
  v.anchor = link.span;
  TokenRange range;
  switch (mode) {
    case ContextMode::singleton: range = link.span; break;
    case ContextMode::whole_document: range = {0, source.size()}; break;
    default: range = source.sentences.at(link.sentence); break;
  }
  for (std::size_t i = range.begin; i < range.end; ++i) {
    v.positions.push_back(i);
    v.words.push_back(source.tokens[i]);
  }
  return v;
}

// g_j = exp(-0.5 (dist_j / sigma)^2), normalized to sum to one.
inline std::vector<double> positional_weights(std::span<const double> distances, double sigma) {
  if (!(sigma > 0.0)) throw Error("positional_weights: sigma must be positive");
  std::vector<double> g(distances.size());
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = distances[j] / sigma;
    total += (g[j] = std::exp(-0.5 * r * r));
  }
  for (auto& x : g) x /= total;
  return g;
}

// Convenience overload: distances |position - center|.
inline std::vector<double> positional_weights(std::size_t center, std::span<const std::size_t> positions,
                                              double sigma) {
  std::vector<double> dist(positions.size());
  for (std::size_t j = 0; j < positions.size(); ++j)
    dist[j] = std::abs(static_cast<double>(positions[j]) - static_cast<double>(center));
  return positional_weights(dist, sigma);
}

// Mean embedding of the given words.
inline std::vector<double> mean_embedding(const EmbeddingTable& table, std::span<const WordId> words) {
  std::vector<double> u(table.dim(), 0.0);
  for (WordId w : words) {
    const auto r = table[w];
    for (std::size_t c = 0; c < u.size(); ++c) u[c] += r[c];
  }
  for (auto& x : u) x /= static_cast<double>(words.size());
  return u;
}

// Attention weights of `context_words` with respect to the query vector.
inline std::vector<double> attention_over(const EmbeddingTable& table, std::span<const double> u_link,
                                          std::span<const WordId> context_words) {
  Matrix ctx(context_words.size(), table.dim());
  for (std::size_t j = 0; j < context_words.size(); ++j) {
    const auto r = table[context_words[j]];
    std::copy(r.begin(), r.end(), ctx.row(j).begin());
  }
  return attention_weights(u_link, ctx, table.dim());
}

// Weights over `view.positions` for a training link. The attention query is
// the mean embedding of the anchor span; positional distances are measured
// to the nearest anchor token.
inline std::vector<double> context_weights(const Document& source, const ContextView& view, ContextMode mode,
                                           double sigma, const EmbeddingTable* table) {
  const std::size_t c = view.positions.size();
  switch (mode) {
    case ContextMode::uniform:
    case ContextMode::whole_document: return std::vector<double>(c, 1.0 / static_cast<double>(c));
    case ContextMode::positional: {
      std::vector<double> dist(c);
      for (std::size_t j = 0; j < c; ++j) {
        const std::size_t pos = view.positions[j];
        if (view.anchor.contains(pos)) dist[j] = 0.0;
        else if (pos < view.anchor.begin) dist[j] = static_cast<double>(view.anchor.begin - pos);
        else dist[j] = static_cast<double>(pos - (view.anchor.end - 1));
      }
      return positional_weights(dist, sigma);
    }
    case ContextMode::sentence:
    case ContextMode::singleton: {
      if (!table) throw Error("attention context requires word embeddings");
      std::vector<WordId> anchor_words(source.tokens.begin() + static_cast<std::ptrdiff_t>(view.anchor.begin),
                                       source.tokens.begin() + static_cast<std::ptrdiff_t>(view.anchor.end));
      const auto u = mean_embedding(*table, anchor_words);
      return attention_over(*table, u, view.words);
    }
  }
  throw Error("unhandled context mode");
}

}  // namespace crtm
