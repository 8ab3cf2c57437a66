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

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crtm/context.hpp"
#include "crtm/model.hpp"
#include "crtm/network.hpp"
#include "crtm/relational.hpp"
#include "crtm/topics.hpp"

namespace crtm {

enum class Variant { crtm, crtm_1, crtm_u, crtm_p, crtm_i, rtm_trick };

struct VariantTag {
  Variant kind = Variant::crtm;
  double sigma = 3.0;  // CRTM_P only

  bool operator==(const VariantTag&) const = default;
};

inline std::string to_string(const VariantTag& v) {
  switch (v.kind) {
    case Variant::crtm: return "crtm";
    case Variant::crtm_1: return "crtm_1";
    case Variant::crtm_u: return "crtm_u";
    case Variant::crtm_p: return v.sigma == 3.0 ? "crtm_p" : "crtm_p:" + std::to_string(v.sigma);
    case Variant::crtm_i: return "crtm_i";
    case Variant::rtm_trick: return "rtm_trick";
  }
  return "?";
}

// Accepts crtm, crtm_1, crtm_u, crtm_p[:sigma], crtm_i, rtm_trick.
inline VariantTag variant_from_string(const std::string& s) {
  if (s == "crtm") return {Variant::crtm};
  if (s == "crtm_1") return {Variant::crtm_1};
  if (s == "crtm_u") return {Variant::crtm_u};
  if (s == "crtm_i") return {Variant::crtm_i};
  if (s == "rtm_trick") return {Variant::rtm_trick};
  if (s == "crtm_p") return {Variant::crtm_p, 3.0};
  if (s.rfind("crtm_p:", 0) == 0) {
    double sigma = 0.0;
    try {
      sigma = std::stod(s.substr(7));
    } catch (const std::exception&) {
      throw Error("bad sigma in variant '" + s + "'");
    }
    if (!(sigma > 0.0)) throw Error("CRTM_P needs sigma > 0");
    return {Variant::crtm_p, sigma};
  }
  throw Error("unknown variant '" + s + "'");
}

inline bool needs_embeddings(const VariantTag& v) { return v.kind == Variant::crtm || v.kind == Variant::crtm_i; }

struct RankedWord {
  WordId word = 0;
  std::size_t position = 0;
  double score = 0.0;  // psi
};

// Source words ordered by their best-position link score for one target.
struct AnchorRanking {
  DocId source = 0;
  DocId target = 0;
  VariantTag variant;
  std::vector<RankedWord> entries;

  // 1-based rank of the best-placed word of `truth`, 0 if none appears.
  std::size_t rank_of(std::span<const WordId> truth) const {
    for (std::size_t r = 0; r < entries.size(); ++r)
      if (std::find(truth.begin(), truth.end(), entries[r].word) != truth.end()) return r + 1;
    return 0;
  }
};

namespace detail {

inline void check_model_matches(const Model& model, const DocumentNetwork& net) {
  if (model.topics.vocab_size() != net.vocab.size() || model.vocab_hash != net.vocab.hash())
    throw Error("model vocabulary does not match the network's vocabulary");
  if (model.state.docs.size() > net.docs.size())
    throw Error("model state covers " + std::to_string(model.state.docs.size()) + " documents, network has " +
                std::to_string(net.docs.size()));
}

inline bool has_state(const Model& model, const DocumentNetwork& net, DocId d) {
  return d < model.state.docs.size() && model.state.docs[d].phi.rows() == net.docs.at(d).size();
}

}  // namespace detail

// log psi for every token position of `source` as a candidate anchor for `target`.
inline std::vector<double> token_log_scores(const Model& model, const DocumentNetwork& net,
                                            const EmbeddingTable* embeddings, DocId source, DocId target,
                                            const VariantTag& variant) {
  detail::check_model_matches(model, net);
  if (source >= net.docs.size() || target >= net.docs.size()) throw Error("document index out of range");
  for (DocId d : {source, target})
    if (!detail::has_state(model, net, d)) throw Error("document " + net.docs[d].name + " has no inferred state");
  if (needs_embeddings(variant) && !embeddings) throw Error("variant " + to_string(variant) + " needs embeddings");

  const auto& doc = net.docs[source];
  const auto& state = model.state.docs[source];
  const auto& target_mean = model.state.docs[target].phibar;
  const auto& link = model.link;
  const Matrix identity = Matrix::identity(model.topics.num_topics);
  const Matrix& q = variant.kind == Variant::crtm_i ? identity : link.q;

  std::vector<double> scores(doc.size());
  for (const auto& sentence : doc.sentences) {
    std::vector<std::size_t> positions;
    std::vector<WordId> words;
    for (std::size_t j = sentence.begin; j < sentence.end; ++j) {
      positions.push_back(j);
      words.push_back(doc.tokens[j]);
    }
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      const auto phi_i = state.phi.row(i);
      switch (variant.kind) {
        case Variant::rtm_trick: {
          double acc = 0.0;
          for (std::size_t k = 0; k < link.eta.size(); ++k) acc += link.eta[k] * (phi_i[k] * target_mean[k]);
          scores[i] = acc + link.nu;
          break;
        }
        case Variant::crtm_1:
        case Variant::crtm_u:
          scores[i] = log_link_score(phi_i, target_mean, link.eta, link.nu, q);
          break;
        case Variant::crtm_p: {
          const auto w = positional_weights(i, positions, variant.sigma);
          scores[i] = log_link_score(context_topic_average(w, state.phi, positions), target_mean, link.eta, link.nu, q);
          break;
        }
        case Variant::crtm:
        case Variant::crtm_i: {
          const auto a = attention_over(*embeddings, (*embeddings)[doc.tokens[i]], words);
          scores[i] = log_link_score(context_topic_average(a, state.phi, positions), target_mean, link.eta, link.nu, q);
          break;
        }
      }
    }
  }
  return scores;
}

// Ranks the words of `source` by how likely they are to carry the link to
// `target`. Each word keeps its best-scoring position; ties are broken by
// lower position, then lower word id.
inline AnchorRanking rank_anchors(const Model& model, const DocumentNetwork& net, const EmbeddingTable* embeddings,
                                  DocId source, DocId target, const VariantTag& variant) {
  const auto log_scores = token_log_scores(model, net, embeddings, source, target, variant);
  const auto& doc = net.docs[source];

  struct Best {
    double log_score;
    std::size_t position;
  };
  std::unordered_map<WordId, Best> best;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    auto [it, inserted] = best.try_emplace(doc.tokens[i], Best{log_scores[i], i});
    if (!inserted && log_scores[i] > it->second.log_score) it->second = {log_scores[i], i};
  }

  struct Row {
    WordId word;
    Best best;
  };
  std::vector<Row> rows;
  rows.reserve(best.size());
  for (const auto& [w, b] : best) rows.push_back({w, b});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.best.log_score != b.best.log_score) return a.best.log_score > b.best.log_score;
    if (a.best.position != b.best.position) return a.best.position < b.best.position;
    return a.word < b.word;
  });

  AnchorRanking ranking{source, target, variant, {}};
  ranking.entries.reserve(rows.size());
  for (const auto& r : rows) {
    const double psi = std::exp(r.best.log_score);
    if (!std::isfinite(psi)) throw NumericError("rank_anchors: non-finite link score");
    ranking.entries.push_back({r.word, r.best.position, psi});
  }
  return ranking;
}

// {"source", "target", "variant", "ranking": [[word, position, score], ...]}
inline nlohmann::json ranking_to_json(const AnchorRanking& r, const DocumentNetwork& net, std::size_t top_n) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.entries.size() && i < top_n; ++i) {
    const auto& e = r.entries[i];
    rows.push_back({net.vocab.word(e.word), e.position, e.score});
  }
  return {{"source", net.docs[r.source].name},
          {"target", net.docs[r.target].name},
          {"variant", to_string(r.variant)},
          {"ranking", rows}};
}

// Whole-document link score, Q unused.
inline double link_probability(const Model& model, DocId d, DocId d_prime) {
  return rtm_link_score(model.state.docs.at(d).phibar, model.state.docs.at(d_prime).phibar, model.link.eta,
                        model.link.nu);
}

// Fold-in inference for a document with beta frozen and no relational
// term. Runs phi/gamma sweeps until the L1 change of gamma drops below
// `tolerance`.
inline DocState infer_heldout_state(const Model& model, std::span<const WordId> tokens, double tolerance = 1e-4,
                                    std::size_t max_iterations = 1000) {
  std::vector<WordId> known;
  for (WordId w : tokens)
    if (w < model.topics.vocab_size()) known.push_back(w);
  if (known.empty()) throw Error("infer_heldout_state: every token is out of vocabulary");

  const std::size_t k = model.topics.num_topics;
  const LogBeta log_beta(model.topics.beta);
  DocState s;
  s.phi = Matrix(known.size(), k, 1.0 / static_cast<double>(k));
  s.gamma.assign(k, model.topics.alpha + static_cast<double>(known.size()) / static_cast<double>(k));
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const auto elog = expected_log_theta(s.gamma);
    for (std::size_t i = 0; i < known.size(); ++i) phi_row_into(log_beta.column(known[i]), elog, {}, s.phi.row(i));
    auto gamma = update_gamma(s.phi, model.topics.alpha);
    double change = 0.0;
    for (std::size_t t = 0; t < k; ++t) change += std::abs(gamma[t] - s.gamma[t]);
    s.gamma = std::move(gamma);
    if (change < tolerance) break;
  }
  recompute_phibar(s);
  return s;
}

// Overload for raw words; words outside `vocab` are skipped.
inline DocState infer_heldout_state(const Model& model, const Vocabulary& vocab, std::span<const std::string> words,
                                    double tolerance = 1e-4) {
  std::vector<WordId> ids;
  for (const auto& w : words)
    if (auto id = vocab.find(w)) ids.push_back(*id);
  return infer_heldout_state(model, ids, tolerance);
}

}  // namespace crtm
