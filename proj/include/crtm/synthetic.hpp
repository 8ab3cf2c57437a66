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
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "crtm/common.hpp"
#include "crtm/network.hpp"

namespace crtm {

struct PlantedOptions {
  std::size_t num_topics = 10;
  std::size_t vocab_size = 1000;
  std::size_t num_docs = 500;
  double mean_length = 80.0;
  std::size_t links_per_doc = 3;
  std::uint64_t seed = 1;
  double word_concentration = 0.05;   // symmetric Dirichlet for each beta* row
  double topic_concentration = 0.2;   // symmetric Dirichlet for each theta
  std::size_t anchor_pool = 5;        // anchors come from this many top words
  double context_coherence = 0.5;     // chance a neighbour is redrawn from the target topic
  std::size_t min_sentence = 6;
  std::size_t max_sentence = 14;
};

struct PlantedCorpus {
  DocumentNetwork network;
  Matrix beta;                                   // K x V ground truth
  double alpha = 0.0;
  std::vector<std::vector<double>> theta;        // per document
  std::vector<std::vector<std::size_t>> topics;  // per token
  std::vector<std::size_t> anchor_topic;         // per link
};

namespace detail {

inline std::vector<double> sample_dirichlet(std::mt19937_64& rng, std::size_t n, double concentration) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  // tiny concentrations can underflow every draw to zero; redraw
  while (total <= 0.0) {
    total = 0.0;
    for (auto& x : v) total += (x = g(rng));
  }
  for (auto& x : v) x /= total;
  return v;
}

inline std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace detail

// LDA corpus with planted anchors. For each link (d, d') one token of a
// sentence of d is replaced by one of the top words of the dominant topic
// of d', and every other token of that sentence is redrawn from that topic
// with probability `context_coherence`.
inline PlantedCorpus generate_planted_corpus(const PlantedOptions& opt) {
  if (opt.num_topics < 1 || opt.vocab_size < 2 || opt.num_docs < 2)
    throw Error("generate_planted_corpus: need K >= 1, V >= 2 and D >= 2");
  if (opt.mean_length < 1.0) throw Error("generate_planted_corpus: mean length must be at least 1");
  if (opt.links_per_doc >= opt.num_docs) throw Error("generate_planted_corpus: links per doc must be below D");
  if (opt.min_sentence < 1 || opt.max_sentence < opt.min_sentence)
    throw Error("generate_planted_corpus: bad sentence length range");
  if (opt.anchor_pool < 1) throw Error("generate_planted_corpus: anchor pool must be at least 1");

  std::mt19937_64 rng(opt.seed);
  const std::size_t K = opt.num_topics, V = opt.vocab_size, D = opt.num_docs;

  PlantedCorpus out;
  out.alpha = opt.topic_concentration;
  out.beta = Matrix(K, V);
  std::vector<std::discrete_distribution<std::size_t>> word_of(K);
  std::vector<std::vector<std::size_t>> top_words(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = detail::sample_dirichlet(rng, V, opt.word_concentration);
    std::copy(row.begin(), row.end(), out.beta.row(k).begin());
    word_of[k] = std::discrete_distribution<std::size_t>(row.begin(), row.end());
    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    order.resize(std::min(opt.anchor_pool, V));
    top_words[k] = std::move(order);
  }

  auto& net = out.network;
  const int width = V > 10000 ? static_cast<int>(std::to_string(V - 1).size()) : 4;
  for (std::size_t w = 0; w < V; ++w) net.vocab.add(detail::padded("w", w, width));

  std::poisson_distribution<std::size_t> length_of(opt.mean_length);
  std::uniform_int_distribution<std::size_t> sentence_length(opt.min_sentence, opt.max_sentence);
  for (std::size_t d = 0; d < D; ++d) {
    Document doc;
    doc.name = detail::padded("d", d, 4);
    doc.title = detail::padded("doc", d, 4);
    auto theta = detail::sample_dirichlet(rng, K, opt.topic_concentration);
    std::discrete_distribution<std::size_t> topic_of(theta.begin(), theta.end());
    const std::size_t n = std::max<std::size_t>(1, length_of(rng));
    std::vector<std::size_t> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = topic_of(rng);
      doc.tokens.push_back(static_cast<WordId>(word_of[z[i]](rng)));
    }
    for (std::size_t begin = 0; begin < n;) {
      const std::size_t end = std::min(n, begin + sentence_length(rng));
      doc.sentences.push_back({begin, end});
      begin = end;
    }
    net.docs.push_back(std::move(doc));
    out.theta.push_back(std::move(theta));
    out.topics.push_back(std::move(z));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t d = 0; d < D; ++d) {
    // distinct targets, drawn without replacement from the other documents
    std::vector<DocId> others;
    for (std::size_t e = 0; e < D; ++e)
      if (e != d) others.push_back(static_cast<DocId>(e));
    for (std::size_t i = 0; i < opt.links_per_doc; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
      std::swap(others[i], others[pick(rng)]);
    }
    auto& doc = net.docs[d];
    std::vector<std::size_t> sentence_order(doc.sentences.size());
    std::iota(sentence_order.begin(), sentence_order.end(), 0);
    std::shuffle(sentence_order.begin(), sentence_order.end(), rng);
    std::vector<std::size_t> used;
    const std::size_t first_link = net.links.size();

    for (std::size_t i = 0; i < opt.links_per_doc; ++i) {
      const DocId target = others[i];
      const auto& th = out.theta[target];
      const std::size_t topic = static_cast<std::size_t>(std::max_element(th.begin(), th.end()) - th.begin());
      const std::size_t s = sentence_order[i % sentence_order.size()];
      const auto range = doc.sentences[s];

      // position not already carrying an anchor
      std::vector<std::size_t> free;
      for (std::size_t p = range.begin; p < range.end; ++p)
        if (std::find(used.begin(), used.end(), p) == used.end()) free.push_back(p);
      if (free.empty()) continue;
      const std::size_t pos = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
      const auto& pool = top_words[topic];
      doc.tokens[pos] = static_cast<WordId>(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
      out.topics[d][pos] = topic;
      used.push_back(pos);

      for (std::size_t p = range.begin; p < range.end; ++p) {
        if (std::find(used.begin(), used.end(), p) != used.end()) continue;
        if (unit(rng) < opt.context_coherence) {
          doc.tokens[p] = static_cast<WordId>(word_of[topic](rng));
          out.topics[d][p] = topic;
        }
      }
      net.links.push_back({static_cast<DocId>(d), target, {pos, pos + 1}, s});
      out.anchor_topic.push_back(topic);
    }

    // text order, as ingestion of the rendered markup would produce
    std::vector<std::size_t> order(net.links.size() - first_link);
    std::iota(order.begin(), order.end(), first_link);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return net.links[a].span.begin < net.links[b].span.begin; });
    std::vector<AnchorLink> links;
    std::vector<std::size_t> topics;
    for (std::size_t i : order) {
      links.push_back(net.links[i]);
      topics.push_back(out.anchor_topic[i]);
    }
    std::copy(links.begin(), links.end(), net.links.begin() + static_cast<std::ptrdiff_t>(first_link));
    std::copy(topics.begin(), topics.end(), out.anchor_topic.begin() + static_cast<std::ptrdiff_t>(first_link));
  }

  // corpus frequencies
  std::vector<std::uint64_t> counts(V, 0);
  for (const auto& doc : net.docs)
    for (WordId w : doc.tokens) ++counts[w];
  Vocabulary vocab;
  for (std::size_t w = 0; w < V; ++w) vocab.add(net.vocab.word(static_cast<WordId>(w)), counts[w]);
  net.vocab = std::move(vocab);
  net.validate();
  return out;
}

// Renders the network as markup documents: one sentence per line, words
// separated by spaces, anchors written as [[target title|word]].
inline std::vector<RawDocument> to_markup(const DocumentNetwork& net) {
  std::vector<std::vector<const AnchorLink*>> by_source(net.docs.size());
  for (const auto& l : net.links) by_source[l.source].push_back(&l);
  std::vector<RawDocument> out;
  for (std::size_t d = 0; d < net.docs.size(); ++d) {
    const auto& doc = net.docs[d];
    std::string text;
    for (const auto& s : doc.sentences) {
      for (std::size_t i = s.begin; i < s.end; ++i) {
        if (i > s.begin) text += ' ';
        const AnchorLink* starts = nullptr;
        for (const auto* l : by_source[d])
          if (l->span.begin == i) starts = l;
        if (starts) {
          text += "[[" + net.docs[starts->target].title + "|";
          for (std::size_t j = starts->span.begin; j < starts->span.end; ++j) {
            if (j > starts->span.begin) text += ' ';
            text += net.vocab.word(doc.tokens[j]);
          }
          text += "]]";
          i = starts->span.end - 1;
        } else {
          text += net.vocab.word(doc.tokens[i]);
        }
      }
      text += ".\n";
    }
    out.push_back({doc.name, doc.title, std::move(text)});
  }
  return out;
}

inline void write_corpus_jsonl(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& d : docs) out << nlohmann::json{{"id", d.id}, {"title", d.title}, {"text", d.text}}.dump() << '\n';
}

}  // namespace crtm
