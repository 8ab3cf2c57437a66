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

// End-to-end demo on a planted corpus: generate, embed, train CRTM and
// RTM, then rank anchor words for a few held-out links.

#include <cstdio>
#include <string>
#include <tuple>

#include "crtm/crtm.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;

  crtm::PlantedOptions o;
  o.num_docs = 200;
  o.vocab_size = 500;
  o.mean_length = 60;
  o.seed = seed;
  const auto corpus = crtm::generate_planted_corpus(o);
  const auto& net = corpus.network;
  const auto split = crtm::make_anchor_split(net, seed);
  std::printf("%zu documents, %zu words, %zu links (%zu held out)\n", net.docs.size(), net.vocab.size(),
              net.links.size(), split.test.size());

  crtm::SgnsOptions so;
  so.seed = seed;
  const auto emb = crtm::train_sgns(net, so);

  crtm::TrainConfig c;
  c.num_topics = 10;
  c.alpha = 0.5;
  c.seed = seed;
  crtm::TrainConfig r = crtm::TrainConfig::rtm();
  r.num_topics = c.num_topics;
  r.alpha = c.alpha;
  r.seed = seed;
  const auto crtm_fit = crtm::fit(net, split, &emb, c);
  const auto rtm_fit = crtm::fit(net, split, nullptr, r);
  std::printf("crtm: %zu iterations (%s)\nrtm:  %zu iterations (%s)\n", crtm_fit.report.iterations,
              crtm_fit.report.stop_reason.c_str(), rtm_fit.report.iterations, rtm_fit.report.stop_reason.c_str());

  const auto crtm_tag = crtm::variant_from_string("crtm");
  const auto rtm_tag = crtm::variant_from_string("rtm_trick");
  for (std::size_t i = 0; i < 3 && i < split.test.size(); ++i) {
    const auto& link = net.links[split.test[i]];
    const auto& doc = net.docs[link.source];
    std::string anchor;
    for (std::size_t t = link.span.begin; t < link.span.end; ++t) anchor += net.vocab.word(doc.tokens[t]) + " ";
    std::printf("\n%s -> %s, true anchor: %s\n", doc.title.c_str(), net.docs[link.target].title.c_str(),
                anchor.c_str());
    using Row = std::tuple<const char*, const crtm::Model*, crtm::VariantTag, const crtm::EmbeddingTable*>;
    for (const auto& [name, model, tag, e] :
         {Row{"crtm", &crtm_fit.model, crtm_tag, &emb}, Row{"rtm ", &rtm_fit.model, rtm_tag, nullptr}}) {
      const auto ranking = crtm::rank_anchors(*model, net, e, link.source, link.target, tag);
      std::printf("  %s top 5:", name);
      for (std::size_t k = 0; k < 5 && k < ranking.entries.size(); ++k)
        std::printf(" %s", net.vocab.word(ranking.entries[k].word).c_str());
      std::printf("\n");
    }
  }

  const std::vector<crtm::VariantTag> variants{crtm_tag};
  const auto report = crtm::run_anchor_eval(crtm_fit.model, net, split, &emb, variants);
  std::printf("\ncrtm P@1 %.3f, P@5 %.3f over %zu held-out links\n", report.variants[0].precision(1).mean,
              report.variants[0].precision(5).mean, report.variants[0].runs[0].evaluated);
  return 0;
}
