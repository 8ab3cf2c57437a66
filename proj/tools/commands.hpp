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

// Subcommand implementations of the crtm tool. Each returns the process
// exit code and writes diagnostics to `err`.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtm/crtm.hpp"

namespace crtm::cli {

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Resolves a document by id, then by exact title. Throws with the three
// closest titles when neither matches.
inline DocId resolve_doc(const DocumentNetwork& net, const std::string& key) {
  if (auto d = net.find_doc(key)) return *d;
  for (std::size_t d = 0; d < net.docs.size(); ++d)
    if (net.docs[d].title == key) return static_cast<DocId>(d);
  std::vector<std::pair<std::size_t, std::size_t>> scored;
  for (std::size_t d = 0; d < net.docs.size(); ++d)
    scored.emplace_back(std::min(edit_distance(key, net.docs[d].name), edit_distance(key, net.docs[d].title)), d);
  std::sort(scored.begin(), scored.end());
  std::string msg = "unknown document '" + key + "'";
  if (!scored.empty()) {
    msg += "; nearest titles:";
    for (std::size_t i = 0; i < scored.size() && i < 3; ++i) {
      const auto& doc = net.docs[scored[i].second];
      msg += (i ? ", " : " ") + doc.title + " (" + doc.name + ")";
    }
  }
  throw Error(msg);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace detail

struct IngestArgs {
  std::string corpus;
  std::size_t min_count = 1;
  std::string out;
  std::string report;
};

inline int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::ifstream in(a.corpus);
    if (!in) throw Error("cannot open corpus " + a.corpus);
    const auto raw = read_corpus_jsonl(in);
    auto result = build_network(raw, a.min_count);
    for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
    save_network(a.out, result.network);
    const auto report = result.report.to_json().dump(2) + "\n";
    if (!a.report.empty()) detail::write_text(a.report, report);
    out << report;
  });
}

struct SplitArgs {
  std::string network;
  std::string task = "anchor";
  double fraction = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto net = load_network(a.network);
    const auto task = split_task_from_string(a.task);
    const auto split =
        task == SplitTask::anchor_prediction ? make_anchor_split(net, a.seed) : make_edge_split(net, a.fraction, a.seed);
    for (const auto& w : split.warnings) err << "warning: " << w << '\n';
    detail::write_text(a.out, split.to_json().dump() + "\n");
    out << "train " << split.train.size() << ", validation " << split.validation.size() << ", test "
        << split.test.size() << '\n';
  });
}

struct EmbedArgs {
  std::string network;
  std::string out;
  SgnsOptions sgns;
};

inline int cmd_embed(const EmbedArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto net = load_network(a.network);
    const auto table = train_sgns(net, a.sgns);
    std::ostringstream text;
    save_embeddings(text, table, net.vocab);
    detail::write_text(a.out, text.str());
    out << "embedded " << table.size() << " words in " << table.dim() << " dimensions\n";
  });
}

// Training configuration of each model variant.
inline TrainConfig variant_config(const std::string& variant, TrainConfig base) {
  if (variant == "rtm") {
    base.context = ContextMode::whole_document;
    base.q_mode = QMode::identity;
    return base;
  }
  base.q_mode = QMode::learned;
  if (variant == "crtm") base.context = ContextMode::sentence;
  else if (variant == "crtm_1") base.context = ContextMode::singleton;
  else if (variant == "crtm_u") base.context = ContextMode::uniform;
  else if (variant == "crtm_p") base.context = ContextMode::positional;
  else if (variant == "crtm_i") {
    base.context = ContextMode::sentence;
    base.q_mode = QMode::identity;
  } else {
    throw Error("unknown variant '" + variant + "' (expected crtm, crtm_1, crtm_u, crtm_p, crtm_i or rtm)");
  }
  return base;
}

struct TrainArgs {
  std::string network;
  std::string split;
  std::string config;  // optional key = value file
  std::string variant = "crtm";
  std::string embeddings;
  std::vector<std::string> strip_sources;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> topics;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> threads;
  std::string out;
  std::string log;
};

inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    TrainConfig config;
    if (!a.config.empty()) {
      std::ifstream in(a.config);
      if (!in) throw Error("cannot open config " + a.config);
      config = parse_train_config(in);
    }
    config = variant_config(a.variant, config);
    if (a.seed) config.seed = *a.seed;
    if (a.topics) config.num_topics = *a.topics;
    if (a.max_iterations) config.max_iterations = *a.max_iterations;
    if (a.threads) config.threads = *a.threads;
    config.validate();

    const auto net = load_network(a.network);
    auto split = SplitSpec::from_json(detail::read_json(a.split));
    split.check_partition(net.links.size());

    std::optional<LoadedEmbeddings> emb;
    if (needs_embeddings(config.context)) {
      if (a.embeddings.empty())
        throw Error("variant '" + a.variant + "' uses attention and needs --embeddings");
      emb = load_embeddings_file(a.embeddings, net.vocab);
    } else if (!a.embeddings.empty()) {
      emb = load_embeddings_file(a.embeddings, net.vocab);
    }

    // Links leaving stripped sources move from train to test.
    std::vector<std::string> stripped;
    if (!a.strip_sources.empty()) {
      std::set<DocId> drop;
      for (const auto& key : a.strip_sources) {
        const DocId d = detail::resolve_doc(net, key);
        drop.insert(d);
        stripped.push_back(net.docs[d].name);
      }
      std::vector<std::size_t> kept;
      for (std::size_t l : split.train) (drop.count(net.links[l].source) ? split.test : kept).push_back(l);
      split.train = std::move(kept);
      std::sort(split.test.begin(), split.test.end());
      std::sort(stripped.begin(), stripped.end());
      stripped.erase(std::unique(stripped.begin(), stripped.end()), stripped.end());
    }

    auto result = fit(net, split, emb ? &emb->table : nullptr, config);
    result.model.stripped_sources = stripped;
    for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
    save_model(a.out, result.model);
    if (!a.log.empty()) detail::write_text(a.log, "iter, val_score, e_ms, m_ms\n" + result.report.log());
    out << "trained " << result.report.iterations << " iterations (" << result.report.stop_reason << "), best "
        << result.report.best_iteration << '\n';
  });
}

struct PredictArgs {
  std::string model;
  std::string network;
  std::string embeddings;
  std::string source;
  std::string target;
  std::string variant = "crtm";
  std::size_t top = 5;
  bool strip_links = false;
};

inline int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto net = load_network(a.network);
    const auto model = load_model(a.model);
    const DocId s = detail::resolve_doc(net, a.source);
    const DocId t = detail::resolve_doc(net, a.target);
    if (s == t) throw Error("source and target are the same document");
    if (a.top == 0) throw Error("--top must be at least 1");
    if (a.strip_links) {
      const auto& name = net.docs[s].name;
      if (std::find(model.stripped_sources.begin(), model.stripped_sources.end(), name) ==
          model.stripped_sources.end())
        throw Error("--strip-links: the model was trained with the links of " + name +
                    "; retrain with --strip-source " + name);
    }
    const auto variant = variant_from_string(a.variant);
    std::optional<LoadedEmbeddings> emb;
    if (needs_embeddings(variant)) {
      if (a.embeddings.empty()) throw Error("variant '" + a.variant + "' needs --embeddings");
      emb = load_embeddings_file(a.embeddings, net.vocab);
    }
    const auto ranking = rank_anchors(model, net, emb ? &emb->table : nullptr, s, t, variant);
    out << ranking_to_json(ranking, net, a.top).dump(2) << '\n';
  });
}

struct EvalArgs {
  std::vector<std::string> models;  // one run per model
  std::string network;
  std::string split;
  std::string embeddings;
  std::string task = "anchor";
  std::vector<std::string> variants{"crtm", "rtm_trick"};
  std::vector<std::uint64_t> seeds{1};  // negative sampling seeds, link task
  std::size_t negatives = 10;
  std::string out;  // report prefix
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (a.models.empty()) throw Error("eval needs at least one --model");
    const auto net = load_network(a.network);
    const auto split = SplitSpec::from_json(detail::read_json(a.split));
    split.check_partition(net.links.size());
    const auto task = split_task_from_string(a.task);
    if (split.task != task)
      throw Error("split was made for the " + to_string(split.task) + " task, not " + to_string(task));
    if (split.test.empty()) throw Error("the split has no test links to evaluate");

    EvalReport report;
    report.task = task;
    if (task == SplitTask::anchor_prediction) {
      std::vector<VariantTag> variants;
      bool embeddings_needed = false;
      for (const auto& v : a.variants) {
        variants.push_back(variant_from_string(v));
        embeddings_needed |= needs_embeddings(variants.back());
      }
      std::optional<LoadedEmbeddings> emb;
      if (embeddings_needed) {
        if (a.embeddings.empty()) throw Error("attention variants need --embeddings");
        emb = load_embeddings_file(a.embeddings, net.vocab);
      }
      for (const auto& path : a.models)
        report.merge(run_anchor_eval(load_model(path), net, split, emb ? &emb->table : nullptr, variants));
    } else {
      for (const auto& path : a.models) {
        const auto model = load_model(path);
        for (auto seed : a.seeds) report.merge(run_link_eval(model, net, split, a.negatives, seed));
      }
    }
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    const auto json = report.to_json().dump(2) + "\n";
    if (!a.out.empty()) {
      detail::write_text(a.out + ".json", json);
      detail::write_text(a.out + ".csv", report.csv());
      if (task == SplitTask::anchor_prediction)
        for (const auto& v : report.variants) detail::write_text(a.out + "_roc_" + v.variant + ".csv", roc_csv(v.roc()));
    }
    out << json;
  });
}

struct SynthArgs {
  PlantedOptions options;
  std::string out;    // JSONL corpus
  std::string truth;  // optional ground truth JSON
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto corpus = generate_planted_corpus(a.options);
    std::ostringstream text;
    write_corpus_jsonl(text, to_markup(corpus.network));
    detail::write_text(a.out, text.str());
    if (!a.truth.empty()) {
      nlohmann::json anchors = nlohmann::json::array();
      for (std::size_t l = 0; l < corpus.network.links.size(); ++l) {
        const auto& link = corpus.network.links[l];
        anchors.push_back({{"source", corpus.network.docs[link.source].name},
                           {"target", corpus.network.docs[link.target].name},
                           {"word", corpus.network.vocab.word(corpus.network.docs[link.source].tokens[link.span.begin])},
                           {"topic", corpus.anchor_topic[l]}});
      }
      const nlohmann::json truth = {{"alpha", corpus.alpha},
                                    {"topics", a.options.num_topics},
                                    {"beta", corpus.beta.data()},
                                    {"theta", corpus.theta},
                                    {"anchors", anchors}};
      detail::write_text(a.truth, truth.dump() + "\n");
    }
    out << "generated " << corpus.network.docs.size() << " documents, " << corpus.network.links.size() << " links\n";
  });
}

}  // namespace crtm::cli
