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
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crtm/common.hpp"
#include "crtm/markup.hpp"
#include "crtm/tokenize.hpp"

namespace crtm {

using WordId = std::uint32_t;
using DocId = std::uint32_t;

class Vocabulary {
 public:
  std::size_t size() const { return words_.size(); }

  // Returns the id of `word`, adding it if absent.
  WordId add(const std::string& word, std::uint64_t count = 0) {
    auto [it, inserted] = index_.try_emplace(word, static_cast<WordId>(words_.size()));
    if (inserted) {
      words_.push_back(word);
      counts_.push_back(0);
    }
    counts_[it->second] += count;
    return it->second;
  }

  std::optional<WordId> find(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  std::uint64_t hash() const {
    std::uint64_t h = fnv1a("");
    for (const auto& w : words_) {
      h = fnv1a(w, h);
      h = fnv1a("\n", h);
    }
    return h;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
};

struct Document {
  std::string name;  // external id
  std::string title;
  std::vector<WordId> tokens;
  std::vector<TokenRange> sentences;

  std::size_t size() const { return tokens.size(); }

  // Index of the sentence containing token `pos`.
  std::size_t sentence_of(std::size_t pos) const {
    auto it = std::upper_bound(sentences.begin(), sentences.end(), pos,
                               [](std::size_t p, const TokenRange& r) { return p < r.end; });
    if (it == sentences.end() || !it->contains(pos)) throw Error("token position outside every sentence");
    return static_cast<std::size_t>(it - sentences.begin());
  }
};

struct AnchorLink {
  DocId source = 0;
  DocId target = 0;
  TokenRange span;
  std::size_t sentence = 0;
};

struct DocumentNetwork {
  Vocabulary vocab;
  std::vector<Document> docs;
  std::vector<AnchorLink> links;

  std::optional<DocId> find_doc(const std::string& name) const {
    for (std::size_t i = 0; i < docs.size(); ++i)
      if (docs[i].name == name) return static_cast<DocId>(i);
    return std::nullopt;
  }

  // Throws Error describing the first violated structural invariant.
  void validate() const {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto& doc = docs[d];
      if (doc.tokens.empty()) throw Error("document " + doc.name + " is empty");
      std::size_t expect = 0;
      for (const auto& s : doc.sentences) {
        if (s.begin != expect || s.empty()) throw Error("sentence ranges of " + doc.name + " do not tile the tokens");
        expect = s.end;
      }
      if (expect != doc.tokens.size()) throw Error("sentence ranges of " + doc.name + " do not cover the tokens");
      for (WordId w : doc.tokens)
        if (w >= vocab.size()) throw Error("token id out of vocabulary range in " + doc.name);
    }
    for (std::size_t l = 0; l < links.size(); ++l) {
      const auto& link = links[l];
      if (link.source >= docs.size() || link.target >= docs.size())
        throw Error("link " + std::to_string(l) + " has a missing endpoint");
      if (link.source == link.target) throw Error("link " + std::to_string(l) + " is a self link");
      const auto& src = docs[link.source];
      if (link.span.empty() || link.sentence >= src.sentences.size() ||
          !src.sentences[link.sentence].contains(link.span))
        throw Error("link " + std::to_string(l) + " span is not inside its sentence");
    }
  }
};

struct RawDocument {
  std::string id;
  std::string title;
  std::string text;
};

struct IngestReport {
  std::size_t docs = 0;
  std::size_t links = 0;
  std::size_t unresolved = 0;
  std::size_t pruned_anchors = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    return {{"docs", docs}, {"links", links}, {"unresolved", unresolved}, {"pruned_anchors", pruned_anchors}};
  }
};

struct IngestResult {
  DocumentNetwork network;
  IngestReport report;
};

// Parses, tokenizes and prunes a raw corpus into a document network.
// Link targets are resolved by exact title match. Words with corpus
// frequency below `min_count` are removed; anchors that lose all their
// tokens are dropped, as are documents left empty together with their links.
inline IngestResult build_network(std::span<const RawDocument> raw, std::size_t min_count) {
  IngestResult result;
  auto& report = result.report;

  std::unordered_map<std::string, std::size_t> by_id;
  std::unordered_map<std::string, std::size_t> by_title;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!by_id.emplace(raw[i].id, i).second) throw Error("duplicate document id '" + raw[i].id + "'");
    if (!by_title.emplace(raw[i].title, i).second)
      report.warnings.push_back("duplicate title '" + raw[i].title + "', first document wins");
  }

  struct PendingLink {
    std::size_t source, target;
    TokenRange span;  // over the unpruned tokens
  };
  std::vector<TokenizedText> texts(raw.size());
  std::vector<PendingLink> pending;

  for (std::size_t i = 0; i < raw.size(); ++i) {
    MarkupResult markup = parse_markup(raw[i].text);
    for (auto& w : markup.warnings) report.warnings.push_back(raw[i].id + ": " + w);
    std::vector<ByteRange> anchors;
    anchors.reserve(markup.links.size());
    for (const auto& l : markup.links) anchors.push_back({l.begin, l.end});
    texts[i] = tokenize_and_segment(markup.plain, anchors);
    const auto& offsets = texts[i].offsets;

    for (const auto& l : markup.links) {
      auto target = by_title.find(l.target);
      if (target == by_title.end() || target->second == i) {
        ++report.unresolved;
        continue;
      }
      TokenRange span{offsets.size(), offsets.size()};
      for (std::size_t t = 0; t < offsets.size(); ++t) {
        if (offsets[t].end > l.begin && offsets[t].begin < l.end) {
          span.begin = std::min(span.begin, t);
          span.end = t + 1;
        }
      }
      if (span.end <= span.begin) {
        ++report.pruned_anchors;
        continue;
      }
      pending.push_back({i, target->second, span});
    }
  }

  // Corpus frequencies, vocabulary in first-occurrence order.
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& t : texts)
    for (const auto& tok : t.tokens) ++freq[tok];
  auto& vocab = result.network.vocab;
  for (const auto& t : texts)
    for (const auto& tok : t.tokens)
      if (freq[tok] >= min_count && !vocab.find(tok)) vocab.add(tok, freq[tok]);

  // Prune tokens and re-index sentences and spans.
  std::vector<Document> docs(raw.size());
  std::vector<std::vector<std::size_t>> new_index(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& doc = docs[i];
    doc.name = raw[i].id;
    doc.title = raw[i].title;
    const auto& t = texts[i];
    auto& remap = new_index[i];
    remap.resize(t.tokens.size() + 1);
    for (std::size_t k = 0; k < t.tokens.size(); ++k) {
      remap[k] = doc.tokens.size();
      if (auto id = vocab.find(t.tokens[k])) doc.tokens.push_back(*id);
    }
    remap[t.tokens.size()] = doc.tokens.size();
    for (const auto& s : t.sentences) {
      TokenRange r{remap[s.begin], remap[s.end]};
      if (!r.empty()) doc.sentences.push_back(r);
    }
  }

  std::vector<std::optional<DocId>> doc_map(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (docs[i].tokens.empty()) {
      report.warnings.push_back("document '" + raw[i].id + "' is empty after pruning, dropped");
      continue;
    }
    doc_map[i] = static_cast<DocId>(result.network.docs.size());
    result.network.docs.push_back(std::move(docs[i]));
  }

  for (const auto& p : pending) {
    TokenRange span{new_index[p.source][p.span.begin], new_index[p.source][p.span.end]};
    if (span.empty() || !doc_map[p.source]) {
      ++report.pruned_anchors;
      continue;
    }
    if (!doc_map[p.target]) {
      ++report.unresolved;
      continue;
    }
    AnchorLink link;
    link.source = *doc_map[p.source];
    link.target = *doc_map[p.target];
    link.span = span;
    link.sentence = result.network.docs[link.source].sentence_of(span.begin);
    result.network.links.push_back(link);
  }

  report.docs = result.network.docs.size();
  report.links = result.network.links.size();
  return result;
}

// Reads one JSON object {"id", "title", "text"} per line. Blank lines are
// skipped. Throws ParseError naming the 1-based line number.
inline std::vector<RawDocument> read_corpus_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      docs.push_back({j.at("id").get<std::string>(), j.at("title").get<std::string>(),
                      j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

// Binary network file. Little-endian host layout; the magic guards against
// feeding the wrong file.
namespace detail {

constexpr char kNetworkMagic[8] = {'C', 'R', 'T', 'M', 'N', 'E', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated binary file");
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw ParseError("implausible string length in binary file");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw ParseError("truncated binary file");
  return s;
}

}  // namespace detail

inline void write_network(std::ostream& out, const DocumentNetwork& net) {
  using namespace detail;
  out.write(kNetworkMagic, sizeof(kNetworkMagic));
  write_pod<std::uint64_t>(out, net.vocab.size());
  for (WordId w = 0; w < net.vocab.size(); ++w) {
    write_string(out, net.vocab.word(w));
    write_pod<std::uint64_t>(out, net.vocab.count(w));
  }
  write_pod<std::uint64_t>(out, net.docs.size());
  for (const auto& d : net.docs) {
    write_string(out, d.name);
    write_string(out, d.title);
    write_pod<std::uint64_t>(out, d.tokens.size());
    for (WordId w : d.tokens) write_pod<std::uint32_t>(out, w);
    write_pod<std::uint64_t>(out, d.sentences.size());
    for (const auto& s : d.sentences) {
      write_pod<std::uint64_t>(out, s.begin);
      write_pod<std::uint64_t>(out, s.end);
    }
  }
  write_pod<std::uint64_t>(out, net.links.size());
  for (const auto& l : net.links) {
    write_pod<std::uint32_t>(out, l.source);
    write_pod<std::uint32_t>(out, l.target);
    write_pod<std::uint64_t>(out, l.span.begin);
    write_pod<std::uint64_t>(out, l.span.end);
    write_pod<std::uint64_t>(out, l.sentence);
  }
}

inline DocumentNetwork read_network(std::istream& in) {
  using namespace detail;
  char magic[sizeof(kNetworkMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kNetworkMagic)) throw ParseError("not a network file");
  DocumentNetwork net;
  const auto v = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < v; ++i) {
    auto w = read_string(in);
    const auto c = read_pod<std::uint64_t>(in);
    net.vocab.add(w, c);
  }
  const auto nd = read_pod<std::uint64_t>(in);
  net.docs.resize(nd);
  for (auto& d : net.docs) {
    d.name = read_string(in);
    d.title = read_string(in);
    d.tokens.resize(read_pod<std::uint64_t>(in));
    for (auto& w : d.tokens) w = read_pod<std::uint32_t>(in);
    d.sentences.resize(read_pod<std::uint64_t>(in));
    for (auto& s : d.sentences) {
      s.begin = read_pod<std::uint64_t>(in);
      s.end = read_pod<std::uint64_t>(in);
    }
  }
  net.links.resize(read_pod<std::uint64_t>(in));
  for (auto& l : net.links) {
    l.source = read_pod<std::uint32_t>(in);
    l.target = read_pod<std::uint32_t>(in);
    l.span.begin = read_pod<std::uint64_t>(in);
    l.span.end = read_pod<std::uint64_t>(in);
    l.sentence = read_pod<std::uint64_t>(in);
  }
  net.validate();
  return net;
}

inline void save_network(const std::string& path, const DocumentNetwork& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_network(out, net);
}

inline DocumentNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_network(in);
}

}  // namespace crtm
