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

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtm/config.hpp"
#include "crtm/relational.hpp"
#include "crtm/topics.hpp"

namespace crtm {

// Everything needed to score anchors and links for the training documents.
struct Model {
  TopicModelParams topics;
  LinkParams link;
  VariationalState state;
  TrainConfig config;
  std::uint64_t vocab_hash = 0;
  // Documents whose outgoing links were withheld from training.
  std::vector<std::string> stripped_sources;
};

inline nlohmann::json model_to_json(const Model& m) {
  nlohmann::json state = nlohmann::json::array();
  for (const auto& d : m.state.docs)
    state.push_back({{"gamma", d.gamma}, {"phi", d.phi.data()}});
  return {{"format", "crtm-model-1"},
          {"topics", m.topics.num_topics},
          {"alpha", m.topics.alpha},
          {"vocab_size", m.topics.vocab_size()},
          {"vocab_hash", m.vocab_hash},
          {"beta", m.topics.beta.data()},
          {"eta", m.link.eta},
          {"nu", m.link.nu},
          {"q", m.link.q.data()},
          {"rho", m.link.rho},
          {"learning_rate", m.link.learning_rate},
          {"config", m.config.to_json()},
          {"stripped_sources", m.stripped_sources},
          {"state", state}};
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "crtm-model-1") throw ParseError("unsupported model format");
    Model m;
    const auto k = j.at("topics").get<std::size_t>();
    const auto v = j.at("vocab_size").get<std::size_t>();
    m.topics.num_topics = k;
    m.topics.alpha = j.at("alpha").get<double>();
    m.topics.beta = Matrix(k, v);
    m.topics.beta.data() = j.at("beta").get<std::vector<double>>();
    m.vocab_hash = j.at("vocab_hash").get<std::uint64_t>();
    m.link.eta = j.at("eta").get<std::vector<double>>();
    m.link.nu = j.at("nu").get<double>();
    m.link.q = Matrix(k, k);
    m.link.q.data() = j.at("q").get<std::vector<double>>();
    m.link.rho = j.at("rho").get<std::size_t>();
    m.link.learning_rate = j.at("learning_rate").get<double>();
    m.config = TrainConfig::from_json(j.at("config"));
    m.stripped_sources = j.at("stripped_sources").get<std::vector<std::string>>();
    if (m.topics.beta.data().size() != k * v || m.link.q.data().size() != k * k || m.link.eta.size() != k)
      throw ParseError("model arrays have inconsistent sizes");
    for (const auto& d : j.at("state")) {
      DocState s;
      s.gamma = d.at("gamma").get<std::vector<double>>();
      auto phi = d.at("phi").get<std::vector<double>>();
      if (s.gamma.size() != k || phi.size() % k != 0 || phi.empty())
        throw ParseError("model state has inconsistent sizes");
      s.phi = Matrix(phi.size() / k, k);
      s.phi.data() = std::move(phi);
      recompute_phibar(s);
      m.state.docs.push_back(std::move(s));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model bundle: ") + e.what());
  }
}

inline void save_model(const std::string& path, const Model& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << model_to_json(m).dump() << '\n';
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace crtm
