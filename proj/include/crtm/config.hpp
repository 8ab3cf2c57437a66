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
#include <istream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "crtm/common.hpp"
#include "crtm/context.hpp"

namespace crtm {

enum class QMode { learned, identity };

// Which phi-update term the E-step applies for linked documents.
//   gradient: the derivative of the expected link term (default)
//   printed:  eta o (Q Q phibar_d) / N_d on every token of both endpoints
enum class PhiGradientMode { gradient, printed };

// Source-side vector entering Pi and the Q update.
enum class SourceSummary { context, document };

struct TrainConfig {
  std::size_t num_topics = 50;
  double alpha = 5.0;
  std::size_t rho = 2000;
  double learning_rate = 0.01;
  std::size_t max_iterations = 100;
  std::size_t patience = 3;
  std::uint64_t seed = 1;
  ContextMode context = ContextMode::sentence;
  double sigma = 3.0;
  QMode q_mode = QMode::learned;
  PhiGradientMode phi_gradient = PhiGradientMode::gradient;
  SourceSummary source_summary = SourceSummary::context;
  // Per-document E-step: at most `max_inner` phi/gamma sweeps, stopping
  // once no gamma component moves by more than `inner_tolerance`.
  std::size_t max_inner = 20;
  double inner_tolerance = 1e-3;
  double beta_jitter = 0.1;
  std::size_t threads = 1;

  // The plain relational topic model: whole-document context, uniform
  // weights and Q fixed to the identity.
  static TrainConfig rtm() {
    TrainConfig c;
    c.context = ContextMode::whole_document;
    c.q_mode = QMode::identity;
    return c;
  }

  nlohmann::json to_json() const {
    return {{"topics", num_topics},
            {"alpha", alpha},
            {"rho", rho},
            {"learning_rate", learning_rate},
            {"max_iterations", max_iterations},
            {"patience", patience},
            {"seed", seed},
            {"context", to_string(context)},
            {"sigma", sigma},
            {"q_mode", q_mode == QMode::learned ? "learned" : "identity"},
            {"phi_gradient", phi_gradient == PhiGradientMode::gradient ? "gradient" : "printed"},
            {"source_summary", source_summary == SourceSummary::context ? "context" : "document"},
            {"max_inner", max_inner},
            {"inner_tolerance", inner_tolerance},
            {"beta_jitter", beta_jitter},
            {"threads", threads}};
  }

  // Sets one key from its textual value. Throws Error on unknown keys or
  // unparsable values.
  void set(const std::string& key, const std::string& value) {
    auto as_size = [&] {
      std::size_t used = 0;
      const auto v = std::stoull(value, &used);
      if (used != value.size()) throw Error("bad integer for '" + key + "': " + value);
      return static_cast<std::size_t>(v);
    };
    auto as_double = [&] {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw Error("bad number for '" + key + "': " + value);
      return v;
    };
    try {
      if (key == "topics") num_topics = as_size();
      else if (key == "alpha") alpha = as_double();
      else if (key == "rho") rho = as_size();
      else if (key == "learning_rate") learning_rate = as_double();
      else if (key == "max_iterations") max_iterations = as_size();
      else if (key == "patience") patience = as_size();
      else if (key == "seed") seed = as_size();
      else if (key == "context") context = context_mode_from_string(value);
      else if (key == "sigma") sigma = as_double();
      else if (key == "q_mode") {
        if (value == "learned") q_mode = QMode::learned;
        else if (value == "identity") q_mode = QMode::identity;
        else throw Error("q_mode must be learned or identity");
      } else if (key == "phi_gradient") {
        if (value == "gradient") phi_gradient = PhiGradientMode::gradient;
        else if (value == "printed") phi_gradient = PhiGradientMode::printed;
        else throw Error("phi_gradient must be gradient or printed");
      } else if (key == "source_summary") {
        if (value == "context") source_summary = SourceSummary::context;
        else if (value == "document") source_summary = SourceSummary::document;
        else throw Error("source_summary must be context or document");
      } else if (key == "max_inner") max_inner = as_size();
      else if (key == "inner_tolerance") inner_tolerance = as_double();
      else if (key == "beta_jitter") beta_jitter = as_double();
      else if (key == "threads") threads = as_size();
      else throw Error("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw Error("bad value for '" + key + "': " + value);
    } catch (const std::out_of_range&) {
      throw Error("value out of range for '" + key + "': " + value);
    }
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    for (const auto& [key, value] : j.items())
      c.set(key, value.is_string() ? value.get<std::string>() : value.dump());
    return c;
  }

  void validate() const {
    if (num_topics < 2) throw Error("config: topics must be at least 2");
    if (!(alpha > 0.0)) throw Error("config: alpha must be positive");
    if (!(learning_rate >= 0.0)) throw Error("config: learning_rate must be non-negative");
    if (!(sigma > 0.0)) throw Error("config: sigma must be positive");
    if (max_iterations == 0) throw Error("config: max_iterations must be positive");
    if (patience == 0) throw Error("config: patience must be positive");
    if (threads == 0) throw Error("config: threads must be positive");
  }
};

// Flat "key = value" text, one pair per line; '#' starts a comment.
inline TrainConfig parse_train_config(std::istream& in, TrainConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw ParseError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

}  // namespace crtm
