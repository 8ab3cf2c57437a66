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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtm/network.hpp"

namespace crtm {

enum class SplitTask { anchor_prediction, link_prediction };

inline std::string to_string(SplitTask t) {
  return t == SplitTask::anchor_prediction ? "anchor" : "link";
}

inline SplitTask split_task_from_string(const std::string& s) {
  if (s == "anchor") return SplitTask::anchor_prediction;
  if (s == "link") return SplitTask::link_prediction;
  throw Error("unknown task '" + s + "' (expected anchor or link)");
}

// Partition of link indices. The three sets are disjoint and cover every
// link of the network they were drawn from.
struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  SplitTask task = SplitTask::anchor_prediction;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    return {{"task", to_string(task)}, {"seed", seed}, {"train", train}, {"validation", validation}, {"test", test}};
  }

  static SplitSpec from_json(const nlohmann::json& j) {
    SplitSpec s;
    s.task = split_task_from_string(j.at("task").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.validation = j.at("validation").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
    return s;
  }

  // Throws unless the split is a partition of [0, link_count).
  void check_partition(std::size_t link_count) const {
    std::vector<int> seen(link_count, 0);
    for (const auto* part : {&train, &validation, &test})
      for (std::size_t i : *part) {
        if (i >= link_count) throw Error("split references link " + std::to_string(i) + " out of range");
        if (seen[i]++) throw Error("link " + std::to_string(i) + " appears in two partitions");
      }
    for (std::size_t i = 0; i < link_count; ++i)
      if (!seen[i]) throw Error("link " + std::to_string(i) + " is missing from the split");
  }
};

// Hides exactly one uniformly chosen outgoing link per source document; the
// hidden set is shuffled and halved into validation and test.
inline SplitSpec make_anchor_split(const DocumentNetwork& net, std::uint64_t seed) {
  if (net.links.empty()) throw Error("anchor split needs at least one link");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> outgoing(net.docs.size());
  for (std::size_t l = 0; l < net.links.size(); ++l) outgoing[net.links[l].source].push_back(l);

  std::vector<char> hidden(net.links.size(), 0);
  std::vector<std::size_t> hidden_list;
  for (const auto& out : outgoing) {
    if (out.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    const std::size_t l = out[pick(rng)];
    hidden[l] = 1;
    hidden_list.push_back(l);
  }
  std::shuffle(hidden_list.begin(), hidden_list.end(), rng);

  SplitSpec split;
  split.task = SplitTask::anchor_prediction;
  split.seed = seed;
  const std::size_t n_val = hidden_list.size() / 2;
  split.validation.assign(hidden_list.begin(), hidden_list.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test.assign(hidden_list.begin() + static_cast<std::ptrdiff_t>(n_val), hidden_list.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  for (std::size_t l = 0; l < net.links.size(); ++l)
    if (!hidden[l]) split.train.push_back(l);
  return split;
}

// Hides floor(fraction * L) links uniformly at random as the test set.
inline SplitSpec make_edge_split(const DocumentNetwork& net, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("edge split fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(net.links.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(net.links.size())));

  SplitSpec split;
  split.task = SplitTask::link_prediction;
  split.seed = seed;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  if (n_test == 0) split.warnings.push_back("edge split hides no links: fraction * L < 1");
  return split;
}

}  // namespace crtm
