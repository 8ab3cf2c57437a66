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
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crtm/model.hpp"
#include "crtm/network.hpp"
#include "crtm/predict.hpp"
#include "crtm/split.hpp"

namespace crtm {

// Fraction of links whose true anchor (any token of the span) is among the
// top n ranked words.
inline double precision_at_n(std::span<const AnchorRanking> rankings, std::span<const std::vector<WordId>> truths,
                             std::size_t n) {
  if (rankings.size() != truths.size()) throw Error("precision_at_n: rankings and truths differ in length");
  if (n == 0) throw Error("precision_at_n: n must be at least 1");
  if (rankings.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const std::size_t r = rankings[i].rank_of(truths[i]);
    if (r != 0 && r <= n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;

  // Trapezoidal area under the curve.
  double area() const {
    double a = 0.0;
    for (std::size_t i = 1; i < fpr.size(); ++i) a += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
    return a;
  }
};

// ROC over word ranks. A link with m candidates has its true word at
// relative rank q = (r - 1) / (m - 1) and m - 1 negatives at the other
// relative ranks, each weighted 1 / (m - 1) so every link counts once on
// both axes. Sweeping a threshold on q gives
//   TPR = #{q_i <= tau} / n,  FPR = sum_i #{negatives of i at <= tau} / (m_i - 1) / n.
// Pooling absolute ranks instead would let short candidate lists look
// better than chance under random ranking. Links with a single candidate
// carry no ranking information and are left out.
inline RocCurve roc_points(std::span<const std::size_t> ranks, std::span<const std::size_t> candidate_counts) {
  if (ranks.size() != candidate_counts.size()) throw Error("roc_points: ranks and candidate counts differ in length");
  struct Event {
    double at;
    double tp;
    double fp;
  };
  std::vector<Event> events;
  double links = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::size_t r = ranks[i], m = candidate_counts[i];
    if (r < 1 || r > m) throw Error("roc_points: rank outside [1, candidates]");
    if (m < 2) continue;
    links += 1.0;
    const double span = static_cast<double>(m - 1);
    for (std::size_t j = 1; j <= m; ++j) {
      const double at = static_cast<double>(j - 1) / span;
      if (j == r) events.push_back({at, 1.0, 0.0});
      else events.push_back({at, 0.0, 1.0 / span});
    }
  }
  RocCurve c;
  c.fpr.push_back(0.0);
  c.tpr.push_back(0.0);
  if (links == 0.0) {
    c.fpr.push_back(1.0);
    c.tpr.push_back(1.0);
    return c;
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.at < b.at; });
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    for (; j < events.size() && events[j].at == events[i].at; ++j) {
      tp += events[j].tp;
      fp += events[j].fp;
    }
    c.tpr.push_back(std::min(1.0, tp / links));
    c.fpr.push_back(std::min(1.0, fp / links));
    i = j;
  }
  c.tpr.back() = 1.0;  // absorb rounding in the weighted sums
  c.fpr.back() = 1.0;
  return c;
}

// Mann-Whitney AUC: P(pos > neg) + 0.5 P(pos = neg).
inline double auc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) throw Error("auc: both score lists must be non-empty");
  std::vector<std::pair<double, int>> all;
  all.reserve(positives.size() + negatives.size());
  for (double s : positives) all.emplace_back(s, 1);
  for (double s : negatives) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end());
  double wins = 0.0, neg_below = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? pos : neg) += 1.0;
      ++j;
    }
    wins += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    i = j;
  }
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

inline Summary summarize(std::span<const double> v) {
  Summary s;
  if (v.empty()) return s;
  // shifted by the first value so identical runs give an exact zero spread
  double shift = 0.0;
  for (double x : v) shift += x - v[0];
  shift /= static_cast<double>(v.size());
  s.mean = v[0] + shift;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - v[0] - shift) * (x - v[0] - shift);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Metrics of one variant in one run.
struct RunMetrics {
  std::map<std::size_t, double> precision;  // n -> P@n
  std::vector<std::size_t> ranks;
  std::vector<std::size_t> candidates;
  double rank_auc = 0.0;
  double link_auc = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

struct VariantResult {
  std::string variant;
  std::vector<RunMetrics> runs;

  Summary precision(std::size_t n) const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.precision.at(n));
    return summarize(v);
  }
  Summary rank_auc() const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.rank_auc);
    return summarize(v);
  }
  Summary link_auc() const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.link_auc);
    return summarize(v);
  }
  // ROC pooled over every run's links.
  RocCurve roc() const {
    std::vector<std::size_t> ranks, counts;
    for (const auto& r : runs) {
      ranks.insert(ranks.end(), r.ranks.begin(), r.ranks.end());
      counts.insert(counts.end(), r.candidates.begin(), r.candidates.end());
    }
    return roc_points(ranks, counts);
  }
};

struct EvalReport {
  SplitTask task = SplitTask::anchor_prediction;
  std::vector<std::size_t> n_values;
  std::vector<VariantResult> variants;
  std::vector<std::string> warnings;

  VariantResult& variant(const std::string& name) {
    for (auto& v : variants)
      if (v.variant == name) return v;
    variants.push_back({name, {}});
    return variants.back();
  }

  // Appends the runs of `other` variant by variant.
  void merge(const EvalReport& other) {
    if (n_values.empty()) n_values = other.n_values;
    task = other.task;
    for (const auto& v : other.variants) {
      auto& mine = variant(v.variant);
      mine.runs.insert(mine.runs.end(), v.runs.begin(), v.runs.end());
    }
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  }

  nlohmann::json to_json() const {
    nlohmann::json out = {{"task", to_string(task)}};
    if (task == SplitTask::anchor_prediction) out["hit_rule"] = "any anchor token in top n";
    nlohmann::json vs = nlohmann::json::array();
    auto block = [](const Summary& s, const std::vector<double>& values) {
      return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}, {"values", values}};
    };
    for (const auto& v : variants) {
      nlohmann::json j = {{"variant", v.variant}, {"runs", v.runs.size()}};
      std::size_t evaluated = 0, skipped = 0;
      for (const auto& r : v.runs) {
        evaluated += r.evaluated;
        skipped += r.skipped;
      }
      j["evaluated"] = evaluated;
      j["skipped"] = skipped;
      if (task == SplitTask::anchor_prediction) {
        for (std::size_t n : n_values) {
          std::vector<double> values;
          for (const auto& r : v.runs) values.push_back(r.precision.at(n));
          j["p_at_" + std::to_string(n)] = block(v.precision(n), values);
        }
        std::vector<double> values;
        for (const auto& r : v.runs) values.push_back(r.rank_auc);
        j["rank_auc"] = block(v.rank_auc(), values);
      } else {
        std::vector<double> values;
        for (const auto& r : v.runs) values.push_back(r.link_auc);
        j["auc"] = block(v.link_auc(), values);
      }
      vs.push_back(j);
    }
    out["variants"] = vs;
    out["warnings"] = warnings;
    return out;
  }

  // variant x {P@n mean, std} for the anchor task, variant x AUC for links.
  std::string csv() const {
    std::ostringstream out;
    out << "variant";
    if (task == SplitTask::anchor_prediction) {
      for (std::size_t n : n_values) out << ",p_at_" << n << "_mean,p_at_" << n << "_std";
    } else {
      out << ",auc_mean,auc_std";
    }
    out << '\n';
    for (const auto& v : variants) {
      out << v.variant;
      if (task == SplitTask::anchor_prediction) {
        for (std::size_t n : n_values) {
          const auto s = v.precision(n);
          out << ',' << s.mean << ',' << s.stddev;
        }
      } else {
        const auto s = v.link_auc();
        out << ',' << s.mean << ',' << s.stddev;
      }
      out << '\n';
    }
    return out.str();
  }
};

inline std::string roc_csv(const RocCurve& c) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (std::size_t i = 0; i < c.fpr.size(); ++i) out << c.fpr[i] << ',' << c.tpr[i] << '\n';
  return out.str();
}

// Ranks every test link's source words for its target under each variant
// and records P@n, word ranks and the rank ROC area. One run.
inline EvalReport run_anchor_eval(const Model& model, const DocumentNetwork& net, const SplitSpec& split,
                                  const EmbeddingTable* embeddings, std::span<const VariantTag> variants,
                                  std::vector<std::size_t> n_values = {1, 5}) {
  if (split.task != SplitTask::anchor_prediction) throw Error("anchor evaluation needs an anchor split");
  detail::check_model_matches(model, net);
  EvalReport report;
  report.task = SplitTask::anchor_prediction;
  report.n_values = n_values;
  for (const auto& variant : variants) {
    RunMetrics run;
    std::vector<AnchorRanking> rankings;
    std::vector<std::vector<WordId>> truths;
    for (std::size_t idx : split.test) {
      const auto& link = net.links.at(idx);
      if (!detail::has_state(model, net, link.source) || !detail::has_state(model, net, link.target)) {
        ++run.skipped;
        continue;
      }
      auto ranking = rank_anchors(model, net, embeddings, link.source, link.target, variant);
      const auto& src = net.docs[link.source];
      std::vector<WordId> truth(src.tokens.begin() + static_cast<std::ptrdiff_t>(link.span.begin),
                                src.tokens.begin() + static_cast<std::ptrdiff_t>(link.span.end));
      run.ranks.push_back(ranking.rank_of(truth));
      run.candidates.push_back(ranking.entries.size());
      rankings.push_back(std::move(ranking));
      truths.push_back(std::move(truth));
    }
    run.evaluated = rankings.size();
    for (std::size_t n : n_values) run.precision[n] = precision_at_n(rankings, truths, n);
    run.rank_auc = run.ranks.empty() ? 0.0 : roc_points(run.ranks, run.candidates).area();
    report.variant(to_string(variant)).runs.push_back(std::move(run));
  }
  return report;
}

using PairScorer = std::function<double(DocId, DocId)>;

// For each test edge (d, d'), draws up to `negatives` documents d'' with no
// edge to or from d in the full network and compares scorer(d, d') with
// scorer(d, d''). Returns the pooled AUC.
inline RunMetrics run_link_eval(const DocumentNetwork& net, const SplitSpec& split, const PairScorer& scorer,
                                std::size_t negatives, std::uint64_t seed, std::vector<std::string>* warnings) {
  std::vector<std::set<DocId>> adjacent(net.docs.size());
  for (const auto& l : net.links) {
    adjacent[l.source].insert(l.target);
    adjacent[l.target].insert(l.source);
  }
  std::mt19937_64 rng(seed);
  std::vector<double> pos, neg;
  RunMetrics run;
  std::size_t short_sampled = 0;
  for (std::size_t idx : split.test) {
    const auto& l = net.links.at(idx);
    std::vector<DocId> pool;
    for (DocId d = 0; d < net.docs.size(); ++d)
      if (d != l.source && !adjacent[l.source].count(d)) pool.push_back(d);
    const std::size_t take = std::min(negatives, pool.size());
    if (take < negatives) ++short_sampled;
    if (take == 0) {
      ++run.skipped;
      continue;
    }
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      neg.push_back(scorer(l.source, pool[i]));
    }
    pos.push_back(scorer(l.source, l.target));
    ++run.evaluated;
  }
  if (short_sampled && warnings)
    warnings->push_back(std::to_string(short_sampled) + " test edges had fewer than " + std::to_string(negatives) +
                        " unconnected candidates");
  run.link_auc = (pos.empty() || neg.empty()) ? 0.0 : auc(pos, neg);
  return run;
}

// Link prediction with the whole-document link score of a trained model.
inline EvalReport run_link_eval(const Model& model, const DocumentNetwork& net, const SplitSpec& split,
                                std::size_t negatives, std::uint64_t seed, const std::string& label = "model") {
  if (split.task != SplitTask::link_prediction) throw Error("link evaluation needs an edge split");
  EvalReport report;
  report.task = SplitTask::link_prediction;
  auto scorer = [&](DocId a, DocId b) { return link_probability(model, a, b); };
  report.variant(label).runs.push_back(run_link_eval(net, split, scorer, negatives, seed, &report.warnings));
  return report;
}

}  // namespace crtm
