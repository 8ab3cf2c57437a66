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

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace crtm::cli;
  CLI::App app{"Contextualized relational topic model: anchor and link prediction in document networks"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse a JSONL markup corpus into a network file");
  c_ingest->add_option("--corpus", ingest.corpus, "JSONL corpus, one {id, title, text} per line")->required();
  c_ingest->add_option("--min-count", ingest.min_count, "Minimum corpus frequency of kept words");
  c_ingest->add_option("--out", ingest.out, "Output network file")->required();
  c_ingest->add_option("--report", ingest.report, "Ingestion report JSON");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Make a train/validation/test split of the links");
  c_split->add_option("--network", split.network)->required();
  c_split->add_option("--task", split.task, "anchor or link")->check(CLI::IsMember({"anchor", "link"}));
  c_split->add_option("--fraction", split.fraction, "Held-out edge fraction for the link task");
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--out", split.out, "Split JSON")->required();

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Train skip-gram word embeddings on the network text");
  c_embed->add_option("--network", embed.network)->required();
  c_embed->add_option("--out", embed.out, "Embedding text file")->required();
  c_embed->add_option("--dim", embed.sgns.dim);
  c_embed->add_option("--window", embed.sgns.window);
  c_embed->add_option("--negatives", embed.sgns.negatives);
  c_embed->add_option("--epochs", embed.sgns.epochs);
  c_embed->add_option("--learning-rate", embed.sgns.learning_rate);
  c_embed->add_option("--seed", embed.sgns.seed);

  TrainArgs train;
  std::uint64_t train_seed = 0;
  std::size_t train_topics = 0, train_iters = 0, train_threads = 0;
  auto* c_train = app.add_subcommand("train", "Fit topics and the link function");
  c_train->add_option("--network", train.network)->required();
  c_train->add_option("--split", train.split)->required();
  c_train->add_option("--config", train.config, "key = value overrides of the training defaults");
  c_train->add_option("--variant", train.variant, "crtm, crtm_1, crtm_u, crtm_p, crtm_i or rtm");
  c_train->add_option("--embeddings", train.embeddings, "Word embeddings, required by attention variants");
  c_train->add_option("--strip-source", train.strip_sources, "Withhold all train links of this document");
  auto* o_seed = c_train->add_option("--seed", train_seed);
  auto* o_topics = c_train->add_option("--topics", train_topics);
  auto* o_iters = c_train->add_option("--max-iterations", train_iters);
  auto* o_threads = c_train->add_option("--threads", train_threads, "E-step worker threads");
  c_train->add_option("--out", train.out, "Model bundle JSON")->required();
  c_train->add_option("--log", train.log, "Per-iteration training log");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Rank source words as anchors for a target document");
  c_predict->add_option("--model", predict.model)->required();
  c_predict->add_option("--network", predict.network)->required();
  c_predict->add_option("--embeddings", predict.embeddings);
  c_predict->add_option("--source", predict.source, "Source document id or title")->required();
  c_predict->add_option("--target", predict.target, "Target document id or title")->required();
  c_predict->add_option("--variant", predict.variant, "crtm, crtm_1, crtm_u, crtm_p[:sigma], crtm_i or rtm_trick");
  c_predict->add_option("--top", predict.top);
  c_predict->add_flag("--strip-links", predict.strip_links, "Require a model trained without the source's links");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate anchor or link prediction");
  c_eval->add_option("--model", eval.models, "Model bundle; repeat for several training seeds")->required();
  c_eval->add_option("--network", eval.network)->required();
  c_eval->add_option("--split", eval.split)->required();
  c_eval->add_option("--embeddings", eval.embeddings);
  c_eval->add_option("--task", eval.task)->check(CLI::IsMember({"anchor", "link"}));
  c_eval->add_option("--variants", eval.variants)->delimiter(',');
  c_eval->add_option("--seeds", eval.seeds, "Negative sampling seeds for the link task")->delimiter(',');
  c_eval->add_option("--negatives", eval.negatives);
  c_eval->add_option("--out", eval.out, "Report prefix for .json, .csv and ROC files");

  SynthArgs synth;
  auto& so = synth.options;
  auto* c_synth = app.add_subcommand("synth", "Generate a planted synthetic corpus");
  c_synth->add_option("--topics", so.num_topics);
  c_synth->add_option("--vocab", so.vocab_size);
  c_synth->add_option("--docs", so.num_docs);
  c_synth->add_option("--length", so.mean_length, "Mean words per document");
  c_synth->add_option("--links", so.links_per_doc, "Links per document");
  c_synth->add_option("--coherence", so.context_coherence);
  c_synth->add_option("--seed", so.seed);
  c_synth->add_option("--out", synth.out, "JSONL corpus")->required();
  c_synth->add_option("--truth", synth.truth, "Ground truth JSON");

  CLI11_PARSE(app, argc, argv);

  if (*o_seed) train.seed = train_seed;
  if (*o_topics) train.topics = train_topics;
  if (*o_iters) train.max_iterations = train_iters;
  if (*o_threads) train.threads = train_threads;

  auto& out = std::cout;
  auto& err = std::cerr;
  if (c_ingest->parsed()) return cmd_ingest(ingest, out, err);
  if (c_split->parsed()) return cmd_split(split, out, err);
  if (c_embed->parsed()) return cmd_embed(embed, out, err);
  if (c_train->parsed()) return cmd_train(train, out, err);
  if (c_predict->parsed()) return cmd_predict(predict, out, err);
  if (c_eval->parsed()) return cmd_eval(eval, out, err);
  if (c_synth->parsed()) return cmd_synth(synth, out, err);
  return 1;
}
