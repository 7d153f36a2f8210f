// Copyright 2026 The dualknow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualknow/config.hpp"
#include "dualknow/corpus.hpp"
#include "dualknow/gateway.hpp"
#include "dualknow/probe_filter.hpp"
#include "dualknow/reasoner.hpp"
#include "dualknow/retrieval.hpp"

namespace dualknow {

struct PipelineOptions {
  RetrievalConfig retrieval;
  DecodingConfig decoding;
  bool skip_filter = false;
  bool skip_clues = false;

  static PipelineOptions from(const RunConfig& config);
};

/// Everything that happened to one sample, in the order it happened.
struct SampleOutcome {
  DialogContext context;
  DualKnowledge knowledge;
  ProbePair probes;
  FusedKnowledge fused;
  KeyClues clues;
  /// clean, partial, skipped (ablation) or failed (gateway error).
  std::string clue_status = "skipped";
  std::optional<GenerationRecord> generation;
  /// Set when the sample could not produce a response.
  std::optional<std::string> error;

  /// Request-id style step labels, e.g. "d1/3/judge.review".
  std::vector<std::string> trace;
  int probes_issued = 0;
  int judge_calls = 0;
  int clue_calls = 0;
  int generator_calls = 0;
  int gateway_errors = 0;

  std::string key() const;
  bool ok() const { return !error.has_value(); }
};

/// Runs the per-sample chain: retrieve, probe, judge, fuse, extract clues,
/// generate. Stateless apart from the shared gateway; safe to call from
/// several threads.
class Pipeline {
 public:
  Pipeline(const KnowledgeBase& kb, const AssetStore& assets, Gateway& gateway,
           PipelineOptions options);

  /// Retrieval and knowledge type filtering only.
  SampleOutcome filter(const DialogContext& context) const;

  /// The full chain. Failures are captured in the outcome, never thrown.
  SampleOutcome process(const DialogContext& context) const;

  /// Filtering and clue extraction, without the generator call (for SFT
  /// export).
  SampleOutcome prepare(const DialogContext& context) const;

  const PipelineOptions& options() const { return options_; }

 private:
  void run_filter(SampleOutcome& outcome) const;
  void run_clues(SampleOutcome& outcome) const;
  void run_generation(SampleOutcome& outcome) const;
  bool begin(SampleOutcome& outcome, const DialogContext& context) const;

  const KnowledgeBase& kb_;
  const AssetStore& assets_;
  Gateway& gateway_;
  PipelineOptions options_;
};

/// Stage rank of a trace label: retrieval 3, probing 5, judging and fusion 6,
/// clue extraction 7, generation 8. -1 for unknown labels.
int step_rank(std::string_view trace_label);

/// True when the ranks along a trace never decrease.
bool trace_in_order(std::span<const std::string> trace);

struct RunManifest {
  nlohmann::json config;
  std::size_t samples = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t probes_issued = 0;
  std::size_t judge_calls = 0;
  std::size_t clue_calls = 0;
  std::size_t generator_calls = 0;
  std::size_t gateway_errors = 0;
  std::size_t samples_with_knowledge = 0;
  /// "attribute"/"review" -> "yes"/"no"/"auto_no" -> count
  std::map<std::string, std::map<std::string, std::size_t>> verdicts;
  std::map<std::string, std::size_t> fused_kinds;
  std::map<std::string, std::size_t> clue_status;
  std::vector<nlohmann::json> failures;
  std::vector<nlohmann::json> traces;
  double wall_time_ms = 0.0;

  /// Deterministic content; wall time is written separately.
  nlohmann::json to_json() const;
};

struct BatchResult {
  std::vector<SampleOutcome> outcomes;
  RunManifest manifest;
};

/// Processes every context with at most `parallelism` in flight. Outcomes
/// keep input order.
BatchResult run_batch(const Pipeline& pipeline, std::span<const DialogContext> contexts,
                      int parallelism, const nlohmann::json& config_snapshot);

/// One {dialog_id, turn_index, hypothesis, reference, fused_kind,
/// clue_status} line per successful sample.
void write_results(std::span<const SampleOutcome> outcomes, const std::filesystem::path& path);

}  // namespace dualknow
