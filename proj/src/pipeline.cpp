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

#include "dualknow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "dualknow/error.hpp"
#include "dualknow/jsonl.hpp"

namespace dualknow {

using json = nlohmann::json;

namespace {

constexpr std::string_view kJudgeUnavailable = "judge unavailable";

}  // namespace

PipelineOptions PipelineOptions::from(const RunConfig& config) {
  return {config.retrieval, config.decoding, config.skip_filter, config.skip_clues};
}

std::string SampleOutcome::key() const {
  return context.dialog_id + "/" + std::to_string(context.turn_index);
}

Pipeline::Pipeline(const KnowledgeBase& kb, const AssetStore& assets, Gateway& gateway,
                   PipelineOptions options)
    : kb_(kb), assets_(assets), gateway_(gateway), options_(std::move(options)) {
  options_.retrieval.validate();
}

bool Pipeline::begin(SampleOutcome& outcome, const DialogContext& context) const {
  outcome.context = context;
  try {
    outcome.context = attach_assets(context, assets_);
    outcome.trace.push_back(outcome.key() + "/retrieve");
    outcome.knowledge = extract_dual_knowledge(outcome.context, kb_, options_.retrieval);
  } catch (const Error& e) {
    outcome.error = e.what();
    return false;
  }
  return true;
}

void Pipeline::run_filter(SampleOutcome& outcome) const {
  const DualKnowledge& knowledge = outcome.knowledge;
  const std::string prefix = outcome.key();
  if (options_.skip_filter) {
    outcome.fused = unfiltered(knowledge);
    outcome.trace.push_back(prefix + "/fuse");
    return;
  }

  ProbeOptions probe_options;
  probe_options.request_prefix = prefix;
  probe_options.temperature = options_.decoding.temperature;
  probe_options.probe_max_new_tokens = options_.decoding.generation_max_new_tokens;
  probe_options.judge_max_new_tokens = options_.decoding.judge_max_new_tokens;

  const bool has_attributes = !knowledge.attribute_text.empty();
  const bool has_reviews = !knowledge.review_text.empty();
  if (has_attributes || has_reviews) {
    outcome.probes = generate_probes(outcome.context, knowledge, gateway_, probe_options);
    if (has_attributes) outcome.trace.push_back(prefix + "/probe.attribute");
    if (has_reviews) outcome.trace.push_back(prefix + "/probe.review");
    outcome.probes_issued = int{has_attributes} + int{has_reviews};
  }

  auto verdict_for = [&](KnowledgeType type, const ProbeOutcome& probe,
                         const std::string& text) -> UtilityVerdict {
    const std::string name(to_string(type));
    if (probe.result) {
      ++outcome.judge_calls;
      outcome.trace.push_back(prefix + "/judge." + name);
      UtilityVerdict v = assess_utility(outcome.context, text, *probe.result, gateway_, probe_options);
      if (v.parse_status == VerdictParse::kDefaulted && v.evidence.starts_with(kJudgeUnavailable))
        ++outcome.gateway_errors;
      return v;
    }
    if (probe.error) {
      ++outcome.gateway_errors;
      return defaulted_no("probe unavailable: " + *probe.error);
    }
    return defaulted_no("no retrieved " + name + " knowledge");
  };
  const UtilityVerdict attribute =
      verdict_for(KnowledgeType::kAttribute, outcome.probes.attribute, knowledge.attribute_text);
  const UtilityVerdict review =
      verdict_for(KnowledgeType::kReview, outcome.probes.review, knowledge.review_text);
  outcome.fused = fuse(attribute, review, knowledge);
  outcome.trace.push_back(prefix + "/fuse");
}

void Pipeline::run_clues(SampleOutcome& outcome) const {
  if (options_.skip_clues) {
    outcome.clue_status = "skipped";
    return;
  }
  ReasonerOptions options;
  options.request_prefix = outcome.key();
  options.temperature = options_.decoding.temperature;
  options.clue_max_new_tokens = options_.decoding.generation_max_new_tokens;
  ++outcome.clue_calls;
  outcome.trace.push_back(outcome.key() + "/clues");
  try {
    outcome.clues = extract_key_clues(outcome.context, gateway_, options);
    outcome.clue_status = std::string(to_string(outcome.clues.parse_status));
  } catch (const Error&) {
    // Generation proceeds without a clue block.
    outcome.clues = KeyClues{};
    outcome.clue_status = "failed";
    ++outcome.gateway_errors;
  }
}

void Pipeline::run_generation(SampleOutcome& outcome) const {
  ReasonerOptions options;
  options.request_prefix = outcome.key();
  options.temperature = options_.decoding.temperature;
  options.response_max_new_tokens = options_.decoding.generation_max_new_tokens;
  ++outcome.generator_calls;
  outcome.trace.push_back(outcome.key() + "/generate");
  try {
    outcome.generation =
        generate_response(outcome.context, outcome.clues, outcome.fused, gateway_, options);
  } catch (const Error& e) {
    outcome.error = e.what();
    ++outcome.gateway_errors;
  }
}

SampleOutcome Pipeline::filter(const DialogContext& context) const {
  SampleOutcome outcome;
  if (begin(outcome, context)) run_filter(outcome);
  return outcome;
}

SampleOutcome Pipeline::prepare(const DialogContext& context) const {
  SampleOutcome outcome;
  if (!begin(outcome, context)) return outcome;
  run_filter(outcome);
  run_clues(outcome);
  return outcome;
}

SampleOutcome Pipeline::process(const DialogContext& context) const {
  SampleOutcome outcome;
  if (!begin(outcome, context)) return outcome;
  run_filter(outcome);
  run_clues(outcome);
  run_generation(outcome);
  return outcome;
}

int step_rank(std::string_view label) {
  const std::size_t slash = label.rfind('/');
  const std::string_view step = slash == std::string_view::npos ? label : label.substr(slash + 1);
  if (step == "retrieve") return 3;
  if (step.starts_with("probe.")) return 5;
  if (step.starts_with("judge.") || step == "fuse") return 6;
  if (step == "clues") return 7;
  if (step == "generate") return 8;
  return -1;
}

bool trace_in_order(std::span<const std::string> trace) {
  int last = 0;
  for (const auto& label : trace) {
    const int rank = step_rank(label);
    if (rank < last) return false;
    last = rank;
  }
  return true;
}

json RunManifest::to_json() const {
  return {{"config", config},
          {"counts",
           {{"samples", samples},
            {"succeeded", succeeded},
            {"failed", failed},
            {"samples_with_knowledge", samples_with_knowledge},
            {"probes_issued", probes_issued},
            {"judge_calls", judge_calls},
            {"clue_calls", clue_calls},
            {"generator_calls", generator_calls},
            {"gateway_errors", gateway_errors}}},
          {"verdicts", verdicts},
          {"fused_kinds", fused_kinds},
          {"clue_status", clue_status},
          {"failures", failures},
          {"traces", traces}};
}

BatchResult run_batch(const Pipeline& pipeline, std::span<const DialogContext> contexts,
                      int parallelism, const json& config_snapshot) {
  if (parallelism < 1) throw PreconditionError("parallelism must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  BatchResult result;
  result.outcomes.resize(contexts.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < contexts.size(); i = next++)
      result.outcomes[i] = pipeline.process(contexts[i]);
  };
  {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism),
                                               std::max<std::size_t>(contexts.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  RunManifest& m = result.manifest;
  m.config = config_snapshot;
  for (const auto& o : result.outcomes) {
    ++m.samples;
    o.ok() ? ++m.succeeded : ++m.failed;
    m.probes_issued += static_cast<std::size_t>(o.probes_issued);
    m.judge_calls += static_cast<std::size_t>(o.judge_calls);
    m.clue_calls += static_cast<std::size_t>(o.clue_calls);
    m.generator_calls += static_cast<std::size_t>(o.generator_calls);
    m.gateway_errors += static_cast<std::size_t>(o.gateway_errors);
    if (!o.knowledge.attribute_text.empty() || !o.knowledge.review_text.empty())
      ++m.samples_with_knowledge;
    auto count_verdict = [&](const char* type, const std::optional<UtilityVerdict>& v,
                             const ProbeOutcome& probe) {
      if (!v) return;
      const std::string label = probe.result ? std::string(to_string(v->judgment)) : "auto_no";
      ++m.verdicts[type][label];
    };
    count_verdict("attribute", o.fused.attribute_verdict, o.probes.attribute);
    count_verdict("review", o.fused.review_verdict, o.probes.review);
    const bool fused = std::any_of(o.trace.begin(), o.trace.end(),
                                   [](const std::string& t) { return t.ends_with("/fuse"); });
    if (fused) {
      ++m.fused_kinds[std::string(to_string(o.fused.kind))];
      ++m.clue_status[o.clue_status];
    }
    if (o.error)
      m.failures.push_back(
          {{"dialog_id", o.context.dialog_id}, {"turn_index", o.context.turn_index}, {"error", *o.error}});
    m.traces.push_back({{"sample", o.key()}, {"steps", o.trace}});
  }
  m.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

void write_results(std::span<const SampleOutcome> outcomes, const std::filesystem::path& path) {
  jsonl::Writer out(path);
  for (const auto& o : outcomes) {
    if (!o.generation) continue;
    out.write({{"dialog_id", o.context.dialog_id},
               {"turn_index", o.context.turn_index},
               {"hypothesis", o.generation->response},
               {"reference", o.context.ground_truth ? json(*o.context.ground_truth) : json(nullptr)},
               {"fused_kind", to_string(o.fused.kind)},
               {"clue_status", o.clue_status}});
  }
}

}  // namespace dualknow
