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

#include "dualknow/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "dualknow/error.hpp"
#include "dualknow/metrics.hpp"
#include "dualknow/pipeline.hpp"
#include "dualknow/text.hpp"

namespace dualknow::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Loaded inputs shared by the pipeline-driven commands.
struct Session {
  KnowledgeBase kb;
  AssetStore assets;
  std::unique_ptr<Gateway> gateway;

  static Session open(const RunConfig& config, bool require_dialogs = true) {
    config.validate(require_dialogs);
    Session s;
    s.kb = load_knowledge_base(config.kb_path, config.assets_dir);
    s.assets = AssetStore::load(config.assets_dir);
    s.gateway = make_gateway(config);
    return s;
  }
};

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(2, ' ', false, json::error_handler_t::replace) << '\n';
}

std::string verdict_line(const std::optional<UtilityVerdict>& v) {
  if (!v) return "n/a";
  return std::string(to_string(v->judgment)) + " (" + std::string(to_string(v->parse_status)) + ")";
}

}  // namespace

int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Session s = Session::open(config);
  const KnowledgeBaseStats stats = s.kb.stats();
  ContextBuildResult built = build_contexts(config.dialogs_path, config.window_turns);
  for (const auto& w : built.warnings) err << "warning: " << w << "\n";
  std::size_t with_images = 0;
  for (const auto& ctx : built.contexts) {
    attach_assets(ctx, s.assets);
    if (ctx.has_images()) ++with_images;
  }
  out << "entities: " << stats.entity_count << "\n"
      << "mean attributes per entity: " << fixed(stats.mean_attributes, 1) << "\n"
      << "mean reviews per entity: " << fixed(stats.mean_reviews, 1) << "\n"
      << "mean images per entity: " << fixed(stats.mean_images, 1) << "\n"
      << "embedding dim: "
      << (s.kb.embedding_dim() ? std::to_string(*s.kb.embedding_dim()) : std::string("undefined"))
      << "\n"
      << "dialogs: " << built.dialog_count << "\n"
      << "samples: " << built.contexts.size() << "\n"
      << "samples with images: " << with_images << "\n"
      << "warnings: " << s.kb.warnings().size() + built.warnings.size() << "\n";
  return kSuccess;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.output_dir.empty()) throw ConfigError("paths.output is required for run");
  Session s = Session::open(config);
  ContextBuildResult built = build_contexts(config.dialogs_path, config.window_turns);
  for (const auto& w : built.warnings) err << "warning: " << w << "\n";

  Pipeline pipeline(s.kb, s.assets, *s.gateway, PipelineOptions::from(config));
  BatchResult result =
      run_batch(pipeline, built.contexts, config.parallelism, config.effective_snapshot());

  fs::create_directories(config.output_dir);
  write_results(result.outcomes, config.output_dir / "results.jsonl");
  write_json(result.manifest.to_json(), config.output_dir / "manifest.json");
  write_json({{"wall_time_ms", result.manifest.wall_time_ms}}, config.output_dir / "timing.json");

  const RunManifest& m = result.manifest;
  out << "samples: " << m.samples << " succeeded: " << m.succeeded << " failed: " << m.failed
      << "\nprobes: " << m.probes_issued << " judge calls: " << m.judge_calls
      << " clue calls: " << m.clue_calls << " generator calls: " << m.generator_calls
      << "\nresults: " << (config.output_dir / "results.jsonl").string() << "\n";
  for (const auto& f : m.failures)
    err << "sample " << f["dialog_id"].get<std::string>() << "/" << f["turn_index"].get<int>()
        << " failed: " << f["error"].get<std::string>() << "\n";
  return m.failed > 0 ? kPartialFailure : kSuccess;
}

int cmd_eval(const fs::path& results_path, const fs::path& report_path, std::ostream& out,
             std::ostream&) {
  const auto records = metrics::read_results(results_path);
  if (records.empty()) throw LoadError("no results in " + results_path.string());
  const metrics::EvalReport report = metrics::evaluate(records);
  if (!report_path.empty()) metrics::write_report(report, report_path);
  out << metrics::format_table(report);
  return kSuccess;
}

int cmd_chat(const RunConfig& config, bool verbose, std::istream& in, std::ostream& out,
             std::ostream&) {
  Session s = Session::open(config, /*require_dialogs=*/false);
  Pipeline pipeline(s.kb, s.assets, *s.gateway, PipelineOptions::from(config));

  std::vector<Utterance> history;
  std::vector<std::string> pending_images;
  out << "chat ready. /img <id> attaches an image, /quit exits.\n";
  std::string line;
  while (std::getline(in, line)) {
    const std::string input(text::trim(line));
    if (input.empty()) continue;
    if (input == "/quit") break;
    if (input.starts_with("/img")) {
      const std::string id(text::trim(std::string_view(input).substr(4)));
      if (id.empty()) {
        out << "error: usage: /img <image_id>\n";
      } else if (s.assets.caption(id) == nullptr || s.assets.embedding(id) == nullptr) {
        out << "error: missing asset: " << id << "\n";
      } else {
        pending_images.push_back(id);
        out << "attached " << id << "\n";
      }
      continue;
    }
    if (input.starts_with("/")) {
      out << "error: unknown command " << input << "\n";
      continue;
    }

    Utterance user{Speaker::kUser, input, std::move(pending_images),
                   static_cast<int>(history.size())};
    pending_images.clear();
    history.push_back(std::move(user));
    const std::size_t window = static_cast<std::size_t>(config.window_turns);
    const std::size_t begin = history.size() > window ? history.size() - window : 0;
    DialogContext context =
        make_context("chat", static_cast<int>(history.size()),
                     {history.begin() + static_cast<std::ptrdiff_t>(begin), history.end()},
                     std::nullopt);

    SampleOutcome outcome = pipeline.process(context);
    if (!outcome.ok()) {
      out << "error: " << *outcome.error << "\n";
      continue;
    }
    out << outcome.generation->response << "\n";
    if (verbose) {
      out << "  verdicts: attribute=" << verdict_line(outcome.fused.attribute_verdict)
          << " review=" << verdict_line(outcome.fused.review_verdict) << "\n"
          << "  fused: " << to_string(outcome.fused.kind) << "\n"
          << "  clues: "
          << (outcome.clues.empty() ? std::string("(none)") : render_clue_block(outcome.clues))
          << "\n";
    }
    history.push_back({Speaker::kAgent, outcome.generation->response, {},
                       static_cast<int>(history.size())});
  }
  return kSuccess;
}

int cmd_probe(const RunConfig& config, const std::string& dialog_id, int turn_index,
              std::ostream& out, std::ostream&) {
  Session s = Session::open(config);
  ContextBuildResult built = build_contexts(config.dialogs_path, config.window_turns);
  const DialogContext* found = nullptr;
  for (const auto& ctx : built.contexts)
    if (ctx.dialog_id == dialog_id && ctx.turn_index == turn_index) found = &ctx;
  if (found == nullptr)
    throw LoadError("unknown sample " + dialog_id + "/" + std::to_string(turn_index));

  Pipeline pipeline(s.kb, s.assets, *s.gateway, PipelineOptions::from(config));
  const SampleOutcome o = pipeline.filter(*found);
  if (!o.ok()) throw Error(*o.error);

  out << "sample: " << o.key() << "\n"
      << "context: " << o.context.merged_text << "\n";
  for (std::size_t i = 0; i < o.context.image_refs.size(); ++i)
    out << "image: " << o.context.image_refs[i] << " caption: " << o.context.captions[i] << "\n";
  out << "hits: " << o.knowledge.hits.size() << "\n";
  for (const auto& h : o.knowledge.hits)
    out << "  " << h.entity_id << " " << to_string(h.source) << " " << fixed(h.score, 4) << "\n";
  out << "attribute knowledge: " << o.knowledge.attribute_text << "\n"
      << "review knowledge: " << o.knowledge.review_text << "\n";

  auto dump = [&](KnowledgeType type, const ProbeOutcome& probe,
                  const std::optional<UtilityVerdict>& verdict) {
    out << "[" << to_string(type) << "]\n";
    if (probe.result) {
      out << "probe prompt: " << probe.result->prompt_text << "\n"
          << "probe response: " << probe.result->probe_response << "\n";
    } else if (probe.error) {
      out << "probe error: " << *probe.error << "\n";
    } else {
      out << "probe: skipped\n";
    }
    if (verdict) {
      out << "verdict: " << verdict_line(verdict) << (probe.result ? "" : " auto-no") << "\n"
          << "evidence: " << verdict->evidence << "\n";
    } else {
      out << "verdict: n/a (filter skipped)\n";
    }
  };
  dump(KnowledgeType::kAttribute, o.probes.attribute, o.fused.attribute_verdict);
  dump(KnowledgeType::kReview, o.probes.review, o.fused.review_verdict);
  out << "fused: " << to_string(o.fused.kind) << "\n";
  return kSuccess;
}

int cmd_export_sft(const RunConfig& config, const fs::path& out_path, std::ostream& out,
                   std::ostream& err) {
  Session s = Session::open(config);
  ContextBuildResult built = build_contexts(config.dialogs_path, config.window_turns);
  Pipeline pipeline(s.kb, s.assets, *s.gateway, PipelineOptions::from(config));

  std::vector<SftSample> samples;
  std::size_t failed = 0;
  for (const auto& ctx : built.contexts) {
    SampleOutcome o = pipeline.prepare(ctx);
    if (!o.ok()) {
      ++failed;
      err << "sample " << o.key() << " skipped: " << *o.error << "\n";
      continue;
    }
    samples.push_back({std::move(o.context), std::move(o.clues), std::move(o.fused)});
  }
  const std::size_t written = export_sft_dataset(samples, out_path);
  out << "exported " << written << " records to " << out_path.string() << "\n";
  return failed > 0 ? kPartialFailure : kSuccess;
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Dual-knowledge retrieval and two-stage response generation for task-oriented dialog"};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_flag("--verbose,-v", verbose, "Print verdicts and clues");

  auto* ingest = app.add_subcommand("ingest", "Validate and summarize the input data");
  ingest->fallthrough();

  bool skip_filter = false, skip_clues = false;
  int parallelism = 0;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run the pipeline over every test sample");
  run->fallthrough();
  run->add_flag("--skip-filter,--wo-ktypefilter", skip_filter,
                "Use all retrieved knowledge without type filtering");
  run->add_flag("--skip-clues,--wo-allc", skip_clues, "Generate without key clues");
  run->add_option("--parallelism", parallelism, "Samples processed concurrently");
  run->add_option("--output", output_dir, "Output directory (overrides paths.output)");

  std::string results_path, report_path;
  auto* eval = app.add_subcommand("eval", "Score a results file with BLEU-1..4 and NIST");
  eval->fallthrough();
  eval->add_option("--results", results_path, "Results file")->required();
  eval->add_option("--report", report_path, "Report output (JSON; a .txt table is written alongside)");

  auto* chat = app.add_subcommand("chat", "Interactive session over the full pipeline");
  chat->fallthrough();

  std::string dialog_id;
  int turn_index = 0;
  auto* probe = app.add_subcommand("probe", "Show retrieval and knowledge filtering for one sample");
  probe->fallthrough();
  probe->add_option("--dialog", dialog_id, "Dialog id")->required();
  probe->add_option("--turn", turn_index, "Turn index of the agent utterance")->required();

  std::string sft_out;
  auto* export_sft = app.add_subcommand("export-sft", "Write the instruction-tuning dataset");
  export_sft->fallthrough();
  export_sft->add_flag("--skip-filter,--wo-ktypefilter", skip_filter);
  export_sft->add_flag("--skip-clues,--wo-allc", skip_clues);
  export_sft->add_option("--out", sft_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigOrIoError;
  }

  try {
    if (eval->parsed()) return cmd_eval(results_path, report_path, out, err);

    if (config_path.empty()) throw ConfigError("--config is required");
    RunConfig config = RunConfig::load(config_path);
    config.skip_filter = config.skip_filter || skip_filter;
    config.skip_clues = config.skip_clues || skip_clues;
    if (run->count("--parallelism") > 0) config.parallelism = parallelism;
    if (!output_dir.empty()) config.output_dir = output_dir;

    if (ingest->parsed()) return cmd_ingest(config, out, err);
    if (run->parsed()) return cmd_run(config, out, err);
    if (chat->parsed()) return cmd_chat(config, verbose, in, out, err);
    if (probe->parsed()) return cmd_probe(config, dialog_id, turn_index, out, err);
    if (export_sft->parsed()) return cmd_export_sft(config, sft_out, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigOrIoError;
  }
  return kConfigOrIoError;
}

}  // namespace dualknow::cli
