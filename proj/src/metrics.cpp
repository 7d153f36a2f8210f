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

#include "dualknow/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "dualknow/error.hpp"
#include "dualknow/jsonl.hpp"

namespace dualknow::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string_view>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

/// Per-ngram maximum count over all references of one pair.
NgramCounts max_reference_counts(const std::vector<Tokens>& references, std::size_t n) {
  NgramCounts best;
  for (const auto& ref : references)
    for (const auto& [gram, c] : count_ngrams(ref, n)) best[gram] = std::max(best[gram], c);
  return best;
}

std::size_t clipped_matches(const Tokens& hypothesis, const NgramCounts& reference_max,
                            std::size_t n) {
  std::size_t matched = 0;
  for (const auto& [gram, c] : count_ngrams(hypothesis, n)) {
    auto it = reference_max.find(gram);
    if (it != reference_max.end()) matched += std::min(c, it->second);
  }
  return matched;
}

void require_non_empty(std::span<const TokenizedPair> pairs) {
  if (pairs.empty()) throw PreconditionError("cannot score an empty corpus");
  for (const auto& p : pairs)
    if (p.references.empty()) throw PreconditionError("pair without references");
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

BleuStats bleu_stats(std::span<const TokenizedPair> pairs, int max_n) {
  BleuStats stats;
  stats.matches.assign(static_cast<std::size_t>(max_n), 0.0);
  stats.totals.assign(static_cast<std::size_t>(max_n), 0.0);
  for (const auto& pair : pairs) {
    const std::size_t hyp_len = pair.hypothesis.size();
    stats.hypothesis_length += static_cast<double>(hyp_len);
    // Closest reference length; ties go to the shorter reference.
    std::size_t best = pair.references.front().size();
    for (const auto& ref : pair.references) {
      const auto diff = [&](std::size_t len) {
        return len > hyp_len ? len - hyp_len : hyp_len - len;
      };
      if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best))
        best = ref.size();
    }
    stats.reference_length += static_cast<double>(best);
    for (int n = 1; n <= max_n; ++n) {
      const auto order = static_cast<std::size_t>(n);
      stats.matches[order - 1] += static_cast<double>(
          clipped_matches(pair.hypothesis, max_reference_counts(pair.references, order), order));
      if (hyp_len >= order) stats.totals[order - 1] += static_cast<double>(hyp_len - order + 1);
    }
  }
  return stats;
}

std::array<double, 4> corpus_bleu(std::span<const TokenizedPair> pairs, int max_n) {
  require_non_empty(pairs);
  if (max_n != 4) throw PreconditionError("corpus_bleu supports max_n = 4");
  const BleuStats stats = bleu_stats(pairs, max_n);
  std::array<double, 4> scores{};
  const double c = stats.hypothesis_length;
  const double r = stats.reference_length;
  const double bp = c <= 0 ? 0.0 : std::min(1.0, std::exp(1.0 - r / c));
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= 4; ++n) {
    const double num = stats.matches[static_cast<std::size_t>(n - 1)];
    const double den = stats.totals[static_cast<std::size_t>(n - 1)];
    if (num <= 0 || den <= 0) zero = true;
    if (!zero) log_sum += std::log(num / den);
    scores[static_cast<std::size_t>(n - 1)] = zero ? 0.0 : bp * std::exp(log_sum / n) * 100.0;
  }
  return scores;
}

double nist_beta() {
  const double ratio_log = std::log(2.0 / 3.0);
  return std::log(0.5) / (ratio_log * ratio_log);
}

double corpus_nist(std::span<const TokenizedPair> pairs, int max_n) {
  require_non_empty(pairs);
  if (max_n < 1) throw PreconditionError("max_n must be >= 1");
  const auto orders = static_cast<std::size_t>(max_n);

  // Reference-side counts for every order; order 0 is the total word count.
  std::vector<NgramCounts> reference_counts(orders + 1);
  double reference_words = 0.0;
  double mean_reference_length = 0.0;
  double hypothesis_length = 0.0;
  for (const auto& pair : pairs) {
    double pair_words = 0.0;
    for (const auto& ref : pair.references) {
      pair_words += static_cast<double>(ref.size());
      for (std::size_t n = 1; n <= orders; ++n)
        for (const auto& [gram, c] : count_ngrams(ref, n)) reference_counts[n][gram] += c;
    }
    reference_words += pair_words;
    mean_reference_length += pair_words / static_cast<double>(pair.references.size());
    hypothesis_length += static_cast<double>(pair.hypothesis.size());
  }

  auto info = [&](const std::vector<std::string_view>& gram) {
    const double count = static_cast<double>(reference_counts[gram.size()].at(gram));
    double prefix = reference_words;
    if (gram.size() > 1) {
      std::vector<std::string_view> head(gram.begin(), gram.end() - 1);
      prefix = static_cast<double>(reference_counts[head.size()].at(head));
    }
    return std::log2(prefix / count);
  };

  double score = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    double weighted = 0.0;
    double hypothesis_ngrams = 0.0;
    for (const auto& pair : pairs) {
      const NgramCounts reference_max = max_reference_counts(pair.references, n);
      for (const auto& [gram, c] : count_ngrams(pair.hypothesis, n)) {
        hypothesis_ngrams += static_cast<double>(c);
        auto it = reference_max.find(gram);
        if (it == reference_max.end()) continue;
        weighted += static_cast<double>(std::min(c, it->second)) * info(gram);
      }
    }
    if (hypothesis_ngrams > 0) score += weighted / hypothesis_ngrams;
  }

  double brevity = 1.0;
  if (mean_reference_length > 0) {
    const double ratio = std::min(hypothesis_length / mean_reference_length, 1.0);
    if (ratio <= 0) return 0.0;
    const double l = std::log(ratio);
    brevity = std::exp(nist_beta() * l * l);
  }
  return score * brevity;
}

std::vector<ScoredRecord> read_results(const std::filesystem::path& path) {
  std::vector<ScoredRecord> records;
  jsonl::for_each_record(path, [&](const nlohmann::json& rec, std::size_t line) {
    ScoredRecord r;
    r.dialog_id = rec.value("dialog_id", std::string());
    r.turn_index = rec.value("turn_index", 0);
    const std::string label =
        jsonl::where(path, line) + " (" + r.dialog_id + "/" + std::to_string(r.turn_index) + ")";
    if (!rec.contains("reference") || !rec["reference"].is_string())
      throw LoadError(label + ": record missing reference");
    if (!rec.contains("hypothesis") || !rec["hypothesis"].is_string())
      throw LoadError(label + ": record missing hypothesis");
    r.hypothesis = rec["hypothesis"].get<std::string>();
    r.reference = rec["reference"].get<std::string>();
    records.push_back(std::move(r));
  });
  return records;
}

EvalReport evaluate(std::span<const ScoredRecord> records) {
  if (records.empty()) throw PreconditionError("no results to evaluate");
  std::vector<TokenizedPair> pairs;
  pairs.reserve(records.size());
  EvalReport report;
  for (const auto& r : records) {
    TokenizedPair pair{tokenize(r.hypothesis), {tokenize(r.reference)}};
    SampleDiagnostics d;
    d.dialog_id = r.dialog_id;
    d.turn_index = r.turn_index;
    d.hypothesis_tokens = pair.hypothesis.size();
    d.reference_tokens = pair.references.front().size();
    d.unigram_matches = clipped_matches(pair.hypothesis, count_ngrams(pair.references.front(), 1), 1);
    report.per_sample.push_back(std::move(d));
    pairs.push_back(std::move(pair));
  }
  report.bleu = corpus_bleu(pairs);
  report.nist = corpus_nist(pairs);
  report.sample_count = records.size();
  return report;
}

std::string format_table(const EvalReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-8s %-8s %-8s %-8s %-8s\n%-8.2f %-8.2f %-8.2f %-8.2f %-8.4f\n", "BLEU-1",
                "BLEU-2", "BLEU-3", "BLEU-4", "NIST", report.bleu[0], report.bleu[1],
                report.bleu[2], report.bleu[3], report.nist);
  return std::string(buf) + "samples: " + std::to_string(report.sample_count) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json per_sample = nlohmann::json::array();
  for (const auto& d : report.per_sample)
    per_sample.push_back({{"dialog_id", d.dialog_id},
                          {"turn_index", d.turn_index},
                          {"hypothesis_tokens", d.hypothesis_tokens},
                          {"reference_tokens", d.reference_tokens},
                          {"unigram_matches", d.unigram_matches}});
  nlohmann::json doc = {{"bleu", report.bleu},
                        {"nist", report.nist},
                        {"sample_count", report.sample_count},
                        {"per_sample", std::move(per_sample)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  std::ofstream table(path.string() + ".txt", std::ios::binary);
  if (!table) throw Error("cannot open " + path.string() + ".txt for writing");
  table << format_table(report);
}

}  // namespace dualknow::metrics
