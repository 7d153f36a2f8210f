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

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualknow::metrics {

using Tokens = std::vector<std::string>;

/// Lowercases, then emits every ASCII punctuation character as its own token
/// and splits the rest on whitespace.
Tokens tokenize(std::string_view text);

struct TokenizedPair {
  Tokens hypothesis;
  /// At least one.
  std::vector<Tokens> references;
};

/// Corpus-level clipped n-gram statistics for orders 1..max_n.
struct BleuStats {
  std::vector<double> matches;  // clipped numerators per order
  std::vector<double> totals;   // hypothesis n-gram counts per order
  double hypothesis_length = 0;
  double reference_length = 0;  // effective (closest) reference length
};

BleuStats bleu_stats(std::span<const TokenizedPair> pairs, int max_n = 4);

/// BLEU-1..BLEU-4 on the 0-100 scale, no smoothing. Throws
/// PreconditionError on an empty corpus.
std::array<double, 4> corpus_bleu(std::span<const TokenizedPair> pairs, int max_n = 4);

/// NIST with information weights from the reference side of the corpus.
/// Throws PreconditionError on an empty corpus.
double corpus_nist(std::span<const TokenizedPair> pairs, int max_n = 5);

/// Exponent scale giving a brevity factor of 0.5 at a length ratio of 2/3.
double nist_beta();

struct SampleDiagnostics {
  std::string dialog_id;
  int turn_index = 0;
  std::size_t hypothesis_tokens = 0;
  std::size_t reference_tokens = 0;
  std::size_t unigram_matches = 0;
};

struct EvalReport {
  std::array<double, 4> bleu{};
  double nist = 0.0;
  std::size_t sample_count = 0;
  std::vector<SampleDiagnostics> per_sample;
};

struct ScoredRecord {
  std::string dialog_id;
  int turn_index = 0;
  std::string hypothesis;
  std::string reference;
};

/// Reads {dialog_id, turn_index, hypothesis, reference} lines. Throws
/// LoadError naming the record when a field is missing.
std::vector<ScoredRecord> read_results(const std::filesystem::path& path);

EvalReport evaluate(std::span<const ScoredRecord> records);

/// Five headline numbers as a fixed-width text table.
std::string format_table(const EvalReport& report);

void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace dualknow::metrics
