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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dualknow/config.hpp"

namespace dualknow::cli {

enum ExitCode : int { kSuccess = 0, kConfigOrIoError = 1, kPartialFailure = 2 };

/// Entry point shared by the executable and the tests. Subcommands: ingest,
/// run, eval, chat, probe, export-sft.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& results_path, const std::filesystem::path& report_path,
             std::ostream& out, std::ostream& err);
int cmd_chat(const RunConfig& config, bool verbose, std::istream& in, std::ostream& out,
             std::ostream& err);
int cmd_probe(const RunConfig& config, const std::string& dialog_id, int turn_index,
              std::ostream& out, std::ostream& err);
int cmd_export_sft(const RunConfig& config, const std::filesystem::path& out_path,
                   std::ostream& out, std::ostream& err);

}  // namespace dualknow::cli
