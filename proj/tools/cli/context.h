/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CASNN_TOOLS_CLI_CONTEXT_H_
#define CASNN_TOOLS_CLI_CONTEXT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "casnn/trainproto/dataset.h"

namespace casnn::cli {

// Options shared by every command plus the parsed --config document.
struct RunContext {
  std::string config_path;
  std::uint64_t seed = 0;
  int threads_flag = 0;
  bool deterministic = false;

  std::size_t threads = 1;
  nlohmann::json config = nlohmann::json::object();
  std::string command;

  // Resolves threads and loads the config file.
  void finalize();
  // config[name], or an empty object.
  nlohmann::json section(const std::string& name) const;
  std::uint64_t stream_seed(const std::string& stream) const;

  // Writes the effective settings of this run to `path` as JSON.
  void archive(const std::string& path, const nlohmann::json& settings) const;
};

using Command = std::function<void(RunContext&)>;
struct CommandTable {
  std::vector<std::pair<CLI::App*, Command>> entries;
  void add(CLI::App* app, Command command) { entries.emplace_back(app, std::move(command)); }
};

void add_data_commands(CLI::App& app, CommandTable& table);
void add_train_commands(CLI::App& app, CommandTable& table);
void add_predict_commands(CLI::App& app, CommandTable& table);
void add_forest_commands(CLI::App& app, CommandTable& table);

// Helpers shared by the command files.
void require_file(const std::string& path);
void ensure_parent_dir(const std::string& path);
void log_line(const std::string& message);
std::vector<trainproto::Slide> load_slides(const trainproto::DatasetIndex& index,
                                           const std::vector<trainproto::SlideRecord>& records);

// Entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace casnn::cli

#endif  // CASNN_TOOLS_CLI_CONTEXT_H_
