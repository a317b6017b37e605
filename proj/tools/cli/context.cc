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

#include "context.h"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "casnn/common/error.h"
#include "casnn/common/parallel.h"
#include "casnn/common/rng.h"

namespace casnn::cli {

void RunContext::finalize() {
  threads = deterministic ? 1 : resolve_thread_count(threads_flag);
  if (config_path.empty()) return;
  require_file(config_path);
  std::ifstream in(config_path);
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(config_path + ": " + e.what());
  }
  if (!config.is_object()) throw DataError(config_path + ": top level must be an object");
}

nlohmann::json RunContext::section(const std::string& name) const {
  const auto it = config.find(name);
  if (it == config.end()) return nlohmann::json::object();
  if (!it->is_object()) throw DataError("config section '" + name + "' must be an object");
  return *it;
}

std::uint64_t RunContext::stream_seed(const std::string& stream) const {
  return derive_seed(seed, stream);
}

void RunContext::archive(const std::string& path, const nlohmann::json& settings) const {
  const nlohmann::json doc = {{"command", command},
                              {"seed", seed},
                              {"threads", threads},
                              {"deterministic", deterministic},
                              {"settings", settings}};
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing input: " + path);
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void log_line(const std::string& message) { std::cerr << "[casnn] " << message << std::endl; }

std::vector<trainproto::Slide> load_slides(const trainproto::DatasetIndex& index,
                                           const std::vector<trainproto::SlideRecord>& records) {
  std::vector<trainproto::Slide> slides;
  slides.reserve(records.size());
  for (const auto& r : records) slides.push_back(trainproto::load_slide(index, r));
  return slides;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Context-aware stacked CNN pipeline for tissue-image classification"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  RunContext ctx;
  app.add_option("--config", ctx.config_path, "JSON config file with per-stage sections");
  app.add_option("--seed", ctx.seed, "Root seed for all random streams");
  app.add_option("--threads", ctx.threads_flag,
                 "Worker threads (fallback: CAS_PIPELINE_THREADS, then 1)");
  app.add_flag("--deterministic", ctx.deterministic, "Force single-threaded execution");

  CommandTable table;
  add_data_commands(app, table);
  add_train_commands(app, table);
  add_predict_commands(app, table);
  add_forest_commands(app, table);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    ctx.finalize();
    configure_blas_single_threaded();
    for (auto& [sub, command] : table.entries) {
      if (sub->parsed()) {
        ctx.command = sub->get_name();
        command(ctx);
        return 0;
      }
    }
    return 1;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace casnn::cli
