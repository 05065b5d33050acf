// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "simuhome/common/chat.hpp"
#include "simuhome/episodes/episode.hpp"

namespace simuhome::episodes {

struct GenConfig {
  int warmup_ops = 20;
  std::int64_t settle_seconds = 60;
};

struct RoomVocab {
  std::string room_id;
  std::string display_name;
  std::vector<std::string> device_pool;
};

const std::vector<RoomVocab>& room_vocabulary();

LayoutSpec generate_layout(std::uint64_t seed);

// Applies `n_ops` random valid device operations at the engine's current time
// and returns them in order. Rejected samples are resampled.
std::vector<WarmupOp> warm_up(engine::Engine& eng, std::uint64_t seed, int n_ops);

// Generates and certifies one episode. Throws Unsatisfiable when the sampled
// home cannot host the query type.
Episode generate_episode(QueryType qt, std::uint64_t seed, const GenConfig& cfg = {});

// Optional language-model rewrite of the template query.
class QueryWriter {
 public:
  virtual ~QueryWriter() = default;
  virtual std::string write(const Episode& ep) = 0;  // throws on failure
};

class ChatQueryWriter : public QueryWriter {
 public:
  explicit ChatQueryWriter(ChatConfig cfg) : cfg_(std::move(cfg)) {}
  std::string write(const Episode& ep) override;

 private:
  ChatConfig cfg_;
};

// Case-insensitive check that every goal subject appears in the text.
bool query_mentions_subjects(const Episode& ep, const std::string& text);

struct QueryResult {
  std::string text;
  std::string source;  // template | llm
};

// Keeps the template text unless the writer's output passes validation
// within `retries` attempts.
QueryResult synthesize_query(const Episode& ep, QueryWriter* writer, int retries = 2);

struct BenchmarkConfig {
  int count = 50;
  std::uint64_t base_seed = 7;
  std::vector<QueryType> types{kQueryTypes.begin(), kQueryTypes.end()};
  GenConfig gen;
  int max_attempts = 400;
  QueryWriter* writer = nullptr;
  std::function<void(const Episode&)> progress;
};

struct Benchmark {
  std::vector<Episode> episodes;
  json manifest;
};

Benchmark build_benchmark(const BenchmarkConfig& cfg);
std::string episode_file_text(const Episode& ep);
// Writes <dir>/episodes/<id>.json and <dir>/manifest.json.
void write_benchmark(const Benchmark& b, const std::filesystem::path& dir);

Episode load_episode(const std::filesystem::path& file);
// Accepts a benchmark directory (manifest order) or a directory of episode files.
std::vector<Episode> load_episodes(const std::filesystem::path& dir);

}  // namespace simuhome::episodes
