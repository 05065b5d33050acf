// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <sstream>

#include "simuhome/common/digest.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/common/rng.hpp"
#include "simuhome/episodes/generator.hpp"

namespace simuhome::episodes {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
}

std::string ordinal_id(QueryType qt, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return std::string(to_string(qt)) + "-" + buf;
}

}  // namespace

std::string episode_file_text(const Episode& ep) { return ep.to_json().dump(2) + "\n"; }

Benchmark build_benchmark(const BenchmarkConfig& cfg) {
  Benchmark b;
  json entries = json::array(), types = json::array();
  for (auto qt : cfg.types) {
    types.push_back(to_string(qt));
    for (int i = 0; i < cfg.count; ++i) {
      std::optional<Episode> ep;
      std::string last_reason;
      for (int attempt = 0; attempt < cfg.max_attempts && !ep; ++attempt) {
        const auto seed = mix_seed({cfg.base_seed, static_cast<std::uint64_t>(qt), static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(attempt)});
        try {
          ep = generate_episode(qt, seed, cfg.gen);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Unsatisfiable) throw;
          last_reason = e.what();
        }
      }
      if (!ep)
        throw Error(ErrorCode::Unsatisfiable, std::string(display_name(qt)) + " episode " + std::to_string(i) + " not found in " +
                                                  std::to_string(cfg.max_attempts) + " attempts: " + last_reason);
      ep->id = ordinal_id(qt, i);
      const auto q = synthesize_query(*ep, cfg.writer);
      ep->query = q.text;
      ep->query_source = q.source;
      entries.push_back({{"id", ep->id},
                         {"query_type", to_string(qt)},
                         {"feasible", ep->feasible()},
                         {"seed", ep->seed},
                         {"file", "episodes/" + ep->id + ".json"},
                         {"sha256", sha256_hex(episode_file_text(*ep))}});
      if (cfg.progress) cfg.progress(*ep);
      b.episodes.push_back(std::move(*ep));
    }
  }
  b.manifest = {{"format", "simuhome-benchmark"},
                {"version", 1},
                {"base_seed", cfg.base_seed},
                {"count_per_type", cfg.count},
                {"query_types", types},
                {"warmup_ops", cfg.gen.warmup_ops},
                {"settle_seconds", cfg.gen.settle_seconds},
                {"episodes", entries}};
  return b;
}

void write_benchmark(const Benchmark& b, const fs::path& dir) {
  fs::create_directories(dir / "episodes");
  for (const auto& ep : b.episodes) write_file(dir / "episodes" / (ep.id + ".json"), episode_file_text(ep));
  write_file(dir / "manifest.json", b.manifest.dump(2) + "\n");
}

Episode load_episode(const fs::path& file) {
  const auto text = read_file(file);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
  return Episode::from_json(j);
}

std::vector<Episode> load_episodes(const fs::path& dir) {
  std::vector<Episode> out;
  if (fs::exists(dir / "manifest.json")) {
    const auto manifest = json::parse(read_file(dir / "manifest.json"));
    for (const auto& e : manifest.at("episodes")) {
      const auto path = dir / e.at("file").get<std::string>();
      if (sha256_hex(read_file(path)) != e.at("sha256").get<std::string>())
        throw Error(ErrorCode::ParseError, path.string() + " does not match the manifest digest");
      out.push_back(load_episode(path));
    }
    return out;
  }
  const auto root = fs::exists(dir / "episodes") ? dir / "episodes" : dir;
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(root))
    if (f.path().extension() == ".json") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_episode(f));
  return out;
}

}  // namespace simuhome::episodes
