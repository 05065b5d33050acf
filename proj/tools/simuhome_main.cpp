// SPDX-License-Identifier: Apache-2.0
// simuhome command line: serve, gen, run, eval.
#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "simuhome/agent/runner.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/episodes/generator.hpp"
#include "simuhome/serve/server.hpp"

using namespace simuhome;
namespace fs = std::filesystem;

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

std::vector<episodes::QueryType> parse_types(const std::string& spec) {
  if (spec == "all") return {episodes::kQueryTypes.begin(), episodes::kQueryTypes.end()};
  std::vector<episodes::QueryType> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto qt = episodes::parse_query_type(item);
    if (!qt) throw Error(ErrorCode::ConfigError, "unknown query type '" + item + "'");
    out.push_back(*qt);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no query types given");
  return out;
}

agent::JudgeFactory judge_factory(const std::string& spec, const std::string& model) {
  eval::make_judge(spec, model);  // validates once, up front
  return [spec, model] { return eval::make_judge(spec, model); };
}

struct ServeOpts {
  std::string home;
  std::uint64_t seed = 0;
  int port = -1;
  std::string host = "127.0.0.1";
};

int cmd_serve(const ServeOpts& o) {
  auto home = serve::load_home(o.home, o.seed);
  if (o.port < 0) {
    tools::Session session(home);
    tools::serve_stdio(session, std::cin, std::cout);
    return 0;
  }
  serve::Server server(std::move(home));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = server.start(o.host, o.port);
  std::cerr << "listening on " << o.host << ":" << port << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

struct GenOpts {
  std::string qt = "all";
  int count = 50;
  std::uint64_t seed = 7;
  std::string out;
  int warmup_ops = 20;
  std::string writer_url, writer_model, writer_key_env;
};

int cmd_gen(const GenOpts& o) {
  episodes::BenchmarkConfig cfg;
  cfg.types = parse_types(o.qt);
  cfg.count = o.count;
  cfg.base_seed = o.seed;
  cfg.gen.warmup_ops = o.warmup_ops;
  std::unique_ptr<episodes::ChatQueryWriter> writer;
  if (!o.writer_url.empty()) {
    ChatConfig chat{o.writer_url, o.writer_model, o.writer_key_env};
    check_chat_config(chat);
    writer = std::make_unique<episodes::ChatQueryWriter>(chat);
    cfg.writer = writer.get();
  }
  std::size_t done = 0;
  const auto total = cfg.types.size() * static_cast<std::size_t>(cfg.count);
  cfg.progress = [&](const episodes::Episode& ep) {
    if (++done % 25 == 0 || done == total) std::cerr << "[" << done << "/" << total << "] " << ep.id << "\n";
  };
  const auto b = episodes::build_benchmark(cfg);
  episodes::write_benchmark(b, o.out);
  std::cout << "wrote " << b.episodes.size() << " episodes to " << o.out << "\n";
  return 0;
}

struct RunOpts {
  std::string episodes, out;
  std::string provider;  // empty: chat
  std::string provider_url, model, api_key_env = "SIMUHOME_API_KEY";
  double temperature = 0.0;
  int max_steps = 30;
  int parallel = 1;
  std::string judge = "mock", judge_model;
};

int cmd_run(const RunOpts& o) {
  const auto eps = episodes::load_episodes(o.episodes);
  ChatConfig chat{o.provider_url, o.model, std::getenv(o.api_key_env.c_str()) ? o.api_key_env : ""};
  chat.temperature = o.temperature;
  const auto kind = !o.provider.empty() ? o.provider : "chat";
  const auto run = agent::run_benchmark(eps, agent::make_provider_factory(kind, chat), judge_factory(o.judge, o.judge_model),
                                        {{o.max_steps}, o.parallel, o.out});
  std::cout << run.summary.table();
  if (run.aborted) std::cerr << run.aborted << " episode(s) aborted on provider errors\n";
  return 0;
}

struct EvalOpts {
  std::string episodes, traces, judge = "mock", judge_model, out;
};

int cmd_eval(const EvalOpts& o) {
  const auto eps = episodes::load_episodes(o.episodes);
  fs::path dir = o.traces;
  if (fs::is_directory(dir / "trajectories")) dir /= "trajectories";
  std::set<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.insert(e.path());
  std::vector<agent::Trajectory> ts;
  for (const auto& f : files) ts.push_back(agent::Trajectory::from_json(agent::read_json(f)));
  const auto verdicts = agent::evaluate_saved(eps, ts, judge_factory(o.judge, o.judge_model));
  const auto summary = eval::aggregate_results(verdicts);
  const fs::path out = o.out.empty() ? fs::path(o.traces) : fs::path(o.out);
  for (const auto& v : verdicts) agent::write_json(out / "verdicts" / (v.episode_id + ".json"), v.to_json());
  agent::write_json(out / "summary.json", summary.to_json());
  std::ofstream(out / "summary.txt", std::ios::binary) << summary.table();
  std::cout << summary.table();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SimuHome smart-home simulator and benchmark"};
  app.require_subcommand(1);

  ServeOpts so;
  auto* serve = app.add_subcommand("serve", "Serve the tool API for one home (stdio unless --port is given)");
  serve->add_option("--home", so.home, "Snapshot, episode or layout file")->required()->check(CLI::ExistingFile);
  serve->add_option("--seed", so.seed, "Seed for layout instantiation");
  serve->add_option("--port", so.port, "TCP port; 0 picks a free one");
  serve->add_option("--host", so.host, "Bind address");

  GenOpts go;
  auto* gen = app.add_subcommand("gen", "Generate a certified episode set");
  gen->add_option("--qt", go.qt, "'all' or a comma list such as qt1,qt4_2_if");
  gen->add_option("--count", go.count, "Episodes per query type")->check(CLI::PositiveNumber);
  gen->add_option("--seed", go.seed, "Base seed");
  gen->add_option("--out", go.out, "Output directory")->required();
  gen->add_option("--warmup-ops", go.warmup_ops, "Random operations applied before each episode")->check(CLI::NonNegativeNumber);
  gen->add_option("--writer-url", go.writer_url, "Chat endpoint for query rewriting (optional)");
  gen->add_option("--writer-model", go.writer_model, "Model for query rewriting");
  gen->add_option("--writer-key-env", go.writer_key_env, "Variable holding the rewriting endpoint's key");

  RunOpts ro;
  auto* run = app.add_subcommand("run", "Run an agent over an episode set and score it");
  run->add_option("--episodes", ro.episodes, "Benchmark or episode directory")->required()->check(CLI::ExistingDirectory);
  run->add_option("--provider", ro.provider, "chat | golden | empty | omit-required")
      ->check(CLI::IsMember({"chat", "golden", "empty", "omit-required"}));
  run->add_option("--provider-url", ro.provider_url, "OpenAI-compatible base URL, e.g. http://127.0.0.1:8000/v1");
  run->add_option("--model", ro.model, "Model name sent to the provider");
  run->add_option("--api-key-env", ro.api_key_env, "Variable holding the provider key, used when set");
  run->add_option("--temperature", ro.temperature, "Sampling temperature");
  run->add_option("--max-steps", ro.max_steps, "Step budget per episode")->check(CLI::PositiveNumber);
  run->add_option("--parallel", ro.parallel, "Episodes run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--judge", ro.judge, "mock | scripted:<votes> | judge provider URL");
  run->add_option("--judge-model", ro.judge_model, "Model for a URL judge");
  run->add_option("--out", ro.out, "Output directory")->required();

  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "Score saved trajectories");
  ev->add_option("--episodes", eo.episodes, "Benchmark or episode directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--traces", eo.traces, "Run directory or trajectory directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--judge", eo.judge, "mock | scripted:<votes> | judge provider URL");
  ev->add_option("--judge-model", eo.judge_model, "Model for a URL judge");
  ev->add_option("--out", eo.out, "Where verdicts and the summary go (default: --traces)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve) return cmd_serve(so);
    if (*gen) return cmd_gen(go);
    if (*run) return cmd_run(ro);
    if (*ev) return cmd_eval(eo);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
