// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>

#include "simuhome/common/error.hpp"
#include "simuhome/episodes/generator.hpp"
#include "simuhome/serve/server.hpp"
#include "support.hpp"

using namespace simuhome;
using json = nlohmann::json;

namespace {

engine::Engine fan_home() {
  auto e = testkit::small_home();
  e.add_device("fan", "living_room_fan_1", "living_room", "fan 1");
  return e;
}

json post(httplib::Client& c, const std::string& path, const std::string& body) {
  auto r = c.Post(path, body, "application/json");
  if (!r) throw std::runtime_error("no response");
  return json::parse(r->body);
}

json get(httplib::Client& c, const std::string& path) {
  auto r = c.Get(path);
  if (!r) throw std::runtime_error("no response");
  return json::parse(r->body);
}

std::string tool(const std::string& name, json args, int id = 1) {
  return json{{"id", id}, {"tool", name}, {"args", std::move(args)}}.dump();
}

}  // namespace

TEST(Serve, ToolRoundTripOnEphemeralPort) {
  serve::Server server(fan_home());
  const int port = server.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client c("127.0.0.1", port);
  EXPECT_EQ(get(c, "/health").at("data").at("wire_version"), tools::kWireVersion);
  const auto r = post(c, "/tool", tool("get_room_devices", {{"room_id", "living_room"}}, 7));
  EXPECT_EQ(r.at("id"), 7);
  EXPECT_TRUE(r.at("ok").get<bool>());
  const auto off = post(c, "/tool", tool("write_attribute", testkit::write_args("living_room_fan_1", "FanControl", "PercentSetting", 40)));
  EXPECT_FALSE(off.at("ok").get<bool>());
  EXPECT_EQ(off.at("error").at("code"), "DependencyUnmet");
  server.stop();
}

TEST(Serve, MalformedRequestsGetBadRequest) {
  serve::Server server(fan_home());
  const int port = server.start("127.0.0.1", 0);
  httplib::Client c("127.0.0.1", port);
  for (const std::string body : {"{not json", "[1,2]", R"({"id":1})", R"({"id":1,"tool":5})"}) {
    const auto r = post(c, "/tool", body);
    EXPECT_FALSE(r.at("ok").get<bool>()) << body;
    EXPECT_EQ(r.at("error").at("code"), "BadRequest") << body;
  }
  const auto adm = c.Post("/admin/advance_to", "{\"time\": 5}", "application/json");
  ASSERT_TRUE(adm);
  EXPECT_EQ(adm->status, 400);
  EXPECT_EQ(json::parse(adm->body).at("error").at("code"), "BadRequest");
  server.stop();
}

TEST(Serve, SessionsAreIsolated) {
  serve::Server server(fan_home());
  const int port = server.start("127.0.0.1", 0);
  httplib::Client c("127.0.0.1", port);
  const auto a = post(c, "/sessions", "").at("data").at("session_id").get<std::string>();
  const auto b = post(c, "/sessions", "").at("data").at("session_id").get<std::string>();
  ASSERT_NE(a, b);
  EXPECT_TRUE(post(c, "/sessions/" + a + "/tool", tool("execute_command", testkit::cmd_args("living_room_fan_1", "OnOff", "On")))
                  .at("ok")
                  .get<bool>());
  post(c, "/sessions/" + a + "/admin/advance_to", R"({"seconds": 120})");
  const auto sa = get(c, "/sessions/" + a + "/admin/snapshot").at("data");
  const auto sb = get(c, "/sessions/" + b + "/admin/snapshot").at("data");
  EXPECT_NE(sa.at("state_hash"), sb.at("state_hash"));
  EXPECT_EQ(sa.at("log").at("entries").size(), 1u);
  EXPECT_EQ(sb.at("log").at("entries").size(), 0u);
  EXPECT_EQ(sb.at("now"), fan_home().now_string());
  EXPECT_EQ(sa.at("now"), format_vtime(fan_home().now() + 120));
  // The snapshot restores to the same state.
  EXPECT_EQ(engine::Engine::from_json(sa.at("snapshot")).state_hash(), sa.at("state_hash"));

  auto del = c.Delete("/sessions/" + a);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  EXPECT_EQ(c.Post("/sessions/" + a + "/tool", tool("get_current_time", json::object()), "application/json")->status, 404);
  server.stop();
}

TEST(Serve, AdvanceToRejectsPastTargets) {
  serve::Server server(fan_home());
  const auto r = server.handle("POST", "/admin/advance_to", json{{"time", "2020-01-01 00:00:00"}}.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error").at("code"), "PastTarget");
  const auto ok = server.handle("POST", "/admin/advance_to", json{{"time", "2025-01-01 12:10:00"}}.dump());
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body.at("data").at("now"), "2025-01-01 12:10:00");
}

TEST(Serve, LoadEpisodeResetsTheSession) {
  std::optional<episodes::Episode> ep;
  for (std::uint64_t s = 1; !ep; ++s) try {
      ep = episodes::generate_episode(episodes::QueryType::QT3, s);
    } catch (const Error&) {
    }
  serve::Server server(fan_home());
  server.handle("POST", "/tool", tool("get_current_time", json::object()));
  const auto r = server.handle("POST", "/admin/load_episode", json{{"episode", ep->to_json()}}.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body.at("data").at("state_hash"), episodes::build_initial_state(*ep).state_hash());
  const auto snap = server.handle("GET", "/admin/snapshot", "").body.at("data");
  EXPECT_EQ(snap.at("episode_id"), ep->id);
  EXPECT_TRUE(snap.at("log").at("entries").empty());

  const auto path = std::filesystem::temp_directory_path() / "simuhome_serve_episode.json";
  std::ofstream(path) << episodes::episode_file_text(*ep);
  EXPECT_EQ(server.handle("POST", "/admin/load_episode", json{{"path", path.string()}}.dump()).status, 200);
  EXPECT_EQ(serve::load_home(path, 0).state_hash(), episodes::build_initial_state(*ep).state_hash());
  std::filesystem::remove(path);
  EXPECT_EQ(server.handle("POST", "/admin/load_episode", "{}").status, 400);
}

TEST(Serve, LoadHomeAcceptsSnapshotsAndLayouts) {
  const auto dir = std::filesystem::temp_directory_path();
  auto e = fan_home();
  e.advance_seconds(30);
  std::ofstream(dir / "simuhome_home_snap.json") << e.to_json().dump();
  EXPECT_EQ(serve::load_home(dir / "simuhome_home_snap.json", 0).state_hash(), e.state_hash());
  auto layout = episodes::generate_layout(4).to_json();
  layout["epoch"] = "2025-04-04 08:00:00";
  std::ofstream(dir / "simuhome_home_layout.json") << layout.dump();
  const auto h = serve::load_home(dir / "simuhome_home_layout.json", 4);
  EXPECT_EQ(h.now_string(), "2025-04-04 08:00:00");
  EXPECT_EQ(h.home().rooms.size(), layout.at("rooms").size());
  std::ofstream(dir / "simuhome_home_bad.json") << "[]";
  EXPECT_THROW(serve::load_home(dir / "simuhome_home_bad.json", 0), Error);
}

TEST(Serve, RequestAfterStopFailsToConnect) {
  int port = 0;
  {
    serve::Server server(fan_home());
    port = server.start("127.0.0.1", 0);
    server.stop();
  }
  httplib::Client c("127.0.0.1", port);
  c.set_connection_timeout(1);
  EXPECT_FALSE(c.Get("/health"));
}
