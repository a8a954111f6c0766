#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>

#include "support.hpp"

using namespace ipmsrl;
using namespace testing_support;

namespace {

struct Client {
  Session session;
  std::int64_t next_id = 1;

  explicit Client(std::shared_ptr<const Scenario> sc) : session(std::move(sc)) {}

  json send(json req) {
    req["id"] = next_id++;
    return json::parse(session.handle(req.dump()));
  }
};

std::string join_trace(const json& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

}  // namespace

TEST(Protocol, HelloDescribesEnvironment) {
  auto sc = default_scenario();
  Client c(sc);
  auto r = c.send({{"type", "hello"}, {"protocol", "ipmsrl-proto/1"}});
  EXPECT_EQ(r["type"], "hello");
  EXPECT_EQ(r["id"], 1);
  EXPECT_EQ(r["protocol"], "ipmsrl-proto/1");
  EXPECT_EQ(r["layout"], "ipmsrl-obs/1");
  EXPECT_EQ(r["agents"], json::array({0, 1}));
  EXPECT_EQ(r["obs_length"], 63);
  EXPECT_EQ(r["action_space"]["size"], 46);
  EXPECT_EQ(r["action_space"]["targets"].size(), 15u);
}

TEST(Protocol, VersionMismatch) {
  Client c(default_scenario());
  auto r = c.send({{"type", "hello"}, {"protocol", "ipmsrl-proto/0"}});
  EXPECT_EQ(r["type"], "error");
  EXPECT_EQ(r["code"], "version_mismatch");
  EXPECT_FALSE(c.session.greeted());
}

TEST(Protocol, ResetTwiceIdenticalObservations) {
  Client c(default_scenario());
  c.send({{"type", "hello"}});
  auto a = c.send({{"type", "reset"}, {"seed", 7}});
  auto b = c.send({{"type", "reset"}, {"seed", 7}});
  EXPECT_EQ(a["type"], "obs");
  EXPECT_EQ(a["obs"], b["obs"]);
  EXPECT_EQ(a["masks"], b["masks"]);
  ASSERT_EQ(a["obs"].size(), 2u);
  EXPECT_EQ(a["obs"][0].size(), 63u);
  EXPECT_EQ(a["masks"][0].size(), 46u);
}

TEST(Protocol, IllegalActionDowngradedToWait) {
  auto sc = default_scenario();
  Client c(sc);
  c.send({{"type", "hello"}});
  c.send({{"type", "reset"}, {"seed", 1}});
  ActionSpace space(sc->network);
  const auto contain_critical = *space.encode(DefenderAction::contain(idx(*sc, "cwp-1")));
  auto r = c.send({{"type", "act"}, {"actions", {contain_critical, 0}}});
  EXPECT_EQ(r["type"], "step_result");
  EXPECT_EQ(r["illegal"], json::array({true, false}));
  EXPECT_EQ(r["t"], 1);
}

TEST(Protocol, StructuredActions) {
  auto sc = default_scenario();
  Client c(sc);
  c.send({{"type", "hello"}});
  c.send({{"type", "reset"}, {"seed", 1}});
  auto r = c.send({{"type", "act"}, {"actions", {{{"kind", "contain"}, {"target", "hmi-1"}}, {{"kind", "wait"}}}}});
  EXPECT_EQ(r["type"], "step_result");
  EXPECT_EQ(r["illegal"], json::array({false, false}));
  auto bad = c.send({{"type", "act"}, {"actions", {{{"kind", "contain"}, {"target", "ghost"}}, 0}}});
  EXPECT_EQ(bad["code"], "bad_request");
  EXPECT_TRUE(c.session.in_episode());
}

TEST(Protocol, MalformedMessagesKeepSession) {
  Client c(default_scenario());
  c.send({{"type", "hello"}});
  c.send({{"type", "reset"}, {"seed", 1}});
  auto r = json::parse(c.session.handle("{not json"));
  EXPECT_EQ(r["type"], "error");
  EXPECT_EQ(r["code"], "malformed");
  EXPECT_TRUE(c.session.in_episode());
  auto wrong_count = c.send({{"type", "act"}, {"actions", {0}}});
  EXPECT_EQ(wrong_count["code"], "bad_request");
  auto out_of_range = c.send({{"type", "act"}, {"actions", {0, 4000}}});
  EXPECT_EQ(out_of_range["code"], "bad_request");
  auto unknown = c.send({{"type", "dance"}});
  EXPECT_EQ(unknown["code"], "unknown_type");
  EXPECT_TRUE(c.session.in_episode());
  EXPECT_EQ(c.send({{"type", "act"}, {"actions", {0, 0}}})["type"], "step_result");
}

TEST(Protocol, IdsMustIncrease) {
  Session s(default_scenario());
  auto a = json::parse(s.handle(R"({"type":"hello","id":5})"));
  EXPECT_EQ(a["type"], "hello");
  auto b = json::parse(s.handle(R"({"type":"reset","id":5,"seed":1})"));
  EXPECT_EQ(b["code"], "bad_id");
  auto c = json::parse(s.handle(R"({"type":"reset","seed":1})"));
  EXPECT_EQ(c["code"], "bad_id");
  auto d = json::parse(s.handle(R"({"type":"reset","id":6,"seed":1})"));
  EXPECT_EQ(d["type"], "obs");
}

TEST(Protocol, OrderViolationsResetToPostHello) {
  Client c(default_scenario());
  auto early = c.send({{"type", "reset"}, {"seed", 1}});
  EXPECT_EQ(early["code"], "protocol_order");
  auto act_first = c.send({{"type", "act"}, {"actions", {0, 0}}});
  EXPECT_EQ(act_first["code"], "protocol_order");
  c.send({{"type", "hello"}});
  auto act_no_episode = c.send({{"type", "act"}, {"actions", {0, 0}}});
  EXPECT_EQ(act_no_episode["code"], "protocol_order");
  EXPECT_TRUE(c.session.greeted());
  EXPECT_EQ(c.send({{"type", "reset"}, {"seed", 1}})["type"], "obs");
}

TEST(Protocol, EpisodeEndThenActIsOrderViolation) {
  json doc = chain_doc(1);
  doc["attacker"] = {{"initial_node", "none"}};
  Client c(scenario_from(doc));
  c.send({{"type", "hello"}});
  c.send({{"type", "reset"}, {"seed", 1}});
  auto end = c.send({{"type", "act"}, {"actions", {0}}});
  EXPECT_EQ(end["type"], "episode_end");
  EXPECT_EQ(end["outcome"], "win");
  EXPECT_EQ(end["terminal"], true);
  EXPECT_FALSE(end.contains("trace"));
  EXPECT_EQ(c.send({{"type", "act"}, {"actions", {0}}})["code"], "protocol_order");
}

// Fixed pseudo-random action ids driven over the protocol and in-process.
TEST(Protocol, TraceEquivalentToInProcessRun) {
  auto sc = default_scenario();
  ActionSpace space(sc->network);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng script(seed * 1000);
    std::vector<std::vector<std::int64_t>> actions;
    for (int t = 0; t < sc->config.horizon_T; ++t) {
      actions.push_back({static_cast<std::int64_t>(script.uniform_index(space.size())),
                         static_cast<std::int64_t>(script.uniform_index(space.size()))});
    }

    Client c(sc);
    c.send({{"type", "hello"}});
    c.send({{"type", "reset"}, {"seed", seed}, {"episode_index", 4}, {"record_trace", true}});
    json last;
    std::size_t k = 0;
    do {
      last = c.send({{"type", "act"}, {"actions", actions[k++]}});
    } while (last["type"] == "step_result");
    ASSERT_EQ(last["type"], "episode_end");

    Episode ep(sc, seed, 4);
    for (std::size_t i = 0; !ep.terminal(); ++i) {
      std::vector<DefenderAction> joint{*space.decode(actions[i][0]), *space.decode(actions[i][1])};
      ep.step(joint);
    }
    EXPECT_EQ(join_trace(last["trace"]), to_ndjson(ep.trace(), sc->network));
    EXPECT_EQ(last["length"], ep.world().t);
  }
}

TEST(Protocol, StreamTransportOverPipes) {
  auto sc = default_scenario();
  int to_server[2], from_server[2];
  ASSERT_EQ(pipe(to_server), 0);
  ASSERT_EQ(pipe(from_server), 0);
  auto done = std::async(std::launch::async, [&] {
    auto end = serve_stream(sc, to_server[0], from_server[1]);
    close(from_server[1]);
    return end;
  });
  const std::string req = "{\"type\":\"hello\",\"id\":1}\n\n{\"type\":\"reset\",\"id\":2,\"seed\":3}\n";
  ASSERT_EQ(write(to_server[1], req.data(), req.size()), static_cast<ssize_t>(req.size()));
  close(to_server[1]);
  EXPECT_EQ(done.get(), SessionEnd::Eof);
  std::string out;
  char buf[4096];
  for (ssize_t n; (n = read(from_server[0], buf, sizeof buf)) > 0;) out.append(buf, static_cast<std::size_t>(n));
  close(to_server[0]);
  close(from_server[0]);
  std::istringstream lines(out);
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  EXPECT_EQ(json::parse(l1)["type"], "hello");
  EXPECT_EQ(json::parse(l2)["type"], "obs");
  EXPECT_FALSE(std::getline(lines, l3));
}

TEST(Protocol, IdleTimeoutClosesSession) {
  int p[2], q[2];
  ASSERT_EQ(pipe(p), 0);
  ASSERT_EQ(pipe(q), 0);
  ServeOptions opts;
  opts.idle_timeout = std::chrono::milliseconds(100);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(serve_stream(default_scenario(), p[0], q[1], opts), SessionEnd::IdleTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  for (int fd : {p[0], p[1], q[0], q[1]}) close(fd);
}

TEST(Protocol, TcpSession) {
  auto sc = default_scenario();
  std::promise<int> port;
  auto server = std::async(std::launch::async, [&] {
    serve_tcp(sc, "127.0.0.1", 0, ServeOptions{}, 1, [&](int p) { port.set_value(p); });
  });
  const int p = port.get_future().get();
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(p));
  inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  ASSERT_EQ(connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  const std::string req = "{\"type\":\"hello\",\"id\":1}\n";
  ASSERT_EQ(write(fd, req.data(), req.size()), static_cast<ssize_t>(req.size()));
  std::string out;
  char buf[4096];
  while (out.find('\n') == std::string::npos) {
    ssize_t n = read(fd, buf, sizeof buf);
    ASSERT_GT(n, 0);
    out.append(buf, static_cast<std::size_t>(n));
  }
  EXPECT_EQ(json::parse(out.substr(0, out.find('\n')))["obs_length"], 63);
  shutdown(fd, SHUT_WR);
  close(fd);
  server.get();
}
