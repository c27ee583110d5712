#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <queue>
#include <set>
#include <vector>

#include "idss/overlay.hpp"

using namespace idss;
using namespace idss::overlay;

namespace {

std::vector<PeerId> make_peers(int n, std::uint64_t seed = 1) {
  std::vector<PeerId> ids;
  for (int i = 0; i < n; ++i)
    ids.push_back(hash128("peer/" + std::to_string(seed) + "/" + std::to_string(i)));
  return ids;
}

Ring make_ring(const std::vector<PeerId>& ids) {
  Ring ring;
  for (PeerId id : ids) ring.join(id);
  return ring;
}

// Peers reachable by repeatedly following broadcast_children from `start`.
std::size_t flood_reach(const Ring& ring, PeerId start, int fanout) {
  std::set<PeerId> seen{start};
  std::queue<PeerId> frontier;
  frontier.push(start);
  while (!frontier.empty()) {
    PeerId cur = frontier.front();
    frontier.pop();
    for (PeerId next : ring.broadcast_children(cur, fanout))
      if (seen.insert(next).second) frontier.push(next);
  }
  return seen.size();
}

}  // namespace

TEST_CASE("membership is a sorted set with duplicate joins rejected") {
  auto ids = make_peers(8);
  Ring ring = make_ring(ids);
  CHECK(ring.size() == 8);
  CHECK(std::is_sorted(ring.ids().begin(), ring.ids().end()));
  CHECK_THROWS_AS(ring.join(ids[0]), Error);
  ring.leave(ids[0]);
  CHECK(ring.size() == 7);
  CHECK_FALSE(ring.contains(ids[0]));
}

TEST_CASE("routing finds the successor and wraps past the largest id") {
  auto ids = make_peers(8);
  Ring ring = make_ring(ids);
  auto sorted = ring.ids();
  CHECK(ring.route(sorted.front()) == sorted.front());

  Key128 above_max = sorted.back();
  above_max.lo += 1;
  CHECK(ring.route(above_max) == sorted.front());  // wraparound

  Key128 between = sorted[3];
  between.lo += 1;  // just past the fourth peer
  CHECK(ring.route(between) == sorted[4]);

  CHECK_THROWS_AS(Ring{}.route(Key128{}), Error);
}

TEST_CASE("broadcast children exclude the sender and contain no duplicates") {
  auto ids = make_peers(8);
  Ring ring = make_ring(ids);
  for (PeerId self : ids) {
    auto kids = ring.broadcast_children(self, 3);
    CHECK(!kids.empty());
    CHECK(std::count(kids.begin(), kids.end(), self) == 0);
    std::set<PeerId> uniq(kids.begin(), kids.end());
    CHECK(uniq.size() == kids.size());
    CHECK(kids.size() <= 3);
  }
  Ring lone = make_ring(make_peers(1));
  CHECK(lone.broadcast_children(lone.ids()[0], 3).empty());
}

TEST_CASE("repeated forwarding covers the whole overlay from any initiator") {
  for (int n : {2, 8, 64, 257}) {
    auto ids = make_peers(n, 9);
    Ring ring = make_ring(ids);
    CHECK(flood_reach(ring, ids[0], 3) == static_cast<std::size_t>(n));
    CHECK(flood_reach(ring, ids[n / 2], 3) == static_cast<std::size_t>(n));
  }
}

TEST_CASE("the event loop orders by time, then scheduling order") {
  EventLoop loop;
  std::vector<int> order;
  loop.at(10, [&] { order.push_back(2); });
  loop.at(5, [&] { order.push_back(1); });
  loop.at(10, [&] { order.push_back(3); });  // same time: FIFO
  CHECK(loop.run(100));
  CHECK(order == std::vector<int>{1, 2, 3});
  CHECK(loop.now() == 10);
}

TEST_CASE("the horizon cuts execution and reports it") {
  EventLoop loop;
  int ran = 0;
  loop.at(50, [&] { ++ran; });
  loop.at(200, [&] { ++ran; });
  CHECK_FALSE(loop.run(100));
  CHECK(ran == 1);
}

TEST_CASE("past-dated events run at the current virtual time, never earlier") {
  EventLoop loop;
  std::int64_t observed = -1;
  loop.at(20, [&] {
    loop.at(5, [&] { observed = loop.now(); });  // already in the past
  });
  loop.run(100);
  CHECK(observed == 20);
}

TEST_CASE("transport delivery and loss are reproducible per seed") {
  auto run_once = [](std::uint64_t seed) {
    EventLoop loop;
    EventLog log;
    Transport t(loop, LatencyModel{5, 50}, 0.5, seed, log);
    int delivered = 0;
    t.set_sink([&](const OverlayMessage&) { ++delivered; });
    auto ids = make_peers(2);
    for (int i = 0; i < 200; ++i) {
      OverlayMessage msg;
      msg.body = QueryBroadcast{Uqi{hash128("q")}, "SELECT * FROM t", 100, ids[0], ids[0]};
      msg.src = ids[0];
      msg.dst = ids[1];
      msg.send_time = loop.now();
      t.send(msg);
    }
    loop.run(10'000);
    return std::pair{delivered, log.digest()};
  };
  auto [d1, g1] = run_once(7);
  auto [d2, g2] = run_once(7);
  auto [d3, g3] = run_once(8);
  CHECK(d1 == d2);
  CHECK(g1 == g2);
  CHECK(g1 != g3);
  CHECK(d1 > 0);
  CHECK(d1 < 200);  // half the sends drop on average

  EventLoop loop;
  EventLog log;
  Transport lossless(loop, LatencyModel{5, 5}, 0.0, 1, log);
  int delivered = 0;
  lossless.set_sink([&](const OverlayMessage&) { ++delivered; });
  auto ids = make_peers(2);
  OverlayMessage msg;
  msg.body = QueryBroadcast{Uqi{hash128("q")}, "SELECT * FROM t", 100, ids[0], ids[0]};
  msg.src = ids[0];
  msg.dst = ids[1];
  lossless.send(msg);
  loop.run(100);
  CHECK(delivered == 1);
  CHECK(log.lines().size() == 1);
  CHECK(log.lines()[0].find("bcast") != std::string::npos);
}
