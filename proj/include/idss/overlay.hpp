#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "idss/error.hpp"
#include "idss/key128.hpp"
#include "idss/query_state.hpp"
#include "idss/storage.hpp"

namespace idss::overlay {

using PeerId = query_state::PeerId;
using query_state::Uqi;

// One-hop membership: every peer holds the full sorted ring.
class Ring {
 public:
  void join(PeerId peer);
  void leave(PeerId peer);
  bool contains(PeerId peer) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<PeerId>& ids() const { return ids_; }

  // Successor of `key` on the ring (first id >= key, wrapping).
  PeerId route(Key128 key) const;

  // Deterministic forwarding set: the immediate successor plus peers at
  // geometric offsets ceil(N^(j/k)). The union over all peers strongly
  // connects the ring and different senders overlap, so duplicate
  // deliveries occur and exercise the dedup path.
  std::vector<PeerId> broadcast_children(PeerId self, int fanout) const;

 private:
  std::vector<PeerId> ids_;  // sorted
};

struct QueryBroadcast {
  Uqi uqi;
  std::string sql;
  std::int64_t ttl = 0;  // ms, already decayed for the receiver
  PeerId sender;
  PeerId initiator;  // result destination under the initiator-collector strategy
};

struct ResultReturn {
  Uqi uqi;
  storage::Recordset rows;
  std::vector<PeerId> contributors;  // peers whose local results are folded in
  PeerId origin;
};

struct OverlayMessage {
  std::variant<QueryBroadcast, ResultReturn> body;
  PeerId src;
  PeerId dst;
  std::int64_t send_time = 0;
};

// Newline-delimited trace: time,kind,src,dst,uqi.
class EventLog {
 public:
  void append(std::int64_t time, const std::string& kind, PeerId src, PeerId dst, const Uqi& uqi);
  const std::vector<std::string>& lines() const { return lines_; }
  Key128 digest() const;
  std::string text() const;

 private:
  std::vector<std::string> lines_;
};

// Single-threaded discrete-event loop over a virtual clock. Events at equal
// times run in scheduling order.
class EventLoop {
 public:
  std::int64_t now() const { return now_; }
  void at(std::int64_t time, std::function<void()> fn);
  void after(std::int64_t delay, std::function<void()> fn) { at(now_ + delay, std::move(fn)); }

  // Runs to quiescence; returns false if the horizon cut execution short.
  bool run(std::int64_t horizon);

 private:
  struct Entry {
    std::int64_t time;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Entry& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
};

struct LatencyModel {
  std::int64_t min_ms = 5;
  std::int64_t max_ms = 50;
};

// Seeded lossy datagram transport over the event loop.
class Transport {
 public:
  Transport(EventLoop& loop, LatencyModel latency, double loss, std::uint64_t seed, EventLog& log);

  using Sink = std::function<void(const OverlayMessage&)>;
  void set_sink(Sink sink) { sink_ = std::move(sink); }

  // Fire-and-forget: drops with probability `loss`, otherwise schedules
  // delivery at send_time + sampled latency. Nothing surfaces to the sender.
  void send(OverlayMessage msg);

 private:
  EventLoop& loop_;
  LatencyModel latency_;
  double loss_;
  std::mt19937_64 rng_;
  EventLog& log_;
  Sink sink_;
};

}  // namespace idss::overlay
