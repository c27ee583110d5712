#include "idss/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace idss::overlay {

void Ring::join(PeerId peer) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), peer);
  if (it != ids_.end() && *it == peer) fail(Errc::AlreadyMember, peer.hex());
  ids_.insert(it, peer);
}

void Ring::leave(PeerId peer) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), peer);
  if (it != ids_.end() && *it == peer) ids_.erase(it);
}

bool Ring::contains(PeerId peer) const {
  return std::binary_search(ids_.begin(), ids_.end(), peer);
}

PeerId Ring::route(Key128 key) const {
  if (ids_.empty()) fail(Errc::EmptyRing, "route on empty ring");
  auto it = std::lower_bound(ids_.begin(), ids_.end(), key);
  return it == ids_.end() ? ids_.front() : *it;
}

std::vector<PeerId> Ring::broadcast_children(PeerId self, int fanout) const {
  std::vector<PeerId> out;
  const std::size_t n = ids_.size();
  if (n <= 1 || fanout < 1) return out;
  auto it = std::lower_bound(ids_.begin(), ids_.end(), self);
  if (it == ids_.end() || !(*it == self)) return out;  // not a member
  std::size_t index = static_cast<std::size_t>(it - ids_.begin());

  std::vector<std::size_t> offsets{1};
  for (int j = 1; j < fanout; ++j) {
    double off = std::ceil(std::pow(static_cast<double>(n), static_cast<double>(j) / fanout));
    offsets.push_back(std::min<std::size_t>(n - 1, static_cast<std::size_t>(off)));
  }
  for (std::size_t off : offsets) {
    PeerId child = ids_[(index + off) % n];
    if (child == self) continue;
    if (std::find(out.begin(), out.end(), child) == out.end()) out.push_back(child);
  }
  return out;
}

void EventLog::append(std::int64_t time, const std::string& kind, PeerId src, PeerId dst,
                      const Uqi& uqi) {
  lines_.push_back(std::to_string(time) + "," + kind + "," + src.hex() + "," + dst.hex() + "," +
                   uqi.hex());
}

std::string EventLog::text() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

Key128 EventLog::digest() const { return hash128(text()); }

void EventLoop::at(std::int64_t time, std::function<void()> fn) {
  queue_.push(Entry{std::max(time, now_), seq_++, std::move(fn)});
}

bool EventLoop::run(std::int64_t horizon) {
  while (!queue_.empty()) {
    if (queue_.top().time > horizon) return false;
    auto fn = std::move(const_cast<Entry&>(queue_.top()).fn);
    now_ = queue_.top().time;
    queue_.pop();
    fn();
  }
  return true;
}

Transport::Transport(EventLoop& loop, LatencyModel latency, double loss, std::uint64_t seed,
                     EventLog& log)
    : loop_(loop), latency_(latency), loss_(loss), rng_(seed), log_(log) {}

void Transport::send(OverlayMessage msg) {
  const bool is_broadcast = std::holds_alternative<QueryBroadcast>(msg.body);
  const Uqi uqi = is_broadcast ? std::get<QueryBroadcast>(msg.body).uqi
                               : std::get<ResultReturn>(msg.body).uqi;
  double drop_draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  std::int64_t latency =
      std::uniform_int_distribution<std::int64_t>(latency_.min_ms, latency_.max_ms)(rng_);
  if (loss_ > 0.0 && drop_draw < loss_) {
    log_.append(msg.send_time, is_broadcast ? "drop_bcast" : "drop_result", msg.src, msg.dst, uqi);
    return;
  }
  log_.append(msg.send_time, is_broadcast ? "bcast" : "result", msg.src, msg.dst, uqi);
  loop_.at(msg.send_time + latency, [this, m = std::move(msg)]() {
    if (sink_) sink_(m);
  });
}

}  // namespace idss::overlay
