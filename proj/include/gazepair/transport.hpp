#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "gazepair/ksc.hpp"
#include "gazepair/protocol.hpp"
#include "gazepair/rng.hpp"

namespace gazepair {

constexpr std::size_t kMaxFrameBytes = 64 * 1024;

struct TapRecord {
  EndpointId from = 0;
  EndpointId to = 0;
  std::vector<std::uint8_t> frame;
};

using NetworkTap = std::function<void(const TapRecord&)>;
using OobTap = std::function<void(const OobUtterance&)>;

struct SendReceipt {
  bool dropped = false;  // lost in simulation; loopback never reports drops
};

struct SimNetConfig {
  double drop_prob = 0.0;
  double reorder_prob = 0.0;
  int latency_ticks = 1;

  void validate() const {
    if (drop_prob < 0 || drop_prob > 1 || reorder_prob < 0 || reorder_prob > 1)
      throw std::invalid_argument("simnet: probabilities must be in [0, 1]");
    if (latency_ticks < 0) throw std::invalid_argument("simnet: latency must be >= 0");
  }
};

/// Deterministic tick-driven datagram network. Frames are delivered whole or
/// not at all; a reordered frame is held two extra ticks so later traffic
/// overtakes it. The network tap sees exactly the frames that get delivered;
/// the OOB tap hears exactly what is spoken. The threat model allows an
/// attacker one of the two positions, never both.
class SimNet {
 public:
  SimNet(const SimNetConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg.validate(); }

  void register_endpoint(EndpointId id) { endpoints_[id]; }

  void set_network_tap(NetworkTap tap) {
    if (tap && oob_tap_) throw std::logic_error("simnet: network and OOB taps are mutually exclusive");
    network_tap_ = std::move(tap);
  }

  void set_oob_tap(OobTap tap) {
    if (tap && network_tap_)
      throw std::logic_error("simnet: network and OOB taps are mutually exclusive");
    oob_tap_ = std::move(tap);
  }

  SendReceipt send(EndpointId from, EndpointId to, std::vector<std::uint8_t> frame) {
    require_registered(from);
    require_registered(to);
    if (frame.size() > kMaxFrameBytes) throw std::invalid_argument("simnet: oversized frame");

    if (rng_.bernoulli(cfg_.drop_prob)) return {true};
    long deliver = now_ + cfg_.latency_ticks;
    if (rng_.bernoulli(cfg_.reorder_prob)) deliver += 2;
    endpoints_[to].inbox.emplace(std::make_pair(deliver, seq_++),
                                 Delivery{from, std::move(frame)});
    return {false};
  }

  std::optional<std::pair<EndpointId, std::vector<std::uint8_t>>> recv(EndpointId id) {
    require_registered(id);
    auto& inbox = endpoints_[id].inbox;
    if (inbox.empty() || inbox.begin()->first.first > now_) return std::nullopt;
    auto node = inbox.extract(inbox.begin());
    Delivery& d = node.mapped();
    if (network_tap_) network_tap_(TapRecord{d.from, id, d.frame});
    return std::make_pair(d.from, std::move(d.frame));
  }

  void speak_oob(const OobUtterance& u) {
    for (auto& [id, ep] : endpoints_)
      if (id != u.speaker) ep.oob.push_back(u);
    if (oob_tap_) oob_tap_(u);
  }

  std::optional<OobUtterance> recv_oob(EndpointId id) {
    require_registered(id);
    auto& q = endpoints_[id].oob;
    if (q.empty()) return std::nullopt;
    OobUtterance u = q.front();
    q.pop_front();
    return u;
  }

  void tick() { ++now_; }
  long now_ticks() const { return now_; }

 private:
  struct Delivery {
    EndpointId from;
    std::vector<std::uint8_t> frame;
  };
  struct Endpoint {
    std::map<std::pair<long, long>, Delivery> inbox;  // (deliver tick, seq) -> frame
    std::deque<OobUtterance> oob;
  };

  void require_registered(EndpointId id) const {
    if (!endpoints_.count(id)) throw std::invalid_argument("simnet: unregistered endpoint");
  }

  SimNetConfig cfg_;
  Rng rng_;
  long now_ = 0;
  long seq_ = 0;
  std::map<EndpointId, Endpoint> endpoints_;
  NetworkTap network_tap_;
  OobTap oob_tap_;
};

/// Real UDP datagrams between loopback sockets, one per endpoint. Same call
/// surface as SimNet so session code is transport-generic. The OOB channel
/// stays an in-process queue (it models speech, not packets) and no taps
/// exist in this mode.
class LoopbackNet {
 public:
  LoopbackNet() = default;
  ~LoopbackNet() {
    for (auto& [id, ep] : endpoints_)
      if (ep.fd >= 0) ::close(ep.fd);
  }
  LoopbackNet(const LoopbackNet&) = delete;
  LoopbackNet& operator=(const LoopbackNet&) = delete;

  void register_endpoint(EndpointId id) {
    Endpoint ep;
    ep.fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (ep.fd < 0) throw std::runtime_error("loopback: socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(ep.fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(ep.fd);
      throw std::runtime_error("loopback: bind() failed");
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(ep.fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
      ::close(ep.fd);
      throw std::runtime_error("loopback: getsockname() failed");
    }
    const int flags = ::fcntl(ep.fd, F_GETFL, 0);
    ::fcntl(ep.fd, F_SETFL, flags | O_NONBLOCK);
    ep.port = ntohs(addr.sin_port);
    port_to_id_[ep.port] = id;
    endpoints_[id] = ep;
  }

  SendReceipt send(EndpointId from, EndpointId to, std::vector<std::uint8_t> frame) {
    const Endpoint& src = require_registered(from);
    const Endpoint& dst = require_registered(to);
    if (frame.size() > kMaxFrameBytes) throw std::invalid_argument("loopback: oversized frame");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(dst.port);
    if (::sendto(src.fd, frame.data(), frame.size(), 0, reinterpret_cast<const sockaddr*>(&addr),
                 sizeof(addr)) < 0)
      throw std::runtime_error("loopback: sendto() failed");
    return {false};
  }

  std::optional<std::pair<EndpointId, std::vector<std::uint8_t>>> recv(EndpointId id) {
    const Endpoint& ep = require_registered(id);
    std::vector<std::uint8_t> buf(kMaxFrameBytes);
    sockaddr_in from{};
    socklen_t len = sizeof(from);
    const ssize_t n = ::recvfrom(ep.fd, buf.data(), buf.size(), 0,
                                 reinterpret_cast<sockaddr*>(&from), &len);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    const auto it = port_to_id_.find(ntohs(from.sin_port));
    const EndpointId sender = it == port_to_id_.end() ? 0xffffffffu : it->second;
    return std::make_pair(sender, std::move(buf));
  }

  void speak_oob(const OobUtterance& u) {
    for (auto& [id, ep] : endpoints_)
      if (id != u.speaker) ep.oob.push_back(u);
  }

  std::optional<OobUtterance> recv_oob(EndpointId id) {
    auto& q = endpoints_.at(id).oob;
    if (q.empty()) return std::nullopt;
    OobUtterance u = q.front();
    q.pop_front();
    return u;
  }

  void tick() {}
  long now_ticks() const { return 0; }

 private:
  struct Endpoint {
    int fd = -1;
    std::uint16_t port = 0;
    std::deque<OobUtterance> oob;
  };

  const Endpoint& require_registered(EndpointId id) const {
    const auto it = endpoints_.find(id);
    if (it == endpoints_.end()) throw std::invalid_argument("loopback: unregistered endpoint");
    return it->second;
  }

  std::map<EndpointId, Endpoint> endpoints_;
  std::map<std::uint16_t, EndpointId> port_to_id_;
};

}  // namespace gazepair
