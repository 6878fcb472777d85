#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gazepair/gaze.hpp"
#include "gazepair/geometry.hpp"
#include "gazepair/ksc.hpp"
#include "gazepair/protocol.hpp"
#include "gazepair/transport.hpp"
#include "gazepair/wire.hpp"

namespace gazepair {

struct SessionConfig {
  GridConfig grid;
  int ksc_length = 3;
  int participants = 2;  // host plus clients
  GazeSensorModel sensor;
  ProtocolConfig protocol;

  void validate() const {
    grid.validate();
    sensor.validate();
    if (participants < 2) throw std::invalid_argument("session: need a host and at least one client");
    if (ksc_length < 1 || ksc_length > grid.hologram_count)
      throw std::invalid_argument("session: cue length must be in [1, hologram_count]");
  }
};

struct SessionOutcome {
  bool paired = false;
  FailureCause cause = FailureCause::none;  // ground truth from the runner's vantage point

  HostPhase host_phase = HostPhase::idle;
  std::vector<ClientPhase> client_phases;
  std::optional<SymmetricKey> host_key;
  std::vector<std::optional<SymmetricKey>> client_keys;

  // Session ground truth, kept for verification and hygiene scans only.
  Ksc ksc;
  std::uint64_t seed64 = 0;
  std::vector<std::string> secrets;  // host first, then clients; empty string = no capture

  std::map<MsgKind, int> message_counts;
  int messages_sent = 0;
  long ticks = 0;
};

/// Observation points for recording a session (event logs, traffic captures).
struct SessionObserver {
  virtual ~SessionObserver() = default;
  virtual void on_session_start(const SessionConfig&) {}
  virtual void on_host_event(const HostEvent&) {}
  virtual void on_client_event(int /*client_index*/, const ClientEvent&) {}
  virtual void on_frame_sent(EndpointId /*from*/, EndpointId /*to*/,
                             std::span<const std::uint8_t> /*frame*/) {}
};

/// Decodes a received frame; undecodable datagrams are dropped like any
/// other line noise.
inline std::optional<Message> frame_to_message(std::span<const std::uint8_t> frame) {
  auto decoded = decode_message(frame);
  if (auto* msg = std::get_if<Message>(&decoded)) return std::move(*msg);
  return std::nullopt;
}

/// Drives one complete pairing over the given transport. Endpoint 0 is the
/// host; clients use endpoints 1..participants-1. All machine events are fed
/// in a fixed order, so a fixed seed gives an identical run.
template <class Net>
SessionOutcome run_session(Net& net, const SessionConfig& cfg, Rng& rng,
                           SessionObserver* observer = nullptr) {
  cfg.validate();
  const int n_clients = cfg.participants - 1;

  net.register_endpoint(kHostEndpoint);
  for (int i = 0; i < n_clients; ++i) net.register_endpoint(static_cast<EndpointId>(i + 1));

  HostState host;
  std::vector<ClientState> clients(static_cast<std::size_t>(n_clients));
  std::vector<Rng> capture_rngs;
  capture_rngs.reserve(static_cast<std::size_t>(cfg.participants));
  for (int i = 0; i < cfg.participants; ++i) capture_rngs.push_back(rng.derive(0x100u + static_cast<std::uint64_t>(i)));

  SessionOutcome outcome;
  if (observer) observer->on_session_start(cfg);

  auto dispatch_from = [&](EndpointId from, StepOutput&& out) -> StepOutput {
    for (auto& [to, msg] : out.to_send) {
      auto frame = encode_message(msg);
      ++outcome.message_counts[kind_of(msg)];
      ++outcome.messages_sent;
      if (observer) observer->on_frame_sent(from, to, frame);
      net.send(from, to, std::move(frame));
    }
    if (out.oob) net.speak_oob(*out.oob);
    return std::move(out);
  };

  auto feed_host = [&](const HostEvent& ev) -> StepOutput {
    if (observer) observer->on_host_event(ev);
    return dispatch_from(kHostEndpoint, host_step(host, ev, cfg.protocol));
  };
  auto feed_client = [&](int idx, const ClientEvent& ev) -> StepOutput {
    if (observer) observer->on_client_event(idx, ev);
    return dispatch_from(static_cast<EndpointId>(idx + 1),
                         client_step(clients[static_cast<std::size_t>(idx)], ev, cfg.protocol));
  };

  auto run_capture = [&](const Ksc& ksc, const HologramLayout& layout, int participant) {
    return build_shared_secret(ksc, layout, cfg.sensor, cfg.grid,
                               capture_rngs[static_cast<std::size_t>(participant)]);
  };

  feed_host(CmdHostStart{n_clients});
  for (int i = 0; i < n_clients; ++i) feed_client(i, CmdConnect{});

  bool begun = false;
  const long max_ticks = static_cast<long>(cfg.protocol.timeout_seconds) * 2 + 20;

  auto all_terminal = [&] {
    if (!host.terminal()) return false;
    for (const auto& c : clients)
      if (!c.terminal()) return false;
    return true;
  };

  for (long t = 1; t <= max_ticks && !all_terminal(); ++t) {
    net.tick();
    outcome.ticks = t;

    auto host_out = feed_host(Tick{static_cast<double>(t)});
    if (host_out.request_capture)
      feed_host(CaptureDone{run_capture(*host.ksc, *host.layout, 0)});
    for (int i = 0; i < n_clients; ++i) {
      auto out = feed_client(i, Tick{static_cast<double>(t)});
      if (out.request_capture) {
        const auto& c = clients[static_cast<std::size_t>(i)];
        feed_client(i, CaptureDone{run_capture(*c.ksc, *c.layout, i + 1)});
      }
    }

    // Drain deliverable traffic until quiescent; order is host, then clients.
    for (;;) {
      bool progressed = false;
      while (auto delivery = net.recv(kHostEndpoint)) {
        progressed = true;
        auto msg = frame_to_message(delivery->second);
        if (!msg) continue;
        auto out = feed_host(MsgIn{delivery->first, std::move(*msg)});
        if (out.request_capture) feed_host(CaptureDone{run_capture(*host.ksc, *host.layout, 0)});
      }
      for (int i = 0; i < n_clients; ++i) {
        const EndpointId ep = static_cast<EndpointId>(i + 1);
        while (auto delivery = net.recv(ep)) {
          progressed = true;
          auto msg = frame_to_message(delivery->second);
          if (!msg) continue;
          auto out = feed_client(i, MsgIn{delivery->first, std::move(*msg)});
          if (out.request_capture) {
            const auto& c = clients[static_cast<std::size_t>(i)];
            feed_client(i, CaptureDone{run_capture(*c.ksc, *c.layout, i + 1)});
          }
        }
        while (auto heard = net.recv_oob(ep)) {
          progressed = true;
          auto out = feed_client(i, KscHeard{heard->ksc});
          if (out.request_capture) {
            const auto& c = clients[static_cast<std::size_t>(i)];
            feed_client(i, CaptureDone{run_capture(*c.ksc, *c.layout, i + 1)});
          }
        }
      }

      if (!begun && host.phase == HostPhase::lobby && host.joined_count() >= n_clients) {
        begun = true;
        CmdBegin begin{generate_layout(cfg.grid, rng), generate_ksc(cfg.ksc_length, rng, cfg.grid.hologram_count),
                       rng.next_u64()};
        outcome.ksc = begin.ksc;
        outcome.seed64 = begin.seed64;
        auto out = feed_host(HostEvent{begin});
        if (out.request_capture) feed_host(CaptureDone{run_capture(*host.ksc, *host.layout, 0)});
        progressed = true;
      }

      if (!progressed) break;
    }

    if constexpr (std::is_same_v<Net, LoopbackNet>) {
      // Real sockets: give in-flight datagrams a moment before the next tick.
      if (!all_terminal()) std::this_thread::sleep_for(std::chrono::microseconds(300));
    }
  }

  // Collect results and ground truth.
  outcome.host_phase = host.phase;
  outcome.host_key = host.key;
  outcome.secrets.push_back(host.secret ? host.secret->value : std::string{});
  outcome.paired = host.phase == HostPhase::paired;
  for (const auto& c : clients) {
    outcome.client_phases.push_back(c.phase);
    outcome.client_keys.push_back(c.key);
    outcome.secrets.push_back(c.secret ? c.secret->value : std::string{});
    outcome.paired = outcome.paired && c.phase == ClientPhase::paired;
  }

  if (outcome.paired) {
    outcome.cause = FailureCause::none;
  } else {
    bool missed = host.failure_cause == FailureCause::missed_capture;
    bool violation = host.failure_cause == FailureCause::protocol_violation;
    for (const auto& c : clients) {
      missed = missed || c.failure_cause == FailureCause::missed_capture;
      violation = violation || c.failure_cause == FailureCause::protocol_violation;
    }
    if (missed)
      outcome.cause = FailureCause::missed_capture;
    else if (host.failure_cause == FailureCause::secret_mismatch)
      outcome.cause = FailureCause::secret_mismatch;
    else if (violation)
      outcome.cause = FailureCause::protocol_violation;
    else
      outcome.cause = FailureCause::timeout;
  }
  return outcome;
}

}  // namespace gazepair
