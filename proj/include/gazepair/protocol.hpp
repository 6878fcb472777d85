#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "gazepair/crypto.hpp"
#include "gazepair/gaze.hpp"
#include "gazepair/ksc.hpp"
#include "gazepair/wire.hpp"

namespace gazepair {

using EndpointId = std::uint32_t;
constexpr EndpointId kHostEndpoint = 0;

struct ProtocolConfig {
  int kdf_iterations = kDefaultKdfIterations;
  bool host_gazes = true;  // host enters the cue by gaze; else derives from the layout
  double timeout_seconds = 30.0;
};

// ---------------------------------------------------------------------------
// Events. Both machines are deterministic functions of (state, event); all
// randomness enters through the begin command's session materials and the
// capture results, so a recorded event log replays bit-exactly.
// ---------------------------------------------------------------------------

struct MsgIn {
  EndpointId from = 0;
  Message msg;
};

struct CmdHostStart {
  int expected_clients = 1;
};

// Session materials are generated by the caller and injected here; the
// machine only decides what to do with them.
struct CmdBegin {
  HologramLayout layout;
  Ksc ksc;
  std::uint64_t seed64 = 0;
};

struct CmdConnect {};

struct KscHeard {
  Ksc ksc;
};

struct CaptureDone {
  SecretResult result;
};

struct Tick {
  double now = 0.0;
};

using HostEvent = std::variant<MsgIn, CmdHostStart, CmdBegin, CaptureDone, Tick>;
using ClientEvent = std::variant<MsgIn, CmdConnect, KscHeard, CaptureDone, Tick>;

struct StepOutput {
  std::vector<std::pair<EndpointId, Message>> to_send;
  std::optional<OobUtterance> oob;
  bool request_capture = false;
};

// ---------------------------------------------------------------------------
// Host
// ---------------------------------------------------------------------------

enum class HostPhase {
  idle,
  lobby,
  layout_published,
  awaiting_confirmations,
  paired,
  failed,
};

inline const char* to_string(HostPhase p) {
  switch (p) {
    case HostPhase::idle: return "idle";
    case HostPhase::lobby: return "lobby";
    case HostPhase::layout_published: return "layout_published";
    case HostPhase::awaiting_confirmations: return "awaiting_confirmations";
    case HostPhase::paired: return "paired";
    case HostPhase::failed: return "failed";
  }
  return "?";
}

struct HostState {
  HostPhase phase = HostPhase::idle;
  int expected_clients = 0;
  std::map<std::uint32_t, EndpointId> joined;  // client id -> endpoint
  std::uint32_t next_client_id = 1;
  int anomalies = 0;

  std::optional<HologramLayout> layout;
  std::optional<Ksc> ksc;
  std::optional<SessionRandomness> randomness;
  std::optional<SharedSecret> secret;
  std::optional<SymmetricKey> key;

  std::set<std::uint32_t> verified;
  std::vector<Confirmation> pending;  // confirmations that arrived before our key existed
  FailureCause failure_cause = FailureCause::none;

  double now = 0.0;
  double phase_entered = 0.0;
  bool started = false;

  int joined_count() const { return static_cast<int>(joined.size()); }
  bool terminal() const { return phase == HostPhase::paired || phase == HostPhase::failed; }
};

namespace protocol_detail {

template <typename State>
void enter_phase(State& s, decltype(State::phase) p) {
  s.phase = p;
  s.phase_entered = s.now;
}

inline void host_fail(HostState& s, FailureCause cause, StepOutput& out) {
  s.failure_cause = cause;
  enter_phase(s, HostPhase::failed);
  for (const auto& [id, ep] : s.joined) out.to_send.emplace_back(ep, ResultMsg{false, cause});
}

inline void host_verify_pending(HostState& s, StepOutput& out) {
  for (const auto& conf : s.pending) {
    if (s.phase != HostPhase::awaiting_confirmations) break;
    if (!s.joined.count(conf.client_id)) {
      ++s.anomalies;
      continue;
    }
    if (s.verified.count(conf.client_id)) continue;
    if (verify_confirmation(*s.key, *s.randomness, conf) == VerifyResult::pass) {
      s.verified.insert(conf.client_id);
    } else {
      host_fail(s, FailureCause::secret_mismatch, out);
      break;
    }
  }
  s.pending.clear();
  if (s.phase == HostPhase::awaiting_confirmations &&
      static_cast<int>(s.verified.size()) == s.joined_count() && s.joined_count() > 0) {
    enter_phase(s, HostPhase::paired);
    for (const auto& [id, ep] : s.joined)
      out.to_send.emplace_back(ep, ResultMsg{true, FailureCause::none});
  }
}

}  // namespace protocol_detail

inline StepOutput host_step(HostState& s, const HostEvent& event, const ProtocolConfig& cfg) {
  using namespace protocol_detail;
  StepOutput out;
  if (s.phase == HostPhase::paired || s.phase == HostPhase::failed) return out;

  if (const auto* tick = std::get_if<Tick>(&event)) {
    s.now = tick->now;
    if (s.started && s.now - s.phase_entered > cfg.timeout_seconds)
      host_fail(s, FailureCause::timeout, out);
    return out;
  }

  if (const auto* start = std::get_if<CmdHostStart>(&event)) {
    if (s.phase != HostPhase::idle) {
      host_fail(s, FailureCause::protocol_violation, out);
      return out;
    }
    s.expected_clients = start->expected_clients;
    s.started = true;
    enter_phase(s, HostPhase::lobby);
    return out;
  }

  if (const auto* begin = std::get_if<CmdBegin>(&event)) {
    if (s.phase != HostPhase::lobby || s.joined.empty()) {
      host_fail(s, FailureCause::protocol_violation, out);
      return out;
    }
    s.layout = begin->layout;
    s.ksc = begin->ksc;
    s.randomness = expand_session_randomness(begin->seed64);
    for (const auto& [id, ep] : s.joined) {
      out.to_send.emplace_back(ep, LayoutMsg{*s.layout});
      out.to_send.emplace_back(ep, SessionRandMsg{begin->seed64});
    }
    out.oob = OobUtterance{*s.ksc, kHostEndpoint};
    if (cfg.host_gazes) {
      out.request_capture = true;
      enter_phase(s, HostPhase::layout_published);
    } else {
      s.secret = exact_shared_secret(*s.ksc, *s.layout);
      s.key = derive_key(*s.secret, s.randomness->salt, cfg.kdf_iterations);
      enter_phase(s, HostPhase::awaiting_confirmations);
      host_verify_pending(s, out);
    }
    return out;
  }

  if (const auto* cap = std::get_if<CaptureDone>(&event)) {
    if (s.phase != HostPhase::layout_published) {
      host_fail(s, FailureCause::protocol_violation, out);
      return out;
    }
    if (!cap->result.ok()) {
      host_fail(s, FailureCause::missed_capture, out);
      return out;
    }
    s.secret = cap->result.secret;
    s.key = derive_key(*s.secret, s.randomness->salt, cfg.kdf_iterations);
    enter_phase(s, HostPhase::awaiting_confirmations);
    host_verify_pending(s, out);
    return out;
  }

  const auto& in = std::get<MsgIn>(event);
  if (const auto* join = std::get_if<JoinRequestMsg>(&in.msg)) {
    (void)join;
    if (s.phase != HostPhase::lobby) {
      ++s.anomalies;  // late or replayed joiner; host is informed, session continues
      return out;
    }
    const std::uint32_t id = s.next_client_id++;
    s.joined[id] = in.from;
    if (s.joined_count() > s.expected_clients) ++s.anomalies;
    out.to_send.emplace_back(in.from, JoinAckMsg{id});
    return out;
  }
  if (const auto* conf = std::get_if<ConfirmationMsg>(&in.msg)) {
    if (s.phase == HostPhase::layout_published) {
      s.pending.push_back(conf->conf);  // host is still entering its own cue
      return out;
    }
    if (s.phase != HostPhase::awaiting_confirmations) {
      host_fail(s, FailureCause::protocol_violation, out);
      return out;
    }
    s.pending.push_back(conf->conf);
    host_verify_pending(s, out);
    return out;
  }

  // Hosts never receive JoinAck/Layout/SessionRand/Result.
  host_fail(s, FailureCause::protocol_violation, out);
  return out;
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

enum class ClientPhase {
  idle,
  connected,
  layout_received,
  secret_entered,
  confirmation_sent,
  paired,
  failed,
};

inline const char* to_string(ClientPhase p) {
  switch (p) {
    case ClientPhase::idle: return "idle";
    case ClientPhase::connected: return "connected";
    case ClientPhase::layout_received: return "layout_received";
    case ClientPhase::secret_entered: return "secret_entered";
    case ClientPhase::confirmation_sent: return "confirmation_sent";
    case ClientPhase::paired: return "paired";
    case ClientPhase::failed: return "failed";
  }
  return "?";
}

struct ClientState {
  ClientPhase phase = ClientPhase::idle;
  EndpointId host_endpoint = kHostEndpoint;
  std::optional<std::uint32_t> client_id;

  std::optional<HologramLayout> layout;
  std::optional<Ksc> ksc;  // buffered even if heard before the layout arrives
  std::optional<SessionRandomness> randomness;
  std::optional<SharedSecret> secret;
  std::optional<SymmetricKey> key;

  bool capture_requested = false;
  bool confirmation_sent = false;
  FailureCause failure_cause = FailureCause::none;

  double now = 0.0;
  double phase_entered = 0.0;
  bool started = false;

  bool terminal() const { return phase == ClientPhase::paired || phase == ClientPhase::failed; }
};

namespace protocol_detail {

inline void client_fail(ClientState& s, FailureCause cause) {
  s.failure_cause = cause;
  enter_phase(s, ClientPhase::failed);
}

// Capture starts once the client is joined and holds layout, cue, and
// session randomness; any arrival order of those three is fine.
inline void client_maybe_capture(ClientState& s, StepOutput& out) {
  if (s.capture_requested || !s.client_id || !s.layout || !s.ksc || !s.randomness) return;
  if (s.phase != ClientPhase::layout_received) return;
  s.capture_requested = true;
  out.request_capture = true;
}

}  // namespace protocol_detail

inline StepOutput client_step(ClientState& s, const ClientEvent& event,
                              const ProtocolConfig& cfg) {
  using namespace protocol_detail;
  StepOutput out;
  if (s.terminal()) return out;

  if (const auto* tick = std::get_if<Tick>(&event)) {
    s.now = tick->now;
    if (s.phase == ClientPhase::secret_entered && s.randomness && !s.confirmation_sent) {
      s.key = derive_key(*s.secret, s.randomness->salt, cfg.kdf_iterations);
      out.to_send.emplace_back(s.host_endpoint,
                               ConfirmationMsg{make_confirmation(*s.key, *s.randomness, *s.client_id)});
      s.confirmation_sent = true;
      enter_phase(s, ClientPhase::confirmation_sent);
      return out;
    }
    if (s.started && s.now - s.phase_entered > cfg.timeout_seconds)
      client_fail(s, FailureCause::timeout);
    return out;
  }

  if (std::get_if<CmdConnect>(&event)) {
    if (s.phase != ClientPhase::idle) {
      client_fail(s, FailureCause::protocol_violation);
      return out;
    }
    s.started = true;
    out.to_send.emplace_back(s.host_endpoint, JoinRequestMsg{});
    return out;
  }

  if (const auto* heard = std::get_if<KscHeard>(&event)) {
    if (!s.ksc) s.ksc = heard->ksc;
    client_maybe_capture(s, out);
    return out;
  }

  if (const auto* cap = std::get_if<CaptureDone>(&event)) {
    if (s.phase != ClientPhase::layout_received || !s.capture_requested) {
      client_fail(s, FailureCause::protocol_violation);
      return out;
    }
    if (!cap->result.ok()) {
      client_fail(s, FailureCause::missed_capture);  // session abandoned locally
      return out;
    }
    s.secret = cap->result.secret;
    enter_phase(s, ClientPhase::secret_entered);
    return out;
  }

  const auto& in = std::get<MsgIn>(event);
  if (const auto* ack = std::get_if<JoinAckMsg>(&in.msg)) {
    if (s.client_id) return out;  // duplicate ack
    s.client_id = ack->client_id;
    enter_phase(s, ClientPhase::connected);
    if (s.layout) enter_phase(s, ClientPhase::layout_received);
    client_maybe_capture(s, out);
    return out;
  }
  if (const auto* layout = std::get_if<LayoutMsg>(&in.msg)) {
    if (s.layout) return out;  // idempotent re-delivery
    s.layout = layout->layout;
    if (s.phase == ClientPhase::connected) enter_phase(s, ClientPhase::layout_received);
    client_maybe_capture(s, out);
    return out;
  }
  if (const auto* rand = std::get_if<SessionRandMsg>(&in.msg)) {
    if (!s.randomness) s.randomness = expand_session_randomness(rand->seed64);
    client_maybe_capture(s, out);
    return out;
  }
  if (const auto* result = std::get_if<ResultMsg>(&in.msg)) {
    if (result->success) {
      if (s.phase == ClientPhase::confirmation_sent)
        enter_phase(s, ClientPhase::paired);
      else
        client_fail(s, FailureCause::protocol_violation);
    } else {
      client_fail(s, result->cause);
    }
    return out;
  }

  // Clients never receive JoinRequest or Confirmation.
  client_fail(s, FailureCause::protocol_violation);
  return out;
}

}  // namespace gazepair
