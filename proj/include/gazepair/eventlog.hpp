#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazepair/session.hpp"

namespace gazepair {

// One JSON record per line: a session header followed by every event fed to
// every state machine, in order. Replaying the log re-drives the machines
// without any transport and must reproduce final states and traffic bytes.

namespace eventlog_detail {

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 0xf];
  }
  return s;
}

inline std::vector<std::uint8_t> from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("hex: odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("hex: bad digit");
  };
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
  return out;
}

inline nlohmann::json layout_to_json(const HologramLayout& layout) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : layout.cells) cells.push_back({c.x, c.y, c.z});
  return {{"depth", layout.depth_plane}, {"cells", cells}};
}

inline HologramLayout layout_from_json(const nlohmann::json& j) {
  HologramLayout layout;
  layout.depth_plane = j.at("depth").get<int>();
  for (const auto& c : j.at("cells"))
    layout.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
  return layout;
}

}  // namespace eventlog_detail

/// Records a session as JSON lines.
class EventLogRecorder : public SessionObserver {
 public:
  explicit EventLogRecorder(std::ostream& out) : out_(out) {}

  void on_session_start(const SessionConfig& cfg) override {
    nlohmann::json j{{"type", "session"},
                     {"participants", cfg.participants},
                     {"ksc_length", cfg.ksc_length},
                     {"kdf_iterations", cfg.protocol.kdf_iterations},
                     {"host_gazes", cfg.protocol.host_gazes},
                     {"timeout_seconds", cfg.protocol.timeout_seconds}};
    out_ << j.dump() << '\n';
  }

  void on_host_event(const HostEvent& ev) override { write("host", host_event_json(ev)); }

  void on_client_event(int idx, const ClientEvent& ev) override {
    write("c" + std::to_string(idx), client_event_json(ev));
  }

 private:
  void write(const std::string& actor, nlohmann::json j) {
    j["type"] = "event";
    j["actor"] = actor;
    out_ << j.dump() << '\n';
  }

  static nlohmann::json msg_json(const MsgIn& in) {
    return {{"event", "msg"},
            {"from", in.from},
            {"frame", eventlog_detail::to_hex(encode_message(in.msg))}};
  }

  static nlohmann::json capture_json(const CaptureDone& cap) {
    nlohmann::json j{{"event", "capture"}, {"ok", cap.result.ok()}};
    if (cap.result.ok())
      j["secret"] = cap.result.secret->value;
    else
      j["failed_position"] = cap.result.failed_position;
    return j;
  }

  static nlohmann::json host_event_json(const HostEvent& ev) {
    if (const auto* in = std::get_if<MsgIn>(&ev)) return msg_json(*in);
    if (const auto* start = std::get_if<CmdHostStart>(&ev))
      return {{"event", "start"}, {"expected", start->expected_clients}};
    if (const auto* begin = std::get_if<CmdBegin>(&ev))
      return {{"event", "begin"},
              {"layout", eventlog_detail::layout_to_json(begin->layout)},
              {"ksc", begin->ksc.to_string()},
              {"seed64", begin->seed64}};
    if (const auto* cap = std::get_if<CaptureDone>(&ev)) return capture_json(*cap);
    return {{"event", "tick"}, {"now", std::get<Tick>(ev).now}};
  }

  static nlohmann::json client_event_json(const ClientEvent& ev) {
    if (const auto* in = std::get_if<MsgIn>(&ev)) return msg_json(*in);
    if (std::get_if<CmdConnect>(&ev)) return {{"event", "connect"}};
    if (const auto* heard = std::get_if<KscHeard>(&ev))
      return {{"event", "ksc"}, {"ksc", heard->ksc.to_string()}};
    if (const auto* cap = std::get_if<CaptureDone>(&ev)) return capture_json(*cap);
    return {{"event", "tick"}, {"now", std::get<Tick>(ev).now}};
  }

  std::ostream& out_;
};

struct ReplayResult {
  HostPhase host_phase = HostPhase::idle;
  FailureCause host_cause = FailureCause::none;
  std::vector<ClientPhase> client_phases;
  std::string host_key_fingerprint;               // empty if no key derived
  std::vector<std::string> client_key_fingerprints;
  std::vector<std::vector<std::uint8_t>> emitted_frames;
  long events_replayed = 0;

  std::string to_text() const {
    std::ostringstream out;
    out << "host: " << to_string(host_phase);
    if (host_phase == HostPhase::failed) out << " (" << to_string(host_cause) << ")";
    if (!host_key_fingerprint.empty()) out << " key=" << host_key_fingerprint;
    out << '\n';
    for (std::size_t i = 0; i < client_phases.size(); ++i) {
      out << "client " << i << ": " << to_string(client_phases[i]);
      if (!client_key_fingerprints[i].empty()) out << " key=" << client_key_fingerprints[i];
      out << '\n';
    }
    out << "events: " << events_replayed << ", frames emitted: " << emitted_frames.size() << '\n';
    return out.str();
  }
};

struct EventLogError : std::runtime_error {
  long line;
  EventLogError(long line_number, const std::string& what)
      : std::runtime_error("event log line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
};

/// Feeds a recorded log back through fresh state machines.
inline ReplayResult replay_event_log(std::istream& in) {
  using nlohmann::json;
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw EventLogError(1, "empty log");
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw EventLogError(line_no, e.what());
  }
  if (header.value("type", "") != "session") throw EventLogError(line_no, "missing session header");

  ProtocolConfig cfg;
  int participants = 0;
  try {
    participants = header.at("participants").get<int>();
    cfg.kdf_iterations = header.at("kdf_iterations").get<int>();
    cfg.host_gazes = header.at("host_gazes").get<bool>();
    cfg.timeout_seconds = header.at("timeout_seconds").get<double>();
  } catch (const json::exception& e) {
    throw EventLogError(line_no, e.what());
  }
  if (participants < 2) throw EventLogError(line_no, "bad participant count");

  HostState host;
  std::vector<ClientState> clients(static_cast<std::size_t>(participants - 1));
  ReplayResult result;

  auto collect = [&](const StepOutput& out) {
    for (const auto& [to, msg] : out.to_send) result.emitted_frames.push_back(encode_message(msg));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw EventLogError(line_no, e.what());
    }

    try {
      if (j.value("type", "") != "event") throw EventLogError(line_no, "expected an event record");
      const std::string actor = j.at("actor").get<std::string>();
      const std::string event = j.at("event").get<std::string>();

      auto parse_capture = [&]() -> CaptureDone {
        if (j.at("ok").get<bool>())
          return CaptureDone{{SharedSecret{j.at("secret").get<std::string>()}, -1}};
        return CaptureDone{{std::nullopt, j.at("failed_position").get<int>()}};
      };
      auto parse_msg = [&]() -> MsgIn {
        const auto frame = eventlog_detail::from_hex(j.at("frame").get<std::string>());
        auto decoded = decode_message(frame);
        const auto* msg = std::get_if<Message>(&decoded);
        if (!msg) throw EventLogError(line_no, "undecodable frame in log");
        return MsgIn{j.at("from").get<EndpointId>(), *msg};
      };

      if (actor == "host") {
        HostEvent ev;
        if (event == "msg")
          ev = parse_msg();
        else if (event == "start")
          ev = CmdHostStart{j.at("expected").get<int>()};
        else if (event == "begin")
          ev = CmdBegin{eventlog_detail::layout_from_json(j.at("layout")),
                        Ksc::from_string(j.at("ksc").get<std::string>()),
                        j.at("seed64").get<std::uint64_t>()};
        else if (event == "capture")
          ev = parse_capture();
        else if (event == "tick")
          ev = Tick{j.at("now").get<double>()};
        else
          throw EventLogError(line_no, "unknown host event '" + event + "'");
        collect(host_step(host, ev, cfg));
      } else if (actor.size() >= 2 && actor[0] == 'c') {
        const int idx = std::stoi(actor.substr(1));
        if (idx < 0 || idx >= participants - 1) throw EventLogError(line_no, "client index out of range");
        ClientEvent ev;
        if (event == "msg")
          ev = parse_msg();
        else if (event == "connect")
          ev = CmdConnect{};
        else if (event == "ksc")
          ev = KscHeard{Ksc::from_string(j.at("ksc").get<std::string>())};
        else if (event == "capture")
          ev = parse_capture();
        else if (event == "tick")
          ev = Tick{j.at("now").get<double>()};
        else
          throw EventLogError(line_no, "unknown client event '" + event + "'");
        collect(client_step(clients[static_cast<std::size_t>(idx)], ev, cfg));
      } else {
        throw EventLogError(line_no, "unknown actor '" + actor + "'");
      }
    } catch (const json::exception& e) {
      throw EventLogError(line_no, e.what());
    }
    ++result.events_replayed;
  }

  result.host_phase = host.phase;
  result.host_cause = host.failure_cause;
  if (host.key) result.host_key_fingerprint = key_fingerprint(*host.key);
  for (const auto& c : clients) {
    result.client_phases.push_back(c.phase);
    result.client_key_fingerprints.push_back(c.key ? key_fingerprint(*c.key) : "");
  }
  return result;
}

}  // namespace gazepair
