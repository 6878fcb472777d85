#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gazepair/crypto.hpp"
#include "gazepair/geometry.hpp"

namespace gazepair {

// Frame: "GZPR" | version 0x01 | kind | payload length (u32 BE) | payload.
// Integers are fixed-width big-endian, cells are three signed bytes, byte
// strings carry a u16 BE length prefix.

constexpr std::uint8_t kWireVersion = 0x01;
constexpr std::size_t kFrameHeaderBytes = 10;
constexpr std::size_t kMaxPayloadBytes = 64 * 1024 - kFrameHeaderBytes;

enum class MsgKind : std::uint8_t {
  join_request = 1,
  join_ack = 2,
  layout = 3,
  session_rand = 4,
  confirmation = 5,
  result = 6,
};

enum class FailureCause : std::uint8_t {
  none = 0,
  missed_capture = 1,
  secret_mismatch = 2,
  timeout = 3,
  protocol_violation = 4,
};

inline const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::none: return "none";
    case FailureCause::missed_capture: return "missed_capture";
    case FailureCause::secret_mismatch: return "secret_mismatch";
    case FailureCause::timeout: return "timeout";
    case FailureCause::protocol_violation: return "protocol_violation";
  }
  return "?";
}

struct JoinRequestMsg {
  friend bool operator==(const JoinRequestMsg&, const JoinRequestMsg&) = default;
};

struct JoinAckMsg {
  std::uint32_t client_id = 0;
  friend bool operator==(const JoinAckMsg&, const JoinAckMsg&) = default;
};

struct LayoutMsg {
  HologramLayout layout;
  friend bool operator==(const LayoutMsg& a, const LayoutMsg& b) {
    return a.layout.depth_plane == b.layout.depth_plane && a.layout.cells == b.layout.cells;
  }
};

struct SessionRandMsg {
  std::uint64_t seed64 = 0;
  friend bool operator==(const SessionRandMsg&, const SessionRandMsg&) = default;
};

struct ConfirmationMsg {
  Confirmation conf;
  friend bool operator==(const ConfirmationMsg& a, const ConfirmationMsg& b) {
    return a.conf.client_id == b.conf.client_id && a.conf.ciphertext == b.conf.ciphertext &&
           a.conf.auth_tag == b.conf.auth_tag;
  }
};

struct ResultMsg {
  bool success = false;
  FailureCause cause = FailureCause::none;
  friend bool operator==(const ResultMsg&, const ResultMsg&) = default;
};

using Message =
    std::variant<JoinRequestMsg, JoinAckMsg, LayoutMsg, SessionRandMsg, ConfirmationMsg, ResultMsg>;

inline MsgKind kind_of(const Message& m) {
  return static_cast<MsgKind>(static_cast<std::uint8_t>(m.index() + 1));
}

enum class DecodeError {
  bad_magic,
  unknown_version,
  unknown_kind,
  truncated,
  length_overflow,
  bad_payload,
};

inline const char* to_string(DecodeError e) {
  switch (e) {
    case DecodeError::bad_magic: return "bad_magic";
    case DecodeError::unknown_version: return "unknown_version";
    case DecodeError::unknown_kind: return "unknown_kind";
    case DecodeError::truncated: return "truncated";
    case DecodeError::length_overflow: return "length_overflow";
    case DecodeError::bad_payload: return "bad_payload";
  }
  return "?";
}

namespace wire_detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 24; i >= 0; i -= 8) out.push_back(static_cast<std::uint8_t>(v >> i));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 56; i >= 0; i -= 8) out.push_back(static_cast<std::uint8_t>(v >> i));
}

inline void put_i8(std::vector<std::uint8_t>& out, int v) {
  if (v < -128 || v > 127) throw std::invalid_argument("wire: coordinate outside signed byte");
  out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(v)));
}

inline void put_bytes(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> b) {
  if (b.size() > 0xffff) throw std::invalid_argument("wire: byte string too long");
  put_u16(out, static_cast<std::uint16_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  bool take_u8(std::uint8_t& v) {
    if (pos_ + 1 > data_.size()) return false;
    v = data_[pos_++];
    return true;
  }
  bool take_i8(int& v) {
    std::uint8_t raw;
    if (!take_u8(raw)) return false;
    v = static_cast<std::int8_t>(raw);
    return true;
  }
  bool take_u16(std::uint16_t& v) {
    if (pos_ + 2 > data_.size()) return false;
    v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return true;
  }
  bool take_u32(std::uint32_t& v) {
    if (pos_ + 4 > data_.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return true;
  }
  bool take_u64(std::uint64_t& v) {
    if (pos_ + 8 > data_.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return true;
  }
  bool take_bytes(std::vector<std::uint8_t>& out) {
    std::uint16_t n;
    if (!take_u16(n) || pos_ + n > data_.size()) return false;
    out.assign(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
               data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return true;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace wire_detail

inline std::vector<std::uint8_t> encode_message(const Message& m) {
  using namespace wire_detail;
  std::vector<std::uint8_t> payload;

  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, JoinRequestMsg>) {
          // empty payload
        } else if constexpr (std::is_same_v<T, JoinAckMsg>) {
          put_u32(payload, msg.client_id);
        } else if constexpr (std::is_same_v<T, LayoutMsg>) {
          put_i8(payload, msg.layout.depth_plane);
          if (msg.layout.cells.size() > 0xff)
            throw std::invalid_argument("wire: too many holograms");
          for (std::size_t i = 0; i < msg.layout.cells.size(); ++i) {
            payload.push_back(static_cast<std::uint8_t>(i));  // digit label
            put_i8(payload, msg.layout.cells[i].x);
            put_i8(payload, msg.layout.cells[i].y);
            put_i8(payload, msg.layout.cells[i].z);
          }
        } else if constexpr (std::is_same_v<T, SessionRandMsg>) {
          put_u64(payload, msg.seed64);
        } else if constexpr (std::is_same_v<T, ConfirmationMsg>) {
          put_u32(payload, msg.conf.client_id);
          put_bytes(payload, msg.conf.ciphertext);
          put_bytes(payload, msg.conf.auth_tag);
        } else if constexpr (std::is_same_v<T, ResultMsg>) {
          payload.push_back(msg.success ? 1 : 0);
          payload.push_back(static_cast<std::uint8_t>(msg.cause));
        }
      },
      m);

  if (payload.size() > kMaxPayloadBytes) throw std::invalid_argument("wire: payload too large");

  std::vector<std::uint8_t> frame;
  frame.reserve(kFrameHeaderBytes + payload.size());
  frame.push_back('G');
  frame.push_back('Z');
  frame.push_back('P');
  frame.push_back('R');
  frame.push_back(kWireVersion);
  frame.push_back(static_cast<std::uint8_t>(kind_of(m)));
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

inline std::variant<Message, DecodeError> decode_message(std::span<const std::uint8_t> frame) {
  using namespace wire_detail;
  if (frame.size() < kFrameHeaderBytes) return DecodeError::truncated;
  if (frame[0] != 'G' || frame[1] != 'Z' || frame[2] != 'P' || frame[3] != 'R')
    return DecodeError::bad_magic;
  if (frame[4] != kWireVersion) return DecodeError::unknown_version;
  const std::uint8_t kind = frame[5];
  std::uint32_t declared = 0;
  for (int i = 0; i < 4; ++i) declared = (declared << 8) | frame[6 + static_cast<std::size_t>(i)];
  if (declared > kMaxPayloadBytes) return DecodeError::length_overflow;
  if (frame.size() != kFrameHeaderBytes + declared) return DecodeError::truncated;

  Reader r(frame.subspan(kFrameHeaderBytes));
  switch (static_cast<MsgKind>(kind)) {
    case MsgKind::join_request: {
      if (!r.done()) return DecodeError::bad_payload;
      return Message{JoinRequestMsg{}};
    }
    case MsgKind::join_ack: {
      JoinAckMsg m;
      if (!r.take_u32(m.client_id) || !r.done()) return DecodeError::bad_payload;
      return Message{m};
    }
    case MsgKind::layout: {
      LayoutMsg m;
      if (!r.take_i8(m.layout.depth_plane)) return DecodeError::bad_payload;
      if ((declared - 1) % 4 != 0) return DecodeError::bad_payload;
      const std::size_t count = (declared - 1) / 4;
      m.layout.cells.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint8_t label;
        GridCell c;
        if (!r.take_u8(label) || !r.take_i8(c.x) || !r.take_i8(c.y) || !r.take_i8(c.z))
          return DecodeError::bad_payload;
        if (label != i) return DecodeError::bad_payload;  // labels run 0..count-1 in order
        m.layout.cells[i] = c;
      }
      if (!r.done()) return DecodeError::bad_payload;
      return Message{m};
    }
    case MsgKind::session_rand: {
      SessionRandMsg m;
      if (!r.take_u64(m.seed64) || !r.done()) return DecodeError::bad_payload;
      return Message{m};
    }
    case MsgKind::confirmation: {
      ConfirmationMsg m;
      std::vector<std::uint8_t> tag;
      if (!r.take_u32(m.conf.client_id) || !r.take_bytes(m.conf.ciphertext) ||
          !r.take_bytes(tag) || tag.size() != kTagBytes || !r.done())
        return DecodeError::bad_payload;
      std::copy(tag.begin(), tag.end(), m.conf.auth_tag.begin());
      return Message{m};
    }
    case MsgKind::result: {
      ResultMsg m;
      std::uint8_t success, cause;
      if (!r.take_u8(success) || !r.take_u8(cause) || success > 1 ||
          cause > static_cast<std::uint8_t>(FailureCause::protocol_violation) || !r.done())
        return DecodeError::bad_payload;
      m.success = success == 1;
      m.cause = static_cast<FailureCause>(cause);
      return Message{m};
    }
    default:
      return DecodeError::unknown_kind;
  }
}

}  // namespace gazepair
