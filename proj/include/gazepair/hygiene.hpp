#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gazepair/session.hpp"
#include "gazepair/wire.hpp"

namespace gazepair {

struct HygieneFinding {
  long trial_id = 0;
  std::string what;
};

/// Scans tapped traffic and OOB transcripts for material that must never
/// appear there: shared-secret strings, key bytes, and the cue sequence.
///
/// Secret and key searches run over whole frames. The cue search masks out
/// the fields that are random bytes by construction (AEAD ciphertext/tag and
/// the published seed): every other byte a frame can carry is structurally
/// below ASCII '0', so a digit string found outside those fields is a real
/// leak, while inside them it is a meaningless coincidence at the 2^-24
/// level per position.
class SecrecyScanner {
 public:
  void scan_session(long trial_id, const SessionOutcome& truth,
                    const std::vector<std::vector<std::uint8_t>>& tapped_frames,
                    const std::vector<OobUtterance>& oob_transcript) {
    ++sessions_scanned_;
    const std::string ksc_ascii = truth.ksc.to_string();

    std::vector<std::vector<std::uint8_t>> key_bytes;
    if (truth.host_key) key_bytes.emplace_back(truth.host_key->bytes.begin(), truth.host_key->bytes.end());
    for (const auto& k : truth.client_keys)
      if (k) key_bytes.emplace_back(k->bytes.begin(), k->bytes.end());

    for (const auto& frame : tapped_frames) {
      ++frames_scanned_;
      for (const auto& secret : truth.secrets) {
        if (secret.empty()) continue;
        if (contains(frame, std::span(reinterpret_cast<const std::uint8_t*>(secret.data()),
                                      secret.size())))
          findings_.push_back({trial_id, "shared secret string in tapped frame"});
      }
      for (const auto& kb : key_bytes)
        if (contains(frame, kb)) findings_.push_back({trial_id, "key bytes in tapped frame"});

      auto masked = frame;
      mask_random_fields(masked);
      if (!ksc_ascii.empty() &&
          contains(masked, std::span(reinterpret_cast<const std::uint8_t*>(ksc_ascii.data()),
                                     ksc_ascii.size())))
        findings_.push_back({trial_id, "cue digits in tapped frame"});
    }

    for (const auto& u : oob_transcript) {
      ++utterances_scanned_;
      if (!(u.ksc == truth.ksc))
        findings_.push_back({trial_id, "OOB transcript carries something besides the spoken cue"});
    }
  }

  bool clean() const { return findings_.empty(); }
  long sessions_scanned() const { return sessions_scanned_; }
  long frames_scanned() const { return frames_scanned_; }
  long utterances_scanned() const { return utterances_scanned_; }
  const std::vector<HygieneFinding>& findings() const { return findings_; }

 private:
  static bool contains(std::span<const std::uint8_t> haystack,
                       std::span<const std::uint8_t> needle) {
    if (needle.empty() || haystack.size() < needle.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
  }

  static void mask_random_fields(std::vector<std::uint8_t>& frame) {
    auto decoded = decode_message(frame);
    const auto* msg = std::get_if<Message>(&decoded);
    if (!msg) return;
    if (std::holds_alternative<SessionRandMsg>(*msg)) {
      std::fill(frame.begin() + kFrameHeaderBytes, frame.end(), 0);
    } else if (const auto* conf = std::get_if<ConfirmationMsg>(msg)) {
      // client id (4) | u16 len | ciphertext | u16 len | tag
      std::size_t pos = kFrameHeaderBytes + 4 + 2;
      std::fill_n(frame.begin() + static_cast<std::ptrdiff_t>(pos), conf->conf.ciphertext.size(), 0);
      pos += conf->conf.ciphertext.size() + 2;
      std::fill_n(frame.begin() + static_cast<std::ptrdiff_t>(pos), conf->conf.auth_tag.size(), 0);
    }
  }

  long sessions_scanned_ = 0;
  long frames_scanned_ = 0;
  long utterances_scanned_ = 0;
  std::vector<HygieneFinding> findings_;
};

}  // namespace gazepair
