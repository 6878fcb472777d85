#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gazepair/crypto.hpp"
#include "gazepair/gaze.hpp"
#include "gazepair/geometry.hpp"
#include "gazepair/ksc.hpp"
#include "gazepair/rng.hpp"
#include "gazepair/wire.hpp"

namespace gazepair {

/// Everything an attacker in one of the two postures can hold. The postures
/// are mutually exclusive: a network eavesdropper never hears the cue, and a
/// co-located listener never sees traffic. Grid shape, cue length, and KDF
/// parameters are public protocol configuration and available to both.
struct AttackerKnowledge {
  enum class Posture { network, colocated };

  Posture posture = Posture::network;
  std::vector<std::vector<std::uint8_t>> observed_frames;  // network posture only
  std::optional<Ksc> heard_ksc;                            // colocated posture only

  GridConfig grid;
  int ksc_length = 3;
  int kdf_iterations = kDefaultKdfIterations;

  void validate() const {
    if (posture == Posture::network && heard_ksc)
      throw std::logic_error("attacker: network posture cannot hold an overheard cue");
    if (posture == Posture::colocated && !observed_frames.empty())
      throw std::logic_error("attacker: colocated posture cannot hold tapped frames");
  }
};

struct AttackOutcome {
  bool succeeded = false;
  long guesses_made = 0;
  std::optional<SymmetricKey> recovered_key;
};

namespace adversary_detail {

struct TappedSession {
  HologramLayout layout;
  SessionRandomness randomness;
  std::vector<Confirmation> confirmations;
};

// A network attacker needs the layout, the published randomness, and at
// least one confirmation to test guesses against.
inline TappedSession parse_tap(const AttackerKnowledge& k) {
  k.validate();
  if (k.posture != AttackerKnowledge::Posture::network)
    throw std::invalid_argument("attack: requires the network posture");
  std::optional<HologramLayout> layout;
  std::optional<std::uint64_t> seed64;
  std::vector<Confirmation> confirmations;
  for (const auto& frame : k.observed_frames) {
    auto decoded = decode_message(frame);
    const auto* msg = std::get_if<Message>(&decoded);
    if (!msg) continue;
    if (const auto* l = std::get_if<LayoutMsg>(msg)) {
      if (!layout) layout = l->layout;
    } else if (const auto* r = std::get_if<SessionRandMsg>(msg)) {
      if (!seed64) seed64 = r->seed64;
    } else if (const auto* c = std::get_if<ConfirmationMsg>(msg)) {
      confirmations.push_back(c->conf);
    }
  }
  if (!layout || !seed64 || confirmations.empty())
    throw std::invalid_argument("attack: tap log lacks layout, session randomness, or a confirmation");
  return {std::move(*layout), expand_session_randomness(*seed64), std::move(confirmations)};
}

inline bool key_verifies(const SymmetricKey& key, const TappedSession& tap) {
  for (const auto& conf : tap.confirmations)
    if (verify_confirmation(key, tap.randomness, conf) == VerifyResult::pass) return true;
  return false;
}

inline bool try_ksc_candidate(const Ksc& candidate, const TappedSession& tap,
                              const AttackerKnowledge& k, AttackOutcome& outcome) {
  const SharedSecret secret = exact_shared_secret(candidate, tap.layout);
  const SymmetricKey key = derive_key(secret, tap.randomness.salt, k.kdf_iterations);
  ++outcome.guesses_made;
  if (key_verifies(key, tap)) {
    outcome.succeeded = true;
    outcome.recovered_key = key;
    return true;
  }
  return false;
}

}  // namespace adversary_detail

/// One uniform cue guess against a tapped session: rebuild the candidate
/// secret from the observed layout, derive a key, try to open a captured
/// confirmation.
inline AttackOutcome guess_ksc_once(const AttackerKnowledge& k, Rng& rng) {
  const auto tap = adversary_detail::parse_tap(k);
  AttackOutcome outcome;
  const Ksc candidate =
      generate_ksc(k.ksc_length, rng, static_cast<int>(tap.layout.cells.size()));
  adversary_detail::try_ksc_candidate(candidate, tap, k, outcome);
  return outcome;
}

/// Exhaust the cue space in lexicographic order; each candidate costs one
/// full key derivation. Guaranteed to terminate within the cue-space size.
inline AttackOutcome bruteforce_ksc(const AttackerKnowledge& k) {
  const auto tap = adversary_detail::parse_tap(k);
  AttackOutcome outcome;

  const int pool = static_cast<int>(tap.layout.cells.size());
  Ksc candidate;
  candidate.digits.resize(static_cast<std::size_t>(k.ksc_length));
  std::vector<bool> used(static_cast<std::size_t>(pool), false);

  const std::function<bool(int)> enumerate = [&](int pos) {
    if (pos == k.ksc_length)
      return adversary_detail::try_ksc_candidate(candidate, tap, k, outcome);
    for (int d = 0; d < pool; ++d) {
      if (used[static_cast<std::size_t>(d)]) continue;
      used[static_cast<std::size_t>(d)] = true;
      candidate.digits[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(d);
      if (enumerate(pos + 1)) return true;
      used[static_cast<std::size_t>(d)] = false;
    }
    return false;
  };
  enumerate(0);
  return outcome;
}

/// Judges whether a candidate secret equals the session's true secret. Owned
/// by the harness; attack code only ever sees this closure, never the
/// legitimate parties' state.
using SecretMatchOracle = std::function<bool(const std::string&)>;

/// One uniform guess of where the cued holograms sit: an ordered tuple of
/// distinct non-origin cells plus a depth plane. Even a matching guess yields
/// no key, because this posture never sees the published salt/IV seed.
inline AttackOutcome guess_layout_once(const AttackerKnowledge& k, Rng& rng,
                                       const SecretMatchOracle& secret_matches) {
  k.validate();
  if (k.posture != AttackerKnowledge::Posture::colocated || !k.heard_ksc)
    throw std::invalid_argument("attack: requires the colocated posture with an overheard cue");

  const int p = static_cast<int>(k.heard_ksc->digits.size());
  const int depth =
      k.grid.z_min() + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(k.grid.z_count)));
  std::vector<GridCell> pool = placeable_plane_cells(k.grid, depth);

  std::string candidate;
  for (int i = 0; i < p; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) + rng.uniform_below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    candidate += cell_string(pool[static_cast<std::size_t>(i)]);
  }

  AttackOutcome outcome;
  outcome.guesses_made = 1;
  outcome.succeeded = secret_matches(candidate);
  return outcome;  // recovered_key intentionally absent
}

/// Size of the colocated guess space under the origin-excluding placement
/// rule actually used by the protocol.
inline std::uint64_t colocated_guess_space(const GridConfig& g, int ksc_length) {
  std::uint64_t n = 1;
  for (int i = 0; i < ksc_length; ++i)
    n *= static_cast<std::uint64_t>(g.placeable_cells() - i);
  return n * static_cast<std::uint64_t>(g.z_count);
}

/// The same count without the origin exclusion, reported alongside for
/// comparison with published figures.
inline std::uint64_t colocated_guess_space_with_origin(const GridConfig& g, int ksc_length) {
  std::uint64_t n = 1;
  for (int i = 0; i < ksc_length; ++i)
    n *= static_cast<std::uint64_t>(g.x_count * g.y_count - i);
  return n * static_cast<std::uint64_t>(g.z_count);
}

}  // namespace gazepair
