// Minimal library walkthrough: one host and two clients pair over the
// simulated network, then the same session materials are checked against a
// network eavesdropper making a single cue guess.
#include <cstdio>

#include "gazepair/gazepair.hpp"

int main() {
  using namespace gazepair;

  SessionConfig cfg;
  cfg.participants = 3;
  cfg.sensor.angular_error_deg = 1.5;

  std::vector<std::vector<std::uint8_t>> tapped;
  SimNet net({}, /*seed=*/2);
  net.set_network_tap([&](const TapRecord& rec) { tapped.push_back(rec.frame); });

  Rng rng(42);
  const SessionOutcome outcome = run_session(net, cfg, rng);

  std::printf("pairing: %s (%ld ticks, %d frames)\n", outcome.paired ? "ok" : "failed",
              outcome.ticks, outcome.messages_sent);
  std::printf("spoken cue: %s\n", outcome.ksc.to_string().c_str());
  if (outcome.host_key)
    std::printf("session key fingerprint: %s\n", key_fingerprint(*outcome.host_key).c_str());

  AttackerKnowledge eavesdropper;
  eavesdropper.posture = AttackerKnowledge::Posture::network;
  eavesdropper.observed_frames = tapped;
  Rng attacker_rng(7);
  const AttackOutcome attack = guess_ksc_once(eavesdropper, attacker_rng);
  std::printf("eavesdropper single guess: %s\n", attack.succeeded ? "hit" : "miss");

  const auto entropy = compute_entropy(cfg.grid, cfg.ksc_length);
  std::printf("secret space: %.3e placements x %llu cues = %.1f bits\n", entropy.n_k,
              static_cast<unsigned long long>(entropy.n_p), entropy.e_bits);
  return outcome.paired ? 0 : 1;
}
