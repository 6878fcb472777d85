#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazepair/adversary.hpp"
#include "gazepair/hygiene.hpp"
#include "gazepair/session.hpp"
#include "gazepair/transport.hpp"

namespace gazepair {

// ---------------------------------------------------------------------------
// Closed-form entropy of the shared-secret space.
// ---------------------------------------------------------------------------

/// Secret-space sizes and entropy for a grid and cue length. n_k counts the
/// ordered placements of the labeled holograms (non-origin cells on one of
/// z_count planes), n_p the ordered non-repeating cues. e_bits is
/// accumulated in log space, so large grids cannot overflow.
struct EntropyReport {
  double n_k = 0.0;
  std::uint64_t n_p = 0;
  double s = 0.0;
  double e_bits = 0.0;
  double ksc_bits = 0.0;

  // Table/report precision is one tenth of a bit.
  double e_bits_reported() const { return std::round(e_bits * 10.0) / 10.0; }
};

inline EntropyReport compute_entropy(const GridConfig& g, int ksc_length) {
  g.validate();
  if (ksc_length < 1 || ksc_length > g.hologram_count)
    throw std::invalid_argument("entropy: cue length must be in [1, hologram_count]");

  EntropyReport r;
  double log2_nk = std::log2(static_cast<double>(g.z_count));
  r.n_k = static_cast<double>(g.z_count);
  for (int i = 0; i < g.hologram_count; ++i) {
    const double term = static_cast<double>(g.placeable_cells() - i);
    r.n_k *= term;
    log2_nk += std::log2(term);
  }

  r.n_p = 1;
  double log2_np = 0.0;
  for (int i = 0; i < ksc_length; ++i) {
    r.n_p *= static_cast<std::uint64_t>(g.hologram_count - i);
    log2_np += std::log2(static_cast<double>(g.hologram_count - i));
  }

  r.s = r.n_k * static_cast<double>(r.n_p);
  r.e_bits = log2_nk + log2_np;
  r.ksc_bits = log2_np;
  return r;
}

struct TradeoffRow {
  int ksc_length = 0;
  double e_bits = 0.0;
  double ksc_bits = 0.0;
};

inline std::vector<TradeoffRow> ksc_tradeoff_table(const GridConfig& g, int p_lo, int p_hi) {
  if (p_lo < 1 || p_hi > g.hologram_count || p_lo > p_hi)
    throw std::invalid_argument("tradeoff: bad cue-length range");
  std::vector<TradeoffRow> rows;
  for (int p = p_lo; p <= p_hi; ++p) {
    const auto r = compute_entropy(g, p);
    rows.push_back({p, r.e_bits, r.ksc_bits});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Monte Carlo experiment harness.
// ---------------------------------------------------------------------------

enum class TransportKind { sim, loopback };

struct AttackSpec {
  AttackerKnowledge::Posture posture = AttackerKnowledge::Posture::network;
  enum class Mode { single, bruteforce } mode = Mode::single;
};

struct ExperimentConfig {
  long trials = 1000;
  int participants = 2;
  GridConfig grid;
  int ksc_length = 3;
  GazeSensorModel sensor = GazeSensorModel::noiseless();
  SimNetConfig net;
  TransportKind transport = TransportKind::sim;
  std::optional<AttackSpec> attacker;
  std::uint64_t seed = 1;
  int kdf_iterations = kDefaultKdfIterations;
  bool host_gazes = true;
  double timeout_seconds = 30.0;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
    if (participants < 2) throw std::invalid_argument("experiment: participants must be >= 2");
    if (attacker && attacker->mode == AttackSpec::Mode::bruteforce &&
        attacker->posture != AttackerKnowledge::Posture::network)
      throw std::invalid_argument(
          "experiment: brute force needs the network posture; without the published "
          "seed there is nothing to verify guesses against");
    if (attacker && transport != TransportKind::sim)
      throw std::invalid_argument("experiment: attacker taps exist only on the simulated transport");
  }
};

struct TrialRecord {
  long trial_id = 0;
  int participants = 0;
  int ksc_length = 0;
  bool success = false;
  FailureCause cause = FailureCause::none;
  int messages_sent = 0;
  int attack_success = -1;  // -1 = no attacker
  long attack_guesses = 0;
  std::uint64_t seed = 0;
  bool keys_match = false;  // host and all clients derived identical bytes
};

struct ExperimentReport {
  long trials = 0;
  int participants = 0;
  int ksc_length = 0;
  std::vector<TrialRecord> records;
  std::map<FailureCause, long> failure_causes;  // failures only
  std::map<MsgKind, long> message_counts;
  long successes = 0;
  long attacked = 0;
  long attack_successes = 0;

  double success_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  }
  double attack_success_rate() const {
    return attacked == 0 ? 0.0 : static_cast<double>(attack_successes) / static_cast<double>(attacked);
  }
};

namespace analysis_detail {

template <class Net>
SessionOutcome run_one(Net& net, const ExperimentConfig& cfg, Rng& session_rng) {
  SessionConfig scfg;
  scfg.grid = cfg.grid;
  scfg.ksc_length = cfg.ksc_length;
  scfg.participants = cfg.participants;
  scfg.sensor = cfg.sensor;
  scfg.protocol.kdf_iterations = cfg.kdf_iterations;
  scfg.protocol.host_gazes = cfg.host_gazes;
  scfg.protocol.timeout_seconds = cfg.timeout_seconds;
  return run_session(net, scfg, session_rng);
}

}  // namespace analysis_detail

/// Runs independent end-to-end pairing sessions, optionally with an attacker
/// in one of the two postures, and optionally feeding every session's tap
/// output to a secrecy scanner. Deterministic for a fixed seed: each trial
/// derives its own seed from (seed, trial_id).
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       SecrecyScanner* scanner = nullptr) {
  cfg.validate();
  ExperimentReport report;
  report.trials = cfg.trials;
  report.participants = cfg.participants;
  report.ksc_length = cfg.ksc_length;
  report.records.reserve(static_cast<std::size_t>(cfg.trials));

  const bool want_network_tap =
      (cfg.attacker && cfg.attacker->posture == AttackerKnowledge::Posture::network) ||
      (scanner && !(cfg.attacker && cfg.attacker->posture == AttackerKnowledge::Posture::colocated));
  const bool want_oob_tap =
      cfg.attacker && cfg.attacker->posture == AttackerKnowledge::Posture::colocated;

  for (long trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t trial_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    Rng session_rng(trial_seed);

    std::vector<std::vector<std::uint8_t>> tapped_frames;
    std::vector<OobUtterance> oob_heard;

    SessionOutcome outcome;
    if (cfg.transport == TransportKind::loopback) {
      LoopbackNet net;
      outcome = analysis_detail::run_one(net, cfg, session_rng);
    } else {
      SimNet net(cfg.net, mix_seed(trial_seed, 0xfeed));
      if (want_network_tap)
        net.set_network_tap([&](const TapRecord& rec) { tapped_frames.push_back(rec.frame); });
      if (want_oob_tap)
        net.set_oob_tap([&](const OobUtterance& u) { oob_heard.push_back(u); });
      outcome = analysis_detail::run_one(net, cfg, session_rng);
    }

    TrialRecord rec;
    rec.trial_id = trial;
    rec.participants = cfg.participants;
    rec.ksc_length = cfg.ksc_length;
    rec.success = outcome.paired;
    rec.cause = outcome.cause;
    rec.messages_sent = outcome.messages_sent;
    rec.seed = trial_seed;

    rec.keys_match = outcome.host_key.has_value();
    for (const auto& k : outcome.client_keys)
      rec.keys_match = rec.keys_match && k && outcome.host_key && *k == *outcome.host_key;

    if (cfg.attacker) {
      AttackerKnowledge knowledge;
      knowledge.grid = cfg.grid;
      knowledge.ksc_length = cfg.ksc_length;
      knowledge.kdf_iterations = cfg.kdf_iterations;
      Rng attack_rng(mix_seed(trial_seed, 0xadd));

      if (cfg.attacker->posture == AttackerKnowledge::Posture::network) {
        knowledge.posture = AttackerKnowledge::Posture::network;
        knowledge.observed_frames = tapped_frames;
        const AttackOutcome a = cfg.attacker->mode == AttackSpec::Mode::bruteforce
                                    ? bruteforce_ksc(knowledge)
                                    : guess_ksc_once(knowledge, attack_rng);
        rec.attack_success = a.succeeded ? 1 : 0;
        rec.attack_guesses = a.guesses_made;
      } else {
        knowledge.posture = AttackerKnowledge::Posture::colocated;
        if (!oob_heard.empty() && !outcome.secrets.empty() && !outcome.secrets[0].empty()) {
          knowledge.heard_ksc = oob_heard.front().ksc;
          const std::string truth = outcome.secrets[0];
          const AttackOutcome a = guess_layout_once(
              knowledge, attack_rng, [&](const std::string& candidate) { return candidate == truth; });
          rec.attack_success = a.succeeded ? 1 : 0;
          rec.attack_guesses = a.guesses_made;
        }
      }
      if (rec.attack_success >= 0) {
        ++report.attacked;
        report.attack_successes += rec.attack_success;
      }
    }

    if (scanner) scanner->scan_session(trial, outcome, tapped_frames, oob_heard);

    if (rec.success)
      ++report.successes;
    else
      ++report.failure_causes[rec.cause];
    for (const auto& [kind, count] : outcome.message_counts) report.message_counts[kind] += count;
    report.records.push_back(std::move(rec));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reporting.
// ---------------------------------------------------------------------------

inline const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::join_request: return "join_request";
    case MsgKind::join_ack: return "join_ack";
    case MsgKind::layout: return "layout";
    case MsgKind::session_rand: return "session_rand";
    case MsgKind::confirmation: return "confirmation";
    case MsgKind::result: return "result";
  }
  return "?";
}

inline void export_csv(const ExperimentReport& report, std::ostream& out) {
  out << "trial_id,participants,ksc_length,success,failure_cause,messages_sent,attack_success,seed\n";
  for (const auto& r : report.records) {
    out << r.trial_id << ',' << r.participants << ',' << r.ksc_length << ','
        << (r.success ? 1 : 0) << ',' << to_string(r.cause) << ',' << r.messages_sent << ',';
    if (r.attack_success >= 0) out << r.attack_success;
    out << ',' << r.seed << '\n';
  }
}

inline void export_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open " + path + " for writing");
  export_csv(report, f);
}

inline std::string summarize(const ExperimentReport& report) {
  std::ostringstream out;
  out << "trials:            " << report.trials << "\n"
      << "participants:      " << report.participants << "\n"
      << "ksc length:        " << report.ksc_length << "\n";
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.6f", report.success_rate());
  out << "success rate:      " << rate << "\n";
  if (!report.failure_causes.empty()) {
    out << "failures by cause:\n";
    for (const auto& [cause, count] : report.failure_causes)
      out << "  " << to_string(cause) << ": " << count << "\n";
  }
  out << "messages by kind:\n";
  for (const auto& [kind, count] : report.message_counts)
    out << "  " << to_string(kind) << ": " << count << "\n";
  if (report.attacked > 0) {
    std::snprintf(rate, sizeof rate, "%.8f", report.attack_success_rate());
    out << "attacked trials:   " << report.attacked << "\n"
        << "attack successes:  " << report.attack_successes << "\n"
        << "attack rate:       " << rate << "\n";
  }
  return out.str();
}

}  // namespace gazepair
