// Acceptance suite: every release criterion exercised end to end, one
// pass/fail line each. Exits nonzero if any criterion fails.
//
// Bulk Monte Carlo phases run PBKDF2 at a reduced test-profile iteration
// count (the KDF's own conformance is criterion 7 at the full count, and
// criterion 3 retains ten full-count sessions); every statistical criterion
// uses fixed seeds and 4-sigma binomial bands.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "gazepair/gazepair.hpp"
#include "../oracles.hpp"

using namespace gazepair;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// Shared secrecy scanner: fed by every tapped session in criteria 3-6,
// judged in criterion 9.
SecrecyScanner g_scanner;

// ---------------------------------------------------------------------------

void criterion1_entropy() {
  const GridConfig grid;
  const auto r3 = compute_entropy(grid, 3);
  const auto r10 = compute_entropy(grid, 10);

  const bool nk_ok = std::abs(r3.n_k - 2.034e16) / 2.034e16 <= 0.001;
  const bool np_ok = r3.n_p == 720;
  const bool e3_ok = r3.e_bits_reported() >= 63.5 && r3.e_bits_reported() <= 64.0;
  const bool e10_ok = r10.e_bits_reported() >= 76.0 && r10.e_bits_reported() <= 76.6;

  report("1. entropy reproduction", nk_ok && np_ok && e3_ok && e10_ok,
         fmt("N_K=%.4e, N_P=%llu, E(P=3)=%.3f bits (reported %.1f), E(P=10)=%.3f bits (reported %.1f)",
             r3.n_k, static_cast<unsigned long long>(r3.n_p), r3.e_bits, r3.e_bits_reported(),
             r10.e_bits, r10.e_bits_reported()));
}

void criterion2_discretization() {
  const GridConfig grid;
  const auto a = discretize({-2.2, 1.8, 1.1}, grid);
  const auto b = discretize({-1.770, 2.398, 1.678}, grid);
  const bool ok = a == "-221" && b == "-222";
  report("2. discretization reproduction", ok,
         fmt("(-2.2,1.8,1.1) -> %s, (-1.770,2.398,1.678) -> %s",
             a ? a->c_str() : "(none)", b ? b->c_str() : "(none)"));
}

void criterion3_happy_path() {
  bool all_paired = true;
  bool all_keys = true;
  long sessions = 0;

  for (const TransportKind transport : {TransportKind::sim, TransportKind::loopback}) {
    for (const int participants : {2, 3}) {
      ExperimentConfig cfg;
      cfg.trials = 1000;
      cfg.participants = participants;
      cfg.sensor.angular_error_deg = 1.5;
      cfg.sensor.misselect_prob = 0.0;
      cfg.kdf_iterations = 1000;  // test profile for the bulk runs
      cfg.transport = transport;
      cfg.seed = 0x30000 + static_cast<std::uint64_t>(participants);
      const auto rep = run_experiment(
          cfg, transport == TransportKind::sim ? &g_scanner : nullptr);
      sessions += rep.trials;
      all_paired = all_paired && rep.successes == rep.trials;
      for (const auto& rec : rep.records) all_keys = all_keys && rec.keys_match;
    }
  }

  // ten sessions retained at the full production iteration count
  ExperimentConfig full;
  full.trials = 10;
  full.sensor.angular_error_deg = 1.5;
  full.kdf_iterations = kDefaultKdfIterations;
  full.seed = 0x3ff;
  const auto rep = run_experiment(full, &g_scanner);
  sessions += rep.trials;
  all_paired = all_paired && rep.successes == rep.trials;
  for (const auto& rec : rep.records) all_keys = all_keys && rec.keys_match;

  report("3. happy-path correctness", all_paired && all_keys,
         fmt("%ld sessions over sim+loopback, 2 and 3 participants: %s paired, keys %s",
             sessions, all_paired ? "100%" : "NOT all", all_keys ? "byte-identical" : "MISMATCHED"));
}

void criterion4_misselect_model() {
  const double q = 0.005;
  ExperimentConfig cfg;
  cfg.trials = 100000;
  cfg.sensor.misselect_prob = q;
  cfg.kdf_iterations = 4;
  cfg.seed = 0x40000;
  const auto rep = run_experiment(cfg, &g_scanner);

  const double expected = std::pow(1.0 - q, 3.0 * 2.0);
  const double band = 4.0 * std::sqrt(expected * (1.0 - expected) / static_cast<double>(cfg.trials));
  const bool band_ok = std::abs(rep.success_rate() - expected) < band;

  // calibration consistency: the q that lands on the published one-to-one
  // success rate
  const double q_cal = 1.0 - std::pow(0.983, 1.0 / 6.0);
  const bool cal_ok = std::abs(std::pow(1.0 - q_cal, 6.0) - 0.983) < 1e-9 &&
                      std::abs(q_cal - 0.0028) < 1e-4;

  report("4. misselection success model", band_ok && cal_ok,
         fmt("empirical %.5f vs (1-q)^6=%.5f (band +/-%.5f, 100k trials); q=%.6f reproduces 0.983",
             rep.success_rate(), expected, band, q_cal));
}

void criterion5_network_attacker() {
  ExperimentConfig cfg;
  cfg.trials = 720000;
  cfg.kdf_iterations = 4;
  cfg.seed = 0x50000;
  cfg.attacker = AttackSpec{AttackerKnowledge::Posture::network, AttackSpec::Mode::single};
  const auto rep = run_experiment(cfg, &g_scanner);

  const double p = 1.0 / 720.0;
  const double band = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.trials));
  const bool single_ok = std::abs(rep.attack_success_rate() - p) < band;

  ExperimentConfig bf = cfg;
  bf.trials = 2000;
  bf.seed = 0x51000;
  bf.attacker = AttackSpec{AttackerKnowledge::Posture::network, AttackSpec::Mode::bruteforce};
  const auto bf_rep = run_experiment(bf, &g_scanner);
  bool recovered = bf_rep.attack_successes == bf_rep.attacked;
  long max_guesses = 0;
  double mean_guesses = 0;
  for (const auto& rec : bf_rep.records) {
    recovered = recovered && rec.attack_success == 1 && rec.attack_guesses <= 720;
    max_guesses = std::max(max_guesses, rec.attack_guesses);
    mean_guesses += static_cast<double>(rec.attack_guesses);
  }
  mean_guesses /= static_cast<double>(bf_rep.records.size());
  const bool mean_ok = std::abs(mean_guesses - 360.5) <= 0.05 * 360.5;

  report("5. network-attacker statistics", single_ok && recovered && mean_ok,
         fmt("single-guess %.6f vs 1/720=%.6f (band +/-%.6f, 720k trials); brute force: "
             "recovery %ld/%ld, max %ld, mean %.1f guesses (360.5 +/-5%%)",
             rep.attack_success_rate(), p, band, bf_rep.attack_successes, bf_rep.attacked,
             max_guesses, mean_guesses));
}

void criterion6_colocated_attacker() {
  const GridConfig grid;
  const std::uint64_t space = colocated_guess_space(grid, 3);
  const std::uint64_t with_origin = colocated_guess_space_with_origin(grid, 3);

  // Direct trials for the bulk statistic: fresh session placements, one
  // uniform guess each. No crypto is involved by construction.
  const long n = 3000000;
  long successes = 0;
  bool key_leak = false;
  Rng rng(0x60000);
  for (long i = 0; i < n; ++i) {
    const auto layout = generate_layout(grid, rng);
    const auto ksc = generate_ksc(3, rng);
    const std::string truth = exact_shared_secret(ksc, layout).value;

    AttackerKnowledge k;
    k.posture = AttackerKnowledge::Posture::colocated;
    k.heard_ksc = ksc;
    k.grid = grid;
    const auto outcome =
        guess_layout_once(k, rng, [&](const std::string& c) { return c == truth; });
    if (outcome.succeeded) ++successes;
    key_leak = key_leak || outcome.recovered_key.has_value();
  }

  const double p = 1.0 / static_cast<double>(space);
  const double band = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  const double rate = static_cast<double>(successes) / static_cast<double>(n);
  const bool rate_ok = std::abs(rate - p) < band;

  // A sessionized slice feeds the OOB transcripts through the scanner.
  ExperimentConfig cfg;
  cfg.trials = 20000;
  cfg.kdf_iterations = 4;
  cfg.seed = 0x61000;
  cfg.attacker = AttackSpec{AttackerKnowledge::Posture::colocated, AttackSpec::Mode::single};
  run_experiment(cfg, &g_scanner);

  report("6. colocated-attacker statistics", rate_ok && !key_leak,
         fmt("secret-match %d/%ld = %.3e vs 1/%llu = %.3e (band +/-%.3e); origin-including "
             "reference space %llu; matching guesses never yield a key",
             static_cast<int>(successes), n, rate, static_cast<unsigned long long>(space), p, band,
             static_cast<unsigned long long>(with_origin)));
}

void criterion7_kdf_conformance() {
  using testoracle::from_string;
  bool ok = true;
  std::string detail;

  // published vector set, oracle and implementation side by side
  struct Vec {
    std::string password;
    testoracle::Bytes salt;
    long iterations;
    std::string hex;
  };
  const std::vector<Vec> published = {
      {"password", from_string("salt"), 1,
       "120fb6cffcf8b32c43e7225256c4f837a86548c92ccc35480805987cb70be17b"},
      {"password", from_string("salt"), 2,
       "ae4d0c95af6b46d32d0adff928f06dd02a303f8ef3c251dfd6e2d85a95474c43"},
      {"password", from_string("salt"), 4096,
       "c5e478d59288c841aa530db6845c4c8d962893a001ce4e11a4963873aa98134a"},
      {"-221031311", {0x01, 0x23, 0x45, 0x67, 0x89, 0xab, 0xcd, 0xef}, 50000,
       "63d324a6fd003131c36680ca6779cbe73dae8d9d368e16a97aa7fbbc77d73164"},
      {"310-22031", {0xde, 0xad, 0xbe, 0xef, 0x00, 0x11, 0x22, 0x33}, 50000,
       "e054b382a6b95932b9bb916998bd29acc4f1d2189fff8eb51e4f32f0a8b71c22"},
  };
  for (const auto& v : published) {
    const auto key = derive_key(SharedSecret{v.password}, v.salt, static_cast<int>(v.iterations));
    const auto oracle = testoracle::pbkdf2_hmac_sha256(from_string(v.password), v.salt,
                                                       v.iterations, kKeyBytes);
    ok = ok && testoracle::to_hex({key.bytes.begin(), key.bytes.end()}) == v.hex &&
         testoracle::to_hex(oracle) == v.hex;
  }

  // five more vectors at exactly the production iteration count, computed
  // live by the independent oracle
  int full_count_vectors = 2;  // the two 50k vectors above
  for (const std::string secret : {"031122213", "-3511-121", "000315-221031311"}) {
    const testoracle::Bytes salt{9, 9, 2, 2, 4, 4, 8, 8};
    const auto key = derive_key(SharedSecret{secret}, salt, kDefaultKdfIterations);
    const auto oracle =
        testoracle::pbkdf2_hmac_sha256(from_string(secret), salt, kDefaultKdfIterations, kKeyBytes);
    ok = ok && std::equal(key.bytes.begin(), key.bytes.end(), oracle.begin(), oracle.end());
    ++full_count_vectors;
  }

  // one iteration off must change the key: pins the count exactly
  {
    const testoracle::Bytes salt{1, 2, 3, 4, 5, 6, 7, 8};
    const auto key = derive_key(SharedSecret{"-221031311"}, salt, kDefaultKdfIterations);
    const auto off = testoracle::pbkdf2_hmac_sha256(from_string("-221031311"), salt,
                                                    kDefaultKdfIterations - 1, kKeyBytes);
    ok = ok && !std::equal(key.bytes.begin(), key.bytes.end(), off.begin(), off.end());
  }

  report("7. KDF conformance", ok,
         fmt("%zu published vectors + %d at the full 50,000-iteration count; off-by-one detected",
             published.size(), full_count_vectors));
}

void criterion8_codec_and_replay() {
  // codec fuzz
  Rng rng(0x80000);
  bool codec_ok = true;
  for (int i = 0; i < 10000 && codec_ok; ++i) {
    Message m;
    switch (rng.uniform_below(6)) {
      case 0: m = JoinRequestMsg{}; break;
      case 1: m = JoinAckMsg{static_cast<std::uint32_t>(rng.next_u64())}; break;
      case 2: {
        LayoutMsg lm;
        lm.layout.depth_plane = static_cast<int>(rng.uniform_below(256)) - 128;
        for (std::size_t c = rng.uniform_below(12); c > 0; --c)
          lm.layout.cells.push_back({static_cast<int>(rng.uniform_below(256)) - 128,
                                     static_cast<int>(rng.uniform_below(256)) - 128,
                                     static_cast<int>(rng.uniform_below(256)) - 128});
        m = lm;
        break;
      }
      case 3: m = SessionRandMsg{rng.next_u64()}; break;
      case 4: {
        ConfirmationMsg cm;
        cm.conf.client_id = static_cast<std::uint32_t>(rng.next_u64());
        for (std::size_t c = rng.uniform_below(48); c > 0; --c)
          cm.conf.ciphertext.push_back(static_cast<std::uint8_t>(rng.next_u64()));
        for (auto& b : cm.conf.auth_tag) b = static_cast<std::uint8_t>(rng.next_u64());
        m = cm;
        break;
      }
      default:
        m = ResultMsg{rng.bernoulli(0.5), static_cast<FailureCause>(rng.uniform_below(5))};
    }
    const auto frame = encode_message(m);
    const auto decoded = decode_message(frame);
    codec_ok = std::holds_alternative<Message>(decoded) && std::get<Message>(decoded) == m &&
               encode_message(std::get<Message>(decoded)) == frame;
  }

  // record one session, replay it, compare states and emitted bytes
  SessionConfig scfg;
  scfg.participants = 3;
  scfg.protocol.kdf_iterations = 1000;

  struct TrafficTap : SessionObserver {
    EventLogRecorder* rec = nullptr;
    std::vector<std::vector<std::uint8_t>> frames;
    void on_session_start(const SessionConfig& c) override { rec->on_session_start(c); }
    void on_host_event(const HostEvent& e) override { rec->on_host_event(e); }
    void on_client_event(int i, const ClientEvent& e) override { rec->on_client_event(i, e); }
    void on_frame_sent(EndpointId, EndpointId, std::span<const std::uint8_t> f) override {
      frames.emplace_back(f.begin(), f.end());
    }
  };

  std::ostringstream log;
  EventLogRecorder recorder(log);
  TrafficTap tap;
  tap.rec = &recorder;
  Rng srng(0x81000);
  SimNet net({}, 0x82000);
  const auto live = run_session(net, scfg, srng, &tap);

  std::istringstream replay_in(log.str());
  const auto replayed = replay_event_log(replay_in);
  const bool replay_ok =
      live.paired && replayed.host_phase == HostPhase::paired &&
      replayed.emitted_frames == tap.frames &&
      replayed.host_key_fingerprint == key_fingerprint(*live.host_key);

  // identical CSV bytes for identical seeds
  ExperimentConfig ecfg;
  ecfg.trials = 500;
  ecfg.kdf_iterations = 8;
  ecfg.sensor.misselect_prob = 0.02;
  ecfg.seed = 0x83000;
  std::ostringstream csv_a, csv_b;
  export_csv(run_experiment(ecfg), csv_a);
  export_csv(run_experiment(ecfg), csv_b);
  const bool csv_ok = csv_a.str() == csv_b.str() && !csv_a.str().empty();

  report("8. codec and replay", codec_ok && replay_ok && csv_ok,
         fmt("10k fuzzed frames round-trip %s; session replay %s (%zu frames); CSV bytes %s",
             codec_ok ? "byte-exactly" : "FAILED", replay_ok ? "identical" : "DIVERGED",
             replayed.emitted_frames.size(), csv_ok ? "stable" : "UNSTABLE"));
}

void criterion9_secrecy_hygiene() {
  const bool ok = g_scanner.clean() && g_scanner.frames_scanned() > 0 &&
                  g_scanner.utterances_scanned() > 0;
  std::string first;
  if (!g_scanner.clean())
    first = " first: trial " + std::to_string(g_scanner.findings()[0].trial_id) + ", " +
            g_scanner.findings()[0].what;
  report("9. secrecy hygiene", ok,
         fmt("%ld sessions, %ld tapped frames, %ld OOB utterances scanned; %zu findings%s",
             g_scanner.sessions_scanned(), g_scanner.frames_scanned(),
             g_scanner.utterances_scanned(), g_scanner.findings().size(), first.c_str()));
}

}  // namespace

int main() {
  std::printf("acceptance: gaze-pairing analysis kit\n");
  criterion1_entropy();
  criterion2_discretization();
  criterion3_happy_path();
  criterion4_misselect_model();
  criterion5_network_attacker();
  criterion6_colocated_attacker();
  criterion7_kdf_conformance();
  criterion8_codec_and_replay();
  criterion9_secrecy_hygiene();

  if (g_failures == 0)
    std::printf("all 9 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
