// Command-line driver: batch pairing runs, attack experiments, entropy
// tables, and event-log replay.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gazepair/gazepair.hpp"

namespace {

using namespace gazepair;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GAZEPAIR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("GAZEPAIR_SEED", "must be an unsigned integer");
    }
  }
  return 1;
}

GridConfig parse_grid(const std::string& spec) {
  GridConfig g;
  if (spec.empty()) return g;
  int xt, yt, zt, k;
  if (std::sscanf(spec.c_str(), "%d,%d,%d,%d", &xt, &yt, &zt, &k) != 4)
    throw CLI::ValidationError("--grid", "expected Xt,Yt,Zt,K");
  g.x_count = xt;
  g.y_count = yt;
  g.z_count = zt;
  g.hologram_count = k;
  g.validate();
  return g;
}

std::pair<int, int> parse_range(const std::string& spec) {
  int lo, hi;
  if (std::sscanf(spec.c_str(), "%d..%d", &lo, &hi) == 2) return {lo, hi};
  if (std::sscanf(spec.c_str(), "%d", &lo) == 1) return {lo, lo};
  throw CLI::ValidationError("--ksc-len-range", "expected a..b or a single length");
}

int run_pair(long trials, int participants, int ksc_len, double noise_deg, double misselect,
             std::uint64_t seed, const std::string& transport, const std::string& out_path,
             int kdf_iterations, bool host_computes, double drop, double reorder,
             const std::string& record_path) {
  ExperimentConfig cfg;
  cfg.trials = trials;
  cfg.participants = participants;
  cfg.ksc_length = ksc_len;
  cfg.sensor.angular_error_deg = noise_deg;
  cfg.sensor.misselect_prob = misselect;
  cfg.seed = seed;
  cfg.kdf_iterations = kdf_iterations;
  cfg.host_gazes = !host_computes;
  cfg.net.drop_prob = drop;
  cfg.net.reorder_prob = reorder;
  cfg.transport = transport == "loopback" ? TransportKind::loopback : TransportKind::sim;
  cfg.validate();

  const auto report = run_experiment(cfg);
  std::cout << summarize(report);
  if (!out_path.empty()) {
    export_csv(report, out_path);
    std::cout << "csv:               " << out_path << "\n";
  }

  if (!record_path.empty()) {
    // one extra session, identically configured, captured as an event log
    std::ofstream log(record_path, std::ios::binary);
    if (!log) throw std::runtime_error("cannot open " + record_path);
    EventLogRecorder recorder(log);
    SessionConfig scfg;
    scfg.grid = cfg.grid;
    scfg.ksc_length = cfg.ksc_length;
    scfg.participants = cfg.participants;
    scfg.sensor = cfg.sensor;
    scfg.protocol.kdf_iterations = cfg.kdf_iterations;
    scfg.protocol.host_gazes = cfg.host_gazes;
    Rng rng(mix_seed(seed, 0x51e55));
    SimNet net(cfg.net, mix_seed(seed, 0x7a9));
    run_session(net, scfg, rng, &recorder);
    std::cout << "event log:         " << record_path << "\n";
  }
  return 0;
}

int run_attack(const std::string& posture, const std::string& mode, long trials, int ksc_len,
               std::uint64_t seed, const std::string& out_path, int kdf_iterations) {
  ExperimentConfig cfg;
  cfg.trials = trials;
  cfg.ksc_length = ksc_len;
  cfg.seed = seed;
  cfg.kdf_iterations = kdf_iterations;

  AttackSpec spec;
  spec.posture = posture == "colocated" ? AttackerKnowledge::Posture::colocated
                                        : AttackerKnowledge::Posture::network;
  spec.mode = mode == "bruteforce" ? AttackSpec::Mode::bruteforce : AttackSpec::Mode::single;
  cfg.attacker = spec;
  cfg.validate();

  const auto report = run_experiment(cfg);
  std::cout << summarize(report);

  const auto entropy = compute_entropy(cfg.grid, ksc_len);
  char buf[64];
  if (spec.posture == AttackerKnowledge::Posture::network) {
    if (spec.mode == AttackSpec::Mode::single) {
      std::snprintf(buf, sizeof buf, "%.8f (1/%llu)", 1.0 / static_cast<double>(entropy.n_p),
                    static_cast<unsigned long long>(entropy.n_p));
      std::cout << "analytic rate:     " << buf << "\n";
    } else {
      double total = 0;
      long max_guesses = 0;
      for (const auto& r : report.records) {
        total += static_cast<double>(r.attack_guesses);
        max_guesses = std::max(max_guesses, r.attack_guesses);
      }
      std::snprintf(buf, sizeof buf, "%.2f", total / static_cast<double>(report.records.size()));
      std::cout << "mean guesses:      " << buf << "\n"
                << "max guesses:       " << max_guesses << "\n"
                << "analytic mean:     " << (static_cast<double>(entropy.n_p) + 1.0) / 2.0 << "\n";
    }
  } else {
    const auto space = colocated_guess_space(cfg.grid, ksc_len);
    const auto with_origin = colocated_guess_space_with_origin(cfg.grid, ksc_len);
    std::snprintf(buf, sizeof buf, "%.10f (1/%llu)", 1.0 / static_cast<double>(space),
                  static_cast<unsigned long long>(space));
    std::cout << "analytic rate:     " << buf << "\n";
    std::cout << "reference count including the origin cell: " << with_origin << "\n";
  }

  if (!out_path.empty()) {
    export_csv(report, out_path);
    std::cout << "csv:               " << out_path << "\n";
  }
  return 0;
}

int run_entropy(const std::string& range_spec, const std::string& grid_spec,
                const std::string& out_path) {
  const auto grid = parse_grid(grid_spec);
  const auto [lo, hi] = parse_range(range_spec);
  const auto rows = ksc_tradeoff_table(grid, lo, hi);

  std::printf("%-8s %-12s %-12s\n", "ksc_len", "e_bits", "ksc_bits");
  for (const auto& row : rows)
    std::printf("%-8d %-12.1f %-12.2f\n", row.ksc_length,
                std::round(row.e_bits * 10.0) / 10.0, row.ksc_bits);

  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + out_path);
    f << "ksc_length,e_bits,ksc_bits\n";
    for (const auto& row : rows) {
      char line[80];
      std::snprintf(line, sizeof line, "%d,%.4f,%.4f\n", row.ksc_length, row.e_bits, row.ksc_bits);
      f << line;
    }
    std::cout << "csv: " << out_path << "\n";
  }
  return 0;
}

int run_replay(const std::string& log_path) {
  std::ifstream in(log_path);
  if (!in) {
    std::cerr << "cannot open " << log_path << "\n";
    return 1;
  }
  const auto result = replay_event_log(in);
  std::cout << result.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-based AR device pairing: simulation, analysis, and attack harness"};
  app.require_subcommand(1);

  // pair
  long trials = 1000;
  int participants = 2;
  int ksc_len = 3;
  double noise_deg = 1.5;
  double misselect = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string transport = "sim";
  std::string out_path;
  int kdf_iterations = gazepair::kDefaultKdfIterations;
  bool host_computes = false;
  double drop = 0.0, reorder = 0.0;

  auto* pair = app.add_subcommand("pair", "Run end-to-end pairing sessions");
  pair->add_option("--participants", participants, "Host plus clients")->check(CLI::Range(2, 64));
  pair->add_option("--ksc-len", ksc_len, "Cue length")->check(CLI::Range(1, 10));
  pair->add_option("--noise-deg", noise_deg, "Gaze angular error stddev, degrees");
  pair->add_option("--misselect", misselect, "Per-capture wrong-hologram probability")
      ->check(CLI::Range(0.0, 1.0));
  pair->add_option("--trials", trials, "Sessions to run")->check(CLI::PositiveNumber);
  pair->add_option("--seed", seed, "Master seed")->each([&](const std::string&) { seed_given = true; });
  pair->add_option("--transport", transport, "sim or loopback")
      ->check(CLI::IsMember({"sim", "loopback"}));
  pair->add_option("--out", out_path, "Write per-trial CSV here");
  pair->add_option("--kdf-iterations", kdf_iterations, "PBKDF2 iteration count")
      ->check(CLI::PositiveNumber);
  pair->add_flag("--host-computes", host_computes, "Host derives its secret instead of gazing");
  std::string record_path;
  pair->add_option("--record", record_path, "Also record one session's event log here");
  pair->add_option("--drop", drop, "Simulated per-frame drop probability")
      ->check(CLI::Range(0.0, 1.0));
  pair->add_option("--reorder", reorder, "Simulated reorder probability")
      ->check(CLI::Range(0.0, 1.0));

  // attack
  std::string posture = "network";
  std::string mode = "single";
  auto* attack = app.add_subcommand("attack", "Run eavesdropper attack trials");
  attack->add_option("--posture", posture, "network or colocated")
      ->required()
      ->check(CLI::IsMember({"network", "colocated"}));
  attack->add_option("--mode", mode, "single or bruteforce")
      ->check(CLI::IsMember({"single", "bruteforce"}));
  attack->add_option("--trials", trials, "Attacked sessions")->check(CLI::PositiveNumber);
  attack->add_option("--ksc-len", ksc_len, "Cue length")->check(CLI::Range(1, 10));
  attack->add_option("--seed", seed, "Master seed")->each([&](const std::string&) { seed_given = true; });
  attack->add_option("--out", out_path, "Write per-trial CSV here");
  attack->add_option("--kdf-iterations", kdf_iterations, "PBKDF2 iteration count")
      ->check(CLI::PositiveNumber);

  // entropy
  std::string range_spec = "3..10";
  std::string grid_spec;
  auto* entropy = app.add_subcommand("entropy", "Print the cue-length/entropy tradeoff table");
  entropy->add_option("--ksc-len-range", range_spec, "Cue lengths, e.g. 3..10");
  entropy->add_option("--grid", grid_spec, "Grid as Xt,Yt,Zt,K (default 7,6,5,10)");
  entropy->add_option("--out", out_path, "Write the table as CSV here");

  // replay
  std::string log_path;
  auto* replay = app.add_subcommand("replay", "Replay a recorded session event log");
  replay->add_option("--log", log_path, "Event-log file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!seed_given) seed = default_seed();
    if (pair->parsed())
      return run_pair(trials, participants, ksc_len, noise_deg, misselect, seed, transport,
                      out_path, kdf_iterations, host_computes, drop, reorder, record_path);
    if (attack->parsed())
      return run_attack(posture, mode, trials, ksc_len, seed, out_path, kdf_iterations);
    if (entropy->parsed()) return run_entropy(range_spec, grid_spec, out_path);
    if (replay->parsed()) return run_replay(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
