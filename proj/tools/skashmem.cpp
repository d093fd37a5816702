// skashmem: runs a .ski benchmark script on the embedded multi-PE runtime
// and writes one result file.

#include <atomic>
#include <cctype>
#include <cstdio>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ska/dsl.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

/// "131072", "512K", "64M", "1G" -> bytes.  Throws CLI::ValidationError.
std::uint64_t parse_size(const std::string& text) {
  if (text.empty()) throw CLI::ValidationError("heap-size", "empty size");
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw CLI::ValidationError("heap-size", "not a size: " + text);
  }
  std::uint64_t mult = 1;
  if (pos < text.size()) {
    std::string suffix = text.substr(pos);
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(suffix[0])));
    if (suffix.size() > 2 || (suffix.size() == 2 &&
        std::toupper(static_cast<unsigned char>(suffix[1])) != 'B'))
      throw CLI::ValidationError("heap-size", "bad size suffix: " + text);
    switch (c) {
      case 'K': mult = 1ull << 10; break;
      case 'M': mult = 1ull << 20; break;
      case 'G': mult = 1ull << 30; break;
      case 'B': if (suffix.size() == 1) { mult = 1; break; } [[fallthrough]];
      default:
        throw CLI::ValidationError("heap-size", "bad size suffix: " + text);
    }
  }
  return static_cast<std::uint64_t>(v) * mult;
}

int list_routines() {
  for (const ska::RoutineDef& d : ska::routine_registry().all()) {
    std::printf("%s %d %s %s\n", d.name.c_str(), d.arity,
                ska::to_string(d.participants),
                d.calibrated ? "calibrated" : "uncalibrated");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPMD one-sided-communication microbenchmark harness"};

  std::string input, output = "skampi.sko";
  std::string heap_text, clock_text = "real", progress_text = "async";
  bool list = false;
  ska::WorldConfig cfg;

  app.add_option("-i,--input", input, "benchmark script (.ski)");
  app.add_option("-o,--output", output, "result file path")
      ->capture_default_str();
  app.add_option("-n,--npes", cfg.npes, "number of PEs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--heap-size", heap_text,
                 "symmetric heap per PE, e.g. 64M (default; env SKA_HEAP_SIZE)");
  app.add_option("--clock", clock_text, "real|virtual")
      ->check(CLI::IsMember({"real", "virtual"}));
  app.add_option("--alpha", cfg.clock.alpha, "virtual latency, seconds")
      ->capture_default_str();
  app.add_option("--beta", cfg.clock.beta, "virtual per-byte cost, seconds")
      ->capture_default_str();
  app.add_option("--gamma", cfg.clock.gamma, "virtual posting cost, seconds")
      ->capture_default_str();
  app.add_option("--quiet-cost", cfg.clock.quiet_cost,
                 "virtual empty-quiet cost, seconds")
      ->capture_default_str();
  app.add_option("--progress", progress_text, "async|quiet-only")
      ->check(CLI::IsMember({"async", "quiet-only"}));
  app.add_option("--seed", cfg.seed, "payload pattern seed")
      ->capture_default_str();
  app.add_flag("--list-routines", list, "print the routine catalog and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (list) return list_routines();

  if (input.empty()) {
    std::cerr << "an input script is required (-i)\n\n" << app.help();
    return 2;
  }

  if (cfg.clock.alpha < 0 || cfg.clock.beta < 0 || cfg.clock.gamma < 0 ||
      cfg.clock.quiet_cost < 0) {
    std::cerr << "virtual clock parameters must be >= 0\n";
    return 2;
  }

  if (heap_text.empty())
    if (const char* env = std::getenv("SKA_HEAP_SIZE")) heap_text = env;
  if (!heap_text.empty()) {
    try {
      cfg.heap_bytes = parse_size(heap_text);
    } catch (const CLI::ValidationError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }

  cfg.clock.kind =
      clock_text == "virtual" ? ska::ClockKind::Virtual : ska::ClockKind::Real;
  cfg.progress = progress_text == "quiet-only" ? ska::ProgressMode::QuietOnly
                                               : ska::ProgressMode::Async;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "cannot open " << input << "\n";
      return 1;
    }
    std::ostringstream text;
    text << in.rdbuf();

    ska::SkiAst ast = ska::parse(text.str());
    ska::World world(cfg);
    ska::ScriptOutput out =
        ska::run_script(ast, world, ska::routine_registry(), &g_interrupted);

    std::string tmp = output + ".tmp";
    {
      std::ofstream os(tmp, std::ios::trunc);
      if (!os) {
        std::cerr << "cannot write " << tmp << "\n";
        return 1;
      }
      ska::write_results(out.records, cfg.npes, out.final_unit, cfg.clock.kind,
                         os);
      if (!os.flush()) {
        std::cerr << "write failed: " << tmp << "\n";
        return 1;
      }
    }
    if (std::rename(tmp.c_str(), output.c_str()) != 0) {
      std::cerr << "cannot move " << tmp << " to " << output << "\n";
      return 1;
    }
  } catch (const ska::ScriptError& e) {
    std::cerr << input << ":" << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
