// multicam: benchmark runner and HTTP gateway.
//
//   multicam bench run --config bench.json --out results/ [--strategy all|one]
//                      [--subsets all|single] [--format csv|text]
//   multicam serve [--config session.json] [--bind 127.0.0.1:8080]
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "multicam/bench.hpp"
#include "multicam/config.hpp"
#include "multicam/gateway.hpp"
#include "multicam/runner.hpp"

namespace fs = std::filesystem;
using namespace multicam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct BenchArgs {
  std::string config;
  std::string out;
  std::string strategy;
  std::string subsets;
  std::string format = "csv";
};

struct ServeArgs {
  std::string config;
  std::string bind = "127.0.0.1:8080";
  double stream_fps = 10.0;
};

int run_bench(const BenchArgs& args) {
  BenchConfig cfg = bench_config_from_json(load_json_file(args.config));
  if (!args.strategy.empty()) cfg.strategies = {parse_strategy(args.strategy)};
  if (!args.subsets.empty()) cfg.subsets = parse_subset_mode(args.subsets);
  cfg.validate();

  const BenchReport report = run_suite(cfg);

  fs::create_directories(args.out);
  const fs::path path = fs::path(args.out) / (cfg.scenario + (args.format == "csv" ? ".csv" : ".txt"));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (args.format == "csv") {
    write_csv(report, out);
  } else {
    write_text(report, out);
  }
  std::cout << report.records.size() << " runs written to " << path.string() << "\n";
  return kExitOk;
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--bind expects host:port");
  try {
    return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--bind: bad port in '" + bind + "'");
  }
}

int run_serve(const ServeArgs& args) {
  SessionConfig cfg = args.config.empty() ? SessionConfig::defaults()
                                          : session_config_from_json(load_json_file(args.config));
  cfg.clock = ClockMode::Wall;
  const auto [host, port] = split_bind(args.bind);

  SessionRunner runner(std::move(cfg));
  Gateway gateway(runner, GatewayOptions{args.stream_fps});
  std::cout << "serving on " << host << ":" << port << std::endl;
  gateway.serve_blocking(host, port);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MultiCam simulator"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Benchmark harness");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "Run the benchmark suite and write a report");
  BenchArgs bargs;
  bench_run->add_option("--config", bargs.config, "Bench configuration (JSON)")->required();
  bench_run->add_option("--out", bargs.out, "Output directory")->required();
  bench_run->add_option("--strategy", bargs.strategy, "Only this switching strategy")
      ->check(CLI::IsMember({"all", "one"}));
  bench_run->add_option("--subsets", bargs.subsets, "Camera subsets to run")
      ->check(CLI::IsMember({"all", "single"}));
  bench_run->add_option("--format", bargs.format, "Report format")->check(CLI::IsMember({"csv", "text"}));

  auto* serve = app.add_subcommand("serve", "Run a wall-clock session behind the HTTP gateway");
  ServeArgs sargs;
  serve->add_option("--config", sargs.config, "Session configuration (JSON)");
  serve->add_option("--bind", sargs.bind, "host:port to listen on");
  serve->add_option("--stream-fps", sargs.stream_fps, "View stream rate")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*bench_run) return run_bench(bargs);
    if (*serve) return run_serve(sargs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BindError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
