#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "app/commands.h"
#include "app/config.h"
#include "needleperc/errors.h"

namespace {

using needleperc::app::Json;

Json LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw needleperc::app::UsageError("cannot open config " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw needleperc::app::UsageError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = needleperc::app;
  CLI::App cli{"Clusters of random needles: simulation, integration and regime classification"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  for (const char* name : {"simulate", "integrate", "convergence", "classify", "phase-diagram"}) {
    CLI::App* sub = cli.add_subcommand(name, std::string("run the ") + name + " config");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config's seed");
    sub->add_option("--threads", threads, "worker threads (default NEEDLE_PERC_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  }
  app::SelftestOptions st;
  CLI::App* selftest = cli.add_subcommand("selftest", "cross-check kernels against oracles");
  selftest->add_option("--seed", st.seed, "base seed");
  selftest->add_option("--inject-fault", st.faults, "deliberately break a kernel (union_area)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitUsage;
  }

  try {
    if (selftest->parsed()) return app::RunSelftest(st, std::cout);
    const CLI::App* sub = cli.get_subcommands().front();
    app::Invocation inv;
    inv.config = LoadConfig(config_path);
    if (!inv.config.is_object() || !inv.config.contains("subcommand") ||
        inv.config["subcommand"] != sub->get_name()) {
      throw app::UsageError("config subcommand does not match \"" + sub->get_name() + "\"");
    }
    inv.out_dir = out_dir;
    inv.seed = seed;
    inv.threads = app::ResolveThreads(threads);
    app::RunConfig(inv, std::cerr);
    return app::kExitOk;
  } catch (const app::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const needleperc::CapacityError& e) {
    std::cerr << "capacity exceeded: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const needleperc::HypothesisError& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitFailure;
  }
}
