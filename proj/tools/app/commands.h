#ifndef NEEDLEPERC_APP_COMMANDS_H_
#define NEEDLEPERC_APP_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.h"

namespace needleperc::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Invocation {
  Json config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  int threads = 1;
};

// Runs the subcommand named by config["subcommand"] and writes its files
// plus manifest.json into out_dir. Throws UsageError on schema problems.
void RunConfig(const Invocation& inv, std::ostream& log);

void RunSimulate(const Invocation& inv, std::ostream& log);
void RunIntegrate(const Invocation& inv, std::ostream& log);
void RunConvergence(const Invocation& inv, std::ostream& log);
void RunClassify(const Invocation& inv, std::ostream& log);
void RunPhaseDiagram(const Invocation& inv, std::ostream& log);

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  std::vector<std::string> faults;  // "union_area"
};
// Prints one line per suite; returns kExitOk iff every suite passes.
int RunSelftest(const SelftestOptions& opts, std::ostream& out);

}  // namespace needleperc::app

#endif  // NEEDLEPERC_APP_COMMANDS_H_
