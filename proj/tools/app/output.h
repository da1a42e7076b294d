#ifndef NEEDLEPERC_APP_OUTPUT_H_
#define NEEDLEPERC_APP_OUTPUT_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace needleperc::app {

// Writes to a temporary sibling, then renames over the target.
void AtomicWrite(const std::filesystem::path& path, const std::string& content);

std::string Sha256Hex(const std::string& content);

// Collects the files of one run and writes them together with manifest.json.
class RunOutput {
 public:
  explicit RunOutput(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void Add(const std::string& name, std::string content);
  // Writes every file, then the manifest (config snapshot, version, seed,
  // wall-clock seconds, and name/bytes/sha256 per file).
  void Commit(const nlohmann::json& config, std::uint64_t seed, double wall_seconds) const;

  const std::map<std::string, std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> files_;
};

// Rows joined with commas, with a mandatory header.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& Row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

std::string Num(double v);  // shortest round-trip decimal
std::string Num(std::int64_t v);
// Num(v), except that a v that underflowed to zero or a subnormal is written
// in scientific notation reconstructed from its natural log.
std::string NumWithLog(double v, double log_v);

extern const char* const kVersion;

}  // namespace needleperc::app

#endif  // NEEDLEPERC_APP_OUTPUT_H_
