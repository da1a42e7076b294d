#ifndef NEEDLEPERC_APP_CONFIG_H_
#define NEEDLEPERC_APP_CONFIG_H_

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "needleperc/estimation.h"
#include "needleperc/formulas.h"
#include "needleperc/process.h"

namespace needleperc::app {

using Json = nlohmann::json;

// Bad flags, unreadable or schema-violating configs. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Typed access to one JSON object. Every key read is recorded; Finish()
// rejects whatever was not read.
class Fields {
 public:
  Fields(const Json& obj, std::string where);

  bool Has(const std::string& key) const;
  double Number(const std::string& key) const;
  double Number(const std::string& key, double fallback) const;
  std::int64_t Integer(const std::string& key) const;
  std::int64_t Integer(const std::string& key, std::int64_t fallback) const;
  bool Bool(const std::string& key, bool fallback) const;
  std::string String(const std::string& key) const;
  std::string String(const std::string& key, const std::string& fallback) const;
  std::vector<double> Numbers(const std::string& key) const;
  const Json& Raw(const std::string& key) const;
  std::string Path(const std::string& key) const { return where_ + "." + key; }

  void Finish() const;

 private:
  const Json& Get(const std::string& key) const;

  const Json& obj_;
  std::string where_;
  mutable std::set<std::string> seen_;
};

enum class AngleUnit { kRadians, kDegrees };

// {"angle_unit": "degrees", "orientations": [{"angle", "half_length", "prob"}]}
formulas::MarkLaw ParseMarks(const Json& j, const std::string& where);

// {"angle_unit", "alpha", "beta", "p": [p0, pa, pb]} plus either
// "r": [r0, ra, rb] or "h": [h0, ha, hb].
formulas::ThreeStateParams ParseThreeState(const Json& j, const std::string& where);

std::vector<estimation::Composition> ParseCompositions(const Json& j, const std::string& where,
                                                       std::size_t entries);

// Run-wide settings after flags are applied.
struct RunSettings {
  std::uint64_t seed = 1;
  int threads = 1;
};

// Threads from --threads, else NEEDLE_PERC_THREADS, else 1.
int ResolveThreads(std::optional<int> flag);

}  // namespace needleperc::app

#endif  // NEEDLEPERC_APP_CONFIG_H_
