#include "output.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "needleperc/numfmt.h"

namespace needleperc::app {

const char* const kVersion = "0.1.0";

void AtomicWrite(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string Sha256Hex(const std::string& content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void RunOutput::Add(const std::string& name, std::string content) {
  files_[name] = std::move(content);
}

void RunOutput::Commit(const nlohmann::json& config, std::uint64_t seed,
                       double wall_seconds) const {
  std::filesystem::create_directories(dir_);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [name, content] : files_) {
    AtomicWrite(dir_ / name, content);
    list.push_back({{"name", name}, {"bytes", content.size()}, {"sha256", Sha256Hex(content)}});
  }
  const nlohmann::json manifest = {
      {"config", config},       {"version", kVersion},  {"seed", seed},
      {"wall_clock_seconds", wall_seconds}, {"files", list}};
  AtomicWrite(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { Row(header); }

Csv& Csv::Row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

std::string Num(double v) { return FormatShortest(v); }
std::string Num(std::int64_t v) { return std::to_string(v); }

std::string NumWithLog(double v, double log_v) {
  if (std::isnormal(v) || !std::isfinite(log_v)) return Num(v);
  const double l10 = log_v / std::log(10.0);
  double exponent = std::floor(l10);
  double mantissa = std::pow(10.0, l10 - exponent);
  if (mantissa >= 9.9999999999995) {
    mantissa = 1.0;
    exponent += 1.0;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12ge%d", mantissa, static_cast<int>(exponent));
  return buf;
}

}  // namespace needleperc::app
