#include "config.h"

#include <cstdlib>

#include "needleperc/geometry.h"

namespace needleperc::app {

Fields::Fields(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
  if (!obj_.is_object()) throw UsageError(where_ + " must be an object");
}

bool Fields::Has(const std::string& key) const {
  if (!obj_.contains(key)) return false;
  seen_.insert(key);
  return true;
}

const Json& Fields::Get(const std::string& key) const {
  if (!obj_.contains(key)) throw UsageError("missing key " + Path(key));
  seen_.insert(key);
  return obj_.at(key);
}

double Fields::Number(const std::string& key) const {
  const Json& v = Get(key);
  if (!v.is_number()) throw UsageError(Path(key) + " must be a number");
  return v.get<double>();
}

double Fields::Number(const std::string& key, double fallback) const {
  return Has(key) ? Number(key) : fallback;
}

std::int64_t Fields::Integer(const std::string& key) const {
  const Json& v = Get(key);
  if (!v.is_number_integer()) throw UsageError(Path(key) + " must be an integer");
  return v.get<std::int64_t>();
}

std::int64_t Fields::Integer(const std::string& key, std::int64_t fallback) const {
  return Has(key) ? Integer(key) : fallback;
}

bool Fields::Bool(const std::string& key, bool fallback) const {
  if (!Has(key)) return fallback;
  const Json& v = Get(key);
  if (!v.is_boolean()) throw UsageError(Path(key) + " must be true or false");
  return v.get<bool>();
}

std::string Fields::String(const std::string& key) const {
  const Json& v = Get(key);
  if (!v.is_string()) throw UsageError(Path(key) + " must be a string");
  return v.get<std::string>();
}

std::string Fields::String(const std::string& key, const std::string& fallback) const {
  return Has(key) ? String(key) : fallback;
}

std::vector<double> Fields::Numbers(const std::string& key) const {
  const Json& v = Get(key);
  if (!v.is_array()) throw UsageError(Path(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw UsageError(Path(key) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const Json& Fields::Raw(const std::string& key) const { return Get(key); }

void Fields::Finish() const {
  for (auto it = obj_.begin(); it != obj_.end(); ++it) {
    if (!seen_.count(it.key())) throw UsageError("unknown key " + Path(it.key()));
  }
}

namespace {

double AngleFactor(const Fields& f) {
  const std::string unit = f.String("angle_unit");
  if (unit == "radians") return 1.0;
  if (unit == "degrees") return geometry::kPi / 180.0;
  throw UsageError(f.Path("angle_unit") + " must be \"degrees\" or \"radians\"");
}

std::vector<double> Triple(const Fields& f, const std::string& key) {
  std::vector<double> v = f.Numbers(key);
  if (v.size() != 3) throw UsageError(f.Path(key) + " needs three entries");
  return v;
}

}  // namespace

formulas::MarkLaw ParseMarks(const Json& j, const std::string& where) {
  Fields f(j, where);
  const double unit = AngleFactor(f);
  const Json& list = f.Raw("orientations");
  if (!list.is_array() || list.empty()) {
    throw UsageError(f.Path("orientations") + " must be a non-empty array");
  }
  std::vector<formulas::MarkEntry> entries;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Fields e(list[i], f.Path("orientations") + "[" + std::to_string(i) + "]");
    entries.push_back({e.Number("angle") * unit, e.Number("half_length"), e.Number("prob")});
    e.Finish();
  }
  f.Finish();
  try {
    return formulas::MakeMarkLaw(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw UsageError(where + ": " + e.what());
  }
}

formulas::ThreeStateParams ParseThreeState(const Json& j, const std::string& where) {
  Fields f(j, where);
  const double unit = AngleFactor(f);
  const double alpha = f.Number("alpha") * unit;
  const double beta = f.Number("beta") * unit;
  const std::vector<double> p = Triple(f, "p");
  formulas::ThreeStateParams out;
  const bool has_r = f.Has("r");
  const bool has_h = f.Has("h");
  if (has_r == has_h) throw UsageError(where + " needs exactly one of \"r\" and \"h\"");
  try {
    if (has_h) {
      const std::vector<double> h = Triple(f, "h");
      out = formulas::FromH(alpha, beta, h[0], h[1], h[2], p[0], p[1], p[2]);
    } else {
      const std::vector<double> r = Triple(f, "r");
      out = {alpha, beta, r[0], r[1], r[2], p[0], p[1], p[2]};
    }
    formulas::Validate(out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(where + ": " + e.what());
  }
  f.Finish();
  return out;
}

std::vector<estimation::Composition> ParseCompositions(const Json& j, const std::string& where,
                                                       std::size_t entries) {
  if (!j.is_array() || j.empty()) throw UsageError(where + " must be a non-empty array");
  std::vector<estimation::Composition> out;
  for (const Json& k : j) {
    if (!k.is_array() || k.size() != entries) {
      throw UsageError(where + ": each composition needs one count per orientation");
    }
    estimation::Composition c;
    for (const Json& x : k) {
      if (!x.is_number_integer() || x.get<int>() < 0) {
        throw UsageError(where + ": counts must be non-negative integers");
      }
      c.push_back(x.get<int>());
    }
    out.push_back(c);
  }
  return out;
}

int ResolveThreads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw UsageError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("NEEDLE_PERC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw UsageError("NEEDLE_PERC_THREADS must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return 1;
}

}  // namespace needleperc::app
