#ifndef NEEDLEPERC_NUMFMT_H_
#define NEEDLEPERC_NUMFMT_H_

#include <charconv>
#include <string>

namespace needleperc {

// Shortest decimal text that parses back to the same double.
inline std::string FormatShortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace needleperc

#endif  // NEEDLEPERC_NUMFMT_H_
