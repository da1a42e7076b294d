#ifndef NEEDLEPERC_ERRORS_H_
#define NEEDLEPERC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace needleperc {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A direction pair whose sines vanish where the skew coordinates need them.
class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

// A lemma evaluator was called outside the hypotheses it is stated under.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// A parameter regime for which no closed form is implemented.
class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

// The sampler produced more needles than the configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace needleperc

#endif  // NEEDLEPERC_ERRORS_H_
