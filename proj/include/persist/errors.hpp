#ifndef PERSIST_ERRORS_HPP
#define PERSIST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace persist {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct TracedAllSites : Error {
  using Error::Error;
};
struct NotHermitian : Error {
  using Error::Error;
};
struct ZeroSuccessProbability : Error {
  using Error::Error;
};
struct NotTwoQubits : Error {
  using Error::Error;
};
struct ScenarioTooLarge : Error {
  using Error::Error;
};
struct TooManySites : Error {
  using Error::Error;
};
struct InvalidAmplitude : Error {
  using Error::Error;
};
struct DimensionBudgetExceeded : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};
struct ParameterOutOfRange : Error {
  using Error::Error;
};
struct ZeroOperator : Error {
  using Error::Error;
};
struct InvariantViolation : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace persist

#endif
