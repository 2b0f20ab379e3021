#pragma once

#include <stdexcept>
#include <string>

namespace mixnash {

// Bad argument: out-of-range index, shape mismatch, non-finite input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A finite-difference quotient or an intermediate value went non-finite.
// player() is -1 when the failure is not attributable to a single player.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int player = -1)
      : std::runtime_error(what), player_(player) {}
  int player() const { return player_; }

 private:
  int player_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixnash
