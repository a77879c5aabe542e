#pragma once

#include <stdexcept>
#include <string>

namespace memcentric {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid geometry, timing, profile or experiment configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

class AddressError : public Error {
  public:
    using Error::Error;
};

// Command sequence that the device state machine does not accept.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

// Not enough rows / lanes / unit capacity for the requested operation.
class CapacityError : public Error {
  public:
    using Error::Error;
};

// Maintenance scheduling conflicts and controller starvation.
class SchedulingError : public Error {
  public:
    using Error::Error;
};

// Input text (trace, netlist, operand file) that fails to parse.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

// A runtime audit found the simulated system in an impossible state.
class InvariantViolation : public Error {
  public:
    using Error::Error;
};

} // namespace memcentric
