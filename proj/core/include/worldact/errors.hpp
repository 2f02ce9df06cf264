#pragma once

#include <stdexcept>
#include <string>

namespace worldact {

// Error taxonomy mirrored by the CLI exit codes: config=2, backend=3, data=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Backend transport failure. Retryable at the call site.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Backend answered, but the payload violates the expected schema.
struct ProtocolError : std::runtime_error {
  ProtocolError(const std::string& msg, std::string payload)
      : std::runtime_error(msg), raw_payload(std::move(payload)) {}
  std::string raw_payload;
};

}  // namespace worldact
