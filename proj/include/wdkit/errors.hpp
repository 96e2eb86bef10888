#pragma once

#include <stdexcept>
#include <string>

namespace wdkit {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class VersionError : public Error {
public:
  using Error::Error;
};

// Driver version could not be resolved from metadata.
class ResolutionError : public Error {
public:
  using Error::Error;
};

class TransportError : public Error {
public:
  using Error::Error;
};

class ArchiveError : public Error {
public:
  using Error::Error;
};

class ChecksumError : public Error {
public:
  using Error::Error;
};

// W3C WebDriver error response. `code` carries the protocol error string
// (e.g. "no such element"), `message` the server-provided detail.
class ProtocolError : public Error {
public:
  ProtocolError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

class SessionNotCreatedError : public ProtocolError {
public:
  using ProtocolError::ProtocolError;
};

class InvalidSessionError : public ProtocolError {
public:
  using ProtocolError::ProtocolError;
};

class NoSuchElementError : public ProtocolError {
public:
  using ProtocolError::ProtocolError;
};

class JavascriptError : public ProtocolError {
public:
  using ProtocolError::ProtocolError;
};

class StaleElementError : public ProtocolError {
public:
  using ProtocolError::ProtocolError;
};

class DockerError : public Error {
public:
  using Error::Error;
};

class ScenarioError : public Error {
public:
  using Error::Error;
};

class PlanError : public Error {
public:
  using Error::Error;
};

class DataIntegrityError : public Error {
public:
  using Error::Error;
};

}  // namespace wdkit
