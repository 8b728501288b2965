// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace serval {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed config, bad CLI usage or violated config invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Corpus/queries/qrels/run data that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file that cannot be read or parsed in the expected format.
class ParseError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// The endpoint could not be reached (connection refused, timeout...).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The endpoint answered with a non-2xx status.
class EndpointError : public Error {
 public:
  EndpointError(int status, std::string body)
      : Error("endpoint returned HTTP " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// The endpoint answered 2xx but the payload does not follow the protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class EmptyDescriptionError : public Error {
 public:
  using Error::Error;
};

/// Persisted index that is truncated, corrupted or of another version.
class IndexFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace serval
