#pragma once

#include <stdexcept>
#include <string>

namespace sasc {

// Base for every failure the engine reports. Each subclass maps to one
// failure mode callers are expected to handle distinctly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

// Module response is constant, so scores in sigma_f units are undefined.
class DegenerateModule : public Error {
 public:
  using Error::Error;
};

class RemoteUnavailable : public Error {
 public:
  using Error::Error;
};

class NonFiniteResponse : public Error {
 public:
  NonFiniteResponse(const std::string& text, double value)
      : Error("non-finite value " + std::to_string(value) +
              " for text: \"" + text + "\""),
        text_(text) {}
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class EmptyCompletion : public Error {
 public:
  using Error::Error;
};

class InsufficientGenerations : public Error {
 public:
  using Error::Error;
};

class RegistryEmpty : public Error {
 public:
  using Error::Error;
};

class NoScoredRecords : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace sasc
