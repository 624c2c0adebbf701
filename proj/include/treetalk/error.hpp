#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treetalk {

// Base for every error caused by bad input. The CLI maps these to exit code 2;
// anything else escaping a command is an internal error (exit code 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Structural rule violated inside an otherwise well-formed document.
class ValidationError : public Error {
 public:
  ValidationError(std::string node_id, std::string rule)
      : Error("node '" + node_id + "': " + rule),
        node_id_(std::move(node_id)),
        rule_(std::move(rule)) {}

  const std::string& node_id() const { return node_id_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string node_id_;
  std::string rule_;
};

// Malformed document. `position` is a byte offset or a 1-based line number,
// depending on the format; `what()` says which.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message), position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace treetalk
