#pragma once

#include <stdexcept>
#include <string>

namespace hduva {

struct argument_error : std::invalid_argument {
  explicit argument_error(const std::string& msg) : std::invalid_argument(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct state_error : std::runtime_error {
  explicit state_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a training step produces a non-finite loss; carries the name
// of the first offending objective term.
struct training_error : std::runtime_error {
  std::string term;
  training_error(const std::string& offending_term, const std::string& msg)
      : std::runtime_error(msg), term(offending_term) {}
};

}  // namespace hduva
