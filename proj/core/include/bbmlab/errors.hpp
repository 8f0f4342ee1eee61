#pragma once

#include <stdexcept>
#include <string>

namespace bbmlab {

// Error taxonomy mirrored by the CLI exit codes:
//   domain_error    -> bad input / precondition violation   (exit 2)
//   io_error        -> filesystem trouble                   (exit 3)
//   numerical_error -> a numerical guard tripped mid-run    (exit 4)

class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bbmlab
