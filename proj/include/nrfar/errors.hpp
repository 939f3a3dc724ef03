#ifndef NRFAR_ERRORS_HPP
#define NRFAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nrfar {

// Invalid parameter or configuration file. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/ill-formed input data. CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nrfar

#endif
