#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ccpower {

class InvalidGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateChannel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPower : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation outside the region where a Bernstein constraint is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class CenteringFailure : public std::runtime_error {
 public:
  CenteringFailure(const std::string& what, Eigen::VectorXd best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }

 private:
  Eigen::VectorXd best_;
};

class DegeneratePolytope : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtectedRow : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message)
      : std::runtime_error(format(key, line, message)), key_(key), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string out = "config error";
    if (!key.empty()) out += " at key '" + key + "'";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }
  std::string key_;
  int line_;
};

class StaleSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccpower
