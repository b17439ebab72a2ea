#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gifair {

// Invalid arguments (bad shapes, out-of-range hyperparameters) surface as
// std::invalid_argument. The two categories below carry extra meaning for
// the harness exit-code mapping.

/// A training iterate became non-finite or left the divergence ball.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t round, std::size_t step,
                  std::size_t client)
      : std::runtime_error(what), round_(round), step_(step), client_(client) {}

  std::size_t round() const noexcept { return round_; }
  std::size_t step() const noexcept { return step_; }
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t round_;
  std::size_t step_;
  std::size_t client_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gifair
