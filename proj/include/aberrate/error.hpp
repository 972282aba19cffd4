#pragma once

#include <stdexcept>
#include <string>

namespace aberrate {

// Domain error with a short machine-readable kind ("range", "degenerate_kernel", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace aberrate
