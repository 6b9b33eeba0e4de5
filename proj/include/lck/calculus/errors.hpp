#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lck {

// A numerical breakdown (singular solve, non-convergent iteration) at a
// specific point. `where` holds the offending coordinates when known.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<double> where = {})
      : std::runtime_error(what), where_(std::move(where)) {}
  const std::vector<double>& where() const { return where_; }

 private:
  std::vector<double> where_;
};

}  // namespace lck
