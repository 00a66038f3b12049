#pragma once

#include <algorithm>
#include <stdexcept>

namespace hsense {

/// Rank decisions are made against max(abs, rel * sigma_max(M)).
/// rel must be positive, abs non-negative.
struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-13;

  double threshold(double sigma_max) const {
    validate();
    return std::max(abs, rel * sigma_max);
  }

  void validate() const {
    if (!(rel > 0.0) || !(abs >= 0.0))
      throw std::invalid_argument("Tolerance: need rel > 0 and abs >= 0");
  }
};

}  // namespace hsense
