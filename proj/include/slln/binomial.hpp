#pragma once

#include <cstdint>

namespace slln {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Exact two-sided Clopper-Pearson interval for `hits` successes in `trials`
/// at confidence 1 - alpha. hits = 0 gives low = 0, hits = trials gives high = 1.
Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double alpha = 0.05);

}  // namespace slln
