#include "slln/binomial.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <stdexcept>

namespace slln {

Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double alpha) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson needs trials > 0");
  if (hits > trials) throw std::invalid_argument("hits exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const auto k = static_cast<double>(hits);
  const auto n = static_cast<double>(trials);
  Interval out;
  out.low = hits == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  out.high = hits == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return out;
}

}  // namespace slln
