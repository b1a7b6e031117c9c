#include "pinn/bigfloat.hpp"

#include <cstdio>
#include <vector>

namespace pinn {

std::string BigFloat::to_string(int digits) const {
  if (digits < 1) digits = 1;
  std::vector<char> buf(static_cast<std::size_t>(digits) + 32);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
  return std::string(buf.data());
}

}  // namespace pinn
