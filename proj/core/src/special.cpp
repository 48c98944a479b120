#include "zigzag/special.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace zigzag {

double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial needs n >= 0");
  static const std::vector<double> table = [] {
    std::vector<double> t(4096);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (static_cast<std::size_t>(n) < table.size())
    return table[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

Complex laguerre(int r, int l, Complex x) {
  if (r < 0 || l < 0) throw std::invalid_argument("laguerre needs r, l >= 0");
  Complex prev(1.0, 0.0);
  if (r == 0) return prev;
  Complex cur = Complex(1.0 + l, 0.0) - x;
  for (int c = 1; c < r; ++c) {
    const Complex next =
        ((Complex(2.0 * c + 1.0 + l, 0.0) - x) * cur - Complex(c + l, 0.0) * prev) /
        Complex(c + 1.0, 0.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace zigzag
