#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pidram {

inline double gammln(double xx) {
  static const double cof[6] = {76.18009172947146,    -86.50532032941677,
                                24.01409824083091,    -1.231739572450155,
                                0.1208650973866179e-2, -0.5395239384953e-5};
  double y = xx;
  double tmp = xx + 5.5;
  tmp -= (xx + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / xx);
}

namespace detail {

inline double gamma_p_series(double a, double x) {
  const int kItMax = 500;
  const double kEps = 3.0e-12;
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kItMax; ++n) {
    ++ap;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gammln(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const int kItMax = 500;
  const double kEps = 3.0e-12;
  const double kFpMin = 1.0e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kItMax; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - gammln(a)) * h;
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a, x).
inline double gammq(double a, double x) {
  if (x < 0.0 || a <= 0.0)
    throw std::invalid_argument("gammq: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

// Survival function of the chi-square distribution with dof degrees of
// freedom: P(X > stat).
inline double chi_square_p_value(double stat, uint32_t dof) {
  return gammq(dof / 2.0, stat / 2.0);
}

struct MonobitResult {
  uint64_t n = 0;
  uint64_t ones = 0;
  double fraction = 0.0;
};

inline MonobitResult monobit(const std::vector<uint8_t>& bits) {
  MonobitResult r;
  r.n = bits.size();
  for (uint8_t b : bits) r.ones += (b & 1);
  r.fraction = r.n ? static_cast<double>(r.ones) / r.n : 0.0;
  return r;
}

struct ChiSquare4Result {
  double statistic = 0.0;
  uint32_t dof = 15;
  double p_value = 1.0;
  uint64_t symbols = 0;
  std::array<uint64_t, 16> counts{};
};

// Goodness of fit of non-overlapping 4-bit symbols (LSB first) against
// the uniform distribution over 16 bins. An incomplete tail is dropped.
inline ChiSquare4Result chi_square_4bit(const std::vector<uint8_t>& bits) {
  ChiSquare4Result r;
  r.symbols = bits.size() / 4;
  for (uint64_t i = 0; i < r.symbols; ++i) {
    unsigned s = (bits[4 * i] & 1) | (bits[4 * i + 1] & 1) << 1 |
                 (bits[4 * i + 2] & 1) << 2 | (bits[4 * i + 3] & 1) << 3;
    ++r.counts[s];
  }
  if (r.symbols == 0) return r;
  double expected = r.symbols / 16.0;
  for (uint64_t c : r.counts) {
    double d = c - expected;
    r.statistic += d * d / expected;
  }
  r.p_value = chi_square_p_value(r.statistic, r.dof);
  return r;
}

inline std::vector<uint8_t> bits_to_bytes(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    out[i / 8] |= static_cast<uint8_t>((bits[i] & 1) << (i % 8));
  return out;
}

inline std::vector<uint8_t> word_to_bits(uint64_t v, uint32_t n_bits) {
  std::vector<uint8_t> out(n_bits);
  for (uint32_t i = 0; i < n_bits; ++i)
    out[i] = static_cast<uint8_t>((v >> i) & 1);
  return out;
}

}  // namespace pidram
