#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazepair/rng.hpp"

namespace gazepair {

/// Key sequence cue: an ordered run of distinct digits, spoken by the host
/// over the out-of-band channel. Never serialized onto in-band transport.
struct Ksc {
  std::vector<std::uint8_t> digits;

  std::string to_string() const {
    std::string s;
    s.reserve(digits.size());
    for (auto d : digits) s += static_cast<char>('0' + d);
    return s;
  }

  static Ksc from_string(const std::string& s) {
    Ksc k;
    for (char c : s) {
      if (c < '0' || c > '9') throw std::invalid_argument("ksc: non-digit character");
      k.digits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    k.validate();
    return k;
  }

  void validate(int digit_pool = 10) const {
    if (digits.empty() || static_cast<int>(digits.size()) > digit_pool)
      throw std::invalid_argument("ksc: length must be in [1, pool size]");
    std::uint16_t seen = 0;
    for (auto d : digits) {
      if (d >= digit_pool) throw std::invalid_argument("ksc: digit outside pool");
      const std::uint16_t bit = static_cast<std::uint16_t>(1u << d);
      if (seen & bit) throw std::invalid_argument("ksc: repeated digit");
      seen |= bit;
    }
  }

  friend bool operator==(const Ksc&, const Ksc&) = default;
};

/// Uniform draw over the pool!/(pool-length)! ordered non-repeating sequences.
inline Ksc generate_ksc(int length, Rng& rng, int digit_pool = 10) {
  if (digit_pool < 1 || digit_pool > 10)
    throw std::invalid_argument("ksc: digit pool must be in [1, 10]");
  if (length < 1 || length > digit_pool)
    throw std::invalid_argument("ksc: length must be in [1, pool size]; digits cannot repeat");
  std::vector<std::uint8_t> pool(static_cast<std::size_t>(digit_pool));
  std::iota(pool.begin(), pool.end(), static_cast<std::uint8_t>(0));
  Ksc k;
  k.digits.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) + rng.uniform_below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    k.digits.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return k;
}

/// The spoken cue as it travels the out-of-band channel.
struct OobUtterance {
  Ksc ksc;
  std::uint32_t speaker = 0;
};

}  // namespace gazepair
