#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <type_traits>

namespace hqe {

using Rational = mpq_class;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

/// Parses "p", "p/q" or a finite decimal such as "1.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when q = 1).
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

template <class T>
T from_int(long v) {
  if constexpr (is_exact_v<T>) {
    return Rational(v);
  } else {
    return static_cast<T>(v);
  }
}

}  // namespace hqe
