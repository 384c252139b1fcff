#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace courtgrid {

/// Broad failure categories. The C API maps each one to a status code.
enum class ErrorKind { invalid_argument, parse, io, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_argument, what);
}

/// Position in feet. Court coordinates: x across the width, y from the baseline.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// A rectangular grid, rows x cols.
struct GridShape {
  int rows = 0;
  int cols = 0;

  int cells() const noexcept { return rows * cols; }
  std::string str() const;
  /// Parses "8x10".
  static GridShape parse(std::string_view text);

  friend auto operator<=>(const GridShape&, const GridShape&) = default;
};

/// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// 64-bit FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace courtgrid
