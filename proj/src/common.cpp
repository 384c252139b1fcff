#include "courtgrid/common.hpp"

#include <charconv>
#include <cstdio>

namespace courtgrid {

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

std::string GridShape::str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

GridShape GridShape::parse(std::string_view text) {
  const auto x = text.find('x');
  GridShape g;
  if (x == std::string_view::npos) {
    fail(ErrorKind::parse, "bad grid shape '" + std::string(text) + "', expected RxC");
  }
  auto parse_int = [&](std::string_view part, int& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size() || out <= 0) {
      fail(ErrorKind::parse, "bad grid shape '" + std::string(text) + "'");
    }
  };
  parse_int(text.substr(0, x), g.rows);
  parse_int(text.substr(x + 1), g.cols);
  return g;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace courtgrid
