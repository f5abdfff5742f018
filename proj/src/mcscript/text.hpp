#pragma once

#include <array>
#include <charconv>
#include <string>
#include <vector>

namespace mocsim::mcscript::detail {

inline std::string number_text(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <typename T>
std::string list_text(const std::vector<T>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += number_text(static_cast<double>(values[i]));
  }
  return out + "]";
}

}  // namespace mocsim::mcscript::detail
