#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "probe/errors.hpp"

namespace probe::detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Calls fn(line) for each LF-terminated line with a trailing CR removed. A
// final line without LF is still reported.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line);
    pos = nl + 1;
  }
}

// Splits on TAB into at most N fields; returns the true field count (which
// may exceed N, in which case only the first N are stored).
template <std::size_t N>
std::size_t split_tabs(std::string_view line, std::string_view (&out)[N]) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    const auto field = line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos);
    if (count < N) out[count] = field;
    ++count;
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return count;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

}  // namespace probe::detail
