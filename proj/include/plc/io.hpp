#pragma once

#include <charconv>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "plc/errors.hpp"

namespace plc {

// ---------------------------------------------------------------- hashing

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// ----------------------------------------------------------- numeric text

// 17 significant digits round-trips any double exactly through text.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_f64(std::string_view s, std::string_view what) {
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("malformed number in " + std::string(what) + ": '" +
                    std::string(s) + "'");
  return v;
}

inline long long parse_i64(std::string_view s, std::string_view what) {
  long long v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("malformed integer in " + std::string(what) + ": '" +
                    std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("malformed integer in " + std::string(what) + ": '" +
                    std::string(s) + "'");
  return v;
}

// ------------------------------------------------------------ string utils

inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

template <typename Seq>
inline std::string join(const Seq& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += sep;
    out += p;
    first = false;
  }
  return out;
}

// Lines without their terminators; a trailing newline does not produce an
// extra empty line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = pos + 1;
  }
  return out;
}

// --------------------------------------------------------------- file I/O

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& p, std::string_view data) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("short write: " + p.string());
}

inline void append_file(const std::filesystem::path& p, std::string_view data) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot append to file: " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

// --------------------------------------------------- versioned file headers

// Every artifact begins with one line: "# plc-<kind> v<N>[ key=value ...]".
struct ArtifactHeader {
  std::string kind;
  int version = 1;
  std::map<std::string, std::string> attrs;

  std::string line() const {
    std::string s = "# plc-" + kind + " v" + std::to_string(version);
    for (const auto& [k, v] : attrs) s += " " + k + "=" + v;
    return s;
  }

  const std::string& attr(const std::string& key) const {
    auto it = attrs.find(key);
    if (it == attrs.end())
      throw DataError("plc-" + kind + " header missing attribute '" + key + "'");
    return it->second;
  }

  static ArtifactHeader parse(std::string_view first_line,
                              std::string_view expect_kind) {
    auto tokens = split_view(first_line, ' ');
    if (tokens.size() < 3 || tokens[0] != "#" ||
        tokens[1].substr(0, 4) != "plc-" || tokens[2].empty() ||
        tokens[2][0] != 'v')
      throw DataError("not a plc artifact header: '" + std::string(first_line) +
                      "'");
    ArtifactHeader h;
    h.kind = std::string(tokens[1].substr(4));
    if (h.kind != expect_kind)
      throw DataError("artifact kind mismatch: expected plc-" +
                      std::string(expect_kind) + ", found plc-" + h.kind);
    h.version = static_cast<int>(parse_i64(tokens[2].substr(1), "header version"));
    if (h.version != 1)
      throw DataError("unsupported plc-" + h.kind + " version " +
                      std::to_string(h.version));
    for (std::size_t i = 3; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string_view::npos)
        throw DataError("malformed header attribute: '" + std::string(tokens[i]) +
                        "'");
      h.attrs[std::string(tokens[i].substr(0, eq))] =
          std::string(tokens[i].substr(eq + 1));
    }
    return h;
  }
};

// Line iterator that tracks byte offsets, so load errors can say where.
struct LineReader {
  std::string_view text;
  std::size_t pos = 0;

  bool next(std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  }

  std::size_t offset() const { return pos; }
};

// ---------------------------------------------------------------- numerics

// Fixed-order pairwise summation: deterministic and more accurate than a
// naive left fold.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 32) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

}  // namespace plc
