#ifndef DSB_INSTANCE_IO_HPP
#define DSB_INSTANCE_IO_HPP

// Triplet text format for Ising instances.
//
//   # name=<text>        optional metadata header lines ("# key=value")
//   # n=<spins>          spin count; inferred as max index + 1 when absent
//   # L=<side>
//   # E0=<energy>
//   u v value            u == v: field h_u;  u != v: coupling J_uv
//
// Other '#' lines are comments. Values are written in shortest round-trip
// form, so save -> load reproduces every coupling and field bit-exactly.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "dsb/ising.hpp"

namespace dsb {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message, const std::string& source = {})
      : std::runtime_error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) +
                           ": " + message),
        line_(line), message_(message) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

struct LoadOptions {
  bool one_based = false;  // indices in the file start at 1
};

/// Shortest decimal string that parses back to exactly `value`.
inline std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view token) {
  if (token.size() > 1 && token.front() == '+') token.remove_prefix(1);
  T value{};
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    auto stop = line.find_first_of(" \t\r", start);
    if (stop == std::string_view::npos) stop = line.size();
    out.push_back(line.substr(start, stop - start));
    pos = stop;
  }
  return out;
}

}  // namespace detail

inline IsingModel parse_instance(std::istream& in, LoadOptions options = {}) {
  InstanceMetadata meta;
  std::optional<std::size_t> declared_n;
  struct Entry {
    std::size_t u, v;
    double value;
    std::size_t line;
  };
  std::vector<Entry> entries;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = detail::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = detail::trim(body.substr(0, eq));
      const auto value = detail::trim(body.substr(eq + 1));
      if (key == "name") {
        meta.name = std::string(value);
      } else if (key == "n") {
        declared_n = detail::parse_number<std::size_t>(value);
        if (!declared_n || *declared_n == 0) throw ParseError(line_no, "bad spin count");
      } else if (key == "L") {
        meta.logical_size = detail::parse_number<int>(value);
        if (!meta.logical_size) throw ParseError(line_no, "bad L value");
      } else if (key == "E0") {
        meta.ground_energy = detail::parse_number<double>(value);
        if (!meta.ground_energy) throw ParseError(line_no, "bad E0 value");
      }
      continue;
    }
    const auto tokens = detail::split_ws(line);
    if (tokens.size() != 3) throw ParseError(line_no, "expected 'u v value'");
    auto u = detail::parse_number<std::size_t>(tokens[0]);
    auto v = detail::parse_number<std::size_t>(tokens[1]);
    const auto value = detail::parse_number<double>(tokens[2]);
    if (!u || !v) throw ParseError(line_no, "indices must be non-negative integers");
    if (!value) throw ParseError(line_no, "cannot parse value '" + std::string(tokens[2]) + "'");
    if (options.one_based) {
      if (*u == 0 || *v == 0) throw ParseError(line_no, "index 0 in a 1-based file");
      --*u;
      --*v;
    }
    entries.push_back({*u, *v, *value, line_no});
  }

  std::size_t n = declared_n.value_or(0);
  if (!declared_n) {
    for (const auto& e : entries) n = std::max({n, e.u + 1, e.v + 1});
  }
  if (n == 0) throw ParseError(line_no, "instance has no spins");

  std::vector<double> fields(n, 0.0);
  std::vector<bool> field_set(n, false);
  std::vector<Coupling> couplings;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> pairs;
  for (const auto& e : entries) {
    if (e.u >= n || e.v >= n) {
      throw ParseError(e.line, "index out of range for n = " + std::to_string(n));
    }
    if (e.u == e.v) {
      if (field_set[e.u]) throw ParseError(e.line, "duplicate field for spin " + std::to_string(e.u));
      field_set[e.u] = true;
      fields[e.u] = e.value;
    } else {
      couplings.push_back({e.u, e.v, e.value});
      pairs.push_back({{std::min(e.u, e.v), std::max(e.u, e.v)}, e.line});
    }
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    if (pairs[k].first == pairs[k - 1].first) {
      const auto later = std::max(pairs[k].second, pairs[k - 1].second);
      throw ParseError(later, "duplicate coupling (" + std::to_string(pairs[k].first.first) +
                                  ", " + std::to_string(pairs[k].first.second) + ")");
    }
  }
  return IsingModel(n, std::move(couplings), std::move(fields), std::move(meta));
}

inline IsingModel load_instance(const std::string& path, LoadOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  try {
    return parse_instance(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path);
  }
}

inline void write_instance(const IsingModel& model, std::ostream& out) {
  const auto& meta = model.metadata();
  if (meta.name) out << "# name=" << *meta.name << '\n';
  out << "# n=" << model.size() << '\n';
  if (meta.logical_size) out << "# L=" << *meta.logical_size << '\n';
  if (meta.ground_energy) out << "# E0=" << format_real(*meta.ground_energy) << '\n';
  const auto h = model.fields();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0.0) out << i << ' ' << i << ' ' << format_real(h[i]) << '\n';
  for (const auto& c : model.couplings())
    out << c.i << ' ' << c.j << ' ' << format_real(c.value) << '\n';
}

inline void save_instance(const IsingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path);
  write_instance(model, out);
  if (!out) throw std::runtime_error("error while writing " + path);
}

}  // namespace dsb

#endif  // DSB_INSTANCE_IO_HPP
