#ifndef DSB_GRAPHS_HPP
#define DSB_GRAPHS_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsb {

struct Graph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  int logical_size = 0;  // L for families parameterised by a side length, 0 otherwise
};

inline Graph complete_graph(std::size_t n) {
  Graph g{n, {}, 0};
  g.edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

/// King's graph on an L x L grid: each site couples to its (up to) 8 neighbours.
/// Site (r, c) has index r * L + c.
/// rows x cols lattice with 8-neighbour connectivity; vertex r * cols + c.
inline Graph kings_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("king's graph sides must be positive");
  Graph g{rows * cols, {}, rows == cols ? static_cast<int>(rows) : 0};
  const auto idx = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) g.edges.emplace_back(idx(r, c), idx(r, c + 1));
      if (r + 1 < rows) {
        g.edges.emplace_back(idx(r, c), idx(r + 1, c));
        if (c + 1 < cols) g.edges.emplace_back(idx(r, c), idx(r + 1, c + 1));
        if (c > 0) g.edges.emplace_back(idx(r, c), idx(r + 1, c - 1));
      }
    }
  }
  return g;
}

inline Graph kings_graph(std::size_t side) { return kings_graph(side, side); }

/// Reads "u v" pairs, one per line; '#' starts a comment line and "# n=<count>"
/// fixes the vertex count (otherwise max index + 1).
inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path);
  Graph g;
  std::size_t declared = 0;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("n=");
      if (pos != std::string::npos) declared = std::stoul(line.substr(pos + 2));
      continue;
    }
    std::istringstream fields(line);
    long long u = -1;
    long long v = -1;
    if (!(fields >> u >> v) || u < 0 || v < 0) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'u v'");
    }
    g.edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    max_index = std::max({max_index, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  }
  g.n = declared != 0 ? declared : (g.edges.empty() ? 0 : max_index + 1);
  return g;
}

}  // namespace dsb

#endif  // DSB_GRAPHS_HPP
