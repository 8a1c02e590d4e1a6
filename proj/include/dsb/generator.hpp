#ifndef DSB_GENERATOR_HPP
#define DSB_GENERATOR_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsb/graphs.hpp"
#include "dsb/ising.hpp"
#include "dsb/rng.hpp"

namespace dsb {

/// The Sidon-28 coupling set +-{8, 13, 19, 28} / 28.
inline constexpr std::array<double, 8> kSidon28 = {
    -28.0 / 28.0, -19.0 / 28.0, -13.0 / 28.0, -8.0 / 28.0,
    8.0 / 28.0,   13.0 / 28.0,  19.0 / 28.0,  28.0 / 28.0,
};

/// Draws every edge coupling uniformly from the Sidon-28 set; fields are zero.
/// Edge k uses counter position k of the (seed, couplings) stream.
inline IsingModel generate_sidon_instance(const Graph& graph, std::uint64_t seed,
                                          InstanceMetadata metadata = {}) {
  if (graph.n == 0) throw std::invalid_argument("graph has no vertices");
  std::vector<std::pair<std::size_t, std::size_t>> sorted;
  sorted.reserve(graph.edges.size());
  for (auto [u, v] : graph.edges) {
    if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    if (u >= graph.n || v >= graph.n) throw std::out_of_range("edge endpoint out of range");
    sorted.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(sorted.begin(), sorted.end());
  if (const auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw std::invalid_argument("duplicate edge (" + std::to_string(dup->first) + ", " +
                                std::to_string(dup->second) + ")");
  }

  CounterStream stream(seed, 0, Purpose::couplings);
  std::vector<Coupling> couplings;
  couplings.reserve(graph.edges.size());
  for (auto [u, v] : graph.edges) couplings.push_back({u, v, kSidon28[stream.below(8)]});

  if (!metadata.logical_size && graph.logical_size > 0) metadata.logical_size = graph.logical_size;
  return IsingModel(graph.n, std::move(couplings), {}, std::move(metadata));
}

}  // namespace dsb

#endif  // DSB_GENERATOR_HPP
