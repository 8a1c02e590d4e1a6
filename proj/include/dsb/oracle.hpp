#ifndef DSB_ORACLE_HPP
#define DSB_ORACLE_HPP

// Exhaustive ground-state search for small models.
//
// Configurations are ranked lexicographically with -1 < +1, spin 0 most
// significant, which is the numeric order of the code x with bit (n-1-i) set
// iff s_i = +1. The space is cut into a fixed number of blocks (a function of
// n only) by the leading spins; each block is walked in Gray-code order with
// O(degree) incremental energy updates. Blocks may be spread over threads;
// since the block decomposition does not depend on the thread count, neither
// does the result.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dsb/ising.hpp"

namespace dsb {

inline constexpr std::size_t kOracleMaxSpins = 30;

struct GroundState {
  double energy = 0.0;
  SpinConfig spins;
};

namespace detail {

struct BlockBest {
  double energy = std::numeric_limits<double>::infinity();
  std::uint64_t code = 0;
};

inline SpinConfig spins_from_code(std::uint64_t code, std::size_t n) {
  SpinConfig s(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if ((code >> (n - 1 - i)) & 1u) s.set(i, 1);
  return s;
}

inline BlockBest search_block(const IsingModel& model, std::size_t free_bits,
                              std::uint64_t prefix, double tie_tolerance) {
  const std::size_t n = model.size();
  const auto csr = model.adjacency();
  const auto h = model.fields();
  const std::uint64_t base = prefix << free_bits;
  SpinConfig s = spins_from_code(base, n);

  // local[i] = sum_j J_ij s_j + h_i;  flipping s_i changes H by 2 s_i local[i].
  std::vector<double> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = h[i];
    for (std::size_t k = csr.row_offsets[i]; k < csr.row_offsets[i + 1]; ++k)
      acc += csr.weights[k] * s[csr.columns[k]];
    local[i] = acc;
  }

  double e = energy(model, s);
  BlockBest best{e, base};
  std::uint64_t code = base;
  const std::uint64_t count = std::uint64_t{1} << free_bits;
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(g));
    const std::size_t i = n - 1 - bit;
    const int old = s[i];
    e += 2.0 * old * local[i];
    s.flip(i);
    code ^= std::uint64_t{1} << bit;
    for (std::size_t k = csr.row_offsets[i]; k < csr.row_offsets[i + 1]; ++k)
      local[csr.columns[k]] -= 2.0 * old * csr.weights[k];
    if (e < best.energy - tie_tolerance) {
      best = {e, code};
    } else if (e <= best.energy + tie_tolerance && code < best.code) {
      best = {std::min(e, best.energy), code};
    }
  }
  return best;
}

}  // namespace detail

/// Exact minimum of H over all 2^n configurations, with the lexicographically
/// smallest minimiser. Energies closer than ~1e-12 of the coupling scale are
/// treated as ties; the returned energy is recomputed from scratch.
inline GroundState brute_force_ground_state(const IsingModel& model, unsigned workers = 1) {
  const std::size_t n = model.size();
  if (n > kOracleMaxSpins) {
    throw std::domain_error("exhaustive search refused: n = " + std::to_string(n) +
                            " exceeds the cap of " + std::to_string(kOracleMaxSpins) +
                            " spins (2^n configurations)");
  }
  double scale = 0.0;
  for (const auto& c : model.couplings()) scale += std::abs(c.value);
  for (const double h : model.fields()) scale += std::abs(h);
  const double tolerance = 1e-12 * std::max(scale, 1.0);

  const std::size_t prefix_bits = n > 12 ? std::min<std::size_t>(8, n - 12) : 0;
  const std::size_t free_bits = n - prefix_bits;
  const std::size_t blocks = std::size_t{1} << prefix_bits;
  std::vector<detail::BlockBest> results(blocks);

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  auto run = [&](unsigned w) {
    for (std::size_t b = w; b < blocks; b += workers)
      results[b] = detail::search_block(model, free_bits, b, tolerance);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Blocks are in ascending code order, so a strict improvement test keeps the
  // smallest code among ties.
  detail::BlockBest best = results.front();
  for (std::size_t b = 1; b < blocks; ++b)
    if (results[b].energy < best.energy - tolerance) best = results[b];

  GroundState out{0.0, detail::spins_from_code(best.code, n)};
  out.energy = energy(model, out.spins);
  return out;
}

}  // namespace dsb

#endif  // DSB_ORACLE_HPP
