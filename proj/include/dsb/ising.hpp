#ifndef DSB_ISING_HPP
#define DSB_ISING_HPP

// Ising model representation and QUBO conversion.
//
// Energy convention:  H(s) = - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i,  s_i in {-1, +1}.
// Couplings are stored once per unordered pair (i < j); the adjacency is also
// kept in CSR form with both directions for the solver's matrix-vector product.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsb {

using Spin = std::int8_t;

/// A configuration of +-1 spins.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::size_t n, Spin value = -1) : spins_(n, value) { check_value(value); }
  explicit SpinConfig(std::vector<Spin> spins) : spins_(std::move(spins)) {
    for (const Spin s : spins_) check_value(s);
  }
  SpinConfig(std::initializer_list<int> spins) {
    spins_.reserve(spins.size());
    for (const int s : spins) {
      check_value(s);
      spins_.push_back(static_cast<Spin>(s));
    }
  }

  std::size_t size() const noexcept { return spins_.size(); }
  Spin operator[](std::size_t i) const noexcept { return spins_[i]; }
  void set(std::size_t i, Spin value) {
    check_value(value);
    spins_[i] = value;
  }
  void flip(std::size_t i) noexcept { spins_[i] = static_cast<Spin>(-spins_[i]); }
  std::span<const Spin> values() const noexcept { return spins_; }

  SpinConfig flipped() const {
    SpinConfig out = *this;
    for (auto& s : out.spins_) s = static_cast<Spin>(-s);
    return out;
  }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  static void check_value(int s) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be -1 or +1");
  }
  std::vector<Spin> spins_;
};

struct Coupling {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct InstanceMetadata {
  std::optional<std::string> name;
  std::optional<int> logical_size;     // L of the generating graph family
  std::optional<double> ground_energy;  // E0, certified or reference

  friend bool operator==(const InstanceMetadata&, const InstanceMetadata&) = default;
};

/// Read-only view of the symmetric adjacency in CSR layout.
struct CsrView {
  std::span<const std::size_t> row_offsets;  // size n + 1
  std::span<const std::uint32_t> columns;
  std::span<const double> weights;
};

class IsingModel {
 public:
  IsingModel(std::size_t n, std::vector<Coupling> couplings, std::vector<double> fields = {},
             InstanceMetadata metadata = {})
      : n_(n), couplings_(std::move(couplings)), fields_(std::move(fields)),
        metadata_(std::move(metadata)) {
    if (n_ == 0) throw std::invalid_argument("Ising model needs at least one spin");
    if (n_ > std::size_t{UINT32_MAX}) throw std::invalid_argument("too many spins");
    if (fields_.empty()) fields_.assign(n_, 0.0);
    if (fields_.size() != n_) {
      throw std::invalid_argument("field vector length " + std::to_string(fields_.size()) +
                                  " does not match n = " + std::to_string(n_));
    }
    for (auto& c : couplings_) {
      if (c.i >= n_ || c.j >= n_) {
        throw std::out_of_range("coupling (" + std::to_string(c.i) + ", " + std::to_string(c.j) +
                                ") out of range for n = " + std::to_string(n_));
      }
      if (c.i == c.j) {
        throw std::invalid_argument("self-coupling at " + std::to_string(c.i) +
                                    "; diagonal terms belong in the fields");
      }
      if (c.i > c.j) std::swap(c.i, c.j);
    }
    std::sort(couplings_.begin(), couplings_.end(), [](const Coupling& a, const Coupling& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < couplings_.size(); ++k) {
      if (couplings_[k].i == couplings_[k - 1].i && couplings_[k].j == couplings_[k - 1].j) {
        throw std::invalid_argument("duplicate coupling (" + std::to_string(couplings_[k].i) +
                                    ", " + std::to_string(couplings_[k].j) + ")");
      }
    }
    build_csr();
  }

  std::size_t size() const noexcept { return n_; }
  std::span<const Coupling> couplings() const noexcept { return couplings_; }
  std::span<const double> fields() const noexcept { return fields_; }
  const InstanceMetadata& metadata() const noexcept { return metadata_; }

  CsrView adjacency() const noexcept { return {offsets_, columns_, weights_}; }

  /// J_ij for any ordered pair; zero when absent.
  double coupling(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("coupling index out of range");
    const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
    if (it == end || *it != j) return 0.0;
    return weights_[static_cast<std::size_t>(it - columns_.begin())];
  }

  std::size_t max_degree() const noexcept {
    std::size_t d = 0;
    for (std::size_t i = 0; i < n_; ++i) d = std::max(d, offsets_[i + 1] - offsets_[i]);
    return d;
  }

  IsingModel with_metadata(InstanceMetadata metadata) const {
    IsingModel copy = *this;
    copy.metadata_ = std::move(metadata);
    return copy;
  }

 private:
  void build_csr() {
    std::vector<std::size_t> degree(n_, 0);
    for (const auto& c : couplings_) {
      ++degree[c.i];
      ++degree[c.j];
    }
    offsets_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
    columns_.resize(offsets_[n_]);
    weights_.resize(offsets_[n_]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    // couplings_ is sorted by (i, j), so filling both directions in this order
    // leaves every row sorted by column.
    for (const auto& c : couplings_) {
      columns_[cursor[c.j]] = static_cast<std::uint32_t>(c.i);
      weights_[cursor[c.j]++] = c.value;
    }
    for (const auto& c : couplings_) {
      columns_[cursor[c.i]] = static_cast<std::uint32_t>(c.j);
      weights_[cursor[c.i]++] = c.value;
    }
  }

  std::size_t n_;
  std::vector<Coupling> couplings_;
  std::vector<double> fields_;
  InstanceMetadata metadata_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> weights_;
};

inline double energy(const IsingModel& model, const SpinConfig& s) {
  if (s.size() != model.size()) {
    throw std::invalid_argument("spin configuration has length " + std::to_string(s.size()) +
                                ", model has n = " + std::to_string(model.size()));
  }
  double pair_sum = 0.0;
  for (const auto& c : model.couplings()) pair_sum += c.value * s[c.i] * s[c.j];
  double field_sum = 0.0;
  const auto h = model.fields();
  for (std::size_t i = 0; i < h.size(); ++i) field_sum += h[i] * s[i];
  return -pair_sum - field_sum;
}

struct QuboTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;
};

/// Upper-triangular QUBO, objective sum_{i<=j} Q_ij x_i x_j over x in {0,1}^n.
struct QuboProblem {
  std::size_t n = 0;
  std::vector<QuboTerm> terms;

  double objective(std::span<const std::uint8_t> x) const {
    if (x.size() != n) throw std::invalid_argument("assignment length does not match QUBO size");
    double total = 0.0;
    for (const auto& t : terms) total += t.value * x[t.i] * x[t.j];
    return total;
  }
};

struct IsingConversion {
  IsingModel model;
  double offset = 0.0;
};

/// Maps x_i = (s_i + 1) / 2 so that qubo.objective(x) == energy(model, s) + offset.
inline IsingConversion qubo_to_ising(const QuboProblem& qubo) {
  if (qubo.n == 0) throw std::invalid_argument("QUBO needs at least one variable");
  std::vector<double> h(qubo.n, 0.0);
  std::vector<Coupling> couplings;
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  seen.reserve(qubo.terms.size());
  double offset = 0.0;
  for (const auto& t : qubo.terms) {
    if (t.i >= qubo.n || t.j >= qubo.n) throw std::out_of_range("QUBO index out of range");
    if (t.i > t.j) throw std::invalid_argument("QUBO terms must be upper triangular (i <= j)");
    seen.emplace_back(t.i, t.j);
    if (t.i == t.j) {
      h[t.i] -= t.value / 2.0;
      offset += t.value / 2.0;
    } else {
      const double quarter = t.value / 4.0;
      if (quarter != 0.0) couplings.push_back({t.i, t.j, -quarter});
      h[t.i] -= quarter;
      h[t.j] -= quarter;
      offset += quarter;
    }
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("duplicate QUBO term");
  }
  return {IsingModel(qubo.n, std::move(couplings), std::move(h)), offset};
}

}  // namespace dsb

#endif  // DSB_ISING_HPP
