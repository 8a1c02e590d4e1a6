#ifndef DSB_SBM_HPP
#define DSB_SBM_HPP

// Discretized simulated bifurcation (dSB) with ternary discretization.
//
// Per replica, with positions q, momenta p, time step dt and T = N_s * dt:
//
//   p_i <- p_i + dt * ( -[a0 - a(t)] q_i + c0 * ( sum_j J_ij f(q_j) + h_i ) )
//   q_i <- q_i + dt * a0 * p_i
//   |q_i| > 1  =>  q_i <- sign(q_i), p_i <- 0          (inelastic wall)
//
// where a(t) = a0 t / T, f is the ternary sign with dead zone
// Delta(t) = slope * t / T, and t = step_index * dt is the start of the step.
// The readout is s_i = sign(q_i) with sign(0) = +1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dsb/ising.hpp"
#include "dsb/rng.hpp"

namespace dsb {

enum class SigmaMode {
  all_off_diagonal,  // every J_ij with i != j of the dense matrix, zeros included
  nonzero_only,      // stored nonzero couplings only
};

struct SbmParams {
  double a0 = 1.0;
  std::optional<double> c0_override;
  double dt_min = 0.25;
  double dt_max = 1.5;
  std::size_t n_steps = 1000;
  std::size_t n_replicas = 32;
  std::uint64_t seed = 0;
  std::size_t n_workers = 1;
  double ternary_slope = 0.7;
  SigmaMode sigma_mode = SigmaMode::all_off_diagonal;
  bool track_best = false;  // keep the best readout seen along the trajectory

  void validate() const {
    if (!(std::isfinite(a0) && a0 > 0.0)) throw std::invalid_argument("a0 must be positive");
    if (c0_override && !std::isfinite(*c0_override)) throw std::invalid_argument("c0 must be finite");
    if (!(std::isfinite(dt_min) && std::isfinite(dt_max) && dt_min > 0.0 && dt_min <= dt_max)) {
      throw std::invalid_argument("time step range needs 0 < dt_min <= dt_max");
    }
    if (n_steps == 0) throw std::invalid_argument("n_steps must be at least 1");
    if (n_replicas == 0) throw std::invalid_argument("n_replicas must be at least 1");
    if (n_workers == 0) throw std::invalid_argument("n_workers must be at least 1");
    if (!(std::isfinite(ternary_slope) && ternary_slope >= 0.0)) {
      throw std::invalid_argument("ternary slope must be non-negative");
    }
  }
};

inline constexpr double kC0Scale = 0.7;

/// Population standard deviation of the off-diagonal entries of the dense J.
inline double coupling_sigma(const IsingModel& model, SigmaMode mode) {
  const double n = static_cast<double>(model.size());
  double stored = 0.0;
  double sum = 0.0;
  for (const auto& c : model.couplings()) {
    if (mode == SigmaMode::nonzero_only && c.value == 0.0) continue;
    stored += 2.0;
    sum += 2.0 * c.value;
  }
  const double count = mode == SigmaMode::all_off_diagonal ? n * (n - 1.0) : stored;
  if (count <= 0.0) return 0.0;
  const double mean = sum / count;
  double ss = (count - stored) * mean * mean;  // implicit zeros
  for (const auto& c : model.couplings()) {
    if (mode == SigmaMode::nonzero_only && c.value == 0.0) continue;
    ss += 2.0 * (c.value - mean) * (c.value - mean);
  }
  return std::sqrt(ss / count);
}

/// c0 = 0.7 a0 / (sigma sqrt(N)) unless overridden.
inline double resolve_c0(const IsingModel& model, const SbmParams& params) {
  if (params.c0_override) {
    if (!std::isfinite(*params.c0_override)) throw std::invalid_argument("c0 must be finite");
    return *params.c0_override;
  }
  if (model.size() < 2) {
    throw std::invalid_argument("c0 cannot be derived for a single spin; supply it explicitly");
  }
  const double sigma = coupling_sigma(model, params.sigma_mode);
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        "coupling standard deviation is zero; supply c0 explicitly");
  }
  return kC0Scale * params.a0 / (sigma * std::sqrt(static_cast<double>(model.size())));
}

/// 0 inside the closed dead zone |x| <= threshold, sign(x) outside.
inline int ternary_sign(double x, double threshold) noexcept {
  return static_cast<int>(x > threshold) - static_cast<int>(x < -threshold);
}

struct Schedule {
  double drive;      // a(t)
  double threshold;  // Delta(t)
};

/// Both ramps depend only on t / T = step_index / N_s, so dt cancels.
inline Schedule schedule_at(const SbmParams& params, std::size_t step_index) noexcept {
  const double frac = static_cast<double>(step_index) / static_cast<double>(params.n_steps);
  return {params.a0 * frac, params.ternary_slope * frac};
}

struct ReplicaState {
  std::vector<double> q;
  std::vector<double> p;
  double dt = 0.0;
  std::size_t step_index = 0;
  std::size_t replica_id = 0;
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t replica, std::size_t step)
      : std::runtime_error("non-finite state in replica " + std::to_string(replica) +
                           " at step " + std::to_string(step) +
                           "; check c0 and the time step range"),
        replica_(replica), step_(step) {}
  std::size_t replica() const noexcept { return replica_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t replica_;
  std::size_t step_;
};

/// Initial q uniform in [-0.1, 0.1], p = 0, dt uniform in the configured range.
inline ReplicaState init_replica(const IsingModel& model, const SbmParams& params,
                                 std::size_t replica_id) {
  ReplicaState state;
  state.replica_id = replica_id;
  state.q.resize(model.size());
  state.p.assign(model.size(), 0.0);
  CounterStream positions(params.seed, replica_id, Purpose::initial_positions);
  for (auto& qi : state.q) qi = positions.uniform(-0.1, 0.1);
  CounterStream step(params.seed, replica_id, Purpose::time_step);
  state.dt = step.uniform(params.dt_min, params.dt_max);
  return state;
}

/// One symplectic Euler step in place. `discretized` is scratch of length n.
inline void step_in_place(const IsingModel& model, ReplicaState& state, const SbmParams& params,
                          double c0, std::vector<double>& discretized) {
  const std::size_t n = model.size();
  if (state.step_index >= params.n_steps) {
    throw std::logic_error("replica already completed its " + std::to_string(params.n_steps) +
                           " steps");
  }
  if (state.q.size() != n || state.p.size() != n) {
    throw std::invalid_argument("replica state does not match the model size");
  }
  const auto [drive, threshold] = schedule_at(params, state.step_index);
  const double dt = state.dt;
  const double detuning = params.a0 - drive;
  const double q_rate = dt * params.a0;

  discretized.resize(n);
  const double* q = state.q.data();
  for (std::size_t j = 0; j < n; ++j) discretized[j] = ternary_sign(q[j], threshold);

  const auto csr = model.adjacency();
  const auto h = model.fields();
  const std::size_t* offsets = csr.row_offsets.data();
  const std::uint32_t* cols = csr.columns.data();
  const double* w = csr.weights.data();
  const double* f = discretized.data();
  double* qm = state.q.data();
  double* pm = state.p.data();
  // Any NaN or infinity propagates into this sum, so one check per step suffices.
  double probe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = h[i];
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += w[k] * f[cols[k]];
    pm[i] += dt * (-detuning * qm[i] + c0 * acc);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double moved = qm[i] + q_rate * pm[i];
    const bool hit = std::abs(moved) > 1.0;
    qm[i] = hit ? (moved > 0.0 ? 1.0 : -1.0) : moved;
    pm[i] = hit ? 0.0 : pm[i];
    probe += moved + pm[i];
  }
  if (!std::isfinite(probe)) throw NumericalError(state.replica_id, state.step_index);
  ++state.step_index;
}

inline ReplicaState sbm_step(const IsingModel& model, ReplicaState state, const SbmParams& params,
                             double c0) {
  std::vector<double> scratch;
  step_in_place(model, state, params, c0, scratch);
  return state;
}

inline SpinConfig readout(std::span<const double> q) {
  SpinConfig s(q.size(), 1);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] < 0.0) s.set(i, -1);
  return s;
}

struct ReplicaResult {
  double energy = 0.0;
  SpinConfig spins;
};

struct NoObserver {
  void operator()(const ReplicaState&, const Schedule&) const noexcept {}
};

/// Runs one full trajectory. The observer sees the state after every step
/// together with the schedule that step used.
template <class Observer = NoObserver>
ReplicaResult run_replica(const IsingModel& model, const SbmParams& params, double c0,
                          std::size_t replica_id, Observer&& observer = {}) {
  ReplicaState state = init_replica(model, params, replica_id);
  std::vector<double> scratch(model.size());
  std::optional<ReplicaResult> best;
  while (state.step_index < params.n_steps) {
    const Schedule used = schedule_at(params, state.step_index);
    step_in_place(model, state, params, c0, scratch);
    observer(std::as_const(state), used);
    if (params.track_best) {
      SpinConfig s = readout(state.q);
      const double e = energy(model, s);
      if (!best || e < best->energy) best = ReplicaResult{e, std::move(s)};
    }
  }
  if (best) return std::move(*best);
  SpinConfig s = readout(state.q);
  const double e = energy(model, s);
  return {e, std::move(s)};
}

struct SolveOutcome {
  SpinConfig best_spins;
  double best_energy = 0.0;
  std::size_t best_replica = 0;
  std::vector<double> replica_energies;
  double t_total = 0.0;    // seconds, whole call
  double t_compute = 0.0;  // seconds, mean over workers of the integration loop
  std::size_t workers_used = 0;
  SbmParams params_used;   // c0_override holds the resolved c0
};

struct SolveOptions {
  std::ostream* trace = nullptr;  // CSV "step,replica,energy" of the sign readout
};

/// Replicas [begin, end) assigned to `worker`: contiguous, sizes differ by at most one.
inline std::pair<std::size_t, std::size_t> shard_range(std::size_t n_replicas,
                                                       std::size_t n_workers,
                                                       std::size_t worker) noexcept {
  const std::size_t base = n_replicas / n_workers;
  const std::size_t extra = n_replicas % n_workers;
  const std::size_t begin = worker * base + std::min(worker, extra);
  return {begin, begin + base + (worker < extra ? 1 : 0)};
}

inline SolveOutcome solve(const IsingModel& model, const SbmParams& params,
                          const SolveOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  params.validate();

  SbmParams resolved = params;
  const double c0 = resolve_c0(model, params);
  resolved.c0_override = c0;

  const std::size_t n_replicas = params.n_replicas;
  const std::size_t workers = std::min(params.n_workers, n_replicas);
  std::vector<ReplicaResult> results(n_replicas);
  std::vector<double> compute_seconds(workers, 0.0);
  std::vector<std::string> traces(options.trace ? n_replicas : 0);

  auto work = [&](std::size_t w) {
    const auto [begin, end] = shard_range(n_replicas, workers, w);
    const auto t0 = clock::now();
    for (std::size_t r = begin; r < end; ++r) {
      if (options.trace) {
        std::ostringstream rows;
        rows.precision(17);
        auto tracer = [&](const ReplicaState& st, const Schedule&) {
          rows << st.step_index << ',' << r << ',' << energy(model, readout(st.q)) << '\n';
        };
        results[r] = run_replica(model, resolved, c0, r, tracer);
        traces[r] = std::move(rows).str();
      } else {
        results[r] = run_replica(model, resolved, c0, r);
      }
    }
    compute_seconds[w] = std::chrono::duration<double>(clock::now() - t0).count();
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SolveOutcome out;
  out.replica_energies.resize(n_replicas);
  std::size_t best = 0;
  for (std::size_t r = 0; r < n_replicas; ++r) {
    out.replica_energies[r] = results[r].energy;
    if (results[r].energy < results[best].energy) best = r;
  }
  out.best_replica = best;
  out.best_energy = results[best].energy;
  out.best_spins = std::move(results[best].spins);
  out.workers_used = workers;
  out.params_used = resolved;
  if (options.trace) {
    *options.trace << "step,replica,energy\n";
    for (const auto& rows : traces) *options.trace << rows;
  }
  double compute = 0.0;
  for (const double s : compute_seconds) compute += s;
  out.t_compute = compute / static_cast<double>(workers);
  out.t_total = std::chrono::duration<double>(clock::now() - start).count();
  out.t_compute = std::min(out.t_compute, out.t_total);
  return out;
}

}  // namespace dsb

#endif  // DSB_SBM_HPP
