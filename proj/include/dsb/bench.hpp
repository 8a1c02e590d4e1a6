#ifndef DSB_BENCH_HPP
#define DSB_BENCH_HPP

// Time-to-epsilon measurement protocol.
//
//   TTe = t_f * log(1 - 0.99) / log(1 - p),   p = P[E <= E0 + eps |E0|]
//
// t_f and p are averaged over independent runs of one instance; the
// instance-set median of TTe is reported with a bootstrap standard deviation,
// and the solver's (N_s, N_r) is chosen to minimise that median.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dsb/instance_io.hpp"
#include "dsb/ising.hpp"
#include "dsb/rng.hpp"
#include "dsb/sbm.hpp"

namespace dsb {

inline constexpr double kTargetConfidence = 0.99;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class TimingVariant { total, compute };

inline const char* to_string(TimingVariant v) noexcept {
  return v == TimingVariant::total ? "total" : "compute";
}

struct RunRecord {
  std::string instance_id;
  std::size_t n_steps = 0;
  std::size_t n_replicas = 0;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  double energy = 0.0;
  double t_total = 0.0;
  double t_compute = 0.0;
};

struct TTEpsilonRecord {
  std::string instance_id;
  std::size_t n = 0;
  std::size_t n_steps = 0;
  std::size_t n_replicas = 0;
  double epsilon = 0.0;  // fraction, not percent
  double ground_energy = 0.0;
  std::size_t n_runs = 0;
  double p_success = 0.0;
  double t_f_total = 0.0;
  double t_f_compute = 0.0;
  double tte_total = kInfinity;
  double tte_compute = kInfinity;

  double tte(TimingVariant v) const noexcept {
    return v == TimingVariant::total ? tte_total : tte_compute;
  }
};

struct Estimate {
  double median = kInfinity;
  double std = 0.0;
};

struct MedianPoint {
  std::size_t n = 0;
  double epsilon = 0.0;
  TimingVariant target = TimingVariant::total;
  Estimate total;
  Estimate compute;
  std::size_t finite_count = 0;  // instances with finite TTe (target variant) in the chosen cell
  std::size_t instance_count = 0;
  std::size_t best_steps = 0;
  std::size_t best_replicas = 0;
  bool solved = false;

  const Estimate& estimate() const noexcept {
    return target == TimingVariant::total ? total : compute;
  }
};

using Solver = std::function<SolveOutcome(const IsingModel&, const SbmParams&)>;

inline SolveOutcome default_solver(const IsingModel& model, const SbmParams& params) {
  return solve(model, params);
}

/// Fraction of energies with E <= E0 + eps |E0|. The threshold carries a
/// 1e-10 relative slack so degenerate ground states whose energies differ
/// from E0 only by summation rounding still count at eps = 0.
inline double success_probability(std::span<const double> energies, double ground_energy,
                                  double epsilon) {
  if (energies.empty()) throw std::invalid_argument("success probability of an empty run set");
  if (!std::isfinite(ground_energy)) throw std::invalid_argument("ground energy must be finite");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  const double slack = 1e-10 * std::max(1.0, std::abs(ground_energy));
  const double threshold = ground_energy + epsilon * std::abs(ground_energy) + slack;
  const auto hits = std::count_if(energies.begin(), energies.end(),
                                  [threshold](double e) { return e <= threshold; });
  return static_cast<double>(hits) / static_cast<double>(energies.size());
}

/// Repeat factor log(0.01) / log(1 - p), floored at one run; p = 0 gives +inf.
inline double tt_epsilon(double t_f, double p) {
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw std::invalid_argument("t_f must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
  if (p == 0.0) return kInfinity;
  if (p >= kTargetConfidence) return t_f;
  const double repeats = std::log(1.0 - kTargetConfidence) / std::log1p(-p);
  return t_f * std::max(1.0, repeats);
}

inline std::uint64_t run_seed(std::uint64_t master_seed, std::string_view instance_id,
                              std::size_t run_index) noexcept {
  return combine_seeds(combine_seeds(master_seed, fnv1a64(instance_id)), run_index);
}

inline std::vector<RunRecord> collect_runs(const IsingModel& model, const std::string& instance_id,
                                           const SbmParams& params, std::size_t n_runs,
                                           std::uint64_t master_seed,
                                           const Solver& solver = default_solver) {
  if (n_runs == 0) throw std::invalid_argument("n_runs must be at least 1");
  std::vector<RunRecord> runs;
  runs.reserve(n_runs);
  SbmParams run_params = params;
  for (std::size_t r = 0; r < n_runs; ++r) {
    run_params.seed = run_seed(master_seed, instance_id, r);
    const SolveOutcome out = solver(model, run_params);
    if (!std::isfinite(out.best_energy)) throw std::runtime_error("solver returned a non-finite energy");
    runs.push_back({instance_id, params.n_steps, params.n_replicas, r, run_params.seed,
                    out.best_energy, out.t_total, std::min(out.t_compute, out.t_total)});
  }
  return runs;
}

/// One record per epsilon from a shared run set.
inline std::vector<TTEpsilonRecord> evaluate_runs(std::span<const RunRecord> runs, std::size_t n,
                                                  double ground_energy,
                                                  std::span<const double> epsilons) {
  if (runs.empty()) throw std::invalid_argument("no runs to evaluate");
  std::vector<double> energies;
  energies.reserve(runs.size());
  double sum_total = 0.0;
  double sum_compute = 0.0;
  for (const auto& r : runs) {
    energies.push_back(r.energy);
    sum_total += r.t_total;
    sum_compute += r.t_compute;
  }
  const double count = static_cast<double>(runs.size());
  // Guard the logarithm domain against clocks that round to zero.
  constexpr double kMinSeconds = 1e-9;
  const double t_total = std::max(sum_total / count, kMinSeconds);
  const double t_compute = std::min(std::max(sum_compute / count, kMinSeconds), t_total);

  std::vector<TTEpsilonRecord> out;
  for (const double eps : epsilons) {
    TTEpsilonRecord rec;
    rec.instance_id = runs.front().instance_id;
    rec.n = n;
    rec.n_steps = runs.front().n_steps;
    rec.n_replicas = runs.front().n_replicas;
    rec.epsilon = eps;
    rec.ground_energy = ground_energy;
    rec.n_runs = runs.size();
    rec.p_success = success_probability(energies, ground_energy, eps);
    rec.t_f_total = t_total;
    rec.t_f_compute = t_compute;
    rec.tte_total = tt_epsilon(t_total, rec.p_success);
    rec.tte_compute = tt_epsilon(t_compute, rec.p_success);
    out.push_back(std::move(rec));
  }
  return out;
}

struct BenchInstance {
  std::string id;
  IsingModel model;
};

inline std::vector<TTEpsilonRecord> benchmark_instance(const BenchInstance& instance,
                                                       const SbmParams& params, std::size_t n_runs,
                                                       std::span<const double> epsilons,
                                                       std::uint64_t master_seed = 0,
                                                       const Solver& solver = default_solver) {
  const auto& e0 = instance.model.metadata().ground_energy;
  if (!e0) {
    throw std::invalid_argument("instance '" + instance.id +
                                "' has no ground energy; run the oracle or add an E0 header");
  }
  const auto runs = collect_runs(instance.model, instance.id, params, n_runs, master_seed, solver);
  return evaluate_runs(runs, instance.model.size(), *e0, epsilons);
}

/// Median over extended reals (+inf sorts last); even counts use the midpoint.
inline double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  if (std::isinf(upper)) return upper;
  return 0.5 * (lower + upper);
}

/// Median plus the standard deviation of `resamples` bootstrap medians.
/// Values are sorted before resampling, so the result does not depend on
/// input order. If resampled medians mix finite and infinite values the
/// spread is reported as +inf.
inline Estimate median_with_bootstrap(std::span<const double> values, std::size_t resamples,
                                      std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  if (resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");
  std::vector<double> sorted(values.begin(), values.end());
  for (const double v : sorted)
    if (std::isnan(v)) throw std::invalid_argument("NaN in median input");
  std::sort(sorted.begin(), sorted.end());

  Estimate est;
  est.median = median_of(sorted);

  const auto size = static_cast<std::uint32_t>(sorted.size());
  CounterStream stream(seed, 0, Purpose::bootstrap);
  std::vector<double> sample(sorted.size());
  std::vector<double> medians;
  medians.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& v : sample) v = sorted[stream.below(size)];
    medians.push_back(median_of(sample));
  }
  const bool all_same = std::all_of(medians.begin(), medians.end(),
                                    [&](double m) { return m == medians.front(); });
  if (all_same) {
    est.std = 0.0;
  } else if (std::any_of(medians.begin(), medians.end(), [](double m) { return std::isinf(m); })) {
    est.std = kInfinity;
  } else {
    double mean = 0.0;
    for (const double m : medians) mean += m;
    mean /= static_cast<double>(medians.size());
    double ss = 0.0;
    for (const double m : medians) ss += (m - mean) * (m - mean);
    est.std = std::sqrt(ss / static_cast<double>(medians.size()));
  }
  return est;
}

struct GridSpec {
  std::vector<std::size_t> steps;
  std::vector<std::size_t> replicas;
};

inline GridSpec default_grid() {
  return {{32, 64, 128, 256, 512, 1024, 2048, 4096}, {16, 32, 64, 128, 256, 512, 1024}};
}

/// Where the reference energy E0 of each instance comes from.
enum class ReferenceMode {
  metadata,    // E0 header required
  best_found,  // E0 header if present, else the lowest energy seen in any run of the study
};

struct StudyOptions {
  std::size_t n_runs = 100;
  std::uint64_t master_seed = 0;
  TimingVariant target = TimingVariant::total;
  std::size_t bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 0;
  ReferenceMode reference = ReferenceMode::metadata;
  unsigned jobs = 1;  // concurrent (instance, cell) tasks; 1 keeps timings undisturbed
};

struct StudyResult {
  std::vector<TTEpsilonRecord> records;  // per (instance, cell, epsilon)
  std::vector<MedianPoint> points;       // per epsilon, the optimal cell
  std::vector<double> reference_energies;
  std::vector<RunRecord> runs;
};

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> grid_cells(const GridSpec& grid) {
  std::vector<std::size_t> steps = grid.steps;
  std::vector<std::size_t> replicas = grid.replicas;
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  std::sort(replicas.begin(), replicas.end());
  replicas.erase(std::unique(replicas.begin(), replicas.end()), replicas.end());
  if (steps.empty() || replicas.empty()) throw std::invalid_argument("empty parameter grid");
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (const auto s : steps)
    for (const auto r : replicas) cells.emplace_back(s, r);
  return cells;
}

template <class Task>
void run_tasks(std::size_t count, unsigned jobs, Task&& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t t = 0; t < count; ++t) task(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      try {
        for (std::size_t t = next++; t < count; t = next++) task(t);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Runs every (instance, cell) once with a shared run set, evaluates all
/// epsilons, and picks per epsilon the cell minimising the instance-set
/// median of the target TTe (ties: smaller N_s, then smaller N_r).
inline StudyResult grid_study(std::span<const BenchInstance> instances, const GridSpec& grid,
                              const SbmParams& base, std::span<const double> epsilons,
                              const StudyOptions& options, const Solver& solver = default_solver) {
  if (instances.empty()) throw std::invalid_argument("empty instance set");
  if (epsilons.empty()) throw std::invalid_argument("empty epsilon list");
  const std::size_t n = instances.front().model.size();
  for (const auto& inst : instances) {
    if (inst.model.size() != n) throw std::invalid_argument("grid search needs instances of one size");
    if (options.reference == ReferenceMode::metadata && !inst.model.metadata().ground_energy) {
      throw std::invalid_argument("instance '" + inst.id +
                                  "' has no ground energy; run the oracle or add an E0 header");
    }
  }
  const auto cells = detail::grid_cells(grid);
  const std::size_t n_inst = instances.size();
  const std::size_t n_cells = cells.size();

  std::vector<std::vector<RunRecord>> run_sets(n_inst * n_cells);
  detail::run_tasks(run_sets.size(), options.jobs, [&](std::size_t task) {
    const std::size_t i = task / n_cells;
    const auto [steps, replicas] = cells[task % n_cells];
    SbmParams params = base;
    params.n_steps = steps;
    params.n_replicas = replicas;
    run_sets[task] = collect_runs(instances[i].model, instances[i].id, params, options.n_runs,
                                  options.master_seed, solver);
  });

  StudyResult result;
  result.reference_energies.resize(n_inst);
  for (std::size_t i = 0; i < n_inst; ++i) {
    if (const auto& e0 = instances[i].model.metadata().ground_energy) {
      result.reference_energies[i] = *e0;
      continue;
    }
    double best = kInfinity;
    for (std::size_t c = 0; c < n_cells; ++c)
      for (const auto& r : run_sets[i * n_cells + c]) best = std::min(best, r.energy);
    result.reference_energies[i] = best;
  }

  // records[(i * n_cells + c) * n_eps + e]
  const std::size_t n_eps = epsilons.size();
  for (std::size_t i = 0; i < n_inst; ++i) {
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto& runs = run_sets[i * n_cells + c];
      auto recs = evaluate_runs(runs, n, result.reference_energies[i], epsilons);
      for (auto& r : recs) result.records.push_back(std::move(r));
      result.runs.insert(result.runs.end(), runs.begin(), runs.end());
    }
  }

  for (std::size_t e = 0; e < n_eps; ++e) {
    auto column = [&](std::size_t c, TimingVariant v) {
      std::vector<double> values(n_inst);
      for (std::size_t i = 0; i < n_inst; ++i)
        values[i] = result.records[(i * n_cells + c) * n_eps + e].tte(v);
      return values;
    };
    std::size_t best_cell = 0;
    double best_median = median_of(column(0, options.target));
    for (std::size_t c = 1; c < n_cells; ++c) {
      const double m = median_of(column(c, options.target));
      if (m < best_median) {
        best_median = m;
        best_cell = c;
      }
    }
    MedianPoint point;
    point.n = n;
    point.epsilon = epsilons[e];
    point.target = options.target;
    point.instance_count = n_inst;
    point.best_steps = cells[best_cell].first;
    point.best_replicas = cells[best_cell].second;
    const auto totals = column(best_cell, TimingVariant::total);
    const auto computes = column(best_cell, TimingVariant::compute);
    point.total = median_with_bootstrap(totals, options.bootstrap_resamples, options.bootstrap_seed);
    point.compute =
        median_with_bootstrap(computes, options.bootstrap_resamples, options.bootstrap_seed);
    const auto& target_values = options.target == TimingVariant::total ? totals : computes;
    point.finite_count = static_cast<std::size_t>(
        std::count_if(target_values.begin(), target_values.end(),
                      [](double v) { return std::isfinite(v); }));
    point.solved = std::isfinite(point.estimate().median);
    result.points.push_back(point);
  }
  return result;
}

inline MedianPoint grid_search(std::span<const BenchInstance> instances, const GridSpec& grid,
                               const SbmParams& base, double epsilon, const StudyOptions& options,
                               const Solver& solver = default_solver) {
  const double eps[] = {epsilon};
  return grid_study(instances, grid, base, eps, options, solver).points.front();
}

inline void write_records_csv(std::span<const TTEpsilonRecord> records, std::ostream& out) {
  out << "instance,N,n_steps,n_replicas,eps,ground_energy,n_runs,p_success,t_f_total,"
         "t_f_compute,tte_total,tte_compute\n";
  for (const auto& r : records) {
    out << r.instance_id << ',' << r.n << ',' << r.n_steps << ',' << r.n_replicas << ','
        << format_real(r.epsilon) << ',' << format_real(r.ground_energy) << ',' << r.n_runs << ','
        << format_real(r.p_success) << ',' << format_real(r.t_f_total) << ','
        << format_real(r.t_f_compute) << ',' << format_real(r.tte_total) << ','
        << format_real(r.tte_compute) << '\n';
  }
}

/// Summary rows; the leading solver,N,eps,median,std columns are the format
/// read back by the scaling analysis.
inline void write_points_csv(std::span<const MedianPoint> points, const std::string& solver_label,
                             std::ostream& out) {
  out << "solver,N,eps,median,std,timing,median_total,std_total,median_compute,std_compute,"
         "finite_count,instance_count,opt_steps,opt_replicas,solved\n";
  for (const auto& p : points) {
    out << solver_label << ',' << p.n << ',' << format_real(p.epsilon) << ','
        << format_real(p.estimate().median) << ',' << format_real(p.estimate().std) << ','
        << to_string(p.target) << ',' << format_real(p.total.median) << ','
        << format_real(p.total.std) << ',' << format_real(p.compute.median) << ','
        << format_real(p.compute.std) << ',' << p.finite_count << ',' << p.instance_count << ','
        << p.best_steps << ',' << p.best_replicas << ',' << (p.solved ? 1 : 0) << '\n';
  }
}

}  // namespace dsb

#endif  // DSB_BENCH_HPP
