#ifndef DSB_REPORT_HPP
#define DSB_REPORT_HPP

// JSON views of solver, benchmark and fit results, and the run manifest that
// accompanies every CLI output. Infinite times are written as null.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsb/bench.hpp"
#include "dsb/rng.hpp"
#include "dsb/sbm.hpp"
#include "dsb/scaling.hpp"

namespace dsb {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

inline json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SbmParams& p) {
  return {{"a0", p.a0},
          {"c0", p.c0_override ? json(*p.c0_override) : json(nullptr)},
          {"dt_min", p.dt_min},
          {"dt_max", p.dt_max},
          {"n_steps", p.n_steps},
          {"n_replicas", p.n_replicas},
          {"seed", p.seed},
          {"n_workers", p.n_workers},
          {"ternary_slope", p.ternary_slope},
          {"sigma_mode", p.sigma_mode == SigmaMode::all_off_diagonal ? "all" : "nonzero"},
          {"track_best", p.track_best}};
}

inline json to_json(const SolveOutcome& o) {
  std::vector<int> spins(o.best_spins.values().begin(), o.best_spins.values().end());
  return {{"best_energy", o.best_energy},
          {"best_replica", o.best_replica},
          {"best_spins", spins},
          {"replica_energies", o.replica_energies},
          {"t_total", o.t_total},
          {"t_compute", o.t_compute},
          {"workers_used", o.workers_used},
          {"params", to_json(o.params_used)}};
}

inline json to_json(const TTEpsilonRecord& r) {
  return {{"instance", r.instance_id},   {"N", r.n},
          {"n_steps", r.n_steps},        {"n_replicas", r.n_replicas},
          {"eps", r.epsilon},            {"ground_energy", r.ground_energy},
          {"n_runs", r.n_runs},          {"p_success", r.p_success},
          {"t_f_total", r.t_f_total},    {"t_f_compute", r.t_f_compute},
          {"tte_total", real_or_null(r.tte_total)},
          {"tte_compute", real_or_null(r.tte_compute)}};
}

inline json to_json(const MedianPoint& p) {
  return {{"N", p.n},
          {"eps", p.epsilon},
          {"timing", to_string(p.target)},
          {"median", real_or_null(p.estimate().median)},
          {"std", real_or_null(p.estimate().std)},
          {"median_total", real_or_null(p.total.median)},
          {"std_total", real_or_null(p.total.std)},
          {"median_compute", real_or_null(p.compute.median)},
          {"std_compute", real_or_null(p.compute.std)},
          {"finite_count", p.finite_count},
          {"instance_count", p.instance_count},
          {"opt_steps", p.best_steps},
          {"opt_replicas", p.best_replicas},
          {"solved", p.solved}};
}

inline json to_json(const PowerLawFit& f) {
  return {{"alpha", f.alpha},
          {"log_intercept", f.log_intercept},
          {"alpha_std_ols", f.alpha_std},
          {"rmse_log", f.rmse_log},
          {"n_range", {f.n_min, f.n_max}},
          {"point_count", f.point_count},
          {"excluded_infinite", f.excluded_infinite},
          {"weighted", f.weighted},
          {"unreliable", f.unreliable}};
}

inline json study_json(std::span<const TTEpsilonRecord> records,
                       std::span<const MedianPoint> points) {
  json out = {{"schema_version", kSchemaVersion}};
  json recs = json::array();
  for (const auto& r : records) recs.push_back(to_json(r));
  json pts = json::array();
  for (const auto& p : points) pts.push_back(to_json(p));
  out["records"] = std::move(recs);
  out["points"] = std::move(pts);
  return out;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// FNV-1a digest of a file's bytes, or an empty string if it cannot be read.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return "fnv1a64:" + hex64(fnv1a64(buf.str()));
}

inline std::string utc_timestamp(const char* format = "%Y-%m-%dT%H:%M:%SZ") {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, format);
  return s.str();
}

struct RunManifest {
  std::string command;
  json parameters = json::object();
  std::uint64_t master_seed = 0;
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::string timestamp = utc_timestamp();

  json to_json() const {
    json digests = json::object();
    for (const auto& path : inputs) digests[path] = file_digest(path);
    return {{"schema_version", kSchemaVersion},
            {"command", command},
            {"version", kVersion},
            {"master_seed", master_seed},
            {"parameters", parameters},
            {"input_digests", digests},
            {"argv", argv},
            {"timestamp", timestamp}};
  }
};

}  // namespace dsb

#endif  // DSB_REPORT_HPP
