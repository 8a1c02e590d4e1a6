#ifndef DSB_SCALING_HPP
#define DSB_SCALING_HPP

// Power-law fits TTe ~ N^alpha by least squares in log10-log10 space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsb/instance_io.hpp"
#include "dsb/rng.hpp"

namespace dsb {

struct MedianRow {
  std::string solver;
  double n = 0.0;
  double epsilon = 0.0;  // fraction
  double median = 0.0;   // seconds, may be +inf
  double std = 0.0;

  friend bool operator==(const MedianRow&, const MedianRow&) = default;
};

using MedianTable = std::vector<MedianRow>;

struct SizeRange {
  double min = 0.0;
  double max = std::numeric_limits<double>::infinity();
  bool contains(double n) const noexcept { return n >= min && n <= max; }
};

struct SizePoint {
  double n = 0.0;
  double median = 0.0;
  double std = 0.0;
};

struct FitOptions {
  bool weighted = false;  // weights 1 / sigma_log^2 from the bootstrap std
  double unreliable_fraction = 0.2;
};

struct PowerLawFit {
  double alpha = 0.0;
  double log_intercept = 0.0;  // log10 TTe at N = 1
  double alpha_std = 0.0;      // OLS standard error of the slope
  double rmse_log = 0.0;       // residual RMSE in log10 units
  double n_min = 0.0;
  double n_max = 0.0;
  std::size_t point_count = 0;
  std::size_t excluded_infinite = 0;
  bool weighted = false;
  bool unreliable = false;  // more than 20% of in-range points were infinite

  double predict(double n) const { return std::pow(10.0, log_intercept + alpha * std::log10(n)); }
};

inline PowerLawFit fit_power_law(std::span<const SizePoint> points, SizeRange range = {},
                                 FitOptions options = {}) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ws;
  std::size_t infinite = 0;
  std::size_t in_range = 0;
  PowerLawFit fit;
  fit.weighted = options.weighted;
  fit.n_min = std::numeric_limits<double>::infinity();
  fit.n_max = 0.0;
  for (const auto& p : points) {
    if (!(p.n > 0.0) || !range.contains(p.n)) continue;
    ++in_range;
    if (!std::isfinite(p.median)) {
      ++infinite;
      continue;
    }
    if (!(p.median > 0.0)) throw std::invalid_argument("power-law fit needs positive medians");
    xs.push_back(std::log10(p.n));
    ys.push_back(std::log10(p.median));
    double w = 1.0;
    if (options.weighted) {
      const double sigma_log = p.std / (p.median * std::log(10.0));
      if (!(sigma_log > 0.0) || !std::isfinite(sigma_log)) {
        throw std::invalid_argument("weighted fit needs finite positive stds at every point");
      }
      w = 1.0 / (sigma_log * sigma_log);
    }
    ws.push_back(w);
    fit.n_min = std::min(fit.n_min, p.n);
    fit.n_max = std::max(fit.n_max, p.n);
  }
  fit.point_count = xs.size();
  fit.excluded_infinite = infinite;
  if (xs.size() < 2) {
    throw std::invalid_argument("power-law fit needs at least 2 finite points in range, got " +
                                std::to_string(xs.size()));
  }
  fit.unreliable = static_cast<double>(infinite) >
                   options.unreliable_fraction * static_cast<double>(in_range);

  double sw = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sw += ws[k];
    mx += ws[k] * xs[k];
    my += ws[k] * ys[k];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += ws[k] * (xs[k] - mx) * (xs[k] - mx);
    sxy += ws[k] * (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("power-law fit needs at least two distinct sizes");
  fit.alpha = sxy / sxx;
  fit.log_intercept = my - fit.alpha * mx;

  double ssr = 0.0;
  double wssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (fit.log_intercept + fit.alpha * xs[k]);
    ssr += r * r;
    wssr += ws[k] * r * r;
  }
  const auto m = static_cast<double>(xs.size());
  fit.rmse_log = std::sqrt(ssr / m);
  // Two points determine the line exactly; the slope error is taken as zero.
  fit.alpha_std = xs.size() > 2 ? std::sqrt(wssr / (m - 2.0) / sxx) : 0.0;
  return fit;
}

/// Slope spread when each log-median is perturbed by its bootstrap error
/// (Gaussian in log10 space, sigma = std / (median ln 10)).
inline double propagated_alpha_std(std::span<const SizePoint> points, SizeRange range,
                                   std::size_t resamples, std::uint64_t seed) {
  std::vector<SizePoint> usable;
  for (const auto& p : points)
    if (p.n > 0.0 && range.contains(p.n) && std::isfinite(p.median) && p.median > 0.0)
      usable.push_back(p);
  if (usable.size() < 2 || resamples < 2) return 0.0;
  CounterStream noise(seed, 0, Purpose::noise);
  std::vector<double> alphas;
  alphas.reserve(resamples);
  std::vector<SizePoint> draw(usable.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t k = 0; k < usable.size(); ++k) {
      const auto& p = usable[k];
      const double sigma_log = std::isfinite(p.std) ? p.std / (p.median * std::log(10.0)) : 0.0;
      draw[k] = {p.n, p.median * std::pow(10.0, sigma_log * noise.normal()), p.std};
    }
    alphas.push_back(fit_power_law(draw, range).alpha);
  }
  double mean = 0.0;
  for (const double a : alphas) mean += a;
  mean /= static_cast<double>(alphas.size());
  double ss = 0.0;
  for (const double a : alphas) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / static_cast<double>(alphas.size() - 1));
}

inline bool same_epsilon(double a, double b) noexcept {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::vector<SizePoint> select_points(const MedianTable& table, std::string_view solver,
                                            double epsilon) {
  std::vector<SizePoint> out;
  for (const auto& row : table)
    if (row.solver == solver && same_epsilon(row.epsilon, epsilon))
      out.push_back({row.n, row.median, row.std});
  std::sort(out.begin(), out.end(), [](const SizePoint& a, const SizePoint& b) { return a.n < b.n; });
  return out;
}

struct EpsilonFit {
  double epsilon = 0.0;
  PowerLawFit fit;
};

inline std::vector<EpsilonFit> alpha_vs_epsilon(const MedianTable& table, std::string_view solver,
                                                std::span<const double> epsilons,
                                                SizeRange range = {}, FitOptions options = {}) {
  std::vector<EpsilonFit> out;
  for (const double eps : epsilons) {
    const auto points = select_points(table, solver, eps);
    if (points.empty()) {
      throw std::invalid_argument("no medians for solver '" + std::string(solver) +
                                  "' at eps = " + format_real(eps));
    }
    out.push_back({eps, fit_power_law(points, range, options)});
  }
  return out;
}

struct ImportOptions {
  std::string median_column = "median";
  std::string std_column = "std";
};

class CsvSchemaError : public std::runtime_error {
 public:
  CsvSchemaError(std::size_t row, const std::string& message)
      : std::runtime_error(row == 0 ? message : "row " + std::to_string(row) + ": " + message),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(std::string(trim(cell)));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::string(trim(cell)));
  return out;
}

}  // namespace detail

/// Reads a CSV with at least the columns solver,N,eps,median,std (any order,
/// extra columns ignored). eps is a fraction; medians may be "inf".
inline MedianTable parse_medians(std::istream& in, const ImportOptions& options = {}) {
  std::string line;
  if (!std::getline(in, line)) throw CsvSchemaError(0, "missing header");
  const auto header = detail::split_csv(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CsvSchemaError(1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_solver = column("solver");
  const std::size_t c_n = column("N");
  const std::size_t c_eps = column("eps");
  const std::size_t c_med = column(options.median_column);
  const std::size_t c_std = column(options.std_column);

  MedianTable table;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw CsvSchemaError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    MedianRow r;
    r.solver = cells[c_solver];
    if (r.solver.empty()) throw CsvSchemaError(row, "empty solver label");
    const auto n = detail::parse_number<double>(cells[c_n]);
    const auto eps = detail::parse_number<double>(cells[c_eps]);
    const auto med = detail::parse_number<double>(cells[c_med]);
    const auto sd = detail::parse_number<double>(cells[c_std]);
    if (!n || !(*n > 0.0) || !std::isfinite(*n)) throw CsvSchemaError(row, "N must be a positive number");
    if (!eps || !(*eps >= 0.0)) throw CsvSchemaError(row, "eps must be a non-negative number");
    if (!med || !(*med > 0.0)) throw CsvSchemaError(row, "median must be positive or inf");
    if (!sd || !(*sd >= 0.0)) throw CsvSchemaError(row, "std must be non-negative");
    r.n = *n;
    r.epsilon = *eps;
    r.median = *med;
    r.std = *sd;
    table.push_back(std::move(r));
  }
  return table;
}

inline MedianTable import_external_medians(const std::string& path,
                                           const ImportOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open median table " + path);
  return parse_medians(in, options);
}

inline void export_medians(const MedianTable& table, std::ostream& out) {
  out << "solver,N,eps,median,std\n";
  for (const auto& r : table) {
    out << r.solver << ',' << format_real(r.n) << ',' << format_real(r.epsilon) << ','
        << format_real(r.median) << ',' << format_real(r.std) << '\n';
  }
}

/// Plot-ready rows: N, median, std, fitted value.
inline void write_fit_curve_csv(std::span<const SizePoint> points, const PowerLawFit& fit,
                                std::ostream& out) {
  out << "N,median,std,fitted\n";
  for (const auto& p : points) {
    out << format_real(p.n) << ',' << format_real(p.median) << ',' << format_real(p.std) << ','
        << format_real(fit.predict(p.n)) << '\n';
  }
}

}  // namespace dsb

#endif  // DSB_SCALING_HPP
